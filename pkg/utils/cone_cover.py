"""
Cone coverings of a finite dimensional normed space.

If the unit sphere is covered by balls of radius delta/2 around directions
c_1, ..., c_n and C_i collects the nonzero x with x/|x| in the i-th ball,
then for x, y in the same C_i with |x| >= |y|:

    |x - y| <= |x| - (1 - delta)|y|

`cone_cover` nets the whole sphere from a grid (the `cover` command);
`data_cone_cover` only nets the directions of a given finite set, which is
what the c_0 extension needs in any dimension.
"""
import logging
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from utils.errors import ConeCoverError, InputError
from utils.settings import DEFAULT_SETTINGS

logger = logging.getLogger(__name__)

# Upper bound on samples x directions x dim handled per distance block
_BLOCK = 2_000_000
# Sample grids are subsampled to this many points
_MAX_SAMPLES = 20_000
# Largest full grid (points of [-1, 1]^dim) we are willing to build
_MAX_GRID = 4_000_000


def cube_surface(dim, resolution):
    """Grid points of step 1/resolution on the boundary of [-1, 1]^dim"""
    ticks = np.linspace(-1.0, 1.0, 2 * resolution + 1)
    grid = np.stack(np.meshgrid(*([ticks] * dim), indexing="ij"), axis=-1).reshape(-1, dim)
    return grid[np.max(np.abs(grid), axis=1) == 1.0]


def to_sphere(space, X):
    """Radial projection onto the unit sphere of `space`"""
    return X / space.norm_many(X)[:, None]


def greedy_net(space, candidates, radius):
    """Indices of a greedy subset such that every candidate lies within `radius` of it"""
    uncovered = np.ones(candidates.shape[0], dtype=bool)
    centers = []
    while uncovered.any():
        i = int(np.flatnonzero(uncovered)[0])
        centers.append(i)
        uncovered &= space.norm_many(candidates - candidates[i]) > radius
    return np.asarray(centers, dtype=int)


def nearest_distances(space, samples, directions):
    """Distance from each sample to its closest direction"""
    block = max(1, _BLOCK // (directions.shape[0] * space.dim))
    out = np.empty(samples.shape[0])
    for start in range(0, samples.shape[0], block):
        chunk = samples[start:start + block]
        out[start:start + block] = space.norm_many(chunk[:, None, :] - directions[None, :, :]).min(axis=1)
    return out


@dataclass(frozen=True, eq=False)
class ConeCover:
    """
    Finite cone covering of X \\ {0}.

    A nonzero x belongs to the cone of the first direction within delta/2 of
    x/|x| (directions are scanned in stored order).
    """
    space: object
    delta: float
    directions: np.ndarray
    resolution: int
    worst_sample_distance: float

    @property
    def size(self):
        return self.directions.shape[0]

    def assign_many(self, X):
        """
        Cone index of each row of X

        Raises ConeCoverError when a row has no direction within delta/2, and
        InputError for the zero vector.
        """
        X = np.atleast_2d(np.asarray(X, dtype=float))
        norms = self.space.norm_many(X)
        if np.any(norms == 0):
            raise InputError("The zero vector belongs to no cone")
        units = X / norms[:, None]

        out = np.empty(X.shape[0], dtype=int)
        radius = self.delta / 2
        for row, unit in enumerate(units):
            gaps = self.space.norm_many(self.directions - unit)
            close = np.flatnonzero(gaps <= radius)
            if close.size == 0:
                raise ConeCoverError(
                    f"No direction within {radius:g} of a point at resolution {self.resolution}",
                    resolution=self.resolution,
                    worst_distance=float(gaps.min()),
                    n_directions=self.size,
                )
            out[row] = close[0]
        return out

    def assign(self, x):
        return int(self.assign_many(x)[0])

    def cone_gap(self, x, y):
        """
        |x| - (1 - delta)|y| - |x - y| for the pair ordered so |x| >= |y|;
        nonnegative for points of the same cone
        """
        nx, ny = self.space.norm(x), self.space.norm(y)
        if nx < ny:
            x, y, nx, ny = y, x, ny, nx
        return nx - (1 - self.delta) * ny - self.space.norm(np.asarray(x, dtype=float) - np.asarray(y, dtype=float))

    def to_json(self):
        return {
            "delta": self.delta,
            "resolution": self.resolution,
            "n_directions": self.size,
            "worst_sample_distance": self.worst_sample_distance,
            "directions": self.directions.tolist(),
        }


def build_net(space, delta, resolution):
    """
    Directions forming a delta/2 net of the unit sphere at one resolution.

    Every sample of the grid at twice the resolution rounds to a candidate of
    the coarse grid; h bounds the distance of that rounding on the sphere.
    Thinning the candidates greedily at radius delta/2 - 1.25*h then puts
    every sample within delta/2 of a direction, which is re-checked on a
    deterministic subsample. ConeCoverError is raised when the grid is too
    coarse for this (radius <= 0) or a sample fails.
    """
    if (4 * resolution + 1) ** space.dim > _MAX_GRID:
        error = ConeCoverError(
            f"Sample grid at resolution {resolution} is too large in dimension {space.dim}",
            resolution=resolution,
        )
        error.retryable = False
        raise error

    cube_samples = cube_surface(space.dim, 2 * resolution)
    if cube_samples.shape[0] > _MAX_SAMPLES:
        keep = np.random.default_rng(0).choice(cube_samples.shape[0], _MAX_SAMPLES, replace=False)
        cube_samples = cube_samples[np.sort(keep)]
    samples = to_sphere(space, cube_samples)
    rounded = to_sphere(space, np.round(cube_samples * resolution) / resolution)
    h = float(space.norm_many(samples - rounded).max())

    radius = delta / 2 - 1.25 * h
    if radius <= 0:
        raise ConeCoverError(
            f"Grid at resolution {resolution} is too coarse for delta={delta:g} (rounding error {h:.4f})",
            resolution=resolution, worst_distance=h,
        )

    candidates = to_sphere(space, cube_surface(space.dim, resolution))
    directions = candidates[greedy_net(space, candidates, radius)]
    worst = float(nearest_distances(space, samples, directions).max())
    logger.debug(
        "Cone net on %s: delta=%g resolution=%d directions=%d worst sample=%.4f",
        space.describe(), delta, resolution, directions.shape[0], worst,
    )
    if worst > delta / 2:
        raise ConeCoverError(
            f"Net at resolution {resolution} leaves a sample at distance {worst:.4f} > {delta / 2:g}",
            resolution=resolution, worst_distance=worst, n_directions=directions.shape[0],
        )
    directions.setflags(write=False)
    return ConeCover(space=space, delta=float(delta), directions=directions, resolution=resolution, worst_sample_distance=worst)


def data_cone_cover(space, X, delta):
    """
    Cone covering of the finite set X \\ {0}, with directions taken from X.

    The directions are a greedy delta/2 net of the points x/|x|; two rows in
    the same cone then have x/|x| and y/|y| within delta, which is all the
    cone inequality uses. No grid of the sphere is built, so the cost is
    quadratic in the number of rows whatever the dimension.

    Parameters:
    space: NormedSpace
    X: array of nonzero rows
    delta: cone parameter in (0, 1]

    Returns:
    tuple: (ConeCover with resolution 0, cone index of each row of X)
    """
    if not (0 < delta <= 1):
        raise InputError(f"Cone parameter delta must lie in (0, 1], got {delta!r}")
    X = np.atleast_2d(np.asarray(X, dtype=float))
    norms = space.norm_many(X)
    if np.any(norms == 0):
        raise InputError("The zero vector belongs to no cone")
    units = X / norms[:, None]

    directions = units[greedy_net(space, units, delta / 2)]
    directions.setflags(write=False)
    worst = float(nearest_distances(space, units, directions).max())
    cover = ConeCover(space=space, delta=float(delta), directions=directions, resolution=0, worst_sample_distance=worst)
    cones = cover.assign_many(X)
    logger.debug("Data cone cover on %s: %d points, %d directions", space.describe(), X.shape[0], cover.size)
    return cover, cones


@lru_cache(maxsize=64)
def _cached_cover(space, delta, resolution, max_refinements):
    error = None
    for attempt in range(max_refinements + 1):
        try:
            return build_net(space, delta, resolution * 2 ** attempt)
        except ConeCoverError as exc:
            error = exc
            if not exc.retryable:
                break
            logger.warning("Cone net failed (%s); refining", exc)
    raise error


def cone_cover(space, delta, resolution=None, max_refinements=None):
    """
    Cone covering for `space` with parameter delta

    Parameters:
    space: NormedSpace
    delta: cone parameter in (0, 1]
    resolution: starting grid resolution (doubled on each refinement)
    max_refinements: number of refinements before giving up

    Returns:
    ConeCover: verified delta/2 net with first-match cone assignment
    """
    if not (0 < delta <= 1):
        raise InputError(f"Cone parameter delta must lie in (0, 1], got {delta!r}")
    resolution = resolution or DEFAULT_SETTINGS.cone_resolution
    max_refinements = DEFAULT_SETTINGS.cone_max_refinements if max_refinements is None else max_refinements
    return _cached_cover(space, float(delta), int(resolution), int(max_refinements))
