"""
Finite dimensional normed spaces, the Hölder metric K*d(x, y)^alpha and the
isometric embedding of polytope norms into l_inf^n.
"""
import logging
from dataclasses import dataclass, field

import numpy as np

from utils.errors import InputError

logger = logging.getLogger(__name__)

SPACE_KINDS = ("lp", "linf", "l1sum", "polytope")


@dataclass(frozen=True)
class HolderParams:
    """Hölder constant K >= 0 and exponent alpha in (0, 1]"""
    K: float
    alpha: float

    def __post_init__(self):
        if not np.isfinite(self.K) or self.K < 0:
            raise InputError(f"Hölder constant K must be finite and >= 0, got {self.K!r}")
        if not (0 < self.alpha <= 1):
            raise InputError(f"Hölder exponent alpha must lie in (0, 1], got {self.alpha!r}")
        object.__setattr__(self, "K", float(self.K))
        object.__setattr__(self, "alpha", float(self.alpha))

    def bound(self, d):
        """K * d**alpha, elementwise for arrays"""
        return self.K * np.power(d, self.alpha)


@dataclass(frozen=True)
class NormedSpace:
    """
    Descriptor of a finite dimensional norm.

    Four kinds are supported:
    - "lp": (sum |x_i|^p)^(1/p) with 1 <= p < inf
    - "linf": max |x_i|
    - "l1sum": sum of the norms of consecutive coordinate blocks, one block
      per entry of `parts`
    - "polytope": max_i |f_i(x)| for the row vectors f_i in `functionals`;
      functionals are used as given, the caller is responsible for unit
      dual norms

    Instances are immutable and hashable so they can key caches.
    """
    kind: str
    dim: int
    p: float = None
    parts: tuple = field(default=())
    functionals: tuple = field(default=())

    def __post_init__(self):
        if self.kind not in SPACE_KINDS:
            raise InputError(f"Unknown space kind {self.kind!r}; expected one of {SPACE_KINDS}")
        if int(self.dim) < 1:
            raise InputError(f"Space dimension must be >= 1, got {self.dim!r}")

        if self.kind == "lp":
            if self.p is None or not np.isfinite(self.p) or self.p < 1:
                raise InputError(f"lp spaces need a finite p >= 1 (use kind 'linf' for p = inf), got {self.p!r}")
        elif self.kind == "l1sum":
            if not self.parts:
                raise InputError("l1sum spaces need at least one part")
            if sum(part.dim for part in self.parts) != self.dim:
                raise InputError("l1sum dimension must equal the sum of its part dimensions")
        elif self.kind == "polytope":
            matrix = np.asarray(self.functionals, dtype=float)
            if matrix.ndim != 2 or matrix.shape[1] != self.dim or matrix.shape[0] == 0:
                raise InputError(f"polytope functionals must form a non-empty n x {self.dim} matrix")
            if not np.all(np.isfinite(matrix)):
                raise InputError("polytope functionals must be finite")
            # norm(x) = 0 only at x = 0 iff the functionals span the dual
            if np.linalg.matrix_rank(matrix) < self.dim:
                raise InputError("polytope functionals do not define a norm (rank deficient)")

    # Constructors
    @classmethod
    def lp(cls, p, dim):
        return cls(kind="lp", dim=int(dim), p=float(p))

    @classmethod
    def linf(cls, dim):
        return cls(kind="linf", dim=int(dim))

    @classmethod
    def l1sum(cls, parts):
        parts = tuple(parts)
        return cls(kind="l1sum", dim=sum(part.dim for part in parts), parts=parts)

    @classmethod
    def polytope(cls, functionals):
        rows = tuple(tuple(float(v) for v in row) for row in functionals)
        dim = len(rows[0]) if rows else 0
        return cls(kind="polytope", dim=dim, functionals=rows)

    @property
    def functional_matrix(self):
        return np.asarray(self.functionals, dtype=float)

    def norm_many(self, X):
        """
        Evaluate the norm along the last axis of X

        Parameters:
        X: array of shape (..., dim)

        Returns:
        np.ndarray: norms with shape X.shape[:-1]
        """
        X = np.asarray(X, dtype=float)
        if X.shape[-1] != self.dim:
            raise InputError(f"Dimension mismatch: expected {self.dim} coordinates, got {X.shape[-1]}")

        if self.kind == "lp":
            return np.linalg.norm(X, ord=self.p, axis=-1)
        if self.kind == "linf":
            return np.max(np.abs(X), axis=-1)
        if self.kind == "polytope":
            return np.max(np.abs(X @ self.functional_matrix.T), axis=-1)

        # l1sum: add up the part norms block by block
        total = np.zeros(X.shape[:-1])
        start = 0
        for part in self.parts:
            total = total + part.norm_many(X[..., start:start + part.dim])
            start += part.dim
        return total

    def norm(self, x):
        return float(self.norm_many(as_point(self, x)))

    def to_json(self):
        if self.kind == "lp":
            return {"type": "lp", "p": self.p, "dim": self.dim}
        if self.kind == "linf":
            return {"type": "linf", "dim": self.dim}
        if self.kind == "l1sum":
            return {"type": "l1sum", "parts": [part.to_json() for part in self.parts]}
        return {"type": "polytope", "functionals": [list(row) for row in self.functionals]}

    @classmethod
    def from_json(cls, data):
        """Build a space from its JSON descriptor"""
        if not isinstance(data, dict) or "type" not in data:
            raise InputError(f"Space descriptor must be an object with a 'type' field, got {data!r}")

        kind = data["type"]
        try:
            if kind == "lp":
                return cls.lp(data["p"], data["dim"])
            if kind == "linf":
                return cls.linf(data["dim"])
            if kind == "l1sum":
                return cls.l1sum(cls.from_json(part) for part in data["parts"])
            if kind == "polytope":
                return cls.polytope(data["functionals"])
        except KeyError as missing:
            raise InputError(f"Space descriptor of type {kind!r} is missing field {missing}") from None
        except InputError:
            raise
        except (TypeError, ValueError) as exc:
            raise InputError(f"Space descriptor of type {kind!r} has an invalid field: {exc}") from None
        raise InputError(f"Unknown space type {kind!r}")

    def describe(self):
        if self.kind == "lp":
            return f"l_{self.p:g}^{self.dim}"
        if self.kind == "linf":
            return f"l_inf^{self.dim}"
        if self.kind == "l1sum":
            return "(" + " (+)_1 ".join(part.describe() for part in self.parts) + ")"
        return f"polytope[{len(self.functionals)} functionals on R^{self.dim}]"


def as_point(space, x):
    """Coerce x to a float vector living in `space`"""
    point = np.asarray(x, dtype=float).reshape(-1)
    if point.shape[0] != space.dim:
        raise InputError(f"Dimension mismatch: point has {point.shape[0]} coordinates, space has {space.dim}")
    return point


def norm(space, x):
    return space.norm(x)


def dist_alpha(space, x, y, params):
    """
    Right-hand side of the Hölder inequality between two points

    Returns:
    float: K * norm(x - y) ** alpha
    """
    diff = as_point(space, x) - as_point(space, y)
    return float(params.bound(space.norm(diff)))


def pairwise_distances(space, points):
    """Matrix of norm distances between the rows of `points`"""
    points = np.asarray(points, dtype=float)
    return space.norm_many(points[:, None, :] - points[None, :, :])


@dataclass(frozen=True, eq=False)
class LinearMap:
    """A linear map given by its matrix, with the normed space it maps into"""
    matrix: np.ndarray
    target: NormedSpace

    def __call__(self, x):
        return self.matrix @ np.asarray(x, dtype=float)

    def apply_many(self, X):
        return np.asarray(X, dtype=float) @ self.matrix.T


def polytope_embed(space):
    """
    Isometric linear embedding of a polytope-normed space into l_inf^n

    The map sends x to (f_1(x), ..., f_n(x)); its sup norm is the polytope
    norm of x by definition.

    Parameters:
    space: NormedSpace of kind "polytope" with n functionals

    Returns:
    LinearMap: T with T x = (f_i(x))_i, target l_inf^n
    """
    if space.kind != "polytope":
        raise InputError(f"polytope_embed needs a polytope space, got kind {space.kind!r}")

    matrix = space.functional_matrix
    logger.debug("Embedding %s into l_inf^%d", space.describe(), matrix.shape[0])
    return LinearMap(matrix=matrix, target=NormedSpace.linf(matrix.shape[0]))
