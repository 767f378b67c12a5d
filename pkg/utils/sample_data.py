"""
Seeded random instances for the self test, the templates and the test suite.

Every generator takes a numpy Generator (or a seed) so that instances are
reproducible; the Hölder constant of a generated map is its exact
constant, so the map is (K, alpha)-Hölder with no slack.
"""
import numpy as np

from utils.extend_core import PartialMap, holder_constant
from utils.spaces import HolderParams, NormedSpace
from utils.targets import EcSeq, FiniteFunction, FiniteMetricSpace

SAMPLE_SPACE_KINDS = ("lp", "linf", "l1sum", "polytope")
SAMPLE_TARGETS = ("scalar", "vector", "c0", "c", "function")
SAMPLE_ALPHAS = (0.3, 0.5, 1.0)


def _rng(seed_or_rng):
    if isinstance(seed_or_rng, np.random.Generator):
        return seed_or_rng
    return np.random.default_rng(seed_or_rng)


def get_sample_space(seed, kind=None, dim=None):
    """Random normed space of the given kind (random when None), dimension <= 4"""
    rng = _rng(seed)
    kind = kind or SAMPLE_SPACE_KINDS[rng.integers(len(SAMPLE_SPACE_KINDS))]
    dim = int(dim or rng.integers(1, 5))

    if kind == "linf":
        return NormedSpace.linf(dim)
    if kind == "lp" or (kind == "l1sum" and dim == 1):
        return NormedSpace.lp(float(rng.choice([1.0, 1.5, 2.0, 3.0])), dim)
    if kind == "l1sum":
        cut = int(rng.integers(1, dim))
        return NormedSpace.l1sum([NormedSpace.lp(2, cut), NormedSpace.lp(2, dim - cut)])

    # coordinate functionals keep the rank full; extra rows are scaled to sup norm <= 1
    extra = rng.uniform(-1, 1, size=(int(rng.integers(0, 3)), dim))
    extra /= np.maximum(1.0, np.sum(np.abs(extra), axis=1, keepdims=True))
    return NormedSpace.polytope(np.vstack([np.eye(dim), extra]))


def get_sample_points(seed, space, size, scale=3.0):
    """`size` distinct random points, none at the origin"""
    rng = _rng(seed)
    points = np.round(rng.normal(scale=scale, size=(size, space.dim)), 6)
    while len({tuple(p) for p in points}) < size or np.any(space.norm_many(points) == 0):
        points = np.round(rng.normal(scale=scale, size=(size, space.dim)), 6)
    return points


def get_sample_metric_space(seed, size):
    """Random finite metric space: distinct points of the plane with the euclidean metric"""
    rng = _rng(seed)
    points = get_sample_points(rng, NormedSpace.lp(2, 2), size, scale=1.0)
    return FiniteMetricSpace.from_points(points, NormedSpace.lp(2, 2))


def get_sample_values(seed, target, size, length=3, metric=None):
    """
    Random target values

    Parameters:
    target: "scalar", "vector", "c0", "c" or "function"
    length: vector length or largest sequence prefix length
    metric: FiniteMetricSpace for "function" targets
    """
    rng = _rng(seed)
    if target == "scalar":
        return [float(v) for v in rng.normal(size=size)]
    if target == "vector":
        return [rng.normal(size=length) for _ in range(size)]
    if target in ("c0", "c"):
        values = []
        for _ in range(size):
            prefix = tuple(rng.normal(size=int(rng.integers(0, length + 1))))
            tail = 0.0 if target == "c0" else float(rng.normal())
            values.append(EcSeq(prefix=prefix, tail=tail))
        return values
    if target == "function":
        return [FiniteFunction(values=rng.normal(size=metric.size), space=metric) for _ in range(size)]
    raise ValueError(f"Unknown sample target {target!r}")


def get_sample_instance(seed, target="scalar", space=None, size=None, alpha=None, metric_size=None):
    """
    Random Hölder partial map and a point outside its domain

    Returns:
    tuple: (PartialMap, x)
    """
    rng = _rng(seed)
    space = space or get_sample_space(rng)
    size = int(size or rng.integers(1, 9))
    alpha = float(alpha or rng.choice(SAMPLE_ALPHAS))
    metric = get_sample_metric_space(rng, int(metric_size or rng.integers(2, 7))) if target == "function" else None

    points = get_sample_points(rng, space, size + 1)
    values = get_sample_values(rng, target, size, metric=metric)
    kind = "ec" if target in ("c0", "c") else target
    pm = PartialMap(space, points[:size], tuple(values), HolderParams(0.0, alpha), kind=kind)
    pm = pm.with_params(HolderParams(holder_constant(pm, alpha), alpha))
    return pm, points[size]


def get_sample_linf_points(seed, dim, size, scale=3.0):
    """Random subset of l_inf^dim without the origin, rounded to a grid so ties occur"""
    rng = _rng(seed)
    points = np.round(rng.uniform(-scale, scale, size=(size, dim)), 1)
    points = np.unique(points[np.max(np.abs(points), axis=1) > 0], axis=0)
    return points


def get_sample_problems():
    """
    Example problem files, one per target kind plus the counterexample call

    Returns:
    dict: file stem -> problem dict
    """
    metric = {"points_1d": [0.0, 0.5, 1.0]}
    return {
        "scalar_two_point": {
            "space": {"type": "linf", "dim": 1},
            "alpha": 1,
            "points": [[-1], [2]],
            "values": [0, 3],
            "extend_at": [[0]],
        },
        "vector_two_point": {
            "space": {"type": "linf", "dim": 1},
            "alpha": 1,
            "K": 1,
            "points": [[-1], [2]],
            "values": [[0, 0], [3, -3]],
            "extend_at": [[0]],
            "options": {"policy": "mid"},
        },
        "c0_two_point": {
            "space": {"type": "linf", "dim": 1},
            "alpha": 1,
            "K": 1,
            "target": "c0",
            "points": [[1], [2]],
            "values": [{"prefix": [1], "tail": 0}, {"prefix": [2], "tail": 0}],
            "extend_at": [[0]],
        },
        "c_tails": {
            "space": {"type": "linf", "dim": 1},
            "alpha": 1,
            "K": 1,
            "target": "c",
            "points": [[-1], [1]],
            "values": [{"prefix": [], "tail": 0}, {"prefix": [], "tail": 1}],
            "extend_at": [[0]],
            "options": {"policy": "lo"},
        },
        "ck_three_point": {
            "space": {"type": "linf", "dim": 1},
            "alpha": 1,
            "K": 1,
            "target": "function",
            "metric": metric,
            "points": [[1]],
            "values": [[0, 0.4, 1]],
            "extend_at": [[0]],
            "options": {"delta": 0.6},
        },
        "linf_partition": {
            "space": {"type": "linf", "dim": 2},
            "points": [[2, 1], [3, 1], [5, 2]],
            "options": {"eps": 0.5},
        },
        "counterexample": {
            "command": "counterexample",
            "options": {"K": 11, "n1": 1, "N": 5},
        },
    }
