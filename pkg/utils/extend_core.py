"""
One-point extension of Hölder maps into R and l_inf^m.

For a (K, alpha)-Hölder map f on a finite set M and a new point x, the values
admissible at x in one coordinate form the interval

    [max_y (f(y) - K d(x, y)^alpha), min_y (f(y) + K d(x, y)^alpha)]

which is never empty because d^alpha is again a metric for alpha <= 1. Its
upper end is the inf-convolution (McShane) extension and its lower end the
sup (Whitney) extension.
"""
import logging
from dataclasses import dataclass, field

import numpy as np

from utils.errors import InfeasibleExtensionError, InputError, NotHolderError
from utils.settings import DEFAULT_SETTINGS, POLICIES
from utils.spaces import HolderParams, NormedSpace, as_point, pairwise_distances
from utils.targets import EcSeq, FiniteFunction, sequence_matrix, sup_dist

logger = logging.getLogger(__name__)

TARGET_KINDS = ("scalar", "vector", "ec", "function")


def detect_target_kind(values):
    """
    Work out which target space a list of values lives in

    Parameters:
    values: list of floats, equal-length vectors, EcSeq or FiniteFunction

    Returns:
    str: one of "scalar", "vector", "ec", "function"
    """
    if all(isinstance(v, EcSeq) for v in values):
        return "ec"
    if all(isinstance(v, FiniteFunction) for v in values):
        return "function"
    if all(np.ndim(v) == 0 and not isinstance(v, (EcSeq, FiniteFunction)) for v in values):
        return "scalar"
    if all(np.ndim(v) == 1 and not isinstance(v, (EcSeq, FiniteFunction)) for v in values):
        return "vector"
    raise InputError("Target values must all be numbers, all vectors, all EcSeq or all FiniteFunction")


@dataclass(frozen=True, eq=False)
class PartialMap:
    """
    A map f: M -> Y given on finitely many points of a normed space.

    The Hölder parameters are the bound the map is claimed to satisfy; use
    `holder_constant` or `verify_holder` to check them.
    """
    space: NormedSpace
    points: np.ndarray
    values: tuple
    params: HolderParams
    kind: str = field(default=None)

    def __post_init__(self):
        points = np.array(self.points, dtype=float)
        if points.ndim == 1:
            points = points.reshape(-1, 1) if self.space.dim == 1 else points.reshape(1, -1)
        if points.shape[0] == 0:
            raise InputError("The domain M of a partial map must not be empty")
        if points.shape[1] != self.space.dim:
            raise InputError(f"Dimension mismatch: points have {points.shape[1]} coordinates, space has {self.space.dim}")
        if len(self.values) != points.shape[0]:
            raise InputError(f"{points.shape[0]} points but {len(self.values)} values")

        # M must be a set
        coincide = np.all(points[:, None, :] == points[None, :, :], axis=-1)
        np.fill_diagonal(coincide, False)
        if np.any(coincide):
            i, j = np.argwhere(coincide)[0]
            raise InputError(f"Domain points {i} and {j} coincide")

        kind = detect_target_kind(self.values)
        if self.kind is not None and self.kind != kind:
            raise InputError(f"Values are {kind} targets but the map was declared with {self.kind} targets")
        values = tuple(self.values)
        try:
            if kind == "scalar":
                values = tuple(float(v) for v in values)
            elif kind == "vector":
                values = tuple(np.asarray(v, dtype=float) for v in values)
        except (TypeError, ValueError):
            raise InputError(f"Target values of a {kind} map must be numeric") from None
        if kind in ("scalar", "vector") and not all(np.all(np.isfinite(v)) for v in values):
            raise InputError("Target values must be finite")
        if kind == "vector" and len({v.shape for v in values}) != 1:
            raise InputError("Vector targets must all have the same length")
        elif kind == "function":
            sizes = {v.space.size for v in values}
            if len(sizes) != 1:
                raise InputError("Function targets must live on one finite metric space")

        points.setflags(write=False)
        object.__setattr__(self, "points", points)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "kind", kind)

    @property
    def size(self):
        return self.points.shape[0]

    @property
    def metric_space(self):
        """FiniteMetricSpace of function targets"""
        if self.kind != "function":
            raise InputError("Only function-valued maps carry a metric space")
        return self.values[0].space

    def value_matrix(self):
        """
        Target values as an array: shape (|M|,) for scalars and (|M|, m) for
        vectors and functions
        """
        if self.kind == "scalar":
            return np.asarray(self.values, dtype=float)
        if self.kind == "vector":
            return np.vstack(self.values)
        if self.kind == "function":
            return np.vstack([v.values for v in self.values])
        raise InputError("Sequence targets have no finite value matrix; use targets.sequence_matrix")

    def index_of(self, x):
        """Index of x in M, or None"""
        x = as_point(self.space, x)
        hits = np.flatnonzero(np.all(self.points == x, axis=1))
        return int(hits[0]) if hits.size else None

    def distances_to(self, x):
        """Norm distances from x to each point of M"""
        return self.space.norm_many(self.points - as_point(self.space, x))

    def radii(self, x):
        """K * d(x, y)^alpha for each y in M"""
        return self.params.bound(self.distances_to(x))

    def with_params(self, params):
        return PartialMap(self.space, self.points, self.values, params, self.kind)

    def restricted(self, indices):
        indices = list(indices)
        return PartialMap(self.space, self.points[indices], tuple(self.values[i] for i in indices), self.params, self.kind)

    def extended(self, x, value):
        """Partial map on M + {x}"""
        points = np.vstack([self.points, as_point(self.space, x)])
        return PartialMap(self.space, points, self.values + (value,), self.params, self.kind)


def target_distance(kind, a, b):
    """Distance between two target values of the given kind"""
    if kind == "scalar":
        return abs(float(a) - float(b))
    if kind == "vector":
        return float(np.max(np.abs(np.asarray(a) - np.asarray(b)))) if np.size(a) else 0.0
    if kind == "ec":
        return sup_dist(a, b)
    if kind == "function":
        return float(np.max(np.abs(a.values - b.values)))
    raise InputError(f"Unknown target kind {kind!r}")


def target_distance_matrix(pm):
    """Pairwise target distances of a partial map"""
    if pm.kind == "ec":
        matrix, tails = sequence_matrix(pm.values)
        gaps = np.abs(tails[:, None] - tails[None, :])
        if matrix.shape[1]:
            gaps = np.maximum(gaps, np.max(np.abs(matrix[:, None, :] - matrix[None, :, :]), axis=-1))
        return gaps
    values = pm.value_matrix()
    if pm.kind == "scalar":
        return np.abs(values[:, None] - values[None, :])
    if values.shape[1] == 0:
        return np.zeros((pm.size, pm.size))
    return np.max(np.abs(values[:, None, :] - values[None, :, :]), axis=-1)


def holder_constant(pm, alpha):
    """
    Smallest K with dist(f(y), f(z)) <= K d(y, z)^alpha on M

    Parameters:
    pm: PartialMap
    alpha: exponent in (0, 1]

    Returns:
    float: the Hölder constant, 0 for a singleton domain
    """
    if not (0 < alpha <= 1):
        raise InputError(f"alpha must lie in (0, 1], got {alpha!r}")
    if pm.size == 1:
        return 0.0

    d = pairwise_distances(pm.space, pm.points)
    off = ~np.eye(pm.size, dtype=bool)
    if np.any(d[off] == 0):
        raise InputError("Coincident domain points have no Hölder ratio")
    ratios = target_distance_matrix(pm)[off] / np.power(d[off], alpha)
    return float(np.max(ratios))


@dataclass
class HolderCheck:
    """Outcome of an exhaustive pair check"""
    ok: bool
    worst_ratio: float
    worst_excess: float
    pair: tuple

    def to_json(self):
        return {"ok": self.ok, "worst_ratio": self.worst_ratio, "worst_excess": self.worst_excess, "pair": list(self.pair)}


def verify_holder(pm, tol=None, factor=1.0):
    """
    Re-check every pair of a partial map against factor * K * d^alpha

    A pair passes when dist(f(y), f(z)) <= factor*K*d^alpha + tol*max(1, factor*K*d^alpha).
    """
    tol = DEFAULT_SETTINGS.holder_tol if tol is None else tol
    if pm.size == 1:
        return HolderCheck(ok=True, worst_ratio=0.0, worst_excess=-np.inf, pair=(0, 0))

    d = pairwise_distances(pm.space, pm.points)
    bound = factor * pm.params.bound(d)
    gaps = target_distance_matrix(pm)
    excess = gaps - bound
    slack = tol * np.maximum(1.0, bound)
    np.fill_diagonal(excess, -np.inf)

    i, j = np.unravel_index(np.argmax(excess - slack), excess.shape)
    with np.errstate(divide="ignore", invalid="ignore"):
        ratios = np.where(bound > 0, gaps / np.where(bound > 0, bound, 1.0), np.where(gaps > 0, np.inf, 0.0))
    np.fill_diagonal(ratios, 0.0)
    return HolderCheck(
        ok=bool(excess[i, j] <= slack[i, j]),
        worst_ratio=float(np.max(ratios)) * factor,
        worst_excess=float(excess[i, j]),
        pair=(int(i), int(j)),
    )


def require_holder(pm, tol=None):
    """Raise NotHolderError unless pm satisfies its declared bound"""
    check = verify_holder(pm, tol=tol)
    if not check.ok:
        raise NotHolderError(check.pair, check.worst_excess, check.worst_ratio)
    return check


@dataclass(frozen=True)
class Interval:
    """Closed interval [lo, hi]; empty when lo > hi"""
    lo: float
    hi: float

    @property
    def empty(self):
        return self.lo > self.hi

    @property
    def width(self):
        return self.hi - self.lo

    @property
    def mid(self):
        return 0.5 * (self.lo + self.hi)

    def contains(self, v, tol=0.0):
        return self.lo - tol <= v <= self.hi + tol

    def contains_interval(self, other, tol=0.0):
        return self.lo - tol <= other.lo and other.hi <= self.hi + tol

    def intersect(self, other):
        return Interval(max(self.lo, other.lo), min(self.hi, other.hi))

    def clamp(self, v):
        return min(max(v, self.lo), self.hi)

    def pick(self, policy="mid"):
        """Endpoint or midpoint of the interval"""
        if policy == "lo":
            return self.lo
        if policy == "hi":
            return self.hi
        if policy == "mid":
            return self.mid
        raise InputError(f"Unknown policy {policy!r}; expected one of {POLICIES}")

    def to_json(self):
        return {"lo": self.lo, "hi": self.hi, "empty": self.empty}


def pick_checked(interval, policy, tol, where=None):
    """
    Choose a value in a forced interval.

    Intervals that are empty only by rounding (gap within tol) collapse to
    their midpoint; genuinely empty ones raise InfeasibleExtensionError.
    """
    if not interval.empty:
        return interval.pick(policy)
    scale = max(1.0, abs(interval.lo), abs(interval.hi))
    if interval.lo - interval.hi <= tol * scale:
        return interval.mid
    raise InfeasibleExtensionError(
        f"Forced interval {where if where is not None else ''} is empty: [{interval.lo!r}, {interval.hi!r}]",
        certificate=interval,
    )


@dataclass
class FeasibilityCertificate:
    """
    Per coordinate admissible ranges for a one-point extension.

    margin is the smallest width hi - lo over all coordinates (and the tail
    for sequence targets); the witness names the two domain points whose
    constraints produce it and the coordinate, so margin >= 0 exactly when
    every interval is nonempty.
    """
    per_coordinate: list
    tail_interval: Interval = None
    margin: float = np.inf
    witness: tuple = None

    @property
    def feasible(self):
        return self.margin >= 0

    def intervals(self):
        return list(self.per_coordinate) + ([self.tail_interval] if self.tail_interval is not None else [])

    def contains(self, other, tol=0.0):
        """Set inclusion on the shared coordinates"""
        shared = min(len(self.per_coordinate), len(other.per_coordinate))
        ok = all(self.per_coordinate[k].contains_interval(other.per_coordinate[k], tol) for k in range(shared))
        if self.tail_interval is not None and other.tail_interval is not None:
            ok = ok and self.tail_interval.contains_interval(other.tail_interval, tol)
        return ok

    def to_json(self):
        return {
            "per_coordinate": [iv.to_json() for iv in self.per_coordinate],
            "tail_interval": self.tail_interval.to_json() if self.tail_interval is not None else None,
            "margin": self.margin,
            "witness": list(self.witness) if self.witness is not None else None,
            "feasible": self.feasible,
        }


def envelopes(values, radii):
    """
    Lower and upper envelopes of the forced intervals

    Parameters:
    values: array (|M|,) or (|M|, m) of target coordinates
    radii: array (|M|,) of K d(x, y)^alpha

    Returns:
    tuple: (lo, hi, argmax of lo, argmin of hi), coordinatewise
    """
    values = np.asarray(values, dtype=float)
    r = radii if values.ndim == 1 else radii[:, None]
    lower = values - r
    upper = values + r
    return lower.max(axis=0), upper.min(axis=0), lower.argmax(axis=0), upper.argmin(axis=0)


def certificate_from_envelopes(lo, hi, arg_lo, arg_hi, coordinate_labels, tail=None):
    """Assemble a FeasibilityCertificate from envelope arrays"""
    per_coordinate = [Interval(float(a), float(b)) for a, b in zip(np.atleast_1d(lo), np.atleast_1d(hi))]
    widths = [iv.width for iv in per_coordinate]
    witnesses = [(int(y), int(z), label) for y, z, label in zip(np.atleast_1d(arg_lo), np.atleast_1d(arg_hi), coordinate_labels)]

    tail_interval = None
    if tail is not None:
        tail_lo, tail_hi, tail_y, tail_z = tail
        tail_interval = Interval(float(tail_lo), float(tail_hi))
        widths.append(tail_interval.width)
        witnesses.append((int(tail_y), int(tail_z), "tail"))

    if not widths:
        return FeasibilityCertificate(per_coordinate=[], tail_interval=tail_interval)
    k = int(np.argmin(widths))
    return FeasibilityCertificate(per_coordinate, tail_interval, float(widths[k]), witnesses[k])


def _require_outside(pm, x):
    if pm.index_of(x) is not None:
        raise InputError("The extension point already belongs to the domain M")


def feasibility_interval(pm, x):
    """
    Admissible values at x for a scalar Hölder map

    Returns:
    Interval: [max_y (f(y) - K d^alpha), min_y (f(y) + K d^alpha)]
    """
    if pm.kind != "scalar":
        raise InputError(f"feasibility_interval needs scalar targets, got {pm.kind!r}")
    _require_outside(pm, x)
    lo, hi, _, _ = envelopes(pm.value_matrix(), pm.radii(x))
    return Interval(float(lo), float(hi))


def infconv_extend(pm, x):
    """Inf-convolution value min_y (f(y) + K d(x, y)^alpha); equals f(x) on M"""
    if pm.kind != "scalar":
        raise InputError(f"infconv_extend needs scalar targets, got {pm.kind!r}")
    index = pm.index_of(x)
    if index is not None:
        return pm.values[index]
    return float(np.min(pm.value_matrix() + pm.radii(x)))


def sup_extend(pm, x):
    """Lower envelope max_y (f(y) - K d(x, y)^alpha); equals f(x) on M"""
    if pm.kind != "scalar":
        raise InputError(f"sup_extend needs scalar targets, got {pm.kind!r}")
    index = pm.index_of(x)
    if index is not None:
        return pm.values[index]
    return float(np.max(pm.value_matrix() - pm.radii(x)))


def vector_certificate(pm, x):
    """FeasibilityCertificate for vector, function or scalar targets at x"""
    if pm.kind == "ec":
        raise InputError("Use extend_c.forced_intervals for sequence targets")
    _require_outside(pm, x)
    values = pm.value_matrix()
    lo, hi, arg_lo, arg_hi = envelopes(values, pm.radii(x))
    labels = [0] if values.ndim == 1 else list(range(values.shape[1]))
    return certificate_from_envelopes(lo, hi, arg_lo, arg_hi, labels)


def linf_vector_extend(pm, x, policy=None, tol=None):
    """
    Coordinatewise one-point extension into l_inf^m (or sampled C(K))

    Parameters:
    pm: PartialMap with vector or function targets
    x: new point outside M
    policy: "lo", "hi" or "mid" (default from settings)

    Returns:
    np.ndarray or FiniteFunction: value at x, same kind as the targets
    """
    policy = policy or DEFAULT_SETTINGS.default_policy
    tol = DEFAULT_SETTINGS.holder_tol if tol is None else tol
    if pm.kind not in ("vector", "function"):
        raise InputError(f"linf_vector_extend needs vector or function targets, got {pm.kind!r}")

    certificate = vector_certificate(pm, x)
    value = np.array([pick_checked(iv, policy, tol, where=k) for k, iv in enumerate(certificate.per_coordinate)])
    logger.debug("Vector extension over %d coordinates, margin %.3e", value.size, certificate.margin)
    if pm.kind == "function":
        return FiniteFunction(values=value, space=pm.metric_space)
    return value


def verify_extension(pm, x, value, tol=None, factor=1.0):
    """Exhaustive Hölder check of pm extended by (x -> value)"""
    return verify_holder(pm.extended(x, value), tol=tol, factor=factor)
