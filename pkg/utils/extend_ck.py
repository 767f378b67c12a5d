"""
Extension into C(K) for a finite metric sample K.

Targets are FiniteFunction values on a FiniteMetricSpace (K, rho). With
r_y = K_h d(x, y)^alpha for the Hölder constant K_h and

    U_t = max_y (f(y)(t) - r_y),    L_t = min_y (f(y)(t) + r_y)

the mixed excess of two sample points is

    E(t, s) = max_{y,z} |f(y)(t) - f(z)(s)| - r_y - r_z = max(U_t - L_s, U_s - L_t).

Everything below (the criterion, the modulus, the sup formula) is read off
the matrix E.
"""
import logging
import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np
import pandas as pd

from utils.errors import InfeasibleExtensionError, InputError
from utils.extend_core import (
    Interval,
    PartialMap,
    _require_outside,
    envelopes,
    pick_checked,
    target_distance,
    verify_holder,
)
from utils.extend_c import forced_intervals
from utils.settings import DEFAULT_SETTINGS
from utils.spaces import HolderParams
from utils.targets import EcSeq, FiniteFunction

logger = logging.getLogger(__name__)


def _require_functions(pm, where):
    if pm.kind != "function":
        raise InputError(f"{where} needs C(K) (FiniteFunction) targets, got {pm.kind!r}")


def _bounds(pm, x):
    """U_t, L_t and their argmax/argmin over M"""
    lo, hi, arg_lo, arg_hi = envelopes(pm.value_matrix(), pm.radii(x))
    return lo, hi, arg_lo, arg_hi


def excess_matrix(pm, x):
    """E(t, s) over all pairs of sample points"""
    upper, lower, _, _ = _bounds(pm, x)
    cross = upper[:, None] - lower[None, :]
    return np.maximum(cross, cross.T)


class CKFeasibility(NamedTuple):
    feasible: bool
    worst_excess: float
    witness: tuple


def ck_feasible(pm, x, delta, tol=None):
    """
    Check |f(y)(t) - f(z)(s)| <= r_y + r_z for every y, z and every pair
    with rho(t, s) < delta

    Returns:
    CKFeasibility: (feasible, worst excess, witness (t, s, y, z))
    """
    _require_functions(pm, "ck_feasible")
    _require_outside(pm, x)
    if not delta > 0:
        raise InputError(f"delta must be > 0, got {delta!r}")
    tol = DEFAULT_SETTINGS.holder_tol if tol is None else tol

    upper, lower, arg_up, arg_low = _bounds(pm, x)
    rho = pm.metric_space.rho
    cross = np.where(rho < delta, upper[:, None] - lower[None, :], -np.inf)
    t, s = np.unravel_index(np.argmax(cross), cross.shape)
    worst = float(cross[t, s])
    scale = max(1.0, float(np.max(np.abs(pm.value_matrix()))), float(np.max(pm.radii(x))))
    return CKFeasibility(worst <= tol * scale, worst, (int(t), int(s), int(arg_up[t]), int(arg_low[s])))


@dataclass
class ModulusTable:
    """
    xi on the distance grid of K, psi = xi - xi(0) and the piecewise linear
    phi with knots D/i: phi(D/(i+1)) = psi(D/i), phi = psi(D) on [D/2, D],
    phi(0) = 0
    """
    lambda_grid: np.ndarray
    xi: np.ndarray
    xi0: float
    psi: np.ndarray
    phi_knots: np.ndarray
    phi_values: np.ndarray

    def psi_at(self, lam):
        """psi as a step function: value at the largest grid point <= lam"""
        lam = np.asarray(lam, dtype=float)
        pos = np.searchsorted(self.lambda_grid, lam, side="right") - 1
        return self.psi[np.clip(pos, 0, None)]

    def phi(self, lam):
        return np.interp(lam, self.phi_knots, self.phi_values)

    def to_frame(self):
        return pd.DataFrame({"lambda": self.lambda_grid, "xi": self.xi, "psi": self.psi, "phi": self.phi(self.lambda_grid)})

    def to_json(self):
        return {
            "lambda_grid": self.lambda_grid.tolist(),
            "xi": self.xi.tolist(),
            "xi0": self.xi0,
            "psi": self.psi.tolist(),
            "phi_knots": self.phi_knots.tolist(),
            "phi_values": self.phi_values.tolist(),
        }

    @classmethod
    def from_json(cls, data):
        try:
            return cls(
                lambda_grid=np.asarray(data["lambda_grid"], dtype=float),
                xi=np.asarray(data["xi"], dtype=float),
                xi0=float(data["xi0"]),
                psi=np.asarray(data["psi"], dtype=float),
                phi_knots=np.asarray(data["phi_knots"], dtype=float),
                phi_values=np.asarray(data["phi_values"], dtype=float),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise InputError(f"Malformed modulus table: {exc}") from None


def xi_modulus(pm, x, max_knots=None):
    """
    Modulus tables of the C(K) criterion at x

    Parameters:
    pm: PartialMap with FiniteFunction targets over K with |K| >= 2
    x: point outside M
    max_knots: cap on the number of phi knots

    Returns:
    ModulusTable
    """
    _require_functions(pm, "xi_modulus")
    _require_outside(pm, x)
    space = pm.metric_space
    if space.size < 2:
        raise InputError("The modulus needs a sample K with at least two points")
    max_knots = max_knots or DEFAULT_SETTINGS.modulus_max_knots

    rho = space.rho
    excess = excess_matrix(pm, x)
    D = space.diameter
    grid = np.unique(np.concatenate([[0.0, D], rho.ravel()]))

    order = np.argsort(rho, axis=None, kind="stable")
    sorted_rho = rho.ravel()[order]
    running = np.maximum.accumulate(excess.ravel()[order])
    # xi(lambda) = max of E over pairs with rho <= lambda
    xi = running[np.searchsorted(sorted_rho, grid, side="right") - 1]
    xi0 = float(xi[0])
    psi = xi - xi0

    # phi(D/(m+1)) = psi(D/m) = 0 once D/m < min distance
    m = int(math.floor(D / space.min_distance)) + 1
    if m + 2 > max_knots:
        raise InputError(f"Modulus needs {m + 2} knots, more than the cap {max_knots}")
    table = ModulusTable(grid, xi, xi0, psi, np.zeros(0), np.zeros(0))
    i = np.arange(m + 1, 1, -1)
    knots = np.concatenate([[0.0], D / i, [D]])
    values = np.concatenate([[0.0], table.psi_at(D / (i - 1)), [psi[-1]]])
    table.phi_knots = knots
    table.phi_values = np.maximum.accumulate(values)
    logger.debug("Modulus at x: |K|=%d, %d grid points, %d phi knots, xi0=%.3e", space.size, grid.size, knots.size, xi0)
    return table


def ck_extend(pm, x, modulus=None, tol=None):
    """
    Sup formula g(x)(t) = max_s (U_s - phi(rho(t, s)))

    Condition E(t, s) <= phi(rho(t, s)) is checked on every pair first.

    Returns:
    FiniteFunction
    """
    _require_functions(pm, "ck_extend")
    _require_outside(pm, x)
    tol = DEFAULT_SETTINGS.holder_tol if tol is None else tol
    modulus = modulus if modulus is not None else xi_modulus(pm, x)

    upper, lower, arg_up, arg_low = _bounds(pm, x)
    rho = pm.metric_space.rho
    phi = modulus.phi(rho)
    cross = upper[:, None] - lower[None, :] - phi
    t, s = np.unravel_index(np.argmax(cross), cross.shape)
    scale = max(1.0, float(np.max(np.abs(pm.value_matrix()))), float(np.max(pm.radii(x))))
    if cross[t, s] > tol * scale:
        witness = {"t": int(t), "s": int(s), "y": int(arg_up[t]), "z": int(arg_low[s]), "excess": float(cross[t, s])}
        raise InfeasibleExtensionError(
            f"Modulus condition fails at t={t}, s={s} (y={witness['y']}, z={witness['z']}) by {cross[t, s]:.3e}",
            certificate=witness,
        )

    g = np.max(upper[None, :] - phi, axis=1)
    return FiniteFunction(values=g, space=pm.metric_space)


def infconv_ck(pm, x):
    """g(x)(t) = min_y (f(y)(t) + K d(x, y)^alpha); f(x) when x is in M"""
    _require_functions(pm, "infconv_ck")
    index = pm.index_of(x)
    if index is not None:
        return pm.values[index]
    _, lower, _, _ = _bounds(pm, x)
    return FiniteFunction(values=lower, space=pm.metric_space)


class Witness(NamedTuple):
    t: int
    s: int
    rho: float
    excess: float
    y: int
    z: int


def ck_violation_witnesses(pm, x, eps):
    """
    Pairs (t, s) of K, sorted by rho(t, s), whose mixed excess exceeds eps

    These are the pairs that block a contraction extension at x; fed to
    reduce_ck_to_c they give sequence data without an extension into c.
    """
    _require_functions(pm, "ck_violation_witnesses")
    _require_outside(pm, x)
    upper, lower, arg_up, arg_low = _bounds(pm, x)
    rho = pm.metric_space.rho
    cross = upper[:, None] - lower[None, :]
    pairs = np.argwhere(cross > eps)
    out = [Witness(int(t), int(s), float(rho[t, s]), float(cross[t, s]), int(arg_up[t]), int(arg_low[s])) for t, s in pairs]
    return sorted(out, key=lambda w: (w.rho, w.t, w.s))


@dataclass
class AlmostTrace:
    """Net refinements tried by almost_extend_net"""
    attempts: list = field(default_factory=list)
    factor: float = None
    net: list = None

    def to_json(self):
        return {"attempts": self.attempts, "factor": self.factor, "net": self.net}


def greedy_subnet(distances, radius):
    """Indices of a greedy radius-net of M from its distance matrix"""
    chosen = []
    uncovered = np.ones(distances.shape[0], dtype=bool)
    while uncovered.any():
        i = int(np.flatnonzero(uncovered)[0])
        chosen.append(i)
        uncovered &= distances[i] > radius
    return chosen


def _midpoint_value(pm, x, tol):
    """Exact extension of pm at x from interval midpoints"""
    if pm.kind == "ec":
        certificate = forced_intervals(pm, x)
        prefix = [pick_checked(iv, "mid", tol, where=k + 1) for k, iv in enumerate(certificate.per_coordinate)]
        return EcSeq(prefix=tuple(prefix), tail=pick_checked(certificate.tail_interval, "mid", tol, where="tail"))
    lo, hi, _, _ = envelopes(pm.value_matrix(), pm.radii(x))
    values = [pick_checked(Interval(float(a), float(b)), "mid", tol, where=k) for k, (a, b) in enumerate(zip(lo, hi))]
    return FiniteFunction(values=np.asarray(values), space=pm.metric_space)


def _factor(pm, x, value):
    """max_y dist(value, f(y)) / (K d(x, y)^alpha)"""
    bound = pm.radii(x)
    gaps = np.array([target_distance(pm.kind, value, v) for v in pm.values])
    with np.errstate(divide="ignore", invalid="ignore"):
        ratios = np.where(bound > 0, gaps / np.where(bound > 0, bound, 1.0), np.where(gaps > 0, np.inf, 1.0))
    return float(np.max(ratios))


def almost_extend_net(pm, x, eps, tol=None):
    """
    (1 + eps) K extension at x computed on a subnet of M

    The net radius starts at the diameter of M and halves until the value
    obtained from the net alone meets the (1 + eps) K bound on all of M. Once
    the radius drops below the smallest distance the net is M itself and the
    value is exact, so the loop terminates.

    Parameters:
    pm: PartialMap with EcSeq or FiniteFunction targets
    x: point outside M
    eps: > 0

    Returns:
    tuple: (value, AlmostTrace)
    """
    if pm.kind not in ("ec", "function"):
        raise InputError(f"almost_extend_net needs c or C(K) targets, got {pm.kind!r}")
    if not eps > 0:
        raise InputError(f"eps must be > 0, got {eps!r}")
    _require_outside(pm, x)
    tol = DEFAULT_SETTINGS.holder_tol if tol is None else tol

    distances = pm.space.norm_many(pm.points[:, None, :] - pm.points[None, :, :])
    radius = float(np.max(distances))
    trace = AlmostTrace()
    while True:
        net = greedy_subnet(distances, radius) if radius > 0 else list(range(pm.size))
        value = _midpoint_value(pm.restricted(net), x, tol)
        factor = _factor(pm, x, value)
        trace.attempts.append({"radius": radius, "net_size": len(net), "factor": factor})
        if factor <= (1 + eps) * (1 + tol) or len(net) == pm.size:
            trace.factor = factor
            trace.net = net
            logger.debug("Net extension: %d of %d points, factor %.6f", len(net), pm.size, factor)
            return value, trace
        radius /= 2


def step_factors(eps, steps):
    """(1 + eps)^(2^-n) - 1 for n = 1..steps; their product of (1 + e_n) is < 1 + eps"""
    return [(1 + eps) ** (2.0 ** -n) - 1 for n in range(1, steps + 1)]


def almost_extend_sequence(pm, xs, eps, tol=None):
    """
    Extend pm over the points xs one at a time, the n-th step allowed a
    factor 1 + e_n

    Returns:
    tuple: (extended PartialMap whose K is the accumulated constant, factors)
    """
    tol = DEFAULT_SETTINGS.holder_tol if tol is None else tol
    xs = [np.asarray(x, dtype=float).reshape(-1) for x in xs]
    factors = step_factors(eps, len(xs))
    current = pm
    for x, factor in zip(xs, factors):
        value, _ = almost_extend_net(current, x, factor, tol=tol)
        params = HolderParams(current.params.K * (1 + factor), current.params.alpha)
        current = current.extended(x, value).with_params(params)
    logger.debug("Extended over %d points, total factor %.6f", len(xs), current.params.K / pm.params.K if pm.params.K else 1.0)
    return current, factors


@dataclass(frozen=True, eq=False)
class Embedding:
    """
    Nearest point extension from a subset F of K

    T f(t) = f(nearest point of F to t), ties to the lowest index; R is the
    restriction to F and P = T R.
    """
    space: object
    subset: tuple
    nearest: np.ndarray

    def extend(self, f_on_subset):
        values = np.asarray(f_on_subset, dtype=float).reshape(-1)
        if values.shape[0] != len(self.subset):
            raise InputError(f"Expected {len(self.subset)} values on F, got {values.shape[0]}")
        return FiniteFunction(values=values[self.nearest], space=self.space)

    def restrict(self, g):
        return np.asarray(g.values)[list(self.subset)]

    def project(self, g):
        return self.extend(self.restrict(g))

    def to_json(self):
        return {"subset": list(self.subset), "nearest": [self.subset[i] for i in self.nearest]}


def embed_c_into_ck(space, subset):
    """
    Nearest point embedding of functions on F into functions on K

    Parameters:
    space: FiniteMetricSpace K
    subset: indices of the points of F

    Returns:
    Embedding
    """
    subset = tuple(sorted({int(i) for i in subset}))
    if not subset:
        raise InputError("The subset F must not be empty")
    if subset[0] < 0 or subset[-1] >= space.size:
        raise InputError(f"Subset indices must lie in 0..{space.size - 1}")
    nearest = np.argmin(space.rho[:, list(subset)], axis=1)
    nearest.setflags(write=False)
    return Embedding(space=space, subset=subset, nearest=nearest)


def reduce_ck_to_c(pm, witnesses):
    """
    Sequence data h(y) = (f(y)(t_1), f(y)(s_1), ..., f(y)(t_J), f(y)(s_J))
    with tail f(y)(s_J)

    Parameters:
    pm: PartialMap with FiniteFunction targets
    witnesses: list of (t_j, s_j) index pairs of K; rho(t_j, s_j) < 1/j is
    expected and logged when it fails

    Returns:
    PartialMap: same domain and parameters, EcSeq targets
    """
    _require_functions(pm, "reduce_ck_to_c")
    space = pm.metric_space
    order = []
    for j, pair in enumerate(witnesses, start=1):
        try:
            t, s = (int(v) for v in pair)
        except (TypeError, ValueError):
            raise InputError(f"Witness {j} must be a pair of indices of K, got {pair!r}", position=j) from None
        if not (0 <= t < space.size and 0 <= s < space.size):
            raise InputError(f"Witness {j} ({t}, {s}) is outside K", position=j)
        if space.rho[t, s] >= 1.0 / j:
            logger.warning("Witness %d has rho(t, s) = %.4g >= 1/%d", j, space.rho[t, s], j)
        order.extend([t, s])

    if not order:
        raise InputError("reduce_ck_to_c needs at least one witness pair")
    values = pm.value_matrix()
    sequences = tuple(EcSeq(prefix=tuple(row[order]), tail=float(row[order[-1]])) for row in values)
    return PartialMap(pm.space, pm.points, sequences, pm.params, kind="ec")


def verify_ck_extension(pm, x, value, tol=None):
    """Both one-sided bounds f(y) - g <= r_y and g - f(y) <= r_y, then a full pair check"""
    tol = DEFAULT_SETTINGS.holder_tol if tol is None else tol
    radii = pm.radii(x)
    F = pm.value_matrix()
    slack = tol * np.maximum(1.0, radii)[:, None]
    below = bool(np.all(F - value.values[None, :] <= radii[:, None] + slack))
    above = bool(np.all(value.values[None, :] - F <= radii[:, None] + slack))
    check = verify_holder(pm.extended(x, value), tol=tol)
    return {"lower_bound": below, "upper_bound": above, "holder": check.to_json(), "ok": below and above and check.ok}
