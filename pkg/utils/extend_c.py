"""
One-point extension of Hölder maps into c and c_0.

Values are eventually constant sequences (EcSeq). For sequence targets the
forced interval of coordinate k at x is

    [max_y (f(y)(k) - K d(x, y)^alpha), min_y (f(y)(k) + K d(x, y)^alpha)]

and past the joint prefix every coordinate has the forced interval of the
tails. A value inside all of them is a (K, alpha)-Hölder extension at x; the
work in this module is to pick one that still converges (c) or tends to 0
(c_0).
"""
import logging
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from utils.cone_cover import data_cone_cover
from utils.errors import InputError
from utils.extend_core import (
    Interval,
    _require_outside,
    certificate_from_envelopes,
    envelopes,
    pick_checked,
    require_holder,
)
from utils.linf_partition import linf_partition, verify_partition
from utils.settings import DEFAULT_SETTINGS
from utils.spaces import polytope_embed
from utils.targets import EcSeq, sequence_matrix

logger = logging.getLogger(__name__)

C0_VARIANTS = ("four_case", "lipschitz")


def _require_sequences(pm, where):
    if pm.kind != "ec":
        raise InputError(f"{where} needs eventually constant sequence targets, got {pm.kind!r}")


class CFeasibility(NamedTuple):
    feasible: bool
    margin: float
    witness: tuple


def c_feasible(pm, x, tol=None):
    """
    Convergence criterion for a one-point extension into c

    For eventually constant data the criterion only involves tails:
    max over y, z of |tail(y) - tail(z)| - K d(y,x)^alpha - K d(z,x)^alpha
    must be <= 0. The pair y = z is included, so a singleton has margin
    2 K d^alpha.

    Returns:
    CFeasibility: (feasible, margin = -max, witness pair of indices in M)
    """
    _require_sequences(pm, "c_feasible")
    _require_outside(pm, x)
    tol = DEFAULT_SETTINGS.holder_tol if tol is None else tol

    _, tails = sequence_matrix(pm.values, length=0)
    radii = pm.radii(x)
    upper = tails - radii
    lower = tails + radii
    y, z = int(np.argmax(upper)), int(np.argmin(lower))
    margin = float(lower[z] - upper[y])
    scale = max(1.0, float(np.max(np.abs(tails))), float(np.max(radii)))
    return CFeasibility(margin >= -tol * scale, margin, (y, z))


def forced_intervals(pm, x):
    """
    Per-coordinate forced intervals at x over the joint prefix, plus the tail

    Returns:
    FeasibilityCertificate: coordinate labels 1..P, witness label "tail" for
    the tail interval
    """
    _require_sequences(pm, "forced_intervals")
    _require_outside(pm, x)

    matrix, tails = sequence_matrix(pm.values)
    radii = pm.radii(x)
    lo, hi, arg_lo, arg_hi = envelopes(matrix, radii)
    tail = (np.max(tails - radii), np.min(tails + radii), np.argmax(tails - radii), np.argmin(tails + radii))
    labels = list(range(1, matrix.shape[1] + 1))
    return certificate_from_envelopes(lo, hi, arg_lo, arg_hi, labels, tail=tail)


@dataclass
class CTrace:
    """s(j) on the prefix grid, its limit and the (collapsed) cutoff schedule"""
    s_values: list
    s_inf: float
    schedule: list
    policy: str
    certificate: object = None

    def to_json(self):
        return {
            "s_values": list(self.s_values),
            "s_inf": self.s_inf,
            "schedule": list(self.schedule),
            "policy": self.policy,
            "certificate": self.certificate.to_json() if self.certificate is not None else None,
        }


def c_extend(pm, x, policy=None, tol=None):
    """
    Extension value at x into c

    Every prefix coordinate and the tail are chosen in their forced interval
    by `policy`. With "lo" the prefix is the lower envelope
    sup_y (f(y)(n) - K d^alpha) and the tail is s(inf); beyond the joint
    prefix the cutoff ladder of the general construction collapses to a
    single step because the lower envelope is constant there.

    Parameters:
    pm: PartialMap with EcSeq targets
    x: point outside M
    policy: "lo", "hi" or "mid" (default "lo")

    Returns:
    tuple: (EcSeq, CTrace)
    """
    _require_sequences(pm, "c_extend")
    policy = policy or DEFAULT_SETTINGS.c_policy
    tol = DEFAULT_SETTINGS.holder_tol if tol is None else tol

    certificate = forced_intervals(pm, x)
    prefix = [pick_checked(iv, policy, tol, where=k + 1) for k, iv in enumerate(certificate.per_coordinate)]
    tail = pick_checked(certificate.tail_interval, policy, tol, where="tail")

    lows = np.array([iv.lo for iv in certificate.per_coordinate] + [certificate.tail_interval.lo])
    # s(j) = max over m >= j of the lower envelope, tail included
    s_values = np.maximum.accumulate(lows[::-1])[::-1][:-1]
    trace = CTrace(
        s_values=s_values.tolist(),
        s_inf=float(certificate.tail_interval.lo),
        schedule=[len(prefix)],
        policy=policy,
        certificate=certificate,
    )
    logger.debug("c extension: prefix %d, tail %.6g, margin %.3e", len(prefix), tail, certificate.margin)
    return EcSeq(prefix=tuple(prefix), tail=tail), trace


def minimal_prefix_length(per_coordinate, tail_interval=None):
    """
    Smallest p such that a sequence (w_1, ..., w_p, t, t, ...) fits the
    intervals: coordinates 1..p individually, all later coordinates (and the
    tail interval) with one common value t.

    The last forced coordinate can share the tail interval, so intervals
    truncated at N may give N - 1 rather than N.

    Works for any interval objects exposing lo/hi (floats or mpmath mpf).
    Returns None when some interval is empty.
    """
    intervals = list(per_coordinate)
    if any(iv.lo > iv.hi for iv in intervals) or (tail_interval is not None and tail_interval.lo > tail_interval.hi):
        return None

    for p in range(len(intervals) + 1):
        rest = intervals[p:] + ([tail_interval] if tail_interval is not None else [])
        if not rest or max(iv.lo for iv in rest) <= min(iv.hi for iv in rest):
            return p
    return len(intervals)


@dataclass
class C0Trace:
    """Quantities chosen by the c_0 construction (coordinates 1-based)"""
    epsilon: float
    N: int
    representatives: list
    cones: list
    eta: list
    signs: list
    delta: float
    n_directions: int
    variant: str
    x0: list
    case_counts: dict = field(default_factory=dict)

    def to_json(self):
        return {
            "epsilon": self.epsilon,
            "N": self.N,
            "representatives": list(self.representatives),
            "cones": list(self.cones),
            "eta": list(self.eta),
            "signs": list(self.signs),
            "delta": self.delta,
            "n_directions": self.n_directions,
            "variant": self.variant,
            "x0": list(self.x0),
            "case_counts": dict(self.case_counts),
        }


def c0_extend(pm, x0, variant="four_case", settings=None):
    """
    Extension value at x0 into c_0

    After moving x0 to the origin, M is split by a cone covering with
    delta = 1/2 and each cone keeps its minimal-norm point x_i. With
    eps = 0.49 K dist(0, M)^alpha, N is the last coordinate where some
    |f(x_i)(n)| >= eps. eta is a scalar extension per coordinate and

        u(n) = eta_n                                       for n <= N
        u(n) = sign(eta_n) min(|eta_n|, max_i |f(x_i)(n)|)   for n > N

    The "lipschitz" variant (alpha = 1 only) sets u(n) = 0 for n > N.

    Parameters:
    pm: PartialMap with EcSeq targets, all tails 0
    x0: point outside M
    variant: "four_case" or "lipschitz"
    settings: Settings (defaults used when None)

    Returns:
    tuple: (EcSeq with tail 0, C0Trace)
    """
    settings = settings or DEFAULT_SETTINGS
    _require_sequences(pm, "c0_extend")
    if variant not in C0_VARIANTS:
        raise InputError(f"Unknown c_0 variant {variant!r}; expected one of {C0_VARIANTS}")
    if variant == "lipschitz" and pm.params.alpha != 1:
        raise InputError("The lipschitz variant of the c_0 extension needs alpha = 1")
    if any(not v.in_c0 for v in pm.values):
        raise InputError("c_0 extension needs every target sequence to tend to 0")
    _require_outside(pm, x0)
    require_holder(pm, tol=settings.holder_tol)

    x0 = np.asarray(x0, dtype=float).reshape(-1)
    X = pm.points - x0
    norms = pm.space.norm_many(X)
    K, alpha = pm.params.K, pm.params.alpha

    cover, cones = data_cone_cover(pm.space, X, settings.c0_cone_delta)
    representatives = []
    for cone in sorted(set(cones.tolist())):
        members = np.flatnonzero(cones == cone)
        representatives.append(int(members[np.argmin(norms[members])]))

    matrix, _ = sequence_matrix(pm.values)
    length = matrix.shape[1]
    epsilon = settings.c0_epsilon_factor * K * float(np.min(norms)) ** alpha
    rep_abs = np.max(np.abs(matrix[representatives]), axis=0) if length else np.zeros(0)
    if epsilon > 0:
        large = np.flatnonzero(rep_abs >= epsilon)
        N = int(large[-1]) + 1 if large.size else 0
    else:
        N = length

    radii = K * np.power(norms, alpha)
    lo, hi, _, _ = envelopes(matrix, radii)
    eta = np.array(
        [pick_checked(Interval(float(a), float(b)), settings.default_policy, settings.holder_tol, where=n + 1) for n, (a, b) in enumerate(zip(lo, hi))]
    )
    signs = np.where(eta < 0, -1.0, 1.0)

    u = eta.copy()
    if variant == "four_case":
        u[N:] = signs[N:] * np.minimum(np.abs(eta[N:]), rep_abs[N:])
    else:
        u[N:] = 0.0

    trace = C0Trace(
        epsilon=float(epsilon),
        N=N,
        representatives=representatives,
        cones=cones.tolist(),
        eta=eta.tolist(),
        signs=signs.astype(int).tolist(),
        delta=cover.delta,
        n_directions=cover.size,
        variant=variant,
        x0=x0.tolist(),
    )
    value = EcSeq(prefix=tuple(u), tail=0.0)
    trace.case_counts = c0_case_census(pm, value, trace, tol=settings.holder_tol)
    logger.debug("c_0 extension: eps=%.3e N=%d cones=%d census=%s", epsilon, N, len(representatives), trace.case_counts)
    return value, trace


def c0_case_census(pm, value, trace, tol=None):
    """
    Sort every (x, n) with n > N into the four cases of the c_0 argument and
    re-check |f(x)(n) - u(n)| <= K |x - x0|^alpha in each

    1. |f(x)(n)| <= |u(n)|
    2. same sign as eta_n and |u(n)| = |eta_n|
    3. same sign as eta_n and |u(n)| = max_i |f(x_i)(n)|
    4. sign opposite to eta_n

    Returns:
    dict: counts per case and the number of violations
    """
    tol = DEFAULT_SETTINGS.holder_tol if tol is None else tol
    matrix, _ = sequence_matrix(pm.values)
    length = matrix.shape[1]
    counts = {"case1": 0, "case2": 0, "case3": 0, "case4": 0, "violations": 0}
    if length <= trace.N:
        return counts

    u = value.expand(length)
    eta = np.asarray(trace.eta)
    signs = np.asarray(trace.signs)
    bound = pm.params.bound(pm.space.norm_many(pm.points - np.asarray(trace.x0)))

    for row in range(pm.size):
        for n in range(trace.N, length):
            f = matrix[row, n]
            if abs(f) <= abs(u[n]):
                case = "case1"
            elif np.sign(f) != signs[n]:
                case = "case4"
            elif abs(u[n]) == abs(eta[n]):
                case = "case2"
            else:
                case = "case3"
            counts[case] += 1
            if abs(f - u[n]) > bound[row] + tol * max(1.0, bound[row]):
                counts["violations"] += 1
    return counts


@dataclass
class PartitionReport:
    """Partition of M - x and the two bounds the c-extension argument uses"""
    trace: object
    check: object
    cell_slack: float
    chain_slack: float
    tail_margin: float

    def to_json(self):
        return {
            "partition": self.trace.to_json(),
            "check": self.check.to_json(),
            "cell_slack": self.cell_slack,
            "chain_slack": self.chain_slack,
            "tail_margin": self.tail_margin,
        }


def _partition_report(pm, x, embedded, epsilon, tol):
    """
    Partition the (embedded, translated) points and evaluate, for x in the
    cell of x^i and every y in M,

        K (|x| + |y| + eps) - K (|x - x^i| + |x^i - y|)   (chain slack)

    which is >= 0 when the cells satisfy their inequalities.
    """
    trace = linf_partition(embedded, epsilon)
    check = verify_partition(embedded, trace, tol=tol)

    norms = np.max(np.abs(embedded), axis=1)
    dist = np.max(np.abs(embedded[:, None, :] - embedded[None, :, :]), axis=-1)
    cell_slack = np.inf
    chain_slack = np.inf
    for cell in trace.cells:
        r = cell.representative
        members = np.asarray(cell.members, dtype=int)
        cell_slack = min(cell_slack, float(np.min(norms[members] - norms[r] + epsilon - dist[members, r])))
        chain = (norms[members, None] + norms[None, :] + epsilon) - (dist[members, r][:, None] + dist[r][None, :])
        chain_slack = min(chain_slack, float(pm.params.K * np.min(chain)))

    tail_margin = c_feasible(pm, x, tol=tol).margin
    return PartitionReport(trace, check, cell_slack, chain_slack, tail_margin)


def linf_c_extend(pm, x, epsilon=None, policy=None, settings=None):
    """
    Lipschitz extension into c over l_inf^n, reported through the partition
    of M - x

    Returns:
    tuple: (EcSeq, CTrace, PartitionReport)
    """
    settings = settings or DEFAULT_SETTINGS
    if pm.space.kind != "linf":
        raise InputError(f"linf_c_extend needs an l_inf^n domain, got {pm.space.describe()}")
    return _partitioned_c_extend(pm, x, pm.points - np.asarray(x, dtype=float), epsilon, policy, settings)


def polytope_c_extend(pm, x, epsilon=None, policy=None, settings=None):
    """
    Lipschitz extension into c over a polytope-normed space, partitioning the
    image of M - x under the isometric embedding into l_inf^n

    Returns:
    tuple: (EcSeq, CTrace, PartitionReport)
    """
    settings = settings or DEFAULT_SETTINGS
    embed = polytope_embed(pm.space)
    return _partitioned_c_extend(pm, x, embed.apply_many(pm.points - np.asarray(x, dtype=float)), epsilon, policy, settings)


def _partitioned_c_extend(pm, x, embedded, epsilon, policy, settings):
    _require_sequences(pm, "partitioned c extension")
    if pm.params.alpha != 1:
        raise InputError("The partition based c extension is stated for alpha = 1")
    _require_outside(pm, x)
    require_holder(pm, tol=settings.holder_tol)

    epsilon = settings.partition_epsilon if epsilon is None else epsilon
    report = _partition_report(pm, x, embedded, epsilon, settings.holder_tol)
    value, trace = c_extend(pm, x, policy=policy or settings.c_policy, tol=settings.holder_tol)
    return value, trace, report

