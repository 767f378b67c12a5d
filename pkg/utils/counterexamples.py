"""
A 1-Lipschitz map from (R^4, |(s,t)|_2 + |(u,v)|_2) into c with no
1-Lipschitz extension at the origin, truncated to finitely many points.

For K passing the selection inequality and n1 <= n <= N:

    x_n = (K^2n, K^n, 0, 0)        u_n(k) = K^2n + 5/8 for odd k <= n, K^2n + 1/4 otherwise
    y_n = (0, 0, K^2n, K^n)        v_n(k) = -(K^2n + 5/8) for even k <= n, -(K^2n + 1/4) otherwise

Since |x_n| <= K^2n + 1/2, any extension value w at 0 has w(k) >= 1/8 for odd
k <= N and w(k) <= -1/8 for even k <= N, so the alternation grows with N.

The forced intervals are differences of numbers near K^2N; they are
recomputed in multiple precision arithmetic and the float pipeline is checked
against them.
"""
import logging
from dataclasses import dataclass, field

import numpy as np
from mpmath import mp, mpf, sqrt

from utils.errors import InputError
from utils.extend_c import forced_intervals, minimal_prefix_length
from utils.extend_core import Interval, PartialMap, holder_constant
from utils.settings import DEFAULT_SETTINGS
from utils.spaces import HolderParams, NormedSpace
from utils.targets import EcSeq, sup_dist

logger = logging.getLogger(__name__)

THRESHOLD = 3 / 8
PRECISION = 60
# smallest resolvable gap relative to K^2N
SAFE_RESOLUTION = 1e-12


def selection_value(K):
    """(1/2) ((K^2 - 1) / K^2) (K / (K + 1))^3"""
    K = float(K)
    return 0.5 * ((K * K - 1) / (K * K)) * (K / (K + 1)) ** 3


def select_K(lo=2, hi=100):
    """Smallest integer K in [lo, hi] whose selection value exceeds 3/8"""
    for K in range(int(lo), int(hi) + 1):
        if K > 1 and selection_value(K) > THRESHOLD:
            return K
    raise InputError(f"No integer K in [{lo}, {hi}] passes the selection inequality")


def counterexample_space():
    """l_2^2 (+)_1 l_2^2"""
    return NormedSpace.l1sum([NormedSpace.lp(2, 2), NormedSpace.lp(2, 2)])


def max_safe_N(K):
    """Largest N with (3/8) / K^2N >= SAFE_RESOLUTION"""
    N = 0
    while THRESHOLD / float(K) ** (2 * (N + 1)) >= SAFE_RESOLUTION:
        N += 1
    return N


def _u_prefix(K, n):
    big = K ** (2 * n)
    return tuple(big + 5 / 8 if k % 2 == 1 else big + 1 / 4 for k in range(1, n + 1)), big + 1 / 4


def _v_prefix(K, n):
    big = K ** (2 * n)
    return tuple(-(big + 5 / 8) if k % 2 == 0 else -(big + 1 / 4) for k in range(1, n + 1)), -(big + 1 / 4)


def _exact_norm(K, n):
    """|x_n| = |y_n| = sqrt(K^4n + K^2n) at PRECISION digits"""
    with mp.workdps(PRECISION):
        K = mpf(K)
        return sqrt(K ** (4 * n) + K ** (2 * n))


def _index_thresholds(K, N):
    """
    Least n0 with |x_n - y_m| >= K^2n + K^2m + 7/8 for all n, m in [n0, N],
    and least n1 >= n0 with |x_n - x_m| >= K^2n - K^2m + 3/8 for n > m >= n1
    """
    with mp.workdps(PRECISION):
        Kd = mpf(K)
        norms = {n: _exact_norm(K, n) for n in range(1, N + 1)}

        def cross_ok(a):
            return all(norms[n] + norms[m] >= Kd ** (2 * n) + Kd ** (2 * m) + mpf(7) / 8 for n in range(a, N + 1) for m in range(a, N + 1))

        def same_ok(b):
            for n in range(b, N + 1):
                for m in range(b, n):
                    gap = Kd ** (2 * n) - Kd ** (2 * m)
                    dist = sqrt(gap ** 2 + (Kd ** n - Kd ** m) ** 2)
                    if dist < gap + mpf(3) / 8:
                        return False
            return True

        n0 = next((a for a in range(1, N + 1) if cross_ok(a)), N + 1)
        n1 = next((b for b in range(n0, N + 1) if same_ok(b)), N + 1)
    return n0, n1


@dataclass
class CounterexampleInstance:
    """Truncated family with the generation-time checks of its inequalities"""
    K: float
    n0: int
    n1: int
    N: int
    pm: PartialMap
    checks: dict = field(default_factory=dict)

    @property
    def indices(self):
        return list(range(self.n1, self.N + 1))

    def to_json(self):
        return {
            "K": self.K,
            "n0": self.n0,
            "n1": self.n1,
            "N": self.N,
            "points": self.pm.points.tolist(),
            "values": [v.to_json() for v in self.pm.values],
            "checks": self.checks,
        }


def gen_counterexample(K=None, n1=None, N=None, settings=None):
    """
    Build and check the truncated family x_n, y_n -> u_n, v_n, n1 <= n <= N

    Parameters:
    K: selection parameter (default 11)
    n1: first index (default 1)
    N: truncation (default 5)

    Returns:
    CounterexampleInstance
    """
    settings = settings or DEFAULT_SETTINGS
    K = float(settings.counterexample_K if K is None else K)
    n1 = int(settings.counterexample_n1 if n1 is None else n1)
    N = int(settings.counterexample_N if N is None else N)

    if not K > 1 or selection_value(K) <= THRESHOLD:
        raise InputError(f"K={K:g} fails the selection inequality ({selection_value(K) if K > 1 else float('nan'):.5f} <= 3/8)")
    if n1 < 1 or N < n1:
        raise InputError(f"Need 1 <= n1 <= N, got n1={n1}, N={N}")
    safe = max_safe_N(K)
    if N > safe:
        raise InputError(f"N={N} exceeds double precision safety for K={K:g}; max safe N is {safe}", max_safe_N=safe)

    n0, n1_min = _index_thresholds(K, N)
    if n1 < max(n0, n1_min):
        raise InputError(f"n1={n1} is below the computed thresholds n0={n0}, n1={n1_min}")

    indices = range(n1, N + 1)
    points = [(K ** (2 * n), K ** n, 0.0, 0.0) for n in indices] + [(0.0, 0.0, K ** (2 * n), K ** n) for n in indices]
    values = [EcSeq(*_u_prefix(K, n)) for n in indices] + [EcSeq(*_v_prefix(K, n)) for n in indices]
    pm = PartialMap(counterexample_space(), np.asarray(points), tuple(values), HolderParams(1.0, 1.0), kind="ec")

    instance = CounterexampleInstance(K=K, n0=n0, n1=n1, N=N, pm=pm)
    instance.checks = _instance_checks(instance, settings)
    failed = [name for name, check in instance.checks.items() if not check["ok"]]
    if failed:
        raise InputError(f"Counterexample instance fails its checks: {', '.join(failed)}")
    logger.debug("Counterexample K=%g n0=%d n1=%d N=%d with %d points", K, n0, n1, N, pm.size)
    return instance


def _instance_checks(inst, settings):
    """Numeric re-check of every inequality the family relies on"""
    K, idx = inst.K, inst.indices
    count = len(idx)
    xs, ys = inst.pm.points[:count], inst.pm.points[count:]
    us, vs = inst.pm.values[:count], inst.pm.values[count:]
    space = inst.pm.space
    rel = settings.rel_tol

    with mp.workdps(PRECISION):
        norm_excess = max(float(_exact_norm(K, n) - mpf(K) ** (2 * n) - mpf(1) / 2) for n in idx)

    cross_norm = max(
        abs(space.norm(xs[a] - ys[b]) - (space.norm(xs[a]) + space.norm(ys[b]))) / (space.norm(xs[a]) + space.norm(ys[b]))
        for a in range(count) for b in range(count)
    )
    uu = max(
        (sup_dist(us[a], us[b]) - (K ** (2 * idx[a]) - K ** (2 * idx[b]) + 3 / 8) for a in range(count) for b in range(a)),
        default=None,
    )
    uv = max(abs(sup_dist(us[a], vs[b]) - (K ** (2 * idx[a]) + K ** (2 * idx[b]) + 7 / 8)) for a in range(count) for b in range(count))
    lipschitz = holder_constant(inst.pm, 1.0)

    return {
        "selection": {"value": selection_value(K), "ok": selection_value(K) > THRESHOLD},
        "norm_bound": {"worst_excess": norm_excess, "ok": norm_excess <= 0},
        "cross_norm_additivity": {"worst_relative_gap": cross_norm, "ok": cross_norm <= rel},
        "u_u_distance": {"worst_excess": uu, "ok": uu is None or uu <= 0.0},
        "u_v_distance": {"worst_gap": uv, "ok": uv == 0.0},
        "lipschitz": {"constant": lipschitz, "ok": lipschitz <= 1 + settings.holder_tol},
        "thresholds": {"n0": inst.n0, "n1": inst.n1, "ok": inst.n1 >= inst.n0},
    }


@dataclass
class ObstructionCertificate:
    """Exact forced intervals at 0 and the alternation they force"""
    K: float
    n1: int
    N: int
    intervals: list
    tail_interval: Interval
    odd_lo_min: float
    even_hi_max: float
    minimal_prefix_length: int
    forced_sign_coordinates: int
    float_discrepancy: float
    checks: dict

    @property
    def ok(self):
        return all(check["ok"] for check in self.checks.values())

    def to_json(self):
        return {
            "K": self.K,
            "n1": self.n1,
            "N": self.N,
            "intervals": [{"k": k, **iv.to_json()} for k, iv in enumerate(self.intervals, start=1)],
            "tail_interval": self.tail_interval.to_json(),
            "odd_lo_min": self.odd_lo_min,
            "even_hi_max": self.even_hi_max,
            "minimal_prefix_length": self.minimal_prefix_length,
            "forced_sign_coordinates": self.forced_sign_coordinates,
            "float_discrepancy": self.float_discrepancy,
            "checks": self.checks,
            "ok": self.ok,
        }


def _exact_intervals(inst):
    """Forced intervals at 0 in multiple precision: (per coordinate, tail)"""
    with mp.workdps(PRECISION):
        radii = [_exact_norm(inst.K, n) for n in inst.indices] * 2
        seqs = [([mpf(v) for v in s.expand(inst.N)], mpf(s.tail)) for s in inst.pm.values]
        per_coordinate = []
        for k in range(inst.N):
            lo = max(prefix[k] - r for (prefix, _), r in zip(seqs, radii))
            hi = min(prefix[k] + r for (prefix, _), r in zip(seqs, radii))
            per_coordinate.append(Interval(lo, hi))
        tail = Interval(max(t - r for (_, t), r in zip(seqs, radii)), min(t + r for (_, t), r in zip(seqs, radii)))
    return per_coordinate, tail


def verify_counterexample(inst, settings=None):
    """
    Obstruction certificate of a counterexample instance at x = 0

    Odd coordinates k <= N must have lo >= 1/8 - tol and even ones
    hi <= -1/8 + tol; every interval must be nonempty.

    Returns:
    ObstructionCertificate
    """
    settings = settings or DEFAULT_SETTINGS
    tol = mpf(settings.holder_tol)
    exact, exact_tail = _exact_intervals(inst)

    float_cert = forced_intervals(inst.pm, np.zeros(inst.pm.space.dim))
    scale = float(inst.K) ** (2 * inst.N)
    float_intervals = float_cert.per_coordinate + [float_cert.tail_interval] * (inst.N - len(float_cert.per_coordinate))
    discrepancy = max(
        max(abs(float(e.lo) - f.lo), abs(float(e.hi) - f.hi)) for e, f in zip(exact, float_intervals[: inst.N])
    )
    discrepancy = max(discrepancy, abs(float(exact_tail.lo) - float_cert.tail_interval.lo), abs(float(exact_tail.hi) - float_cert.tail_interval.hi))

    eighth = mpf(1) / 8
    odd = [iv.lo for k, iv in enumerate(exact, start=1) if k % 2 == 1]
    even = [iv.hi for k, iv in enumerate(exact, start=1) if k % 2 == 0]
    odd_lo_min = min(odd)
    even_hi_max = max(even) if even else None
    forced = sum(1 for iv in exact if iv.lo > 0 or iv.hi < 0)
    prefix = minimal_prefix_length(exact, exact_tail)

    checks = {
        "nonempty": {"ok": all(iv.lo <= iv.hi for iv in exact) and exact_tail.lo <= exact_tail.hi},
        "odd_lower_bound": {"value": float(odd_lo_min), "ok": odd_lo_min >= eighth - tol},
        "even_upper_bound": {"value": None if even_hi_max is None else float(even_hi_max), "ok": even_hi_max is None or even_hi_max <= -eighth + tol},
        "float_agreement": {"value": discrepancy, "ok": discrepancy <= settings.rel_tol * scale},
        "prefix_length": {"value": prefix, "ok": prefix is not None and prefix >= inst.N - 1 and forced == inst.N},
    }
    certificate = ObstructionCertificate(
        K=inst.K,
        n1=inst.n1,
        N=inst.N,
        intervals=[Interval(float(iv.lo), float(iv.hi)) for iv in exact],
        tail_interval=Interval(float(exact_tail.lo), float(exact_tail.hi)),
        odd_lo_min=float(odd_lo_min),
        even_hi_max=None if even_hi_max is None else float(even_hi_max),
        minimal_prefix_length=prefix,
        forced_sign_coordinates=forced,
        float_discrepancy=discrepancy,
        checks=checks,
    )
    logger.debug("Obstruction at N=%d: odd lo >= %.6f, even hi <= %s, prefix %s", inst.N, float(odd_lo_min), even_hi_max, prefix)
    return certificate
