"""
selftest: randomized acceptance suite over every module.

Each suite draws seeded instances, runs the construction and re-checks
its output with an independent oracle (pair scans, grid search, exact
arithmetic). A suite passes when no instance fails.
"""
import logging

import numpy as np

from commands import finish, settings_from_args
from commands.ck_check import modulus_checks
from commands.reduce import embedding_checks
from utils.counterexamples import gen_counterexample, selection_value, verify_counterexample
from utils.errors import ExtensionError
from utils.extend_c import c0_extend, c_extend, c_feasible, forced_intervals
from utils.extend_ck import ck_extend, embed_c_into_ck, infconv_ck, reduce_ck_to_c, verify_ck_extension, xi_modulus
from utils.extend_core import feasibility_interval, holder_constant, linf_vector_extend, pick_checked, verify_extension
from utils.linf_partition import linf_partition, verify_partition
from utils.sample_data import (
    SAMPLE_ALPHAS,
    SAMPLE_TARGETS,
    get_sample_instance,
    get_sample_linf_points,
    get_sample_metric_space,
    get_sample_values,
)
from utils.spaces import NormedSpace
from utils.targets import sequence_matrix

logger = logging.getLogger(__name__)

# Every space kind, dimensions 1 to 4
SPACE_POOL = (
    NormedSpace.linf(1),
    NormedSpace.lp(2, 2),
    NormedSpace.linf(2),
    NormedSpace.polytope([[1, 0], [0, 1], [0.5, 0.5]]),
    NormedSpace.lp(1.5, 3),
    NormedSpace.linf(3),
    NormedSpace.l1sum([NormedSpace.lp(2, 1), NormedSpace.lp(2, 2)]),
    NormedSpace.l1sum([NormedSpace.lp(2, 2), NormedSpace.lp(2, 2)]),
    NormedSpace.lp(3, 4),
)
SUITE_SIZES = {
    "extension_correctness": 500,
    "oracle_equivalence": 50,
    "c0_algorithm": 100,
    "partition_covering": 50,
    "modulus_machinery": 100,
    "bridges": 100,
    "monotonicity": 100,
}


def _summary(count, failures, **extra):
    return {"instances": count, "failures": failures[:5], "failure_count": len(failures), "ok": not failures, **extra}


def counterexample_reproduction(settings):
    instance = gen_counterexample(K=11, n1=1, N=5, settings=settings)
    certificate = verify_counterexample(instance, settings=settings)
    failures = [name for name, check in {**instance.checks, **certificate.checks}.items() if not check["ok"]]
    return _summary(
        1,
        failures,
        selection_value=selection_value(11),
        odd_lo_min=certificate.odd_lo_min,
        even_hi_max=certificate.even_hi_max,
        minimal_prefix_length=certificate.minimal_prefix_length,
    )


def _extension_value(pm, x, target, settings):
    if target == "scalar":
        interval = feasibility_interval(pm, x)
        return pick_checked(interval, settings.default_policy, settings.holder_tol)
    if target == "vector":
        return linf_vector_extend(pm, x, tol=settings.holder_tol)
    if target == "c0":
        value, _ = c0_extend(pm, x, settings=settings)
        return value
    if target == "c":
        if not c_feasible(pm, x, tol=settings.holder_tol).feasible:
            raise ExtensionError("c criterion fails on finite data")
        value, _ = c_extend(pm, x, tol=settings.holder_tol)
        return value
    return infconv_ck(pm, x)


def extension_correctness(settings, count):
    """Every kind of one-point extension on random instances, re-verified by a pair scan"""
    failures = []
    for i in range(count):
        rng = np.random.default_rng(i)
        target = SAMPLE_TARGETS[i % len(SAMPLE_TARGETS)]
        pm, x = get_sample_instance(rng, target, space=SPACE_POOL[rng.integers(len(SPACE_POOL))])
        try:
            value = _extension_value(pm, x, target, settings)
            check = verify_extension(pm, x, value, tol=settings.holder_tol)
            if not check.ok:
                failures.append({"instance": i, "target": target, "pair": list(check.pair), "excess": check.worst_excess})
            elif target == "c0" and value.tail != 0.0:
                failures.append({"instance": i, "target": target, "tail": value.tail})
        except ExtensionError as exc:
            failures.append({"instance": i, "target": target, "error": str(exc)})
    return _summary(count, failures)


def oracle_equivalence(settings, count, step=1e-3):
    """Scalar forced interval against a brute-force scan of candidate values"""
    failures = []
    for i in range(count):
        rng = np.random.default_rng(10_000 + i)
        pm, x = get_sample_instance(rng, "scalar", space=SPACE_POOL[rng.integers(len(SPACE_POOL))])
        interval = feasibility_interval(pm, x)
        grid = np.arange(interval.lo - 10 * step, interval.hi + 10 * step, step)
        admissible = np.all(np.abs(grid[:, None] - pm.value_matrix()[None, :]) <= pm.radii(x)[None, :], axis=1)
        found = grid[admissible]
        if found.size:
            error = max(abs(found.min() - interval.lo), abs(found.max() - interval.hi))
        else:
            error = interval.width
        if error > 2 * step:
            failures.append({"instance": i, "lo": interval.lo, "hi": interval.hi, "error": float(error)})
    return _summary(count, failures)


def c0_algorithm(settings, count):
    """Tail 0 and |f(x)(n) - u(n)| <= K |x - x0|^alpha on every coordinate"""
    failures = []
    for i in range(count):
        rng = np.random.default_rng(20_000 + i)
        pm, x = get_sample_instance(rng, "c0", space=SPACE_POOL[rng.integers(len(SPACE_POOL))])
        try:
            value, trace = c0_extend(pm, x, settings=settings)
        except ExtensionError as exc:
            failures.append({"instance": i, "error": str(exc)})
            continue
        matrix, _ = sequence_matrix(pm.values)
        gaps = np.abs(matrix - value.expand(matrix.shape[1])[None, :])
        bound = pm.radii(x)[:, None]
        if value.tail != 0.0 or np.any(gaps > bound + settings.holder_tol * np.maximum(1.0, bound)):
            failures.append({"instance": i, "N": trace.N, "tail": value.tail})
    return _summary(count, failures)


def partition_covering(settings, count, epsilon=0.1):
    """Cell inequalities of the l_inf partition, checked exhaustively"""
    failures = []
    for i in range(count):
        rng = np.random.default_rng(30_000 + i)
        points = get_sample_linf_points(rng, int(rng.integers(1, 4)), int(rng.integers(1, 31)))
        trace = linf_partition(points, epsilon)
        check = verify_partition(points, trace, tol=settings.holder_tol)
        if not check.ok:
            failures.append({"instance": i, "worst_excess": check.worst_excess, "covered": check.covered})
    return _summary(count, failures)


def modulus_machinery(settings, count):
    """Shape of the modulus tables and the sup formula extension into C(K)"""
    failures = []
    for i in range(count):
        rng = np.random.default_rng(40_000 + i)
        pm, x = get_sample_instance(
            rng, "function", space=SPACE_POOL[rng.integers(len(SPACE_POOL))], metric_size=int(rng.integers(2, 21))
        )
        try:
            table = xi_modulus(pm, x, max_knots=settings.modulus_max_knots)
            value = ck_extend(pm, x, modulus=table, tol=settings.holder_tol)
        except ExtensionError as exc:
            failures.append({"instance": i, "error": str(exc)})
            continue
        checks = modulus_checks(table, settings.holder_tol)
        checks["extension"] = verify_ck_extension(pm, x, value, tol=settings.holder_tol)
        failed = [name for name, check in checks.items() if not check["ok"]]
        if failed:
            failures.append({"instance": i, "failed": failed})
    return _summary(count, failures)


def close_witnesses(rng, metric, count):
    """Random pairs (t_j, s_j) of K with rho(t_j, s_j) < 1/j"""
    pairs = []
    for j in range(1, count + 1):
        t = int(rng.integers(metric.size))
        close = np.flatnonzero(metric.rho[t] < 1.0 / j)
        pairs.append((t, int(rng.choice(close))))
    return pairs


def bridges(settings, count):
    """Nearest point embedding identities and the C(K) to c reduction"""
    failures = []
    for i in range(count):
        rng = np.random.default_rng(50_000 + i)
        metric = get_sample_metric_space(rng, int(rng.integers(2, 11)))
        subset = rng.choice(metric.size, size=int(rng.integers(1, metric.size + 1)), replace=False)
        embedding = embed_c_into_ck(metric, subset)
        failed = [name for name, check in embedding_checks(embedding, get_sample_values(rng, "function", 3, metric=metric)).items() if not check["ok"]]

        pm, _ = get_sample_instance(rng, "function", space=SPACE_POOL[rng.integers(len(SPACE_POOL))], metric_size=int(rng.integers(2, 7)))
        witnesses = close_witnesses(rng, pm.metric_space, int(rng.integers(1, 4)))
        alpha = pm.params.alpha
        K_f, K_h = holder_constant(pm, alpha), holder_constant(reduce_ck_to_c(pm, witnesses), alpha)
        if K_h > K_f * (1 + settings.holder_tol) + settings.holder_tol:
            failed.append("reduction")
        if failed:
            failures.append({"instance": i, "failed": failed})
    return _summary(count, failures)


def monotonicity(settings, count):
    """Forced intervals shrink when a point is added; counterexample prefix grows with N"""
    failures = []
    for i in range(count):
        rng = np.random.default_rng(60_000 + i)
        pm, x = get_sample_instance(rng, "c", space=SPACE_POOL[rng.integers(len(SPACE_POOL))], size=int(rng.integers(2, 9)), alpha=float(rng.choice(SAMPLE_ALPHAS)))
        small = forced_intervals(pm.restricted(range(pm.size - 1)), x)
        big = forced_intervals(pm, x)
        if not small.contains(big, tol=settings.holder_tol):
            failures.append({"instance": i})

    prefixes = [verify_counterexample(gen_counterexample(K=11, n1=1, N=N, settings=settings), settings=settings).minimal_prefix_length for N in range(1, 6)]
    if any(b < a for a, b in zip(prefixes, prefixes[1:])):
        failures.append({"counterexample_prefixes": prefixes})
    return _summary(count, failures, counterexample_prefixes=prefixes)


def run(args):
    settings = settings_from_args(args)
    scale = 10 if getattr(args, "quick", False) else 1
    sizes = {name: max(1, size // scale) for name, size in SUITE_SIZES.items()}

    checks = {"counterexample_reproduction": counterexample_reproduction(settings)}
    suites = {
        "extension_correctness": extension_correctness,
        "oracle_equivalence": oracle_equivalence,
        "c0_algorithm": c0_algorithm,
        "partition_covering": partition_covering,
        "modulus_machinery": modulus_machinery,
        "bridges": bridges,
        "monotonicity": monotonicity,
    }
    for name, suite in suites.items():
        logger.info("Running %s on %d instances", name, sizes[name])
        checks[name] = suite(settings, sizes[name])

    return finish("selftest", args, None, {"suites": sorted(checks), "sizes": sizes}, checks, settings)
