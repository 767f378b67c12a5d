"""extend: one-point extension at every point of extend_at, re-verified"""
import logging

import pandas as pd

from commands import RUN_FAILURES, failure, finish, option, problem_from_args, settings_from_args
from utils.certificates import intervals_frame
from utils.errors import InputError
from utils.extend_c import c0_extend, c_extend, c_feasible, linf_c_extend, polytope_c_extend
from utils.extend_core import (
    feasibility_interval,
    infconv_extend,
    linf_vector_extend,
    pick_checked,
    sup_extend,
    vector_certificate,
    verify_extension,
)
from utils.extend_ck import infconv_ck

logger = logging.getLogger(__name__)

C_VARIANTS = ("envelope", "partition")


def _scalar(pm, x, policy, settings):
    interval = feasibility_interval(pm, x)
    value = pick_checked(interval, policy or settings.default_policy, settings.holder_tol)
    result = {"value": value, "interval": interval, "infconv": infconv_extend(pm, x), "sup": sup_extend(pm, x)}
    return value, result, {}


def _vector(pm, x, policy, settings):
    certificate = vector_certificate(pm, x)
    value = linf_vector_extend(pm, x, policy=policy, tol=settings.holder_tol)
    result = {"value": value, "certificate": certificate}
    checks = {}
    if pm.kind == "function":
        lower = infconv_ck(pm, x)
        result["infconv"] = lower
        checks["infconv"] = verify_extension(pm, x, lower, tol=settings.holder_tol).to_json()
    return value, result, checks


def _c0(pm, x, variant, settings):
    value, trace = c0_extend(pm, x, variant=variant or "four_case", settings=settings)
    census = trace.case_counts
    checks = {
        "tail_zero": {"tail": value.tail, "ok": value.tail == 0.0},
        "census": {**census, "ok": census.get("violations", 0) == 0},
    }
    return value, {"value": value, "trace": trace}, checks


def _c(pm, x, variant, policy, settings):
    feasible = c_feasible(pm, x, tol=settings.holder_tol)
    checks = {"c_feasible": {"margin": feasible.margin, "witness": list(feasible.witness), "ok": feasible.feasible}}
    if variant == "partition":
        if pm.space.kind not in ("linf", "polytope"):
            raise InputError(f"The partition variant needs an l_inf or polytope domain, got {pm.space.describe()}")
        extend = linf_c_extend if pm.space.kind == "linf" else polytope_c_extend
        value, trace, report = extend(pm, x, epsilon=settings.partition_epsilon, policy=policy, settings=settings)
        checks["partition"] = {**report.check.to_json(), "ok": report.check.ok and report.chain_slack >= -settings.holder_tol}
        return value, {"value": value, "trace": trace, "partition": report}, checks

    value, trace = c_extend(pm, x, policy=policy, tol=settings.holder_tol)
    return value, {"value": value, "trace": trace}, checks


def extend_at(pm, x, target, variant, policy, settings):
    """
    Extension value at x with the results and checks for the certificate

    Returns:
    tuple: (result dict, checks dict)
    """
    if pm.kind == "scalar":
        value, result, checks = _scalar(pm, x, policy, settings)
    elif pm.kind in ("vector", "function"):
        value, result, checks = _vector(pm, x, policy, settings)
    elif target == "c0":
        value, result, checks = _c0(pm, x, variant, settings)
    else:
        if variant is not None and variant not in C_VARIANTS:
            raise InputError(f"Unknown c variant {variant!r}; expected one of {C_VARIANTS}")
        value, result, checks = _c(pm, x, variant, policy, settings)

    checks["holder"] = verify_extension(pm, x, value, tol=settings.holder_tol).to_json()
    result["x"] = x
    return result, checks


def run(args):
    settings = settings_from_args(args)
    problem, digest = problem_from_args(args, "extend")
    pm = problem.pm
    target = option(args, problem, "target", problem.target or pm.kind)
    variant = option(args, problem, "variant")
    policy = option(args, problem, "policy")

    results, checks, frames = [], {}, []
    try:
        for i, x in enumerate(problem.extend_at):
            result, point_checks = extend_at(pm, x, target, variant, policy, settings)
            results.append(result)
            checks.update({f"point{i}.{name}": check for name, check in point_checks.items()})
            certificate = result.get("certificate") or getattr(result.get("trace"), "certificate", None)
            if certificate is not None:
                frames.append(intervals_frame(certificate).assign(point=i))
    except RUN_FAILURES as exc:
        return failure("extend", args, exc, settings)

    logger.info("Extended a %s map at %d point(s)", pm.kind, len(results))
    tables = {"Intervals": pd.concat(frames, ignore_index=True)} if frames else {}
    census = [dict(point=i, **r["trace"].case_counts) for i, r in enumerate(results) if hasattr(r.get("trace"), "case_counts")]
    if census:
        tables["Census"] = pd.DataFrame(census)
    return finish("extend", args, digest, {"target": target, "extensions": results}, checks, settings, tables)
