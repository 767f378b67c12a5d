"""partition: covering of M (or M - x) in l_inf^n by near-additive cells"""
import logging

import numpy as np

from commands import finish, option, problem_from_args, settings_from_args
from utils.errors import InputError
from utils.linf_partition import linf_partition, verify_partition
from utils.spaces import polytope_embed

logger = logging.getLogger(__name__)


def run(args):
    settings = settings_from_args(args)
    problem, digest = problem_from_args(args, "partition")
    epsilon = option(args, problem, "eps", settings.partition_epsilon, convert=float)

    points = problem.points
    if problem.extend_at:
        points = points - problem.extend_at[0]
    if problem.space.kind == "polytope":
        points = polytope_embed(problem.space).apply_many(points)
    elif problem.space.kind != "linf":
        raise InputError(f"partition needs an l_inf or polytope space, got {problem.space.describe()}")

    trace = linf_partition(points, epsilon)
    check = verify_partition(points, trace, tol=settings.holder_tol)
    assignment = trace.assignment()
    logger.info("Partitioned %d points into %d cells", points.shape[0], len(trace.cells))

    results = {
        "epsilon": epsilon,
        "embedded_points": points,
        "partition": trace,
        "assignment": assignment,
        "cell_count": len(trace.cells),
    }
    checks = {
        "cells": check.to_json(),
        "assigned": {"ok": bool(np.all(assignment >= 0))},
    }
    return finish("partition", args, digest, results, checks, settings, {"Cells": trace.to_frame()})
