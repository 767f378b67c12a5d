"""reduce: sequence data from C(K) data along witness pairs, plus the nearest point embedding checks"""
import logging

import numpy as np
import pandas as pd

from commands import finish, option, problem_from_args, settings_from_args
from utils.data_manager import read_json
from utils.errors import InputError
from utils.extend_ck import ck_violation_witnesses, embed_c_into_ck, reduce_ck_to_c
from utils.extend_core import holder_constant, verify_holder

logger = logging.getLogger(__name__)


def embedding_checks(embedding, functions):
    """R T = id, |T f| = |f| and P P = P on the given functions"""
    worst_rt = worst_norm = worst_pp = 0.0
    for g in functions:
        f = embedding.restrict(g)
        Tf = embedding.extend(f)
        worst_rt = max(worst_rt, float(np.max(np.abs(embedding.restrict(Tf) - f))))
        worst_norm = max(worst_norm, abs(Tf.sup_norm() - float(np.max(np.abs(f)))))
        Pg = embedding.project(g)
        worst_pp = max(worst_pp, float(np.max(np.abs(embedding.project(Pg).values - Pg.values))))
    return {
        "restrict_extend": {"worst": worst_rt, "ok": worst_rt == 0.0},
        "norm_preserved": {"worst": worst_norm, "ok": worst_norm == 0.0},
        "projection_idempotent": {"worst": worst_pp, "ok": worst_pp == 0.0},
    }


def run(args):
    settings = settings_from_args(args)
    problem, digest = problem_from_args(args, "reduce")
    pm = problem.pm

    witnesses = option(args, problem, "witnesses")
    if isinstance(witnesses, str):
        witnesses = read_json(witnesses)
    found = None
    if witnesses is None:
        if not problem.extend_at:
            raise InputError("reduce needs --witnesses or an extension point to search for them")
        eps = option(args, problem, "eps", 0.0, convert=float)
        found = ck_violation_witnesses(pm, problem.extend_at[0], eps)
        witnesses = [(w.t, w.s) for w in found]
        if not witnesses:
            raise InputError(f"No pair of K has mixed excess above eps={eps:g} at the extension point")

    reduced = reduce_ck_to_c(pm, witnesses)
    alpha = pm.params.alpha
    K_f, K_h = holder_constant(pm, alpha), holder_constant(reduced, alpha)
    results = {
        "witnesses": [list(map(int, w)) for w in witnesses],
        "sequences": list(reduced.values),
        "holder_constant_functions": K_f,
        "holder_constant_sequences": K_h,
    }
    checks = {
        "constant_not_increased": {"K_functions": K_f, "K_sequences": K_h, "ok": K_h <= K_f * (1 + settings.holder_tol) + settings.holder_tol},
        "sequences_holder": verify_holder(reduced, tol=settings.holder_tol).to_json(),
    }
    tables = {}
    if found is not None:
        results["witness_details"] = [w._asdict() for w in found]
        tables["Witnesses"] = pd.DataFrame([w._asdict() for w in found])

    subset = option(args, problem, "subset", convert=lambda raw: [int(i) for i in raw])
    if subset is not None:
        embedding = embed_c_into_ck(pm.metric_space, subset)
        results["embedding"] = embedding
        checks.update(embedding_checks(embedding, pm.values))

    logger.info("Reduced %d functions along %d witness pairs", pm.size, len(witnesses))
    return finish("reduce", args, digest, results, checks, settings, tables)
