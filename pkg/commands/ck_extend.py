"""ck-extend: sup formula extension into C(K) with the modulus, and the inf-convolution"""
import pandas as pd

from commands import RUN_FAILURES, failure, finish, option, problem_from_args, settings_from_args
from utils.data_manager import read_json
from utils.extend_ck import ModulusTable, ck_extend, infconv_ck, verify_ck_extension, xi_modulus


def run(args):
    settings = settings_from_args(args)
    problem, digest = problem_from_args(args, "ck-extend")
    pm = problem.pm
    supplied = option(args, problem, "modulus")
    supplied = ModulusTable.from_json(read_json(supplied) if isinstance(supplied, str) else supplied) if supplied is not None else None

    results, checks, frames = [], {}, []
    try:
        for i, x in enumerate(problem.extend_at):
            table = supplied if supplied is not None else xi_modulus(pm, x, max_knots=settings.modulus_max_knots)
            value = ck_extend(pm, x, modulus=table, tol=settings.holder_tol)
            lower = infconv_ck(pm, x)
            results.append({"x": x, "value": value, "infconv": lower, "modulus": table})
            checks[f"point{i}.sup_formula"] = verify_ck_extension(pm, x, value, tol=settings.holder_tol)
            checks[f"point{i}.infconv"] = verify_ck_extension(pm, x, lower, tol=settings.holder_tol)
            frames.append(table.to_frame().assign(point=i))
    except RUN_FAILURES as exc:
        return failure("ck-extend", args, exc, settings)

    tables = {"Modulus": pd.concat(frames, ignore_index=True)}
    return finish("ck-extend", args, digest, {"points": results}, checks, settings, tables)
