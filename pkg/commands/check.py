"""check: Hölder constant of the data and a pair check against the declared K"""
from commands import finish, problem_from_args, settings_from_args
from utils.extend_core import holder_constant, verify_holder


def run(args):
    settings = settings_from_args(args)
    problem, digest = problem_from_args(args, "check")
    pm = problem.pm

    check = verify_holder(pm, tol=settings.holder_tol)
    results = {
        "K": pm.params.K,
        "K_computed": problem.K_computed,
        "alpha": pm.params.alpha,
        "holder_constant": holder_constant(pm, pm.params.alpha),
        "target": pm.kind,
        "size": pm.size,
        "space": pm.space.describe(),
    }
    checks = {"holder": check.to_json()}
    return finish("check", args, digest, results, checks, settings)
