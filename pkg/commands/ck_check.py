"""ck-check: the C(K) criterion at a scale delta and the modulus tables"""
import numpy as np
import pandas as pd

from commands import finish, option, problem_from_args, settings_from_args
from utils.extend_ck import ck_feasible, xi_modulus


def modulus_checks(table, tol):
    """Shape of a modulus table: xi nondecreasing, psi >= 0 from 0, phi(0) = 0, phi >= psi on the grid"""
    phi_on_grid = table.phi(table.lambda_grid)
    return {
        "xi_nondecreasing": {"ok": bool(np.all(np.diff(table.xi) >= 0))},
        "psi_nonnegative": {"psi0": float(table.psi[0]), "ok": bool(table.psi[0] == 0 and np.all(table.psi >= 0))},
        "phi_zero": {"phi0": float(table.phi(0.0)), "ok": float(table.phi(0.0)) == 0.0},
        "phi_nondecreasing": {"ok": bool(np.all(np.diff(table.phi_values) >= 0))},
        "phi_dominates_psi": {"worst": float(np.min(phi_on_grid - table.psi)), "ok": bool(np.all(phi_on_grid >= table.psi - tol))},
    }


def run(args):
    settings = settings_from_args(args)
    problem, digest = problem_from_args(args, "ck-check")
    pm = problem.pm
    delta = option(args, problem, "delta", pm.metric_space.min_distance, convert=float)

    results, checks, frames = [], {}, []
    for i, x in enumerate(problem.extend_at):
        criterion = ck_feasible(pm, x, delta, tol=settings.holder_tol)
        table = xi_modulus(pm, x, max_knots=settings.modulus_max_knots)
        results.append({"x": x, "delta": delta, "criterion": criterion._asdict(), "modulus": table})
        checks[f"point{i}.criterion"] = {"worst_excess": criterion.worst_excess, "witness": criterion.witness, "ok": criterion.feasible}
        checks.update({f"point{i}.{name}": check for name, check in modulus_checks(table, settings.holder_tol).items()})
        frames.append(table.to_frame().assign(point=i))

    tables = {"Modulus": pd.concat(frames, ignore_index=True)}
    return finish("ck-check", args, digest, {"points": results}, checks, settings, tables)
