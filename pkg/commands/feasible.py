"""feasible: forced intervals at each extension point and the c criterion for sequence data"""
import pandas as pd

from commands import finish, problem_from_args, settings_from_args
from utils.certificates import intervals_frame
from utils.extend_c import c_feasible, forced_intervals
from utils.extend_core import feasibility_interval, vector_certificate


def _interval_ok(certificate, tol):
    scale = max([1.0] + [abs(v) for iv in certificate.intervals() for v in (iv.lo, iv.hi)])
    return certificate.margin >= -tol * scale


def run(args):
    settings = settings_from_args(args)
    problem, digest = problem_from_args(args, "feasible")
    pm = problem.pm

    results, checks, frames = [], {}, []
    for i, x in enumerate(problem.extend_at):
        if pm.kind == "ec":
            certificate = forced_intervals(pm, x)
            criterion = c_feasible(pm, x, tol=settings.holder_tol)
            results.append({"x": x, "certificate": certificate, "c_feasible": criterion._asdict()})
            checks[f"point{i}.c_feasible"] = {"margin": criterion.margin, "ok": criterion.feasible}
        else:
            certificate = vector_certificate(pm, x)
            entry = {"x": x, "certificate": certificate}
            if pm.kind == "scalar":
                entry["interval"] = feasibility_interval(pm, x)
            results.append(entry)
        checks[f"point{i}.intervals"] = {"margin": certificate.margin, "witness": certificate.witness, "ok": _interval_ok(certificate, settings.holder_tol)}
        frames.append(intervals_frame(certificate).assign(point=i))

    tables = {"Intervals": pd.concat(frames, ignore_index=True)}
    return finish("feasible", args, digest, {"target": pm.kind, "points": results}, checks, settings, tables)
