"""counterexample: generate the truncated family and certify the forced sign alternation"""
import pandas as pd

from commands import finish, settings_from_args
from utils.counterexamples import gen_counterexample, verify_counterexample


def run(args):
    settings = settings_from_args(args)
    instance = gen_counterexample(K=args.K, n1=args.n1, N=args.N, settings=settings)
    certificate = verify_counterexample(instance, settings=settings)

    checks = {f"instance.{name}": check for name, check in instance.checks.items()}
    checks.update({f"obstruction.{name}": check for name, check in certificate.checks.items()})
    results = {"instance": instance, "obstruction": certificate}

    rows = [{"k": k, "lo": iv.lo, "hi": iv.hi, "sign": "+" if k % 2 else "-"} for k, iv in enumerate(certificate.intervals, start=1)]
    tables = {"Intervals": pd.DataFrame(rows, columns=["k", "lo", "hi", "sign"])}
    return finish("counterexample", args, None, results, checks, settings, tables)
