"""
holder-extend command line.

    holder-extend check problem.json
    holder-extend extend problem.json --at 0 --policy lo --out cert.json
    holder-extend counterexample --K 11 --n1 1 --N 5

The certificate goes to stdout (or --out); logs go to stderr. Exit codes:
0 when every verification passes, 2 on input errors, 3 when a result is
infeasible or fails its re-verification.
"""
import argparse
import json
import logging
import sys

from commands import (
    EXIT_INPUT,
    EXIT_OK,
    RUN_FAILURES,
    check,
    ck_check,
    ck_extend,
    counterexample,
    cover,
    extend,
    failure,
    feasible,
    partition,
    reduce,
    selftest,
    settings_from_args,
    template,
)
from utils.certificates import canonical_json, write_workbook
from utils.data_manager import parse_point_flag, parse_space_flag
from utils.errors import InputError
from utils.settings import POLICIES, TOOL_VERSION

logger = logging.getLogger("holder_extend")

COMMANDS = {
    "check": (check, "Hölder constant of the data and a check of the declared K"),
    "extend": (extend, "One-point extension at every point of extend_at"),
    "feasible": (feasible, "Forced intervals and the c criterion"),
    "partition": (partition, "Near-additive covering of M in l_inf^n"),
    "cover": (cover, "Cone covering of a finite dimensional space"),
    "ck-extend": (ck_extend, "Extension into C(K) by the modulus sup formula"),
    "ck-check": (ck_check, "C(K) criterion at scale delta and modulus tables"),
    "reduce": (reduce, "Sequence data from C(K) data along witness pairs"),
    "counterexample": (counterexample, "Truncated family without an extension into c"),
    "selftest": (selftest, "Randomized acceptance suite"),
    "template": (template, "Write example problem files"),
}
NO_PROBLEM = ("counterexample", "selftest", "template", "cover")


def _witnesses(text):
    return json.loads(text)


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    common.add_argument("-q", "--quiet", action="store_true", help="warnings and errors only")
    common.add_argument("--out", help="write the certificate here instead of stdout")
    common.add_argument("--xlsx", help="also write the certificate tables to an Excel workbook")
    common.add_argument("--tol", type=float, help="relative tolerance of every check")

    problem = argparse.ArgumentParser(add_help=False)
    problem.add_argument("--space", type=parse_space_flag, help="space descriptor (JSON, linf:N, lp:P:N, l1sum:A+B)")
    problem.add_argument("--alpha", type=float, help="Hölder exponent in (0, 1]")
    problem.add_argument("--K", type=float, help="Hölder constant (computed from the data when absent)")
    problem.add_argument("--at", type=parse_point_flag, action="append", help="extension point; repeatable")
    problem.add_argument("--eps", type=float, help="slack of partitions, nets and witness search")
    problem.add_argument("--delta", type=float, help="cone parameter or C(K) scale")
    problem.add_argument("--policy", choices=POLICIES, help="choice inside forced intervals")
    problem.add_argument("--resolution", type=int, help="starting grid resolution of cone nets")
    problem.add_argument("--target", choices=("scalar", "vector", "c0", "c", "function"), help="target space")
    problem.add_argument("--variant", help="c_0: four_case|lipschitz; c: envelope|partition")
    problem.add_argument("--modulus", help="modulus table JSON file for ck-extend")
    problem.add_argument("--witnesses", type=_witnesses, help="JSON list of [t, s] pairs for reduce")

    parser = argparse.ArgumentParser(prog="holder-extend", description="Hölder extension toolkit")
    parser.add_argument("--version", action="version", version=f"%(prog)s {TOOL_VERSION}")
    sub = parser.add_subparsers(dest="command", required=True)

    for name, (_, help_text) in COMMANDS.items():
        if name == "counterexample":
            cmd = sub.add_parser(name, parents=[common], help=help_text)
            cmd.add_argument("--K", type=float, help="selection parameter (default 11)")
            cmd.add_argument("--n1", type=int, help="first index (default 1)")
            cmd.add_argument("--N", type=int, help="truncation (default 5)")
        elif name == "selftest":
            cmd = sub.add_parser(name, parents=[common], help=help_text)
            cmd.add_argument("--quick", action="store_true", help="a tenth of the instances")
        elif name == "template":
            cmd = sub.add_parser(name, parents=[common], help=help_text)
            cmd.add_argument("directory", nargs="?", default="templates")
        else:
            cmd = sub.add_parser(name, parents=[common, problem], help=help_text)
            cmd.add_argument("problem", nargs="?" if name in NO_PROBLEM else None, help="problem JSON file, - for stdin")
    return parser


def configure_logging(args):
    level = logging.DEBUG if args.verbose else logging.WARNING if args.quiet else logging.INFO
    logging.basicConfig(stream=sys.stderr, level=level, format="%(levelname)s %(name)s: %(message)s", force=True)


def emit(result, args):
    text = canonical_json(result.certificate) + "\n"
    if args.out:
        with open(args.out, "w", encoding="utf-8") as handle:
            handle.write(text)
        logger.info("Wrote certificate %s", args.out)
    else:
        sys.stdout.write(text)
    if args.xlsx:
        write_workbook(result.certificate, result.tables, args.xlsx)


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    configure_logging(args)
    module, _ = COMMANDS[args.command]

    try:
        result = module.run(args)
    except InputError as exc:
        print(f"holder-extend {args.command}: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except RUN_FAILURES as exc:
        result = failure(args.command, args, exc, settings_from_args(args))

    emit(result, args)
    if result.exit_code == EXIT_OK:
        logger.info("%s: all verifications passed", args.command)
    return result.exit_code


if __name__ == "__main__":
    sys.exit(main())
