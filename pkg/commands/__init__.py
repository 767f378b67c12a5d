"""
CLI commands. Each module exposes run(args) -> CommandResult; the helpers
here turn parsed flags into Settings, load the problem file and assemble
the certificate.
"""
import logging
import sys
from dataclasses import dataclass, field, replace

import numpy as np

from utils.certificates import build_certificate, input_digest, verification_block
from utils.data_manager import load_problem
from utils.errors import ConeCoverError, InfeasibleExtensionError, InputError, VerificationError
from utils.settings import DEFAULT_SETTINGS

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_VERIFICATION = 3

# Errors that stop a run with exit code 3 and a certificate naming the failure
RUN_FAILURES = (InfeasibleExtensionError, VerificationError, ConeCoverError)

# Flags echoed into the certificate when set
ECHOED_FLAGS = (
    "space", "alpha", "K", "at", "eps", "delta", "policy", "tol", "resolution",
    "N", "n1", "target", "modulus", "witnesses", "variant", "quick",
)


@dataclass
class CommandResult:
    exit_code: int
    certificate: dict
    tables: dict = field(default_factory=dict)


def settings_from_args(args):
    """Settings with the command line overrides applied"""
    changes = {}
    if getattr(args, "tol", None) is not None:
        changes["holder_tol"] = float(args.tol)
    if getattr(args, "policy", None) is not None:
        changes["default_policy"] = args.policy
        changes["c_policy"] = args.policy
    if getattr(args, "delta", None) is not None:
        changes["c0_cone_delta"] = float(args.delta)
    if getattr(args, "eps", None) is not None:
        changes["partition_epsilon"] = float(args.eps)
    if getattr(args, "resolution", None) is not None:
        changes["cone_resolution"] = int(args.resolution)
    return replace(DEFAULT_SETTINGS, **changes)


def command_echo(name, args):
    echo = {"name": name}
    for flag in ECHOED_FLAGS:
        value = getattr(args, flag, None)
        if value is None or value is False:
            continue
        if flag == "at":
            value = [np.asarray(x).tolist() for x in value]
        elif flag == "space":
            value = value.to_json()
        echo[flag] = value
    return echo


def problem_from_args(args, name):
    """
    Load the problem file named on the command line (stdin for "-")

    Returns:
    tuple: (Problem, input digest)
    """
    source = sys.stdin if args.problem == "-" else args.problem
    problem = load_problem(source, name, space=getattr(args, "space", None), alpha=getattr(args, "alpha", None), K=getattr(args, "K", None), at=getattr(args, "at", None))
    # kept on args so a failure later in the run can still cite the input
    args.input_digest = input_digest(problem.to_json())
    return problem, args.input_digest


def option(args, problem, name, default=None, convert=None):
    """
    Command line flag, then the problem's options block, then the default

    `convert` is applied to a supplied value; values it rejects are
    reported as InputError.
    """
    value = getattr(args, name, None)
    if value is None and problem is not None:
        value = problem.options.get(name)
    if value is None:
        return default
    if convert is None:
        return value
    try:
        return convert(value)
    except InputError:
        raise
    except (TypeError, ValueError):
        raise InputError(f"Invalid option {name!r}: {value!r}") from None


def finish(name, args, digest, results, checks, settings, tables=None):
    """Certificate and exit code from the results and the verification checks"""
    verification = verification_block(checks)
    certificate = build_certificate(command_echo(name, args), digest, results, verification, settings)
    if not verification["ok"]:
        logger.error("Verification failed: %s", ", ".join(verification["failing"]))
    code = EXIT_OK if verification["ok"] else EXIT_VERIFICATION
    return CommandResult(exit_code=code, certificate=certificate, tables=tables or {})


def failure(name, args, error, settings):
    """Certificate for a run stopped by an infeasible or unverifiable result"""
    digest = getattr(args, "input_digest", None)
    failing = getattr(error, "certificate", None)
    if failing is None:
        failing = getattr(error, "failing", None)
    if failing is None and hasattr(error, "diagnostics"):
        failing = error.diagnostics()
    checks = {"run": {"ok": False, "error": type(error).__name__, "message": str(error), "failing": failing}}
    return finish(name, args, digest, {"error": str(error)}, checks, settings)
