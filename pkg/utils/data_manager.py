"""
Problem files: loading JSON, validating it against what each command needs
and turning it into a PartialMap plus extension points.
"""
import json
import logging
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from utils.errors import InputError
from utils.extend_core import PartialMap, holder_constant
from utils.spaces import HolderParams, NormedSpace
from utils.targets import EcSeq, FiniteFunction, FiniteMetricSpace

logger = logging.getLogger(__name__)

# Which parts of a problem each command requires
SCHEMAS = {
    "check": {"required": ["space", "points", "values"], "targets": None, "needs_at": False},
    "extend": {"required": ["space", "points", "values"], "targets": None, "needs_at": True},
    "feasible": {"required": ["space", "points", "values"], "targets": None, "needs_at": True},
    "partition": {"required": ["space", "points"], "targets": None, "needs_at": False},
    "cover": {"required": ["space"], "targets": None, "needs_at": False},
    "ck-extend": {"required": ["space", "points", "values", "metric"], "targets": ("function",), "needs_at": True},
    "ck-check": {"required": ["space", "points", "values", "metric"], "targets": ("function",), "needs_at": True},
    "reduce": {"required": ["space", "points", "values", "metric"], "targets": ("function",), "needs_at": False},
}

# Problem-file target names and the value kinds they hold
TARGET_ALIASES = {"scalar": "scalar", "vector": "vector", "c": "ec", "c0": "ec", "ec": "ec", "function": "function"}


@dataclass
class Problem:
    """A parsed problem: the partial map (if any values were given), the points to extend at and options"""
    space: NormedSpace
    points: np.ndarray = None
    pm: PartialMap = None
    extend_at: list = field(default_factory=list)
    options: dict = field(default_factory=dict)
    metric: FiniteMetricSpace = None
    K_computed: bool = False
    target: str = None

    def to_json(self):
        """Normalized form used for the input digest"""
        out = {"space": self.space.to_json(), "options": self.options, "extend_at": [list(map(float, x)) for x in self.extend_at]}
        if self.points is not None:
            out["points"] = self.points.tolist()
        if self.pm is not None:
            out["alpha"] = self.pm.params.alpha
            out["K"] = self.pm.params.K
            out["K_computed"] = self.K_computed
            out["target"] = self.target or self.pm.kind
            out["values"] = [v.to_json() if hasattr(v, "to_json") else np.asarray(v).tolist() for v in self.pm.values]
        if self.metric is not None:
            out["metric"] = self.metric.to_json()
        return out


def read_json(source):
    """
    Read JSON from a path, a JSON string or a file object

    Decode errors are reported as InputError with the line and column.
    """
    if hasattr(source, "read"):
        text = source.read()
    elif isinstance(source, Path) or (isinstance(source, str) and not source.lstrip().startswith(("{", "["))):
        try:
            text = Path(source).read_text(encoding="utf-8")
        except OSError as exc:
            raise InputError(f"Cannot read problem file {source}: {exc.strerror}") from None
    else:
        text = source

    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"Malformed JSON at line {exc.lineno} column {exc.colno}: {exc.msg}", position=exc.pos) from None


def parse_space_flag(text):
    """
    Space from the --space flag: a JSON descriptor or a shorthand

    Shorthands: "linf:N", "lp:P:N" and "l1sum:lp:2:2+lp:2:2".
    """
    text = text.strip()
    if text.startswith("{"):
        return NormedSpace.from_json(read_json(text))

    head, _, rest = text.partition(":")
    try:
        if head == "linf":
            return NormedSpace.linf(int(rest))
        if head == "lp":
            p, dim = rest.split(":")
            return NormedSpace.lp(float(p), int(dim))
        if head == "l1sum":
            return NormedSpace.l1sum(parse_space_flag(part) for part in rest.split("+"))
    except ValueError:
        pass
    raise InputError(f"Cannot parse space {text!r}; use a JSON descriptor, linf:N, lp:P:N or l1sum:A+B")


def parse_point_flag(text):
    """Point from the --at flag: a JSON list or comma separated numbers"""
    text = text.strip()
    if text.startswith("["):
        return np.asarray(read_json(text), dtype=float).reshape(-1)
    try:
        return np.array([float(v) for v in text.split(",")])
    except ValueError:
        raise InputError(f"Cannot parse point {text!r}; use a JSON list or comma separated numbers") from None


def _points(raw, dim, name):
    try:
        points = np.asarray(raw, dtype=float)
    except (TypeError, ValueError):
        raise InputError(f"'{name}' must be a list of points with numeric coordinates") from None
    if points.ndim == 1 and dim == 1:
        points = points.reshape(-1, 1)
    if points.ndim != 2 or points.shape[1] != dim:
        raise InputError(f"'{name}' must hold points with {dim} coordinates")
    if not np.all(np.isfinite(points)):
        raise InputError(f"'{name}' must be finite")
    return points


def _field(name, parse, *args):
    """parse(*args), with bad values of problem field `name` reported as InputError"""
    try:
        return parse(*args)
    except InputError:
        raise
    except (TypeError, ValueError, AttributeError) as exc:
        raise InputError(f"Invalid '{name}': {exc}") from None


def _extend_at(raw, dim):
    if not isinstance(raw, list):
        raise InputError("'extend_at' must be a list of points")
    points = [np.asarray(x, dtype=float).reshape(-1) for x in raw]
    for x in points:
        if x.shape[0] != dim:
            raise InputError(f"Extension point has {x.shape[0]} coordinates, space has {dim}")
        if not np.all(np.isfinite(x)):
            raise InputError("Extension points must be finite")
    return points


def _values(raw, metric):
    """Target values of one homogeneous kind"""
    if not isinstance(raw, list) or not raw:
        raise InputError("'values' must be a non-empty list")
    if metric is not None:
        return [FiniteFunction(values=v, space=metric) for v in raw]
    if all(isinstance(v, dict) for v in raw):
        return [EcSeq.from_json(v) for v in raw]
    if all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in raw):
        return [float(v) for v in raw]
    if all(isinstance(v, list) for v in raw):
        return [np.asarray(v, dtype=float) for v in raw]
    raise InputError("'values' must all be numbers, all vectors or all sequence objects {prefix, tail}")


def build_problem(data, space=None, alpha=None, K=None, at=None):
    """
    Assemble a Problem from decoded JSON, flags taking precedence

    Parameters:
    data: decoded problem dict
    space, alpha, K: values from the command line, or None
    at: list of points from the command line, or None

    Returns:
    Problem
    """
    if not isinstance(data, dict):
        raise InputError("A problem file must hold a JSON object")

    if space is None:
        if "space" not in data:
            raise InputError("Problem has no 'space' descriptor and no --space flag was given")
        space = _field("space", NormedSpace.from_json, data["space"])

    metric = _field("metric", FiniteMetricSpace.from_json, data["metric"]) if data.get("metric") is not None else None
    points = _points(data["points"], space.dim, "points") if "points" in data else None

    pm = None
    computed = False
    target = data.get("target")
    if target is not None and target not in TARGET_ALIASES:
        raise InputError(f"Unknown target {target!r}; expected one of {sorted(TARGET_ALIASES)}")
    if "values" in data:
        if points is None:
            raise InputError("Problem has 'values' but no 'points'")
        values = _field("values", _values, data["values"], metric)
        alpha = _field("alpha", float, data.get("alpha", 1.0) if alpha is None else alpha)
        K = data.get("K") if K is None else K
        pm = _field("values", PartialMap, space, points, tuple(values), HolderParams(0.0, alpha), TARGET_ALIASES.get(target, target))
        if K is None:
            K = holder_constant(pm, alpha)
            computed = True
            logger.info("Hölder constant not given; computed K=%.17g", K)
        pm = pm.with_params(_field("K", HolderParams, _field("K", float, K), alpha))

    extend_at = at if at is not None else _field("extend_at", _extend_at, data.get("extend_at", []), space.dim)
    for x in extend_at:
        if x.shape[0] != space.dim:
            raise InputError(f"Extension point has {x.shape[0]} coordinates, space has {space.dim}")

    options = data.get("options", {})
    if not isinstance(options, dict):
        raise InputError("'options' must be an object")
    return Problem(space=space, points=points, pm=pm, extend_at=list(extend_at), options=options, metric=metric, K_computed=computed, target=target)


def validate_problem(data, command, **flags):
    """
    Validate a decoded problem for a command

    Parameters:
    data: decoded JSON (dict)
    command: CLI command name
    flags: space, alpha, K, at overrides

    Returns:
    tuple: (is_valid, message, problem)
    """
    schema = SCHEMAS.get(command)
    if schema is None:
        return False, f"Command {command!r} does not take a problem file", None
    if not isinstance(data, dict):
        return False, "A problem file must hold a JSON object", None

    present = set(data) | ({"space"} if flags.get("space") is not None else set())
    missing = [name for name in schema["required"] if name not in present]
    if missing:
        return False, f"Missing required fields: {', '.join(missing)}", None

    try:
        problem = build_problem(data, **flags)
    except InputError as exc:
        return False, str(exc), None

    if schema["targets"] and problem.pm.kind not in schema["targets"]:
        return False, f"Command {command!r} needs {' or '.join(schema['targets'])} targets, got {problem.pm.kind}", None
    if schema["needs_at"] and not problem.extend_at:
        return False, "No extension point: give 'extend_at' in the problem or --at", None
    if problem.pm is not None:
        for x in problem.extend_at:
            if problem.pm.index_of(x) is not None:
                return False, f"Extension point {x.tolist()} already belongs to M", None

    return True, "Problem is valid", problem


def load_problem(source, command, **flags):
    """
    Read and validate a problem file; raise InputError when it is not usable

    Returns:
    Problem
    """
    data = read_json(source)
    is_valid, message, problem = validate_problem(data, command, **flags)
    if not is_valid:
        raise InputError(message)
    logger.debug("Loaded problem for %s: %s", command, message)
    return problem
