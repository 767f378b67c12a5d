import io
import json

import numpy as np
from pytest import approx, mark, raises

from utils.data_manager import (
    build_problem,
    load_problem,
    parse_point_flag,
    parse_space_flag,
    read_json,
    validate_problem,
)
from utils.errors import InputError
from utils.sample_data import get_sample_problems
from utils.spaces import NormedSpace
from utils.targets import EcSeq

SCALAR = {
    "space": {"type": "linf", "dim": 1},
    "alpha": 1,
    "points": [[0], [1]],
    "values": [0, 2],
    "extend_at": [[0.5]],
}


def test_validate_computes_K():
    is_valid, message, problem = validate_problem(SCALAR, "check")
    assert is_valid, message
    assert problem.K_computed
    assert problem.pm.params.K == approx(2.0)
    assert problem.pm.kind == "scalar"


def test_declared_K_is_kept():
    is_valid, _, problem = validate_problem({**SCALAR, "K": 3}, "extend")
    assert is_valid
    assert not problem.K_computed
    assert problem.pm.params.K == 3.0


def test_flags_override_file():
    _, _, problem = validate_problem(SCALAR, "extend", alpha=0.5, K=5.0, at=[np.array([2.0])])
    assert problem.pm.params.alpha == 0.5
    assert problem.pm.params.K == 5.0
    assert [x.tolist() for x in problem.extend_at] == [[2.0]]


@mark.parametrize(
    "data command fragment".split(),
    [
        ({"space": {"type": "linf", "dim": 1}, "points": [[0]]}, "check", "values"),
        ({k: v for k, v in SCALAR.items() if k != "extend_at"}, "extend", "extension point"),
        ({**SCALAR, "extend_at": [[1]]}, "extend", "already belongs"),
        (SCALAR, "ck-extend", "metric"),
        ({**SCALAR, "target": "l2"}, "check", "Unknown target"),
        ({**SCALAR, "points": [[0, 1], [1, 2]]}, "check", "coordinates"),
        ([1, 2], "check", "JSON object"),
        (SCALAR, "counterexample", "does not take"),
    ],
)
def test_invalid_problems(data, command, fragment):
    is_valid, message, problem = validate_problem(data, command)
    assert not is_valid
    assert problem is None
    assert fragment in message


C0_LINE = {
    "space": {"type": "linf", "dim": 1},
    "target": "c0",
    "K": 1,
    "points": [[1], [2]],
    "values": [{"prefix": [1], "tail": 0}, {"prefix": [2], "tail": 0}],
    "extend_at": [[0]],
}


@mark.parametrize(
    "data fragment".split(),
    [
        ({**C0_LINE, "values": [1.0, 2.0]}, "declared with ec targets"),
        ({**SCALAR, "alpha": "half"}, "Invalid 'alpha'"),
        ({**SCALAR, "K": "big"}, "Invalid 'K'"),
        ({**C0_LINE, "values": [{"prefix": ["a"], "tail": 0}, {"prefix": [2], "tail": 0}]}, "EcSeq entries must be numbers"),
        ({**C0_LINE, "values": [{"prefix": "12", "tail": 0}, {"prefix": [2], "tail": 0}]}, "prefix must be a list"),
        ({**SCALAR, "extend_at": [["x"]]}, "Invalid 'extend_at'"),
        ({**SCALAR, "extend_at": 5}, "extend_at"),
        ({**SCALAR, "space": {"type": "lp", "p": "two", "dim": 1}}, "invalid field"),
        ({**SCALAR, "metric": {"rho": [["a"]]}}, "Invalid 'metric'"),
    ],
)
def test_malformed_values(data, fragment):
    is_valid, message, problem = validate_problem(data, "extend")
    assert not is_valid
    assert problem is None
    assert fragment in message


def test_sequence_targets():
    problem = build_problem(get_sample_problems()["c0_two_point"])
    assert problem.target == "c0"
    assert problem.pm.kind == "ec"
    assert problem.pm.values[0] == EcSeq((1.0,), 0.0)


def test_function_targets():
    problem = build_problem(get_sample_problems()["ck_three_point"])
    assert problem.pm.kind == "function"
    assert problem.metric.size == 3
    assert problem.options["delta"] == 0.6


def test_problem_json_is_normalized():
    problem = build_problem(SCALAR)
    data = problem.to_json()
    assert data["K"] == approx(2.0)
    assert data["K_computed"] is True
    assert data["values"] == [0.0, 2.0]
    assert data["target"] == "scalar"


def test_read_json_sources(tmp_path):
    path = tmp_path / "p.json"
    path.write_text(json.dumps(SCALAR), encoding="utf-8")
    assert read_json(str(path)) == SCALAR
    assert read_json(path) == SCALAR
    assert read_json(json.dumps(SCALAR)) == SCALAR
    assert read_json(io.StringIO(json.dumps(SCALAR))) == SCALAR


def test_malformed_json_position():
    with raises(InputError) as info:
        read_json('{"space": {"type": "linf",\n "dim": }}')
    assert "line 2" in str(info.value)
    assert info.value.position is not None


def test_missing_file():
    with raises(InputError):
        read_json("/nonexistent/problem.json")


def test_load_problem_raises():
    with raises(InputError):
        load_problem(io.StringIO(json.dumps({"space": {"type": "linf", "dim": 1}})), "check")


@mark.parametrize(
    "text expected".split(),
    [
        ("linf:3", NormedSpace.linf(3)),
        ("lp:2:2", NormedSpace.lp(2, 2)),
        ("lp:1.5:3", NormedSpace.lp(1.5, 3)),
        ("l1sum:lp:2:2+lp:2:2", NormedSpace.l1sum([NormedSpace.lp(2, 2), NormedSpace.lp(2, 2)])),
        ('{"type": "polytope", "functionals": [[1, 0], [0, 1]]}', NormedSpace.polytope([[1, 0], [0, 1]])),
    ],
)
def test_parse_space_flag(text, expected):
    assert parse_space_flag(text) == expected


@mark.parametrize("text", ["l3:2", "lp:2", "linf:x"])
def test_parse_space_flag_errors(text):
    with raises(InputError):
        parse_space_flag(text)


@mark.parametrize("text", ["0,1", "[0, 1]", " 0.0, 1.0 "])
def test_parse_point_flag(text):
    assert parse_point_flag(text).tolist() == [0.0, 1.0]


def test_parse_point_flag_error():
    with raises(InputError):
        parse_point_flag("a,b")


def test_partition_problem_has_no_map():
    _, _, problem = validate_problem(get_sample_problems()["linf_partition"], "partition")
    assert problem.pm is None
    assert problem.points.shape == (3, 2)
