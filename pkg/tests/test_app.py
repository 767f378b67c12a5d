import json
import logging

import pytest
from openpyxl import load_workbook
from pytest import approx, mark

from app import build_parser, main
from utils.sample_data import get_sample_problems

SAMPLES = get_sample_problems()
TWO_POINT = {
    "space": {"type": "linf", "dim": 1},
    "alpha": 1,
    "points": [[0], [1]],
    "values": [0, 2],
    "extend_at": [[0.5]],
}


@pytest.fixture(autouse=True)
def reset_logging():
    yield
    root = logging.getLogger()
    for handler in list(root.handlers):
        root.removeHandler(handler)


def run(capsys, argv):
    code = main(argv)
    out = capsys.readouterr()
    return code, json.loads(out.out) if out.out.strip() else None, out.err


def test_check_echoes_computed_K(capsys, write_problem):
    code, certificate, _ = run(capsys, ["check", write_problem(TWO_POINT)])
    assert code == 0
    assert certificate["results"]["K"] == approx(2.0)
    assert certificate["results"]["K_computed"] is True
    assert certificate["verification"]["ok"]
    assert len(certificate["input_digest"]) == 64


def test_check_fails_on_small_K(capsys, write_problem):
    code, certificate, _ = run(capsys, ["check", write_problem(TWO_POINT), "--K", "1"])
    assert code == 3
    assert certificate["verification"]["failing"] == ["holder"]
    assert certificate["command"]["K"] == 1.0


def test_output_is_byte_identical(capsys, write_problem):
    path = write_problem(SAMPLES["c0_two_point"])
    main(["extend", path])
    first = capsys.readouterr().out
    main(["extend", path])
    second = capsys.readouterr().out
    assert first == second


def test_digest_ignores_file_location(capsys, write_problem):
    _, a, _ = run(capsys, ["check", write_problem(TWO_POINT, "a.json")])
    _, b, _ = run(capsys, ["check", write_problem(TWO_POINT, "b.json")])
    assert a["input_digest"] == b["input_digest"]


def test_malformed_input(capsys, tmp_path):
    path = tmp_path / "broken.json"
    path.write_text('{"space": ', encoding="utf-8")
    code, certificate, err = run(capsys, ["check", str(path)])
    assert code == 2
    assert certificate is None
    assert "holder-extend check:" in err
    assert "line 1" in err


def test_missing_field(capsys, write_problem):
    code, _, err = run(capsys, ["extend", write_problem({"space": {"type": "linf", "dim": 1}, "points": [[0]]})])
    assert code == 2
    assert "values" in err


@mark.parametrize(
    "command problem".split(),
    [
        ("extend", {**SAMPLES["c0_two_point"], "values": [1.0, 2.0]}),
        ("extend", {**TWO_POINT, "alpha": "half"}),
        ("extend", {**SAMPLES["c0_two_point"], "values": [{"prefix": ["a"], "tail": 0}, {"prefix": [2], "tail": 0}]}),
        ("extend", {**TWO_POINT, "extend_at": [["x"]]}),
        ("extend", {**TWO_POINT, "space": {"type": "lp", "p": "two", "dim": 1}}),
        ("partition", {**SAMPLES["linf_partition"], "options": {"eps": "wide"}}),
        ("reduce", {**SAMPLES["ck_three_point"], "options": {"witnesses": [[0]]}}),
        ("reduce", {**SAMPLES["ck_three_point"], "options": {"witnesses": [[0, 1]], "subset": ["first"]}}),
    ],
)
def test_malformed_values_exit_2(capsys, write_problem, command, problem):
    code, certificate, err = run(capsys, [command, write_problem(problem)])
    assert code == 2
    assert certificate is None
    assert f"holder-extend {command}:" in err


def test_infeasible_extension(capsys, write_problem):
    code, certificate, _ = run(capsys, ["extend", write_problem({**TWO_POINT, "K": 1})])
    assert code == 3
    run_check = certificate["verification"]["checks"]["run"]
    assert run_check["error"] == "InfeasibleExtensionError"
    assert run_check["failing"] == {"lo": 1.5, "hi": 0.5, "empty": True}
    assert certificate["input_digest"] is not None


@mark.parametrize(
    "stem command expected".split(),
    [
        ("scalar_two_point", "extend", 1.0),
        ("vector_two_point", "extend", [1.0, -1.0]),
        ("c0_two_point", "extend", {"prefix": [1.0], "tail": 0.0}),
        ("c_tails", "extend", {"prefix": [], "tail": 0.0}),
    ],
)
def test_extend_templates(capsys, write_problem, stem, command, expected):
    code, certificate, _ = run(capsys, [command, write_problem(SAMPLES[stem])])
    assert code == 0
    value = certificate["results"]["extensions"][0]["value"]
    assert value == approx(expected) if not isinstance(expected, dict) else value == expected


def test_extend_at_flag_overrides(capsys, write_problem):
    code, certificate, _ = run(capsys, ["extend", write_problem(SAMPLES["scalar_two_point"]), "--at", "5", "--policy", "lo"])
    assert code == 0
    extension = certificate["results"]["extensions"][0]
    assert extension["x"] == [5.0]
    assert extension["value"] == approx(extension["interval"]["lo"])
    assert certificate["command"]["policy"] == "lo"


def test_c0_census(capsys, write_problem):
    code, certificate, _ = run(capsys, ["extend", write_problem(SAMPLES["c0_two_point"])])
    assert code == 0
    assert certificate["verification"]["checks"]["point0.census"]["violations"] == 0
    assert certificate["verification"]["checks"]["point0.tail_zero"]["ok"]


def test_feasible(capsys, write_problem):
    code, certificate, _ = run(capsys, ["feasible", write_problem(SAMPLES["c_tails"])])
    assert code == 0
    point = certificate["results"]["points"][0]
    assert point["c_feasible"]["margin"] == approx(1.0)
    assert point["certificate"]["tail_interval"]["lo"] == approx(0.0)


def test_partition(capsys, write_problem):
    code, certificate, _ = run(capsys, ["partition", write_problem(SAMPLES["linf_partition"])])
    assert code == 0
    assert certificate["results"]["epsilon"] == 0.5
    assert certificate["verification"]["checks"]["cells"]["covered"]


def test_cover(capsys):
    code, certificate, _ = run(capsys, ["cover", "--space", "linf:2", "--delta", "1"])
    assert code == 0
    assert certificate["input_digest"] is None
    assert certificate["results"]["cover"]["worst_sample_distance"] <= 0.5


def test_ck_extend_and_check(capsys, write_problem):
    path = write_problem(SAMPLES["ck_three_point"])
    code, certificate, _ = run(capsys, ["ck-extend", path])
    assert code == 0
    assert certificate["results"]["points"][0]["value"] == approx([-1.0, -0.6, 0.0])
    assert certificate["results"]["points"][0]["infconv"] == approx([1.0, 1.4, 2.0])

    code, certificate, _ = run(capsys, ["ck-check", path])
    assert code == 0
    assert certificate["results"]["points"][0]["modulus"]["xi"] == approx([-2.0, -1.4, -1.0])


def test_reduce(capsys, write_problem):
    problem = {**SAMPLES["ck_three_point"], "options": {"subset": [0, 2]}}
    code, certificate, _ = run(capsys, ["reduce", write_problem(problem), "--witnesses", "[[0, 1], [1, 2]]"])
    assert code == 0
    assert certificate["results"]["witnesses"] == [[0, 1], [1, 2]]
    assert certificate["verification"]["checks"]["projection_idempotent"]["ok"]


def test_counterexample(capsys):
    code, certificate, _ = run(capsys, ["counterexample", "--K", "11", "--n1", "1", "--N", "5"])
    assert code == 0
    obstruction = certificate["results"]["obstruction"]
    assert obstruction["odd_lo_min"] >= 1 / 8
    assert obstruction["even_hi_max"] <= -1 / 8
    assert obstruction["minimal_prefix_length"] == 4


def test_counterexample_unsafe_N(capsys):
    code, _, err = run(capsys, ["counterexample", "--N", "7"])
    assert code == 2
    assert "max safe N is 5" in err


def test_template_and_xlsx(capsys, tmp_path):
    code, certificate, _ = run(capsys, ["template", str(tmp_path / "examples")])
    assert code == 0
    assert len(list((tmp_path / "examples").glob("*.json"))) == len(SAMPLES)
    assert all(check["ok"] for check in certificate["verification"]["checks"].values())

    workbook = tmp_path / "cert.xlsx"
    out = tmp_path / "cert.json"
    code = main(["extend", str(tmp_path / "examples" / "c_tails.json"), "--xlsx", str(workbook), "--out", str(out)])
    assert code == 0
    assert capsys.readouterr().out == ""
    assert json.loads(out.read_text(encoding="utf-8"))["verification"]["ok"]
    assert load_workbook(workbook).sheetnames[:3] == ["Instructions", "Checks", "Intervals"]


def test_parser_rejects_bad_flags():
    parser = build_parser()
    with pytest.raises(SystemExit) as info:
        parser.parse_args(["extend", "p.json", "--policy", "median"])
    assert info.value.code == 2
