import json
import logging

import numpy as np
import pytest
from pytest import mark

from app import main
from commands import selftest
from utils.sample_data import get_sample_metric_space
from utils.settings import DEFAULT_SETTINGS


@pytest.fixture(autouse=True)
def reset_logging():
    yield
    root = logging.getLogger()
    for handler in list(root.handlers):
        root.removeHandler(handler)


@mark.parametrize(
    "suite".split(),
    [
        (selftest.extension_correctness,),
        (selftest.oracle_equivalence,),
        (selftest.c0_algorithm,),
        (selftest.partition_covering,),
        (selftest.modulus_machinery,),
        (selftest.bridges,),
        (selftest.monotonicity,),
    ],
)
def test_suite_passes_on_a_few_instances(suite):
    summary = suite(DEFAULT_SETTINGS, 5)
    assert summary["instances"] == 5
    assert summary["ok"], summary["failures"]


def test_counterexample_reproduction():
    summary = selftest.counterexample_reproduction(DEFAULT_SETTINGS)
    assert summary["ok"], summary["failures"]
    assert summary["minimal_prefix_length"] == 4


def test_quick_run(capsys):
    assert main(["selftest", "--quick"]) == 0
    certificate = json.loads(capsys.readouterr().out)
    assert certificate["results"]["sizes"]["extension_correctness"] == 50
    assert certificate["verification"]["ok"]
    assert set(certificate["verification"]["checks"]) == set(selftest.SUITE_SIZES) | {"counterexample_reproduction"}


def test_close_witnesses_are_close():
    rng = np.random.default_rng(3)
    metric = get_sample_metric_space(rng, 8)
    pairs = selftest.close_witnesses(rng, metric, 5)
    assert len(pairs) == 5
    for j, (t, s) in enumerate(pairs, start=1):
        assert metric.rho[t, s] < 1.0 / j


def test_bridges_log_no_far_witness(caplog):
    with caplog.at_level(logging.WARNING, logger="utils.extend_ck"):
        summary = selftest.bridges(DEFAULT_SETTINGS, 10)
    assert summary["ok"], summary["failures"]
    assert not [r for r in caplog.records if "Witness" in r.getMessage()]
