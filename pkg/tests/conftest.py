import json

import numpy as np
import pytest

from utils.counterexamples import gen_counterexample
from utils.extend_core import PartialMap
from utils.spaces import HolderParams, NormedSpace
from utils.targets import EcSeq, FiniteFunction, FiniteMetricSpace


@pytest.fixture
def line():
    return NormedSpace.linf(1)


@pytest.fixture
def two_point_scalar(line):
    """M = {-1, 2}, f = 0, 3, contraction"""
    return PartialMap(line, np.array([[-1.0], [2.0]]), (0.0, 3.0), HolderParams(1.0, 1.0))


@pytest.fixture
def tails_map(line):
    """M = {-1, 1} with constant sequences 0 and 1"""
    return PartialMap(line, np.array([[-1.0], [1.0]]), (EcSeq((), 0.0), EcSeq((), 1.0)), HolderParams(1.0, 1.0))


@pytest.fixture
def three_point_sample():
    return FiniteMetricSpace.from_points_1d([0.0, 0.5, 1.0])


@pytest.fixture
def ck_single(line, three_point_sample):
    """One point y = 1 with f(y) = (0, 0.4, 1) on K = {0, 0.5, 1}"""
    value = FiniteFunction(values=[0.0, 0.4, 1.0], space=three_point_sample)
    return PartialMap(line, np.array([[1.0]]), (value,), HolderParams(1.0, 1.0))


@pytest.fixture(scope="session")
def counterexample_4():
    return gen_counterexample(K=11, n1=1, N=4)


@pytest.fixture
def write_problem(tmp_path):
    """Write a problem dict to a file and return its path"""
    def _write(problem, name="problem.json"):
        path = tmp_path / name
        path.write_text(json.dumps(problem), encoding="utf-8")
        return str(path)
    return _write
