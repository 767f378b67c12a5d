import time

import numpy as np
from hypothesis import given, settings
from hypothesis import strategies as st
from pytest import approx, mark, raises

from utils.errors import InputError
from utils.extend_c import (
    c0_extend,
    c_extend,
    c_feasible,
    forced_intervals,
    linf_c_extend,
    minimal_prefix_length,
    polytope_c_extend,
)
from utils.extend_core import Interval, PartialMap, verify_extension
from utils.sample_data import get_sample_instance
from utils.spaces import HolderParams, NormedSpace
from utils.targets import EcSeq

LINE = NormedSpace.linf(1)


def test_c_feasible_singleton_margin():
    pm = PartialMap(LINE, [[2.0]], (EcSeq((1.0,), 3.0),), HolderParams(1.0, 0.5))
    result = c_feasible(pm, [0.0])
    assert result.feasible
    assert result.margin == approx(2 * np.sqrt(2))
    assert result.witness == (0, 0)


def test_c_feasible_tails(tails_map):
    result = c_feasible(tails_map, [0.0])
    assert result.feasible
    assert result.margin == approx(1.0)
    assert set(result.witness) == {0, 1}


def test_c_feasible_violation():
    pm = PartialMap(LINE, [[-1.0], [1.0]], (EcSeq((), 0.0), EcSeq((), 3.0)), HolderParams(1.0, 1.0))
    result = c_feasible(pm, [0.0])
    assert not result.feasible
    assert result.margin == approx(-1.0)


def test_forced_intervals_of_zero_sequences():
    pm = PartialMap(LINE, [[-1.0], [1.0]], (EcSeq((), 0.0), EcSeq((), 0.0)), HolderParams(1.0, 1.0))
    certificate = forced_intervals(pm, [0.0])
    assert certificate.per_coordinate == []
    assert certificate.tail_interval == Interval(-1.0, 1.0)


def test_c_extend_tails(tails_map):
    value, trace = c_extend(tails_map, [0.0])
    assert trace.certificate.tail_interval == Interval(0.0, 1.0)
    assert trace.s_inf == 0.0
    assert trace.policy == "lo"
    assert value == EcSeq.constant(0.0)
    assert verify_extension(tails_map, [0.0], value).ok


@mark.parametrize("policy", ["lo", "hi", "mid"])
def test_c_extend_policies(policy):
    pm = PartialMap(LINE, [[-1.0], [1.0]], (EcSeq((2.0, -1.0), 0.0), EcSeq((1.0,), 0.5)), HolderParams(1.0, 1.0))
    value, _ = c_extend(pm, [0.0], policy=policy)
    assert verify_extension(pm, [0.0], value).ok


def test_c_extend_singleton_mid_returns_value():
    seq = EcSeq((1.0, 2.0), 3.0)
    pm = PartialMap(LINE, [[1.0]], (seq,), HolderParams(1.0, 1.0))
    value, _ = c_extend(pm, [0.0], policy="mid")
    assert value == seq


def test_minimal_prefix_length():
    intervals = [Interval(0.0, 1.0), Interval(2.0, 3.0)]
    assert minimal_prefix_length(intervals, Interval(0.0, 1.0)) == 2
    assert minimal_prefix_length(intervals, Interval(2.5, 4.0)) == 1
    assert minimal_prefix_length([Interval(0.0, 1.0)], Interval(0.5, 2.0)) == 0
    assert minimal_prefix_length([Interval(1.0, 0.0)], Interval(0.0, 1.0)) is None


def test_counterexample_float_intervals(counterexample_4):
    certificate = forced_intervals(counterexample_4.pm, np.zeros(4))
    for k, interval in enumerate(certificate.per_coordinate, start=1):
        if k % 2 == 1:
            assert interval.lo >= 1 / 8 - 1e-6
        else:
            assert interval.hi <= -1 / 8 + 1e-6


def test_c0_singleton():
    pm = PartialMap(LINE, [[1.0]], (EcSeq((), 0.0),), HolderParams(1.0, 1.0))
    value, trace = c0_extend(pm, [0.0])
    assert value == EcSeq((), 0.0)
    assert trace.N == 0


def test_c0_two_points():
    pm = PartialMap(LINE, [[1.0], [2.0]], (EcSeq((1.0,), 0.0), EcSeq((2.0,), 0.0)), HolderParams(1.0, 1.0))
    value, trace = c0_extend(pm, [0.0])
    assert value == EcSeq((1.0,), 0.0)
    assert trace.N == 1
    assert trace.representatives == [0]
    assert trace.epsilon == approx(0.49)
    assert trace.case_counts["violations"] == 0


def test_c0_lipschitz_variant():
    pm = PartialMap(
        LINE, [[1.0], [-2.0]], (EcSeq((0.5, 0.1, 0.05), 0.0), EcSeq((1.0, -0.2), 0.0)), HolderParams(1.0, 1.0)
    )
    value, trace = c0_extend(pm, [0.0], variant="lipschitz")
    assert value.tail == 0.0
    assert trace.variant == "lipschitz"
    assert verify_extension(pm, [0.0], value).ok


@mark.parametrize(
    "values params variant".split(),
    [
        ((EcSeq((1.0,), 0.0), EcSeq((), 0.5)), HolderParams(1.0, 1.0), "four_case"),
        ((EcSeq((1.0,), 0.0), EcSeq((), 0.0)), HolderParams(1.0, 0.5), "lipschitz"),
        ((EcSeq((1.0,), 0.0), EcSeq((), 0.0)), HolderParams(1.0, 1.0), "other"),
    ],
)
def test_c0_rejects(values, params, variant):
    pm = PartialMap(LINE, [[1.0], [2.0]], values, params)
    with raises(InputError):
        c0_extend(pm, [0.0], variant=variant)


@settings(max_examples=40, deadline=None)
@given(st.integers(min_value=0, max_value=100_000), st.sampled_from([NormedSpace.linf(2), NormedSpace.lp(2, 2), NormedSpace.linf(1)]))
def test_c0_random_instances(seed, space):
    pm, x = get_sample_instance(seed, "c0", space=space)
    value, trace = c0_extend(pm, x)
    assert value.tail == 0.0
    assert trace.case_counts["violations"] == 0
    assert verify_extension(pm, x, value).ok


DIM4_SPACES = [
    NormedSpace.lp(2, 4),
    NormedSpace.lp(3, 4),
    NormedSpace.linf(4),
    NormedSpace.l1sum([NormedSpace.lp(2, 2), NormedSpace.lp(2, 2)]),
]


@settings(max_examples=40, deadline=None)
@given(st.integers(min_value=0, max_value=100_000), st.sampled_from(DIM4_SPACES))
def test_c0_random_instances_dim4(seed, space):
    pm, x = get_sample_instance(seed, "c0", space=space, size=6)
    value, trace = c0_extend(pm, x)
    assert value.tail == 0.0
    assert trace.n_directions <= pm.size
    assert trace.case_counts["violations"] == 0
    assert verify_extension(pm, x, value).ok


def test_c0_dim4_runtime():
    start = time.perf_counter()
    for seed in range(100):
        pm, x = get_sample_instance(seed, "c0", space=DIM4_SPACES[seed % len(DIM4_SPACES)], size=8)
        value, _ = c0_extend(pm, x)
        assert verify_extension(pm, x, value).ok
    assert time.perf_counter() - start < 5.0


@settings(max_examples=30, deadline=None)
@given(st.integers(min_value=0, max_value=100_000))
def test_c_random_instances(seed):
    pm, x = get_sample_instance(seed, "c")
    if not c_feasible(pm, x).feasible:
        return
    value, _ = c_extend(pm, x)
    assert verify_extension(pm, x, value).ok


@settings(max_examples=25, deadline=None)
@given(st.integers(min_value=0, max_value=100_000))
def test_linf_partition_variant(seed):
    pm, x = get_sample_instance(seed, "c", space=NormedSpace.linf(2), alpha=1.0)
    value, _, report = linf_c_extend(pm, x, epsilon=0.1)
    assert report.check.ok
    assert report.chain_slack >= -1e-9
    if report.tail_margin >= 0:
        assert verify_extension(pm, x, value).ok


def test_polytope_partition_variant():
    space = NormedSpace.polytope([[1, 0], [0, 1], [0.5, 0.5]])
    pm, x = get_sample_instance(3, "c", space=space, alpha=1.0, size=6)
    _, _, report = polytope_c_extend(pm, x)
    assert report.check.ok
    assert report.chain_slack >= -1e-9


def test_partition_variant_needs_lipschitz():
    pm, x = get_sample_instance(5, "c", space=NormedSpace.linf(2), alpha=0.5, size=3)
    with raises(InputError):
        linf_c_extend(pm, x)
