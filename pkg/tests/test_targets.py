import numpy as np
from hypothesis import given, settings
from hypothesis import strategies as st
from pytest import approx, mark, raises

from utils.errors import InputError
from utils.targets import EcSeq, FiniteFunction, FiniteMetricSpace, sequence_matrix, sup_dist, sup_dist_fn

finite = st.floats(min_value=-100, max_value=100, allow_nan=False)
sequences = st.builds(EcSeq, st.lists(finite, max_size=5).map(tuple), finite)


def test_ecseq_canonical_prefix():
    seq = EcSeq(prefix=(1.0, 0.0, 0.0), tail=0.0)
    assert seq == EcSeq(prefix=(1.0,), tail=0.0)
    assert seq.prefix_length == 1
    assert seq.in_c0
    assert EcSeq((2.0, 2.0), 2.0) == EcSeq.constant(2.0)


def test_ecseq_coordinates():
    seq = EcSeq(prefix=(3.0, -1.0), tail=0.5)
    assert seq.value_at(1) == 3.0
    assert seq.value_at(2) == -1.0
    assert seq.value_at(7) == 0.5
    assert seq.expand(4).tolist() == [3.0, -1.0, 0.5, 0.5]
    assert seq.sup_norm() == 3.0
    with raises(InputError):
        seq.value_at(0)


def test_ecseq_rejects_non_finite():
    with raises(InputError):
        EcSeq(prefix=(np.inf,), tail=0.0)


@mark.parametrize(
    "a b expected".split(),
    [
        (EcSeq((1.0,), 0.0), EcSeq((1.0,), 0.0), 0.0),
        (EcSeq((), 2.0), EcSeq((), -1.0), 3.0),
        (EcSeq((5.0, 3.0), 1.0), EcSeq((4.0,), 0.0), 3.0),
    ],
)
def test_sup_dist_examples(a, b, expected):
    assert sup_dist(a, b) == expected


def test_sequence_matrix_pads_with_tails():
    matrix, tails = sequence_matrix([EcSeq((1.0, 2.0), 0.0), EcSeq((), 5.0)])
    assert matrix.tolist() == [[1.0, 2.0], [5.0, 5.0]]
    assert tails.tolist() == [0.0, 5.0]


@settings(max_examples=100, deadline=None)
@given(sequences, sequences, sequences)
def test_sup_dist_is_a_metric(a, b, c):
    assert sup_dist(a, b) == sup_dist(b, a)
    assert sup_dist(a, a) == 0.0
    assert sup_dist(a, c) <= sup_dist(a, b) + sup_dist(b, c) + 1e-9


def test_sup_dist_fn_examples(three_point_sample):
    f = FiniteFunction([0.0, 0.4, 1.0], three_point_sample)
    g = FiniteFunction([2.0, 0.4, 1.0], three_point_sample)
    h = FiniteFunction([0.0, 0.4, -2.0], three_point_sample)
    assert sup_dist_fn(f, f) == 0.0
    assert sup_dist_fn(f, g) == approx(2.0)
    assert sup_dist_fn(f, h) == approx(3.0)


def test_sup_dist_fn_size_mismatch(three_point_sample):
    other = FiniteMetricSpace.from_points_1d([0.0, 1.0])
    with raises(InputError):
        sup_dist_fn(FiniteFunction([0, 0, 0], three_point_sample), FiniteFunction([0, 0], other))


def test_metric_space_properties(three_point_sample):
    assert three_point_sample.size == 3
    assert three_point_sample.diameter == 1.0
    assert three_point_sample.min_distance == 0.5


@mark.parametrize(
    "rho".split(),
    [
        ([[0, 1], [2, 0]],),
        ([[0, 1, 5], [1, 0, 1], [5, 1, 0]],),
        ([[0, 0], [0, 0]],),
        ([[1, 1], [1, 0]],),
        ([[0, 1, 2]],),
    ],
)
def test_invalid_metric_spaces(rho):
    with raises(InputError):
        FiniteMetricSpace(rho=rho)


def test_function_size_must_match(three_point_sample):
    with raises(InputError):
        FiniteFunction([1.0, 2.0], three_point_sample)
