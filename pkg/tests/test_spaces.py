import numpy as np
from hypothesis import given, settings
from hypothesis import strategies as st
from pytest import approx, mark, raises

from utils.errors import InputError
from utils.sample_data import get_sample_space
from utils.spaces import HolderParams, NormedSpace, dist_alpha, norm, pairwise_distances, polytope_embed


@mark.parametrize(
    "space x expected".split(),
    [
        (NormedSpace.linf(3), [1, -2, 0.5], 2.0),
        (NormedSpace.lp(2, 2), [3, 4], 5.0),
        (NormedSpace.lp(1, 3), [1, -2, 0.5], 3.5),
        (NormedSpace.l1sum([NormedSpace.lp(2, 2), NormedSpace.lp(2, 2)]), [3, 4, 0, -1], 6.0),
        (NormedSpace.polytope([[1, 1], [1, -1]]), [0.3, -0.7], 1.0),
        (NormedSpace.l1sum([NormedSpace.lp(2, 2), NormedSpace.lp(2, 2)]), [121, 11, 0, 0], np.sqrt(14762)),
    ],
)
def test_norm_examples(space, x, expected):
    assert norm(space, x) == approx(expected)


@mark.parametrize(
    "space x y params expected".split(),
    [
        (NormedSpace.linf(1), [0], [2], HolderParams(1, 1), 2.0),
        (NormedSpace.linf(1), [0], [4], HolderParams(1, 0.5), 2.0),
        (NormedSpace.linf(2), [0, 0], [1, 3], HolderParams(2, 0.5), 2 * np.sqrt(3)),
    ],
)
def test_dist_alpha_examples(space, x, y, params, expected):
    assert dist_alpha(space, x, y, params) == approx(expected)


def test_polytope_embed_is_isometric_on_example():
    space = NormedSpace.polytope([[1, 1], [1, -1]])
    T = polytope_embed(space)
    image = T([0.3, -0.7])
    assert image == approx([-0.4, 1.0])
    assert T.target == NormedSpace.linf(2)
    assert T.target.norm(image) == approx(space.norm([0.3, -0.7]))


def test_polytope_embed_rejects_other_kinds():
    with raises(InputError):
        polytope_embed(NormedSpace.linf(2))


@mark.parametrize(
    "build".split(),
    [
        (lambda: HolderParams(1.0, 0.0),),
        (lambda: HolderParams(1.0, 1.5),),
        (lambda: HolderParams(-1.0, 1.0),),
        (lambda: NormedSpace.lp(0.5, 2),),
        (lambda: NormedSpace.polytope([[1, 1], [2, 2]]),),
        (lambda: NormedSpace.from_json({"type": "lq", "dim": 2}),),
        (lambda: NormedSpace.from_json({"type": "lp", "dim": 2}),),
    ],
)
def test_invalid_descriptors(build):
    with raises(InputError):
        build()


def test_dimension_mismatch():
    with raises(InputError):
        norm(NormedSpace.linf(2), [1, 2, 3])


def test_descriptor_json():
    space = NormedSpace.l1sum([NormedSpace.lp(2, 1), NormedSpace.linf(2)])
    assert space.dim == 3
    assert NormedSpace.from_json(space.to_json()) == space


def test_pairwise_distances_symmetric():
    points = np.array([[0.0, 0.0], [1.0, 2.0], [-1.0, 0.5]])
    d = pairwise_distances(NormedSpace.lp(2, 2), points)
    assert np.allclose(d, d.T)
    assert np.all(np.diag(d) == 0)
    assert d[0, 1] == approx(np.sqrt(5))


@settings(max_examples=50, deadline=None)
@given(st.integers(min_value=0, max_value=10_000), st.floats(min_value=-5, max_value=5))
def test_norm_axioms(seed, a):
    rng = np.random.default_rng(seed)
    space = get_sample_space(rng)
    x, y = rng.normal(size=(2, space.dim))
    nx, ny = space.norm(x), space.norm(y)
    assert space.norm(a * x) == approx(abs(a) * nx, rel=1e-12, abs=1e-12)
    assert space.norm(x + y) <= nx + ny + 1e-12 * (nx + ny)
    assert nx > 0


@settings(max_examples=50, deadline=None)
@given(st.integers(min_value=0, max_value=10_000))
def test_polytope_embed_is_isometric(seed):
    rng = np.random.default_rng(seed)
    space = get_sample_space(rng, "polytope")
    T = polytope_embed(space)
    X = rng.normal(scale=3.0, size=(20, space.dim))
    assert T.target.norm_many(T.apply_many(X)) == approx(space.norm_many(X), rel=1e-12)


@settings(max_examples=50, deadline=None)
@given(st.integers(min_value=0, max_value=10_000))
def test_l1sum_adds_part_norms(seed):
    rng = np.random.default_rng(seed)
    first = get_sample_space(rng, "lp", dim=int(rng.integers(1, 3)))
    second = get_sample_space(rng, "linf", dim=int(rng.integers(1, 3)))
    space = NormedSpace.l1sum([first, second])
    a, b = rng.normal(size=first.dim), rng.normal(size=second.dim)
    assert space.norm(np.concatenate([a, b])) == approx(first.norm(a) + second.norm(b), rel=1e-12)
