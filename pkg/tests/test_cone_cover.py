import numpy as np
from pytest import mark, raises

from commands.cover import cone_pair_gaps
from utils.cone_cover import cone_cover, cube_surface, data_cone_cover
from utils.errors import InputError
from utils.spaces import NormedSpace


def test_line_has_two_cones():
    cover = cone_cover(NormedSpace.linf(1), 0.5)
    assert cover.size == 2
    assert sorted(cover.directions.ravel().tolist()) == [-1.0, 1.0]
    assert cover.assign([3.0]) != cover.assign([-0.2])


def test_cube_surface_points():
    surface = cube_surface(2, 1)
    assert surface.shape == (8, 2)
    assert np.all(np.max(np.abs(surface), axis=1) == 1.0)


@mark.parametrize(
    "space delta".split(),
    [
        (NormedSpace.linf(2), 1.0),
        (NormedSpace.lp(2, 2), 0.5),
        (NormedSpace.l1sum([NormedSpace.lp(2, 1), NormedSpace.lp(2, 2)]), 0.5),
        (NormedSpace.polytope([[1, 0], [0, 1], [0.5, 0.5]]), 0.5),
    ],
)
def test_net_and_cone_inequality(space, delta):
    cover = cone_cover(space, delta)
    assert cover.worst_sample_distance <= delta / 2
    X = np.random.default_rng(1).normal(size=(400, space.dim))
    pairs, worst = cone_pair_gaps(cover, X)
    assert pairs > 0
    assert worst >= -1e-9


def test_cone_gap_same_cone():
    cover = cone_cover(NormedSpace.lp(2, 2), 0.5)
    X = np.random.default_rng(7).normal(size=(200, 2))
    cones = cover.assign_many(X)
    shared = next(c for c in np.unique(cones) if np.count_nonzero(cones == c) >= 2)
    i, j = np.flatnonzero(cones == shared)[:2]
    x, y = X[i], X[j]
    assert cover.assign(x) == cover.assign(y)
    assert cover.cone_gap(x, y) >= -1e-12
    assert cover.cone_gap(y, x) == cover.cone_gap(x, y)


def test_cover_is_cached():
    space = NormedSpace.linf(2)
    assert cone_cover(space, 0.5) is cone_cover(space, 0.5)


@mark.parametrize("delta", [0.0, -0.5, 1.5])
def test_delta_out_of_range(delta):
    with raises(InputError):
        cone_cover(NormedSpace.linf(2), delta)


def test_zero_vector_has_no_cone():
    with raises(InputError):
        cone_cover(NormedSpace.linf(2), 0.5).assign([0.0, 0.0])


def test_data_cover_on_line():
    cover, cones = data_cone_cover(NormedSpace.linf(1), np.array([[1.0], [3.0], [-2.0]]), 0.5)
    assert cover.size == 2
    assert cover.resolution == 0
    assert cones.tolist() == [0, 0, 1]


@mark.parametrize(
    "space",
    [
        NormedSpace.lp(2, 4),
        NormedSpace.lp(3, 4),
        NormedSpace.linf(4),
        NormedSpace.l1sum([NormedSpace.lp(2, 2), NormedSpace.lp(2, 2)]),
    ],
)
def test_data_cover_cone_inequality(space):
    X = np.random.default_rng(3).normal(size=(8, space.dim))
    cover, cones = data_cone_cover(space, X, 0.5)
    assert cover.size <= X.shape[0]
    assert cover.worst_sample_distance <= 0.25
    units = X / space.norm_many(X)[:, None]
    for direction in cover.directions:
        assert np.any(np.all(units == direction, axis=1))
    for i in range(X.shape[0]):
        for j in range(X.shape[0]):
            if cones[i] == cones[j]:
                assert cover.cone_gap(X[i], X[j]) >= -1e-9


def test_data_cover_rejects_zero_and_delta():
    with raises(InputError):
        data_cone_cover(NormedSpace.linf(2), np.array([[0.0, 0.0], [1.0, 0.0]]), 0.5)
    with raises(InputError):
        data_cone_cover(NormedSpace.linf(2), np.array([[1.0, 0.0]]), 1.5)
