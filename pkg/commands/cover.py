"""cover: cone covering of a space, checked on the sample net and on random same-cone pairs"""
import numpy as np

from commands import RUN_FAILURES, failure, finish, problem_from_args, settings_from_args
from utils.cone_cover import cone_cover
from utils.errors import InputError

SAMPLE_POINTS = 2000


def cone_pair_gaps(cover, X):
    """
    |x| - (1 - delta)|y| - |x - y| over all same-cone pairs of X with |x| >= |y|

    Returns:
    tuple: (number of pairs, smallest gap)
    """
    cones = cover.assign_many(X)
    norms = cover.space.norm_many(X)
    pairs, worst = 0, np.inf
    for cone in np.unique(cones):
        members = X[cones == cone]
        if members.shape[0] < 2:
            continue
        n = norms[cones == cone]
        big = np.maximum(n[:, None], n[None, :])
        small = np.minimum(n[:, None], n[None, :])
        dist = cover.space.norm_many(members[:, None, :] - members[None, :, :])
        gaps = big - (1 - cover.delta) * small - dist
        off = ~np.eye(members.shape[0], dtype=bool)
        pairs += int(off.sum()) // 2
        worst = min(worst, float(gaps[off].min()))
    return pairs, worst


def run(args):
    settings = settings_from_args(args)
    digest = None
    space = args.space
    if space is None:
        if args.problem is None:
            raise InputError("cover needs --space or a problem file with a space descriptor")
        problem, digest = problem_from_args(args, "cover")
        space = problem.space

    try:
        cover = cone_cover(space, settings.c0_cone_delta, resolution=settings.cone_resolution, max_refinements=settings.cone_max_refinements)
        sample = np.random.default_rng(0).normal(size=(SAMPLE_POINTS, space.dim))
        pairs, worst = cone_pair_gaps(cover, sample)
    except RUN_FAILURES as exc:
        return failure("cover", args, exc, settings)

    results = {"space": space.to_json(), "cover": cover, "sampled_pairs": pairs}
    checks = {
        "sample_net": {"worst_sample_distance": cover.worst_sample_distance, "ok": cover.worst_sample_distance <= cover.delta / 2},
        "cone_inequality": {"pairs": pairs, "worst_gap": worst, "ok": worst >= -settings.holder_tol},
    }
    return finish("cover", args, digest, results, checks, settings)
