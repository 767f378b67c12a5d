"""
Finite covering of a point set in l_inf^n by cells on which every point x
and the cell representative x^i satisfy

    |x| >= |x^i| - eps    and    |x - x^i| <= |x| - |x^i| + eps.

The cells come from a recursion on the dimension. Points are grouped by the
face cone C(j, d) = {x : x_j = d |x|} they lie in; inside a cone, the
translated cone anchor + C(j, d) is one cell (exact equality there), and the
remaining points fall into thin bands of the gaps eta|x_j| - x_k, which are
projected to l_inf^(n-1) and split again with eps/3.
"""
import logging
from dataclasses import dataclass, field

import numpy as np
import pandas as pd

from utils.errors import InputError

logger = logging.getLogger(__name__)

SIGNS = (1, -1)


def _sign_label(sign):
    return "+" if sign > 0 else "-"


@dataclass(frozen=True)
class PartitionCell:
    """A cell: indices of its points in M and the index of its representative"""
    cell_id: str
    members: tuple
    representative: int

    def to_json(self):
        return {"cell_id": self.cell_id, "members": list(self.members), "representative": self.representative}


@dataclass(frozen=True)
class Band:
    """Band decomposition of the gap eta|x_j| - x_k at one recursion level"""
    k: int
    eta: int
    width: float
    count: int
    occupied: tuple

    def to_json(self):
        return {"k": self.k, "eta": self.eta, "width": self.width, "count": self.count, "occupied": list(self.occupied)}


@dataclass(frozen=True)
class PartitionLevel:
    """Parameters of one cone split: face (j, sign), anchor, epsilon and bands"""
    path: str
    dim: int
    j: int
    sign: int
    anchor: int
    epsilon: float
    bands: tuple = ()

    def to_json(self):
        return {
            "path": self.path,
            "dim": self.dim,
            "j": self.j,
            "sign": self.sign,
            "anchor": self.anchor,
            "epsilon": self.epsilon,
            "bands": [band.to_json() for band in self.bands],
        }


@dataclass
class PartitionTrace:
    """Cells and recursion levels of a partition of M"""
    epsilon: float
    dim: int
    size: int
    cells: list = field(default_factory=list)
    levels: list = field(default_factory=list)

    def assignment(self):
        """Cell position of each point of M (first cell in stable-id order)"""
        out = np.full(self.size, -1, dtype=int)
        for position, cell in sorted(enumerate(self.cells), key=lambda item: item[1].cell_id, reverse=True):
            out[list(cell.members)] = position
        return out

    def to_frame(self):
        rows = [
            {"cell_id": cell.cell_id, "representative": cell.representative, "member": member}
            for cell in self.cells
            for member in cell.members
        ]
        return pd.DataFrame(rows, columns=["cell_id", "representative", "member"])

    def to_json(self):
        return {
            "epsilon": self.epsilon,
            "dim": self.dim,
            "size": self.size,
            "cells": [cell.to_json() for cell in self.cells],
            "levels": [level.to_json() for level in self.levels],
        }


def _linf(X):
    return np.max(np.abs(X), axis=-1)


def _anchor(X):
    """Position of the minimal-norm row, ties broken lexicographically"""
    keys = tuple(X[:, c] for c in reversed(range(X.shape[1]))) + (_linf(X),)
    return int(np.lexsort(keys)[0])


def _split_cone(X, idx, j, sign, epsilon, path, trace):
    """
    Cover the points X (all in the cone x_j = sign*|x|) by cells

    idx holds the indices in M of the rows of X; several rows may coincide
    after projection.
    """
    dim = X.shape[1]
    a_pos = _anchor(X)
    anchor = X[a_pos]
    label = "/".join(path)

    if dim == 1:
        trace.cells.append(PartitionCell(label + "/B", tuple(sorted(int(i) for i in idx)), int(idx[a_pos])))
        trace.levels.append(PartitionLevel(label, dim, j, sign, int(idx[a_pos]), epsilon))
        return

    # anchor + C(j, sign)
    diff = X - anchor
    others = np.delete(np.arange(dim), j)
    in_cone = sign * diff[:, j] >= np.max(np.abs(diff[:, others]), axis=1)

    band_of = {}
    bands = []
    x_j = np.abs(X[:, j])
    for k in others:
        for eta in SIGNS:
            width = abs(eta * abs(anchor[j]) - anchor[k])
            count = int(np.floor(3 * width / epsilon)) + 1
            gaps = np.abs(eta * x_j - X[:, k])
            occupied = set()
            for row in map(int, np.flatnonzero(~in_cone & (gaps < width))):
                if row in band_of:
                    continue
                nu = min(int(np.floor(gaps[row] * count / width)) + 1, count)
                band_of[row] = (int(k), eta, nu)
                occupied.add(nu)
            bands.append(Band(int(k), eta, float(width), count, tuple(sorted(occupied))))

    # rounding can leave a point outside the translated cone with no band; it joins the cone cell
    cone_rows = [row for row in range(X.shape[0]) if row not in band_of]
    trace.cells.append(PartitionCell(label + "/B", tuple(sorted(int(idx[r]) for r in cone_rows)), int(idx[a_pos])))
    trace.levels.append(PartitionLevel(label, dim, j, sign, int(idx[a_pos]), epsilon, tuple(bands)))
    logger.debug("Partition level %s: dim=%d, %d points in anchor cone, %d in bands", label, dim, len(cone_rows), len(band_of))

    groups = {}
    for row, key in band_of.items():
        groups.setdefault(key, []).append(row)
    for (k, eta, nu), rows in sorted(groups.items(), key=lambda item: (item[0][0], -item[0][1], item[0][2])):
        rows = np.asarray(sorted(rows))
        projected = X[rows].copy()
        projected[:, k] = eta * np.abs(projected[:, j])
        projected = np.delete(projected, k, axis=1)
        next_j = j if k > j else j - 1
        step = (f"k{k + 1}{_sign_label(eta)}", f"nu{nu}", f"C{next_j + 1}{_sign_label(sign)}")
        _split_cone(projected, idx[rows], next_j, sign, epsilon / 3, path + step, trace)


def linf_partition(points, epsilon):
    """
    Cover a finite subset of l_inf^n by cells with near-additive distances

    Parameters:
    points: array of shape (|M|, n), without the origin
    epsilon: slack, > 0

    Returns:
    PartitionTrace: cells with representatives and the recursion parameters
    """
    X = np.atleast_2d(np.asarray(points, dtype=float))
    if X.shape[0] == 0:
        raise InputError("Cannot partition an empty set")
    if not epsilon > 0:
        raise InputError(f"Partition slack epsilon must be > 0, got {epsilon!r}")
    norms = _linf(X)
    if np.any(norms == 0):
        raise InputError("The origin must not belong to the partitioned set", position=int(np.flatnonzero(norms == 0)[0]))

    trace = PartitionTrace(epsilon=float(epsilon), dim=X.shape[1], size=X.shape[0])
    faces = {}
    for row, x in enumerate(X):
        j = int(np.flatnonzero(np.abs(x) == norms[row])[0])
        faces.setdefault((j, 1 if x[j] > 0 else -1), []).append(row)

    for (j, sign), rows in sorted(faces.items(), key=lambda item: (item[0][0], -item[0][1])):
        rows = np.asarray(rows)
        _split_cone(X[rows], rows, j, sign, float(epsilon), (f"C{j + 1}{_sign_label(sign)}",), trace)

    logger.debug("Partition of %d points in l_inf^%d: %d cells", X.shape[0], X.shape[1], len(trace.cells))
    return trace


@dataclass
class PartitionCheck:
    """Exhaustive check of the cell inequalities"""
    ok: bool
    covered: bool
    worst_excess: float
    failures: list

    def to_json(self):
        return {"ok": self.ok, "covered": self.covered, "worst_excess": self.worst_excess, "failures": self.failures}


def verify_partition(points, trace, tol=1e-9):
    """
    Re-check every cell of a partition on the points of M

    A member x of a cell with representative r fails when
    |r| - eps - |x| or |x - r| - (|x| - |r| + eps) exceeds tol*max(1, |x|).
    """
    X = np.atleast_2d(np.asarray(points, dtype=float))
    norms = _linf(X)
    covered = np.zeros(X.shape[0], dtype=bool)
    failures = []
    worst = -np.inf
    eps = trace.epsilon

    for cell in trace.cells:
        members = np.asarray(cell.members, dtype=int)
        covered[members] = True
        r = cell.representative
        if r not in cell.members:
            failures.append({"cell_id": cell.cell_id, "member": r, "check": "representative", "excess": np.inf})
            continue
        below = norms[r] - eps - norms[members]
        spread = _linf(X[members] - X[r]) - (norms[members] - norms[r] + eps)
        slack = tol * np.maximum(1.0, norms[members])
        worst = max(worst, float(np.max(below)), float(np.max(spread)))
        for name, excess in (("norm", below), ("distance", spread)):
            for pos in np.flatnonzero(excess > slack):
                failures.append({"cell_id": cell.cell_id, "member": int(members[pos]), "check": name, "excess": float(excess[pos])})

    ok = not failures and bool(covered.all())
    return PartitionCheck(ok=ok, covered=bool(covered.all()), worst_excess=worst, failures=failures)
