"""
Finite models of the target spaces: eventually constant sequences for c and
c_0, and real functions on finite metric spaces for C(K).
"""
import logging
from dataclasses import dataclass

import numpy as np

from utils.errors import InputError

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class EcSeq:
    """
    Eventually constant real sequence (prefix_1, ..., prefix_p, tail, tail, ...).

    The prefix is stored in canonical form: trailing entries equal to the
    tail are dropped on construction, so two EcSeq describing the same
    sequence compare equal. Coordinates are 1-based as in sequence notation.
    """
    prefix: tuple
    tail: float = 0.0

    def __post_init__(self):
        try:
            values = [float(v) for v in self.prefix]
            tail = float(self.tail)
        except (TypeError, ValueError):
            raise InputError(f"EcSeq entries must be numbers, got prefix {self.prefix!r} and tail {self.tail!r}") from None
        if not np.all(np.isfinite(values)) or not np.isfinite(tail):
            raise InputError("EcSeq entries must be finite")

        while values and values[-1] == tail:
            values.pop()
        object.__setattr__(self, "prefix", tuple(values))
        object.__setattr__(self, "tail", tail)

    @classmethod
    def constant(cls, value):
        return cls(prefix=(), tail=value)

    @property
    def prefix_length(self):
        return len(self.prefix)

    @property
    def in_c0(self):
        return self.tail == 0.0

    def value_at(self, k):
        """k-th coordinate, k >= 1"""
        if k < 1:
            raise InputError(f"Sequence coordinates start at 1, got {k}")
        return self.prefix[k - 1] if k <= len(self.prefix) else self.tail

    def expand(self, length):
        """First `length` coordinates, padding the prefix with the tail"""
        out = np.full(length, self.tail, dtype=float)
        p = min(length, len(self.prefix))
        out[:p] = self.prefix[:p]
        return out

    def sup_norm(self):
        return max(max((abs(v) for v in self.prefix), default=0.0), abs(self.tail))

    def to_json(self):
        return {"prefix": list(self.prefix), "tail": self.tail}

    @classmethod
    def from_json(cls, data):
        if not isinstance(data, dict) or "prefix" not in data or "tail" not in data:
            raise InputError(f"EcSeq must be an object with 'prefix' and 'tail', got {data!r}")
        if not isinstance(data["prefix"], list):
            raise InputError(f"EcSeq prefix must be a list, got {data['prefix']!r}")
        return cls(prefix=tuple(data["prefix"]), tail=data["tail"])


def joint_prefix_length(seqs):
    return max((s.prefix_length for s in seqs), default=0)


def sequence_matrix(seqs, length=None):
    """
    Stack sequences as rows of a matrix over their joint prefix range

    Returns:
    tuple: (matrix of shape (len(seqs), length), vector of tails)
    """
    length = joint_prefix_length(seqs) if length is None else length
    matrix = np.array([s.expand(length) for s in seqs], dtype=float).reshape(len(seqs), length)
    tails = np.array([s.tail for s in seqs], dtype=float)
    return matrix, tails


def sup_dist(a, b):
    """Supremum distance between two eventually constant sequences"""
    length = max(a.prefix_length, b.prefix_length)
    tail_gap = abs(a.tail - b.tail)
    if length == 0:
        return tail_gap
    return float(max(np.max(np.abs(a.expand(length) - b.expand(length))), tail_gap))


@dataclass(frozen=True, eq=False)
class FiniteMetricSpace:
    """
    Finite metric space given by its distance matrix rho.

    rho must be symmetric with zero diagonal, positive off-diagonal entries
    and satisfy the triangle inequality (checked up to `tol`).
    """
    rho: np.ndarray
    tol: float = 1e-12

    def __post_init__(self):
        rho = np.array(self.rho, dtype=float)
        if rho.ndim != 2 or rho.shape[0] != rho.shape[1] or rho.shape[0] == 0:
            raise InputError("Distance matrix must be a non-empty square matrix")
        if not np.all(np.isfinite(rho)):
            raise InputError("Distance matrix must be finite")

        scale = max(1.0, float(np.max(np.abs(rho))))
        if not np.allclose(rho, rho.T, rtol=0, atol=self.tol * scale):
            raise InputError("Distance matrix must be symmetric")
        if np.any(np.diag(rho) != 0):
            raise InputError("Distance matrix must have a zero diagonal")
        off_diagonal = rho[~np.eye(rho.shape[0], dtype=bool)]
        if np.any(off_diagonal <= 0):
            raise InputError("Distinct points of a metric space must be at positive distance")

        # rho[i, k] <= rho[i, j] + rho[j, k] for all triples
        through = rho[:, :, None] + rho[None, :, :]
        if np.any(rho[:, None, :] > through + self.tol * scale):
            raise InputError("Distance matrix violates the triangle inequality")

        rho = 0.5 * (rho + rho.T)
        rho.setflags(write=False)
        object.__setattr__(self, "rho", rho)

    @classmethod
    def from_points_1d(cls, coords):
        coords = np.asarray(coords, dtype=float).reshape(-1)
        return cls(rho=np.abs(coords[:, None] - coords[None, :]))

    @classmethod
    def from_points(cls, points, space):
        """Metric induced by a normed space on a finite set of points"""
        from utils.spaces import pairwise_distances

        return cls(rho=pairwise_distances(space, points))

    @property
    def size(self):
        return self.rho.shape[0]

    @property
    def diameter(self):
        return float(np.max(self.rho))

    @property
    def min_distance(self):
        """Smallest nonzero distance"""
        if self.size < 2:
            raise InputError("A one point space has no nonzero distance")
        return float(np.min(self.rho[~np.eye(self.size, dtype=bool)]))

    def to_json(self):
        return {"rho": self.rho.tolist()}

    @classmethod
    def from_json(cls, data):
        if isinstance(data, dict) and "rho" in data:
            return cls(rho=data["rho"])
        if isinstance(data, dict) and "points_1d" in data:
            return cls.from_points_1d(data["points_1d"])
        raise InputError("Metric space block needs a 'rho' matrix or a 'points_1d' list")


@dataclass(frozen=True, eq=False)
class FiniteFunction:
    """Real function on the points of a FiniteMetricSpace"""
    values: np.ndarray
    space: FiniteMetricSpace

    def __post_init__(self):
        values = np.array(self.values, dtype=float).reshape(-1)
        if values.shape[0] != self.space.size:
            raise InputError(f"Function has {values.shape[0]} values but the metric space has {self.space.size} points")
        if not np.all(np.isfinite(values)):
            raise InputError("Function values must be finite")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    def sup_norm(self):
        return float(np.max(np.abs(self.values)))

    def to_json(self):
        return self.values.tolist()


def sup_dist_fn(a, b):
    """Supremum distance between two functions on the same finite metric space"""
    if a.values.shape != b.values.shape:
        raise InputError(f"Size mismatch: {a.values.shape[0]} vs {b.values.shape[0]} points")
    return float(np.max(np.abs(a.values - b.values)))
