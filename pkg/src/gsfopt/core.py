"""Problem abstraction, solutions, random streams and Pareto dominance.

Everything is stated for minimization. Populations inside the run engine are
kept as arrays (see :class:`Population`); :class:`Solution` is the
per-individual view used by the public operators and by file I/O.
"""

from __future__ import annotations

import enum
import zlib
from collections.abc import Callable, Sequence
from dataclasses import dataclass, field

import numpy as np


class DimensionError(ValueError):
    """Raised when vector lengths or matrix shapes do not agree."""


class StateError(RuntimeError):
    """Raised when an operator receives an unevaluated solution."""


class Dominance(enum.Enum):
    A_DOMINATES = "a_dominates"
    B_DOMINATES = "b_dominates"
    INCOMPARABLE_OR_EQUAL = "incomparable_or_equal"


def dominates(a: Sequence[float], b: Sequence[float]) -> Dominance:
    """Compare two objective vectors under Pareto dominance (minimization).

    Equal vectors are mutually non-dominating.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.ndim != 1 or a.shape != b.shape or a.size == 0:
        raise DimensionError(f"cannot compare vectors of shape {a.shape} and {b.shape}")
    a_le = bool(np.all(a <= b))
    b_le = bool(np.all(b <= a))
    if a_le and not b_le:
        return Dominance.A_DOMINATES
    if b_le and not a_le:
        return Dominance.B_DOMINATES
    return Dominance.INCOMPARABLE_OR_EQUAL


def domination_matrix(F: np.ndarray) -> np.ndarray:
    """Boolean matrix ``D`` with ``D[i, j]`` true iff row i dominates row j."""
    F = np.asarray(F, dtype=float)
    le = np.all(F[:, None, :] <= F[None, :, :], axis=2)
    lt = np.any(F[:, None, :] < F[None, :, :], axis=2)
    return le & lt


def _nondominated_mask_2d(F: np.ndarray) -> np.ndarray:
    order = np.lexsort((F[:, 1], F[:, 0]))
    S = F[order]
    # duplicates form contiguous groups; only strictly earlier groups can dominate
    new_group = np.ones(len(S), dtype=bool)
    new_group[1:] = np.any(S[1:] != S[:-1], axis=1)
    group_start = np.maximum.accumulate(np.where(new_group, np.arange(len(S)), 0))
    prefix_min = np.concatenate([[np.inf], np.minimum.accumulate(S[:, 1])])
    dominated = prefix_min[group_start] <= S[:, 1]
    mask = np.empty(len(S), dtype=bool)
    mask[order] = ~dominated
    return mask


def nondominated_mask(F: np.ndarray, chunk: int = 512) -> np.ndarray:
    """Mask of rows of ``F`` not dominated by any other row."""
    F = np.asarray(F, dtype=float)
    n = F.shape[0]
    if n == 0:
        return np.zeros(0, dtype=bool)
    if F.shape[1] == 2:
        return _nondominated_mask_2d(F)
    mask = np.ones(n, dtype=bool)
    for start in range(0, n, chunk):
        block = F[start : start + chunk]
        le = np.all(F[:, None, :] <= block[None, :, :], axis=2)
        lt = np.any(F[:, None, :] < block[None, :, :], axis=2)
        mask[start : start + chunk] = ~(le & lt).any(axis=0)
    return mask


def nondomination_ranks(F: np.ndarray) -> np.ndarray:
    """Front index of every row (0 is the non-dominated front)."""
    F = np.asarray(F, dtype=float)
    n = F.shape[0]
    dom = domination_matrix(F)
    counts = dom.sum(axis=0)
    ranks = np.full(n, -1, dtype=int)
    front = np.flatnonzero(counts == 0)
    level = 0
    while front.size:
        ranks[front] = level
        counts = counts - dom[front].sum(axis=0)
        counts[ranks >= 0] = -1
        front = np.flatnonzero(counts == 0)
        level += 1
    return ranks


@dataclass(frozen=True, eq=False)
class Solution:
    """A decision vector with its (optional) objective vector.

    ``f`` is ``None`` until the solution has been evaluated. ``violation`` is
    the total distance by which ``x`` leaves the box bounds, zero when
    feasible.
    """

    x: np.ndarray
    f: np.ndarray | None = None
    feasible: bool = True
    violation: float = 0.0
    origin_subpop: int | None = None

    def __post_init__(self) -> None:
        x = np.array(self.x, dtype=float)
        x.setflags(write=False)
        object.__setattr__(self, "x", x)
        if self.f is not None:
            f = np.array(self.f, dtype=float)
            f.setflags(write=False)
            object.__setattr__(self, "f", f)

    @property
    def evaluated(self) -> bool:
        return self.f is not None

    def require_evaluated(self) -> np.ndarray:
        if self.f is None:
            raise StateError("solution has not been evaluated")
        return self.f


def nondominated_filter(solutions: Sequence[Solution]) -> list[Solution]:
    """Solutions not dominated by any other member, in input order.

    Duplicates in objective space are all retained.
    """
    solutions = list(solutions)
    if not solutions:
        return []
    F = np.array([s.require_evaluated() for s in solutions])
    if F.ndim != 2:
        raise DimensionError("solutions have objective vectors of unequal length")
    mask = nondominated_mask(F)
    return [s for s, keep in zip(solutions, mask) if keep]


@dataclass(frozen=True)
class Problem:
    """A box-constrained multi-objective minimization problem.

    ``evaluate`` maps an ``(N, n)`` array of decision vectors to ``(N, M)``
    objectives. It must be deterministic and must return finite values for
    points outside the box (they are still flagged infeasible).
    """

    id: str
    M: int
    n: int
    lower: np.ndarray
    upper: np.ndarray
    evaluate: Callable[[np.ndarray], np.ndarray] = field(repr=False)

    def __post_init__(self) -> None:
        lower = np.asarray(self.lower, dtype=float)
        upper = np.asarray(self.upper, dtype=float)
        if lower.shape != (self.n,) or upper.shape != (self.n,):
            raise DimensionError("bound vectors must have length n")
        if not np.all(lower < upper):
            raise ValueError("lower bounds must be strictly below upper bounds")
        object.__setattr__(self, "lower", lower)
        object.__setattr__(self, "upper", upper)

    def violation(self, X: np.ndarray) -> np.ndarray:
        X = np.atleast_2d(X)
        below = np.clip(self.lower - X, 0.0, None)
        above = np.clip(X - self.upper, 0.0, None)
        return (below + above).sum(axis=1)

    def evaluate_batch(self, X: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Return objectives, feasibility flags and bound violations for ``X``."""
        X = np.atleast_2d(np.asarray(X, dtype=float))
        if X.shape[1] != self.n:
            raise DimensionError(f"expected {self.n} decision variables, got {X.shape[1]}")
        viol = self.violation(X)
        return self.evaluate(X), viol == 0.0, viol

    def evaluate_solution(self, x: Sequence[float], origin_subpop: int | None = None) -> Solution:
        F, feas, viol = self.evaluate_batch(np.asarray(x, dtype=float)[None, :])
        return Solution(np.asarray(x, dtype=float), F[0], bool(feas[0]), float(viol[0]), origin_subpop)

    def random_uniform(self, count: int, rng: RngStream) -> np.ndarray:
        return self.lower + rng.random((count, self.n)) * (self.upper - self.lower)


@dataclass
class Population:
    """Struct-of-arrays population used by the generation steps."""

    X: np.ndarray
    F: np.ndarray
    feasible: np.ndarray
    violation: np.ndarray

    @classmethod
    def evaluate(cls, problem: Problem, X: np.ndarray) -> Population:
        F, feas, viol = problem.evaluate_batch(X)
        return cls(np.array(X, dtype=float), F, feas, viol)

    @classmethod
    def empty(cls, n: int, M: int) -> Population:
        return cls(np.empty((0, n)), np.empty((0, M)), np.empty(0, dtype=bool), np.empty(0))

    def __len__(self) -> int:
        return self.X.shape[0]

    def take(self, idx: np.ndarray | Sequence[int]) -> Population:
        idx = np.asarray(idx, dtype=int)
        return Population(self.X[idx], self.F[idx], self.feasible[idx], self.violation[idx])

    def concat(self, other: Population) -> Population:
        return Population(
            np.vstack([self.X, other.X]),
            np.vstack([self.F, other.F]),
            np.concatenate([self.feasible, other.feasible]),
            np.concatenate([self.violation, other.violation]),
        )

    def copy(self) -> Population:
        return Population(self.X.copy(), self.F.copy(), self.feasible.copy(), self.violation.copy())

    def to_solutions(self, origin_subpop: int | None = None) -> list[Solution]:
        return [
            Solution(self.X[i], self.F[i], bool(self.feasible[i]), float(self.violation[i]), origin_subpop)
            for i in range(len(self))
        ]

    @classmethod
    def from_solutions(cls, solutions: Sequence[Solution]) -> Population:
        if not solutions:
            raise ValueError("cannot build a population from no solutions")
        return cls(
            np.array([s.x for s in solutions]),
            np.array([s.require_evaluated() for s in solutions]),
            np.array([s.feasible for s in solutions], dtype=bool),
            np.array([s.violation for s in solutions], dtype=float),
        )


def _key_word(part: int | str) -> int:
    if isinstance(part, str):
        return zlib.crc32(part.encode())
    return int(part)


class RngStream:
    """Counter-based random stream keyed by ``(seed, *key)``.

    Streams with equal seed and key replay identical sequences. The key is
    typically ``(run, subpopulation, purpose)``, so the order in which runs or
    subpopulations execute cannot change any draw.
    """

    def __init__(self, seed: int, *key: int | str) -> None:
        self.seed = int(seed)
        self.key = tuple(key)
        ss = np.random.SeedSequence(self.seed & (2**64 - 1), spawn_key=tuple(_key_word(k) for k in key))
        self.generator = np.random.Generator(np.random.Philox(ss))

    @property
    def stream_id(self) -> tuple[int | str, ...]:
        return self.key

    def child(self, *key: int | str) -> RngStream:
        return RngStream(self.seed, *self.key, *key)

    def random(self, size=None):
        return self.generator.random(size)

    def integers(self, low, high=None, size=None):
        return self.generator.integers(low, high, size=size)

    def choice(self, a, size=None, replace=True, p=None):
        return self.generator.choice(a, size=size, replace=replace, p=p)

    def normal(self, loc=0.0, scale=1.0, size=None):
        return self.generator.normal(loc, scale, size)

    def __repr__(self) -> str:
        return f"RngStream(seed={self.seed}, key={self.key})"
