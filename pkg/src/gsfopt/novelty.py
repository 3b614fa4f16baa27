"""Novelty metric, the adaptive novelty archive and the MONA strategy step.

Behavior space is objective space. The archive threshold ``n_min`` rises by
``n_inc`` once more than ``n_a`` candidates have been accepted since the last
rise, and falls by ``n_dec`` after ``n_r`` consecutive rejections.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .core import Population, Problem, RngStream, Solution, nondominated_mask
from .de import DeParams, ParentSampler, StepReport, local_parents, make_trials


class ArchiveCapacityError(RuntimeError):
    """Raised when an archive with a hard cap would grow past it."""


@dataclass(frozen=True)
class NoveltyParams:
    n_min0: float
    k: int = 15
    n_inc: float = 1.1
    n_dec: float = 0.999
    n_a: int = 1
    n_r: int = 50000
    max_size: int | None = None
    window: str = "adjustment"

    def __post_init__(self) -> None:
        if self.window not in ("adjustment", "generation"):
            raise ValueError("window must be 'adjustment' or 'generation'")
        if not self.n_min0 > 0.0:
            raise ValueError("n_min0 must be positive")
        if not self.n_inc > 1.0:
            raise ValueError("n_inc must exceed 1")
        if not 0.0 < self.n_dec < 1.0:
            raise ValueError("n_dec must lie in (0, 1)")
        if self.k < 1 or self.n_a < 1 or self.n_r < 1:
            raise ValueError("k, n_a and n_r must be >= 1")


def default_n_min0(upper: np.ndarray, lower: np.ndarray | None = None) -> float:
    """One tenth of the diagonal of the objective-space box."""
    upper = np.asarray(upper, dtype=float)
    lower = np.zeros_like(upper) if lower is None else np.asarray(lower, dtype=float)
    return 0.1 * float(np.linalg.norm(upper - lower))


def _knn_mean(dist: np.ndarray, k: int) -> float:
    if dist.size == 0:
        return np.inf
    if dist.size <= k:
        return float(dist.mean())
    return float(np.partition(dist, k - 1)[:k].mean())


class NoveltyArchive:
    """Append-only archive of (decision vector, objective vector) entries."""

    def __init__(self, params: NoveltyParams, n: int, M: int) -> None:
        self.params = params
        self.n = n
        self.M = M
        self._X = np.empty((64, n))
        self._F = np.empty((64, M))
        self._gen = np.empty(64, dtype=np.int64)
        self._nmin_at = np.empty(64)
        self._score_at = np.empty(64)
        self.size = 0
        self.increases = 0
        self.decreases = 0
        self.accepted_since_check = 0
        self.rejected_streak = 0
        self.n_min = params.n_min0
        self._window_generation: int | None = None

    def __len__(self) -> int:
        return self.size

    @property
    def X(self) -> np.ndarray:
        return self._X[: self.size]

    @property
    def F(self) -> np.ndarray:
        return self._F[: self.size]

    @property
    def acceptance_log(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Generation, threshold and score in force at each entry's acceptance."""
        return self._gen[: self.size], self._nmin_at[: self.size], self._score_at[: self.size]

    def score(self, f: np.ndarray) -> float:
        f = np.asarray(f, dtype=float)
        return _knn_mean(np.linalg.norm(self.F - f, axis=1), self.params.k)

    def _grow(self) -> None:
        cap = 2 * self._X.shape[0]
        for name in ("_X", "_F", "_gen", "_nmin_at", "_score_at"):
            old = getattr(self, name)
            new = np.empty((cap,) + old.shape[1:], dtype=old.dtype)
            new[: self.size] = old[: self.size]
            setattr(self, name, new)

    def _append(self, x: np.ndarray, f: np.ndarray, generation: int, score: float) -> None:
        cap = self.params.max_size
        if cap is not None and self.size >= cap:
            raise ArchiveCapacityError(
                f"novelty archive reached its cap of {cap} entries (n_min={self.n_min:.6g}); "
                "raise max_size or the initial threshold"
            )
        if self.size == self._X.shape[0]:
            self._grow()
        i = self.size
        self._X[i] = x
        self._F[i] = f
        self._gen[i] = generation
        self._nmin_at[i] = self.n_min
        self._score_at[i] = score
        self.size += 1

    def _update_threshold(self) -> None:
        p = self.params
        self.n_min = p.n_min0 * p.n_inc**self.increases * p.n_dec**self.decreases

    def _decide(self, x: np.ndarray, f: np.ndarray, score: float, generation: int) -> bool:
        p = self.params
        if p.window == "generation" and generation != self._window_generation:
            self._window_generation = generation
            self.accepted_since_check = 0
        if score > self.n_min:
            self._append(x, f, generation, score)
            self.accepted_since_check += 1
            self.rejected_streak = 0
            if self.accepted_since_check > p.n_a:
                self.increases += 1
                self.accepted_since_check = 0
                self._update_threshold()
            return True
        self.rejected_streak += 1
        if self.rejected_streak >= p.n_r:
            self.decreases += 1
            self.rejected_streak = 0
            self._update_threshold()
        return False

    def offer(self, x: np.ndarray, f: np.ndarray, generation: int = 0) -> bool:
        x = np.asarray(x, dtype=float)
        f = np.asarray(f, dtype=float)
        return self._decide(x, f, self.score(f), generation)

    def offer_batch(self, X: np.ndarray, F: np.ndarray, generation: int = 0, chunk: int = 512) -> np.ndarray:
        """Offer rows in order; same outcome as repeated :meth:`offer`, fewer distance passes."""
        X = np.atleast_2d(X)
        F = np.atleast_2d(F)
        N = F.shape[0]
        if N > chunk:
            return np.concatenate(
                [self.offer_batch(X[i : i + chunk], F[i : i + chunk], generation, chunk) for i in range(0, N, chunk)]
            )
        accepted = np.zeros(N, dtype=bool)
        if N == 0:
            return accepted
        base = self.size
        d_old = np.sqrt(((F[:, None, :] - self.F[None, :, :]) ** 2).sum(axis=2)) if base else np.empty((N, 0))
        d_new = np.sqrt(((F[:, None, :] - F[None, :, :]) ** 2).sum(axis=2))
        for j in range(N):
            dist = np.concatenate([d_old[j], d_new[j, accepted[:j].nonzero()[0]]])
            accepted[j] = self._decide(X[j], F[j], _knn_mean(dist, self.params.k), generation)
        return accepted

    def nondominated(self) -> Population:
        mask = nondominated_mask(self.F)
        n = int(mask.sum())
        return Population(self.X[mask].copy(), self.F[mask].copy(), np.ones(n, dtype=bool), np.zeros(n))

    def dump(self, path: str | Path) -> None:
        """One line per entry: x, f, acceptance generation, n_min at acceptance."""
        gen, nmin, _ = self.acceptance_log
        data = np.column_stack([self.X, self.F, gen, nmin])
        header = " ".join([f"x{j}" for j in range(self.n)] + [f"f{m + 1}" for m in range(self.M)] + ["generation", "n_min"])
        np.savetxt(path, data, fmt="%.17g", header=header)


def novelty_score(x: np.ndarray, archive: NoveltyArchive, k: int) -> float:
    """Mean distance from behavior ``x`` to its k nearest archive entries (+inf if empty)."""
    return _knn_mean(np.linalg.norm(archive.F - np.asarray(x, dtype=float), axis=1), k)


def archive_offer(archive: NoveltyArchive, candidate: Solution, params: NoveltyParams, generation: int = 0) -> bool:
    f = candidate.require_evaluated()
    if params is not archive.params and params != archive.params:
        raise ValueError("archive was built with different novelty parameters")
    return archive.offer(candidate.x, f, generation)


def resample_from_archive(archive: NoveltyArchive, size: int, rng: RngStream) -> Population:
    idx = rng.integers(0, len(archive), size=size)
    return Population(archive.X[idx].copy(), archive.F[idx].copy(), np.ones(size, dtype=bool), np.zeros(size))


def mona_generation_step(
    subpop: Population,
    de_params: DeParams,
    archive: NoveltyArchive,
    parent_sampler: ParentSampler,
    problem: Problem,
    rng: RngStream,
    generation: int = 0,
) -> tuple[Population, StepReport]:
    """Vary every member with DE operators, offer the feasible trials, resample from the archive.

    Infeasible trials never enter the archive. If the archive is still empty
    the population is kept unchanged.
    """
    trials = make_trials(subpop, de_params.F, de_params.CR, parent_sampler, problem, rng)
    feas = trials.feasible
    accepted = np.zeros(len(trials), dtype=bool)
    accepted[feas] = archive.offer_batch(trials.X[feas], trials.F[feas], generation)
    report = StepReport(subpop.F.copy(), trials, accepted)
    if len(archive) == 0:
        return subpop.copy(), report
    return resample_from_archive(archive, len(subpop), rng), report


def run_mona(
    problem: Problem, size: int, generations: int, de_params: DeParams, params: NoveltyParams, rng: RngStream
) -> NoveltyArchive:
    """Standalone MONA; the result is the archive, whose non-dominated set is the output."""
    pop = Population.evaluate(problem, problem.random_uniform(size, rng))
    archive = NoveltyArchive(params, problem.n, problem.M)
    archive.offer_batch(pop.X[pop.feasible], pop.F[pop.feasible], 0)
    for g in range(1, generations + 1):
        pop, _ = mona_generation_step(pop, de_params, archive, local_parents, problem, rng, g)
    return archive
