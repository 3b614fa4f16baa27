"""Generalized Differential Evolution 3 with k-nearest-neighbor pruning."""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .core import Dominance, Population, Problem, RngStream, Solution, dominates, nondominated_mask, nondomination_ranks
from .de import DeParams, ParentSampler, StepReport, local_parents, make_trials


class Gde3Choice(enum.IntEnum):
    KEEP_S = 0
    KEEP_T = 1
    KEEP_BOTH = 2


@dataclass(frozen=True)
class PruneParams:
    k: int
    target_size: int

    def __post_init__(self) -> None:
        if self.k < 1 or self.target_size < 1:
            raise ValueError("k and target_size must be >= 1")


def gde3_choices(parents: Population, trials: Population) -> np.ndarray:
    """Vectorized selection rule; returns an array of :class:`Gde3Choice` codes."""
    s, t = parents.F, trials.F
    t_dom = np.all(t <= s, axis=1) & np.any(t < s, axis=1)
    s_dom = np.all(s <= t, axis=1) & np.any(s < t, axis=1)
    sf, tf = parents.feasible, trials.feasible
    both = np.where(t_dom, Gde3Choice.KEEP_T, np.where(s_dom, Gde3Choice.KEEP_S, Gde3Choice.KEEP_BOTH))
    one = np.where(tf, Gde3Choice.KEEP_T, Gde3Choice.KEEP_S)
    neither = np.where(t_dom, Gde3Choice.KEEP_T, Gde3Choice.KEEP_S)
    return np.where(sf & tf, both, np.where(sf | tf, one, neither)).astype(int)


def gde3_select(s: Solution, t: Solution) -> Gde3Choice:
    fs, ft = s.require_evaluated(), t.require_evaluated()
    rel = dominates(fs, ft)
    if not s.feasible and not t.feasible:
        # raw objectives stand in for the unconstrained space
        return Gde3Choice.KEEP_T if rel is Dominance.B_DOMINATES else Gde3Choice.KEEP_S
    if s.feasible != t.feasible:
        return Gde3Choice.KEEP_S if s.feasible else Gde3Choice.KEEP_T
    if rel is Dominance.A_DOMINATES:
        return Gde3Choice.KEEP_S
    if rel is Dominance.B_DOMINATES:
        return Gde3Choice.KEEP_T
    return Gde3Choice.KEEP_BOTH


def _normalize(F: np.ndarray, bounds: tuple[np.ndarray, np.ndarray] | None) -> np.ndarray:
    lo, hi = (F.min(axis=0), F.max(axis=0)) if bounds is None else bounds
    span = np.where(hi - lo > 0.0, hi - lo, 1.0)
    return (F - lo) / span


def _pairwise(F: np.ndarray) -> np.ndarray:
    sq = np.zeros((F.shape[0], F.shape[0]))
    for j in range(F.shape[1]):
        d = F[:, j, None] - F[None, :, j]
        sq += d * d
    return np.sqrt(sq)


def knn_crowding(
    F: np.ndarray,
    k: int,
    normalize: bool = True,
    bounds: tuple[np.ndarray, np.ndarray] | None = None,
) -> np.ndarray:
    """Distance from every member to its k-th nearest neighbor (larger = less crowded).

    Objectives are min-max normalized over the set (or over ``bounds``) unless
    ``normalize`` is false. With ``len(F) <= k`` the farthest neighbor is used.
    """
    F = np.asarray(F, dtype=float)
    n = F.shape[0]
    if n < 2:
        return np.full(n, np.inf)
    G = _normalize(F, bounds) if normalize else F
    D = _pairwise(G)
    np.fill_diagonal(D, np.inf)
    kk = min(k, n - 1)
    return np.partition(D, kk - 1, axis=1)[:, kk - 1]


def constrained_ranks(pop: Population) -> np.ndarray:
    """Non-domination ranks of feasible members; infeasible ones ranked after, by violation."""
    ranks = np.empty(len(pop), dtype=int)
    feas = np.flatnonzero(pop.feasible)
    infeas = np.flatnonzero(~pop.feasible)
    top = 0
    if feas.size:
        ranks[feas] = nondomination_ranks(pop.F[feas])
        top = ranks[feas].max() + 1
    if infeas.size:
        order = np.argsort(pop.violation[infeas], kind="stable")
        ranks[infeas[order]] = top + np.arange(infeas.size)
    return ranks


def _fronts(pop: Population):
    """Yield member indices front by front: feasible by dominance, then infeasible by violation."""
    rest = np.flatnonzero(pop.feasible)
    while rest.size:
        mask = nondominated_mask(pop.F[rest])
        yield rest[mask]
        rest = rest[~mask]
    infeas = np.flatnonzero(~pop.feasible)
    for i in infeas[np.argsort(pop.violation[infeas], kind="stable")]:
        yield np.array([i])


def _crowding_removal(G: np.ndarray, k: int, n_remove: int) -> np.ndarray:
    """Iteratively drop the most crowded row of ``G``; returns the survivors' mask.

    Scores are maintained incrementally: each row keeps a pointer into its
    sorted neighbor list, advanced past removed neighbors.
    """
    m = G.shape[0]
    alive = np.ones(m, dtype=bool)
    if n_remove <= 0:
        return alive
    D = _pairwise(G)
    np.fill_diagonal(D, np.inf)
    order = np.argsort(D, axis=1)
    pos = np.empty_like(order)
    np.put_along_axis(pos, order, np.arange(m)[None, :].repeat(m, axis=0), axis=1)
    kk = min(k, m - 1)
    ptr = np.full(m, kk - 1)
    score = D[np.arange(m), order[:, kk - 1]]
    n_alive = m
    for _ in range(n_remove):
        if n_alive - 1 <= k:
            # too few left for a k-th neighbor: fall back to the farthest one
            idx = np.flatnonzero(alive)
            sub = D[np.ix_(idx, idx)]
            kk2 = min(k, idx.size - 1)
            score[idx] = np.partition(sub, kk2 - 1, axis=1)[:, kk2 - 1] if kk2 >= 1 else 0.0
        victim = m - 1 - int(np.argmin(score[::-1]))  # newest among ties goes
        alive[victim] = False
        score[victim] = np.inf
        n_alive -= 1
        if n_alive - 1 <= k:
            continue
        for i in np.flatnonzero(alive & (pos[:, victim] <= ptr)):
            p = ptr[i] + 1
            while not alive[order[i, p]]:
                p += 1
            ptr[i] = p
            score[i] = D[i, order[i, p]]
    return alive


def prune(pop: Population, params: PruneParams) -> Population:
    """Reduce ``pop`` to ``params.target_size`` members.

    Whole fronts are kept in rank order; the front that does not fit loses its
    most crowded member one at a time, with scores recomputed after each
    removal. Survivors keep their relative order.
    """
    n = len(pop)
    target = params.target_size
    if n < target:
        raise ValueError(f"cannot prune {n} members up to {target}")
    if n == target:
        return pop
    keep = np.zeros(n, dtype=bool)
    filled = 0
    for front in _fronts(pop):
        if filled + front.size <= target:
            keep[front] = True
            filled += front.size
            if filled == target:
                break
            continue
        bounds = (pop.F.min(axis=0), pop.F.max(axis=0))
        G = _normalize(pop.F[front], bounds)
        survivors = _crowding_removal(G, params.k, filled + front.size - target)
        keep[front[survivors]] = True
        break
    return pop.take(np.flatnonzero(keep))


def gde3_generation_step(
    subpop: Population,
    de_params: DeParams,
    prune_params: PruneParams,
    parent_sampler: ParentSampler,
    problem: Problem,
    rng: RngStream,
) -> tuple[Population, StepReport]:
    trials = make_trials(subpop, de_params.F, de_params.CR, parent_sampler, problem, rng)
    choice = gde3_choices(subpop, trials)
    first = np.where(choice == Gde3Choice.KEEP_T)[0]
    pool = subpop.copy()
    pool.X[first] = trials.X[first]
    pool.F[first] = trials.F[first]
    pool.feasible[first] = trials.feasible[first]
    pool.violation[first] = trials.violation[first]
    extra = np.flatnonzero(choice == Gde3Choice.KEEP_BOTH)
    if extra.size:
        pool = pool.concat(trials.take(extra))
    nxt = prune(pool, PruneParams(prune_params.k, len(subpop)))
    return nxt, StepReport(subpop.F.copy(), trials, choice != Gde3Choice.KEEP_S)


def run_gde3(
    problem: Problem,
    size: int,
    generations: int,
    de_params: DeParams,
    k: int | None,
    rng: RngStream,
) -> Population:
    """Standalone panmictic GDE3 with local parent sampling."""
    pop = Population.evaluate(problem, problem.random_uniform(size, rng))
    prune_params = PruneParams(k or problem.M, size)
    for _ in range(generations):
        pop, _ = gde3_generation_step(pop, de_params, prune_params, local_parents, problem, rng)
    return pop
