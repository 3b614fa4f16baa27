"""Differential evolution operators (rand/1/bin) and the single-objective step.

The operators work row-wise on arrays, so one call handles a whole
subpopulation; a single vector is just a one-row batch.
"""

from __future__ import annotations

from collections.abc import Callable
from dataclasses import dataclass

import numpy as np

from .core import DimensionError, Population, Problem, RngStream, Solution

# (members, rng) -> array (3, N, n) holding r1, r2, r3 for every member
ParentSampler = Callable[[Population, RngStream], np.ndarray]


@dataclass(frozen=True)
class DeParams:
    F: float
    CR: float
    objective_index: int = 0

    def __post_init__(self) -> None:
        if not 0.0 <= self.F <= 2.0:
            raise ValueError(f"F must lie in [0, 2], got {self.F}")
        if not 0.0 <= self.CR <= 1.0:
            raise ValueError(f"CR must lie in [0, 1], got {self.CR}")
        if self.objective_index < 0:
            raise ValueError("objective_index must be non-negative")


@dataclass
class StepReport:
    """What a generation step created, in member order.

    ``target_F`` holds each DE target parent's objectives, ``trials`` the
    evaluated offspring. Both are taken before selection. ``accepted`` marks
    trials that survived the strategy's own selection (or entered its archive).
    """

    target_F: np.ndarray
    trials: Population
    accepted: np.ndarray | None = None


def mutate(r1: np.ndarray, r2: np.ndarray, r3: np.ndarray, F: float) -> np.ndarray:
    """Mutant ``r1 + F * (r2 - r3)``, no bound handling."""
    r1, r2, r3 = (np.asarray(r, dtype=float) for r in (r1, r2, r3))
    if not r1.shape == r2.shape == r3.shape:
        raise DimensionError(f"parent shapes differ: {r1.shape}, {r2.shape}, {r3.shape}")
    return r1 + F * (r2 - r3)


def crossover(x: np.ndarray, v: np.ndarray, CR: float, rng: RngStream) -> np.ndarray:
    """Binomial crossover; at least the component ``rnd_i`` comes from ``v``."""
    x = np.asarray(x, dtype=float)
    v = np.asarray(v, dtype=float)
    if x.shape != v.shape or x.shape[-1] == 0:
        raise DimensionError(f"cannot cross shapes {x.shape} and {v.shape}")
    X = np.atleast_2d(x)
    V = np.atleast_2d(v)
    N, n = X.shape
    take = rng.random((N, n)) <= CR
    take[np.arange(N), rng.integers(0, n, size=N)] = True
    u = np.where(take, V, X)
    return u if x.ndim == 2 else u[0]


def de_trial_wins(parent: Population, trial: Population, objective_index: int) -> np.ndarray:
    """Mask of members whose trial replaces the parent.

    Feasible beats infeasible; two infeasible compare total bound violation;
    two feasible compare the chosen objective. Ties keep the parent.
    """
    pf, tf = parent.feasible, trial.feasible
    better_f = trial.F[:, objective_index] < parent.F[:, objective_index]
    better_v = trial.violation < parent.violation
    return np.where(pf & tf, better_f, np.where(pf | tf, tf, better_v))


def de_select(parent: Solution, trial: Solution, objective_index: int) -> Solution:
    parent.require_evaluated()
    trial.require_evaluated()
    wins = de_trial_wins(Population.from_solutions([parent]), Population.from_solutions([trial]), objective_index)
    return trial if wins[0] else parent


def local_parents(members: Population, rng: RngStream) -> np.ndarray:
    """r1, r2, r3 drawn without replacement from the subpopulation, excluding the target."""
    N = len(members)
    if N < 4:
        raise ValueError("local parent sampling needs at least 4 members")
    keys = rng.random((N, N))
    np.fill_diagonal(keys, np.inf)
    idx = np.argpartition(keys, 3, axis=1)[:, :3]
    # argpartition leaves the three smallest unordered; order them by key for determinism
    order = np.argsort(np.take_along_axis(keys, idx, axis=1), axis=1)
    idx = np.take_along_axis(idx, order, axis=1)
    return members.X[idx.T]


def make_trials(
    members: Population, F: float, CR: float, parent_sampler: ParentSampler, problem: Problem, rng: RngStream
) -> Population:
    R = parent_sampler(members, rng)
    V = mutate(R[0], R[1], R[2], F)
    U = crossover(members.X, V, CR, rng)
    return Population.evaluate(problem, U)


def de_generation_step(
    subpop: Population,
    params: DeParams,
    parent_sampler: ParentSampler,
    problem: Problem,
    rng: RngStream,
) -> tuple[Population, StepReport]:
    """One mutate/crossover/evaluate/select pass over every member."""
    trials = make_trials(subpop, params.F, params.CR, parent_sampler, problem, rng)
    wins = de_trial_wins(subpop, trials, params.objective_index)
    nxt = subpop.copy()
    nxt.X[wins] = trials.X[wins]
    nxt.F[wins] = trials.F[wins]
    nxt.feasible[wins] = trials.feasible[wins]
    nxt.violation[wins] = trials.violation[wins]
    return nxt, StepReport(subpop.F.copy(), trials, wins)


def run_de(
    problem: Problem, size: int, generations: int, params: DeParams, rng: RngStream
) -> tuple[Population, np.ndarray]:
    """Standalone panmictic DE; returns final population and best-so-far per generation."""
    pop = Population.evaluate(problem, problem.random_uniform(size, rng))
    history = np.empty(generations)
    for g in range(generations):
        pop, _ = de_generation_step(pop, params, local_parents, problem, rng)
        history[g] = pop.F[pop.feasible, params.objective_index].min(initial=np.inf)
    return pop, history
