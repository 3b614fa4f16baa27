"""Acceptance criteria, one test per criterion.

Each test prints a ``criterion N: PASS|FAIL - detail`` line (echoed again in
the terminal summary) and asserts the criterion at its stated tolerance.
Criteria 4 and 6 share one set of desk-scale runs.
"""

import math
import time
from dataclasses import replace

import numpy as np
import pytest

from gsfopt.assess import epsilon_indicator, hypervolume, mann_whitney
from gsfopt.core import Population, Problem, RngStream, nondomination_ranks
from gsfopt.de import DeParams, crossover, run_de
from gsfopt.experiment import (
    AlgorithmSpec,
    ExperimentPlan,
    collect_forces,
    collect_results,
    default_workers,
    run_experiment,
)
from gsfopt.forces import ForceHistogram, exclusion_report
from gsfopt.gde3 import PruneParams, prune
from gsfopt.gsf import preset, run_gsf
from gsfopt.novelty import NoveltyArchive, NoveltyParams
from gsfopt.wfg import WfgInstance, wfg_evaluate, wfg_front_samples
from test_wfg import load_golden

DESK_RUNS, DESK_GENERATIONS, DESK_SIZE = 10, 2000, 100
DESK_SEED = 2024


def bisection_epsilon(T, O, iters=200):
    def covers(eps):
        ok = np.all(T[None, :, :] <= eps * O[:, None, :], axis=2)
        return bool(ok.any(axis=1).all())

    lo, hi = 0.0, 1.0
    while not covers(hi):
        hi *= 2.0
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        if covers(mid):
            hi = mid
        else:
            lo = mid
    return hi


def mc_hypervolume_2d(P, ref, samples, rng):
    """Plain hit-or-miss estimate over the box [0, ref]."""
    hits = 0
    for start in range(0, samples, 100_000):
        U = rng.random((min(100_000, samples - start), 2)) * ref
        dom = np.zeros(len(U), dtype=bool)
        for p in P:
            dom |= (p[0] <= U[:, 0]) & (p[1] <= U[:, 1])
        hits += int(dom.sum())
    frac = hits / samples
    box = float(np.prod(ref))
    return box * frac, box * math.sqrt(frac * (1 - frac) / samples)


def test_criterion_1_indicator_oracles(report):
    start = time.perf_counter()
    rng = np.random.default_rng(101)
    eps_err = 0.0
    for _ in range(200):
        M = int(rng.integers(2, 6))
        T = rng.random((int(rng.integers(1, 21)), M)) + 0.01
        O = rng.random((int(rng.integers(1, 21)), M)) + 0.01
        eps_err = max(eps_err, abs(epsilon_indicator(T, O) - bisection_epsilon(T, O)))
    worst_z = 0.0
    for _ in range(100):
        P = rng.random((int(rng.integers(1, 31)), 2))
        ref = np.ones(2)
        est, se = mc_hypervolume_2d(P, ref, 10**6, rng)
        worst_z = max(worst_z, abs(hypervolume(P, ref) - est) / se if se > 0 else 0.0)
    elapsed = time.perf_counter() - start
    ok = eps_err <= 1e-9 and worst_z <= 4.0 and elapsed < 60
    report(1, ok, f"max |eps - bisection| = {eps_err:.2e}, worst HV deviation {worst_z:.2f} SE, {elapsed:.1f}s")
    assert ok


def test_criterion_2_wfg_fidelity(report):
    start = time.perf_counter()
    worst = 0.0
    for index in range(1, 10):
        for M in (2, 5):
            Z, expected = load_golden(index, M)
            assert len(Z) == 100
            worst = max(worst, float(np.max(np.abs(wfg_evaluate(WfgInstance(index, M), Z) - expected))))
    sphere = 0.0
    for M in (2, 5):
        inst = WfgInstance(4, M)
        F = wfg_front_samples(inst, 2000, RngStream(3, "sphere", M))
        sphere = max(sphere, float(np.max(np.abs(np.sum((F / inst.objective_upper) ** 2, axis=1) - 1.0))))
    elapsed = time.perf_counter() - start
    ok = worst <= 1e-9 and sphere <= 1e-6 and elapsed < 60
    report(2, ok, f"golden max error {worst:.2e}, WFG4 sphere deviation {sphere:.2e}, {elapsed:.1f}s")
    assert ok


def test_criterion_3_operator_analytics(report):
    rng = RngStream(303)
    violations = 0
    for _ in range(100):
        n = int(rng.integers(1, 40))
        CR = float(rng.random())
        u = crossover(np.zeros((1000, n)), np.ones((1000, n)), CR, rng)
        violations += int(np.sum(u.sum(axis=1) < 1))

    gen = np.random.default_rng(304)
    prune_violations = 0
    for _ in range(500):
        N = int(gen.integers(4, 60))
        M = int(gen.integers(2, 4))
        F = gen.integers(0, 8, (N, M)).astype(float)
        pool = Population(np.arange(N, dtype=float)[:, None], F, np.ones(N, dtype=bool), np.zeros(N))
        target = int(gen.integers(1, N))
        kept = prune(pool, PruneParams(int(gen.integers(1, 5)), target)).X[:, 0].astype(int)
        dropped = np.setdiff1d(np.arange(N), kept)
        ranks = nondomination_ranks(F)
        for j in dropped:
            dom = np.all(F[j] <= F[kept], axis=1) & np.any(F[j] < F[kept], axis=1)
            prune_violations += int(dom.any())
        prune_violations += int(ranks[kept].max() > ranks[dropped].min())

    params = NoveltyParams(n_min0=0.05, k=5, n_inc=1.3, n_dec=0.9, n_a=2, n_r=20)
    archive = NoveltyArchive(params, 1, 2)
    identity_breaks = 0
    for g in range(1000):
        F = gen.random((100, 2)) * gen.random()
        for x, f in zip(np.zeros((100, 1)), F):
            archive.offer(x, f, g)
            expected = params.n_min0 * params.n_inc**archive.increases * params.n_dec**archive.decreases
            identity_breaks += archive.n_min != expected
    ok = violations == 0 and prune_violations == 0 and identity_breaks == 0
    report(
        3,
        ok,
        f"crossover violations {violations}/100000, prune violations {prune_violations}/500, "
        f"threshold identity breaks {identity_breaks}/100000 (A={archive.increases}, R={archive.decreases})",
    )
    assert ok


@pytest.fixture(scope="session")
def desk_results(tmp_path_factory):
    """Desk-scale runs shared by criteria 4 and 6 (published parameter settings)."""
    root = tmp_path_factory.mktemp("desk")
    plan = ExperimentPlan(
        problems=("WFG1", "WFG2", "WFG3", "WFG4"),
        algorithms=(AlgorithmSpec("SAN", "SAN"), AlgorithmSpec("GDE3", "GDE3")),
        runs=DESK_RUNS,
        generations=DESK_GENERATIONS,
        total_size=DESK_SIZE,
        out=str(root / "main"),
        seed=DESK_SEED,
    )
    mona = replace(plan, problems=("WFG1",), algorithms=(AlgorithmSpec("MONA", "MONA"),), out=str(root / "mona"))
    workers = min(4, default_workers())
    start = time.perf_counter()
    run_experiment(plan, workers=workers)
    run_experiment(mona, workers=workers)
    elapsed = time.perf_counter() - start
    return plan, mona, collect_results([plan.out, mona.out]), elapsed, workers


def eps_of(results, problem, algorithm, key="epsilon"):
    return [v[0][key] for _, v in sorted(results[problem][algorithm].items())]


def test_criterion_4_directional_epsilon(desk_results, report):
    plan, _, results, elapsed, workers = desk_results
    parts = []
    ok = True
    for problem in ("WFG1", "WFG2", "WFG3"):
        san, gde3 = eps_of(results, problem, "SAN"), eps_of(results, problem, "GDE3")
        p = mann_whitney(san, gde3)
        ok &= p < 0.05
        # additive values are context only; the verdict uses the multiplicative form
        san_a, gde3_a = eps_of(results, problem, "SAN", "epsilon_additive"), eps_of(results, problem, "GDE3", "epsilon_additive")
        parts.append(
            f"{problem} SAN {np.mean(san):.3f} vs GDE3 {np.mean(gde3):.3f} p={p:.2g} "
            f"(additive {np.mean(san_a):.3f} vs {np.mean(gde3_a):.3f})"
        )
    mona, san = eps_of(results, "WFG1", "MONA"), eps_of(results, "WFG1", "SAN")
    p = mann_whitney(san, mona)
    ok &= p < 0.05
    parts.append(f"WFG1 SAN {np.mean(san):.3f} vs MONA {np.mean(mona):.3f} p={p:.2g}")
    # the runtime bound is stated for 4 workers; scale it to the workers available
    budget = 20 * 60 * 4 / workers
    ok &= elapsed <= budget
    parts.append(f"runs took {elapsed / 60:.1f} min on {workers} worker(s)")
    report(4, ok, "; ".join(parts))
    assert ok


def test_criterion_5_sphere(report):
    start = time.perf_counter()
    problem = sphere_problem()
    best = [run_de(problem, 50, 1000, DeParams(0.5, 0.6), RngStream(seed))[1][-1] for seed in range(10)]
    elapsed = time.perf_counter() - start
    hits = sum(b < 1e-6 for b in best)
    ok = hits == 10 and elapsed < 10
    report(5, ok, f"{hits}/10 seeds below 1e-6 (worst {max(best):.2e}), {elapsed:.1f}s")
    assert ok


def sphere_problem():
    return Problem("sphere10", 1, 10, np.full(10, -5.0), np.full(10, 5.0), lambda X: np.sum(X**2, axis=1, keepdims=True))


def test_criterion_6_forces(desk_results, report, monkeypatch):
    plan, _, _, _, _ = desk_results
    hists = collect_forces(plan.out)
    san, gde3 = hists[("WFG4", "SAN")], hists[("WFG4", "GDE3")]
    _, z_san = exclusion_report(san)
    _, z_gde3 = exclusion_report(gde3)

    # conservation after every single record, on a live run of each algorithm
    checks = {"n": 0, "broken": 0}
    original = ForceHistogram.record_batch

    def checked(self, parent_F, offspring_F, feasible):
        for i in range(len(parent_F)):
            original(self, parent_F[i : i + 1], offspring_F[i : i + 1], feasible[i : i + 1])
            checks["n"] += 1
            checks["broken"] += not self.is_conserved()

    monkeypatch.setattr(ForceHistogram, "record_batch", checked)
    problem = WfgInstance(4, 2).problem()
    for name in ("SAN", "GDE3"):
        run_gsf(preset(name, 2, problem=problem, generations=50), RngStream(DESK_SEED, "forces", name))
    monkeypatch.undo()
    files_conserved = san.is_conserved() and gde3.is_conserved()

    q_san, q_gde3 = san.quadrant_shares(), gde3.quadrant_shares()
    ordering = z_gde3 > z_san
    quadrants = q_san.min() >= 0.05 and q_san.min() > q_gde3.min()
    ok = ordering and checks["broken"] == 0 and files_conserved and quadrants
    report(
        6,
        ok,
        f"WFG4 zero-modulus GDE3 {z_gde3:.2f}% vs SAN {z_san:.2f}% ({'ok' if ordering else 'wrong order'}); "
        f"conservation broken {checks['broken']}/{checks['n']} records; "
        f"min quadrant share SAN {q_san.min():.3f} vs GDE3 {q_gde3.min():.3f} "
        f"(SAN {np.round(q_san, 3).tolist()}, GDE3 {np.round(q_gde3, 3).tolist()})",
    )
    assert ok


def test_criterion_7_statistics_calibration(report):
    exact = mann_whitney([1, 2], [3, 4])
    rng = np.random.default_rng(707)
    rejections = sum(mann_whitney(rng.normal(size=30), rng.normal(size=30)) < 0.05 for _ in range(10_000))
    rate = rejections / 10_000
    ok = exact == 1 / 6 and abs(rate - 0.05) <= 0.01
    report(7, ok, f"exact p = {exact!r} (1/6 = {1 / 6!r}); H0 rejection rate {rate:.4f}")
    assert ok


def test_criterion_8_reproducibility(desk_results, report, tmp_path):
    plan, mona, _, _, _ = desk_results
    mismatched = []
    compared = 0
    # every preset on a small plan, rerun from the written manifest
    small = ExperimentPlan(
        problems=("WFG2", "WFG6"),
        algorithms=tuple(AlgorithmSpec(n, n) for n in ("SAN", "SAGDE", "GDE3", "MONA", "DE_per_objective")),
        runs=2,
        generations=30,
        total_size=40,
        out=str(tmp_path / "small"),
        seed=8,
        reference_size=1000,
    )
    pairs = [(run_experiment(small), tmp_path / "small_again")]
    # first desk run of every algorithm, rerun from its manifest
    for p, name in ((plan, "main"), (mona, "mona")):
        pairs.append((p.out, tmp_path / f"{name}_again"))
    for src, dst in pairs:
        manifest = ExperimentPlan.load(f"{src}/manifest.ini")
        again = replace(manifest, out=str(dst))
        if manifest.runs > 2:
            again = replace(again, runs=1)
        run_experiment(again, workers=min(4, default_workers()))
        for f in sorted(dst.glob("*/*/run_*/solutions.txt")):
            original = f"{src}/{f.relative_to(dst)}"
            compared += 1
            if open(original, "rb").read() != f.read_bytes():
                mismatched.append(str(f.relative_to(dst)))
    ok = compared > 0 and not mismatched
    report(8, ok, f"{compared} solution files rerun from manifests, {len(mismatched)} differ")
    assert ok
