from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import stats

from gsfopt.assess import epsilon_indicator, mann_whitney
from gsfopt.core import DimensionError, Population, RngStream, nondominated_mask
from gsfopt.de import DeParams, local_parents
from gsfopt.gde3 import PruneParams, gde3_generation_step, run_gde3
from gsfopt.gsf import (
    BudgetError,
    ConfigError,
    DisabledInteractionError,
    GsfConfig,
    InteractionMatrix,
    InteractionMatrixSet,
    IsolationError,
    SizeVector,
    Strategy,
    archive_offer_im,
    build_topology_im,
    cellular_im,
    island_im,
    preset,
    restricted_mating_im,
    run_gsf,
    sample_source_subpop,
    uniform_im,
    with_generations,
)
from gsfopt.wfg import WfgInstance, wfg_front_samples


@given(st.integers(10, 1000), st.lists(st.integers(1, 50), min_size=1, max_size=8))
def test_sizes_sum_to_total(total, weights):
    ratios = np.array(weights, dtype=float) / sum(weights)
    if len(ratios) > 1 and np.any(ratios >= 1.0):
        return
    sizes = SizeVector(tuple(ratios), total).sizes()
    assert sum(sizes) == total
    assert all(abs(n - r * total) < 1 for n, r in zip(sizes, ratios))


def test_size_examples_and_errors():
    assert SizeVector((0.3, 0.3, 0.4), 100).sizes() == (30, 30, 40)
    assert SizeVector((1.0,), 7).sizes() == (7,)
    for bad in ((0.5, 0.6), (1.0, 0.0), (0.0, 1.0), ()):
        with pytest.raises(ConfigError):
            SizeVector(bad, 100)


def test_uniform_and_archive_matrices():
    np.testing.assert_allclose(uniform_im(3).entries, np.full((3, 3), 1 / 3))
    np.testing.assert_array_equal(uniform_im(1).entries, [[1.0]])
    np.testing.assert_allclose(uniform_im(6).entries.sum(axis=1), 1.0)
    np.testing.assert_array_equal(archive_offer_im(3, 2).entries, [[0, 0, 1]] * 3)
    np.testing.assert_array_equal(archive_offer_im(1, 0).entries, [[1.0]])
    assert np.all(archive_offer_im(6, 5).entries[:, 5] == 1)
    with pytest.raises(DimensionError):
        uniform_im(0)
    with pytest.raises(IndexError):
        archive_offer_im(3, 3)


def test_matrix_validation():
    with pytest.raises(ConfigError):
        InteractionMatrix(np.array([[0.5, 0.4], [0.5, 0.5]]))
    with pytest.raises(ConfigError):
        InteractionMatrix(np.array([[1.5, -0.5], [0.5, 0.5]]))
    with pytest.raises(DimensionError):
        InteractionMatrix(np.ones((2, 3)) / 3)
    assert InteractionMatrix(np.zeros((2, 2))).disabled
    with pytest.raises(DimensionError):
        InteractionMatrixSet((uniform_im(2), archive_offer_im(3, 0)))


def test_sample_source_frequencies():
    rng = RngStream(0)
    draws = np.array([sample_source_subpop(uniform_im(3), 1, rng) for _ in range(30_000)])
    freq = np.bincount(draws, minlength=3) / draws.size
    assert np.all(np.abs(freq - 1 / 3) < 0.01)
    assert stats.chisquare(np.bincount(draws)).pvalue > 0.001
    assert {sample_source_subpop(archive_offer_im(3, 2), a, rng) for a in range(3) for _ in range(20)} == {2}
    eye = InteractionMatrix(np.eye(4))
    assert all(sample_source_subpop(eye, a, rng) == a for a in range(4))
    with pytest.raises(DisabledInteractionError):
        sample_source_subpop(InteractionMatrix(np.zeros((2, 2))), 0, rng)


def test_topologies():
    P = cellular_im(3, 3).entries
    assert P.shape == (9, 9)
    assert np.all((P > 0).sum(axis=1) == 4)
    assert np.all(P[P > 0] == 0.25)
    assert np.all(np.diag(P) == 0)
    np.testing.assert_array_equal(P, P.T)
    np.testing.assert_array_equal(island_im(2).entries, [[0, 1], [1, 0]])
    np.testing.assert_allclose(island_im(4).entries.sum(axis=1), 1.0)
    with pytest.raises(ConfigError):
        island_im(2, np.eye(2))
    with pytest.raises(IsolationError) as err:
        restricted_mating_im([0.0, 1.0, 10.0], 2.0)
    assert err.value.index == 2
    R = restricted_mating_im([0.0, 1.0, 1.5], 2.0).entries
    np.testing.assert_allclose(R[0], [0, 0.5, 0.5])
    Rm = build_topology_im("restricted_mating", points=[0.0, 1.0, 3.0], sigma=2.5, dist=lambda a, b: abs(a[0] - b[0]))
    np.testing.assert_allclose(Rm.entries[0], [0, 1, 0])
    with pytest.raises(ConfigError):
        build_topology_im("ring")


def test_presets():
    san = preset("SAN", 2)
    assert [s.kind for s in san.strategies] == ["de", "de", "mona"]
    assert [s.objective_index for s in san.strategies[:2]] == [0, 1]
    assert san.sizes.ratios == (0.3, 0.3, 0.4)
    assert all(s.CR == 0.1 and s.F == 0.1 for s in san.strategies)
    assert san.im.get(1) == uniform_im(3) and san.im.get(2) == archive_offer_im(3, 2)
    san5 = preset("SAN", 5)
    assert san5.sizes.ratios == (0.1,) * 5 + (0.5,)
    sagde = preset("SAGDE", 2)
    assert sagde.sizes.ratios == (0.1, 0.1, 0.8)
    assert sagde.strategies[2].kind == "gde3" and sagde.im.get(2) is None
    assert preset("GDE3", 2).im.matrices == () and preset("GDE3", 2).strategies[0].F == 0.5
    assert preset("MONA", 2).strategies[0].kind == "mona"
    dpo = preset("DE_per_objective", 3)
    np.testing.assert_array_equal(dpo.im.get(1).entries, np.eye(3))
    with pytest.raises(ConfigError):
        preset("NSGA", 2)
    with pytest.raises(ConfigError):
        preset("SAN", 2, {"bogus": 1})


def test_config_validation():
    base = preset("SAN", 2)
    with pytest.raises(ConfigError):
        GsfConfig(base.strategies[:2], base.sizes, base.im, base.problem, 10, base.novelty)
    with pytest.raises(ConfigError):
        GsfConfig(base.strategies, base.sizes, base.im, base.problem, 10, None)
    with pytest.raises(ConfigError):
        GsfConfig(base.strategies, SizeVector((0.001, 0.499, 0.5), 100), base.im, base.problem, 10, base.novelty)
    with pytest.raises(ConfigError):
        Strategy("pso", 0.5, 0.5)


def test_config_text_round_trip():
    cfg = preset("SAN", 2, {"n_min0": 0.123456789012345, "window": "generation", "max_size": 5000})
    back = GsfConfig.from_text(cfg.to_text())
    assert back.problem.id == cfg.problem.id
    assert replace(back, problem=cfg.problem) == cfg
    assert back.to_text() == cfg.to_text()
    with pytest.raises(ConfigError):
        GsfConfig.from_text("[gsf]\nproblem = WFG1-M2-k4-l20\n")


def final_bytes(result):
    return result.final.X.tobytes() + result.final.F.tobytes()


def test_san_run_is_bitwise_deterministic():
    cfg = preset("SAN", 2, generations=10)
    a = run_gsf(cfg, RngStream(42))
    b = run_gsf(cfg, RngStream(42))
    assert final_bytes(a) == final_bytes(b)
    assert a.evaluations == 100 * 11
    assert final_bytes(a) != final_bytes(run_gsf(cfg, RngStream(43)))


def test_final_set_is_nondominated_and_feasible():
    res = run_gsf(preset("SAGDE", 2, generations=20), RngStream(1))
    assert nondominated_mask(res.final.F).all()
    assert res.final.feasible.all()
    assert len(np.unique(np.hstack([res.final.X, res.final.F]), axis=0)) == len(res.final)


def test_single_gde3_subpopulation_replays_the_panmictic_loop():
    cfg = preset("GDE3", 2, problem=WfgInstance(4, 2).problem(), generations=25, total_size=20)
    res = run_gsf(cfg, RngStream(5))
    prob = cfg.problem
    rng = RngStream(5)
    pop = Population.evaluate(prob, prob.random_uniform(20, rng.child("init", 0)))
    step = rng.child("step", 0)
    for _ in range(25):
        pop, _ = gde3_generation_step(pop, DeParams(0.5, 0.1), PruneParams(2, 20), local_parents, prob, step)
    np.testing.assert_array_equal(res.populations[0].X, pop.X)


def test_single_gde3_subpopulation_matches_standalone_statistically():
    inst = WfgInstance(4, 2)
    prob = inst.problem()
    front = wfg_front_samples(inst, 500, RngStream(0, "ref"))
    cfg = preset("GDE3", 2, problem=prob, generations=60, total_size=30)
    gsf_eps, alone_eps = [], []
    for seed in range(8):
        gsf_eps.append(epsilon_indicator(run_gsf(cfg, RngStream(seed)).final.F, front))
        alone = run_gde3(prob, 30, 60, DeParams(0.5, 0.1), None, RngStream(100 + seed))
        alone_eps.append(epsilon_indicator(alone.F[nondominated_mask(alone.F)], front))
    assert mann_whitney(gsf_eps, alone_eps) > 0.005
    assert mann_whitney(alone_eps, gsf_eps) > 0.005


def test_parent_provenance_is_uniform():
    cfg = preset("SAN", 2, generations=200)
    res = run_gsf(cfg, RngStream(7))
    for a in range(3):
        row = res.parent_sources[a]
        assert stats.chisquare(row).pvalue > 0.001, row


def test_budget_guard():
    cfg = preset("SAN", 2, generations=10)
    capped = GsfConfig(cfg.strategies, cfg.sizes, cfg.im, cfg.problem, 10, cfg.novelty, max_evaluations=350)
    with pytest.raises(BudgetError):
        run_gsf(capped, RngStream(0))


def test_time_varying_matrices_are_used():
    cfg = preset("SAGDE", 2, generations=6)
    seen = []

    def supplier(g):
        seen.append(g)
        return InteractionMatrixSet((InteractionMatrix(np.eye(3)),))

    res = run_gsf(replace(cfg, im_supplier=supplier), RngStream(0))
    assert seen == list(range(1, 7))
    assert np.count_nonzero(res.parent_sources - np.diag(np.diag(res.parent_sources))) == 0


def test_with_generations():
    assert with_generations(preset("GDE3", 2), 7).generations == 7


def test_forces_recorded_per_subpopulation():
    res = run_gsf(preset("SAN", 2, generations=5), RngStream(2))
    assert res.forces.is_conserved()
    assert res.forces.total_offered == 500
    assert sum(h.total_offered for h in res.subpop_forces) == 500
