"""Region search and sensitivity scans."""

import numpy as np
import pytest

import warranty2d.optimizer as optimizer_mod
from warranty2d.costs import WarrantyRegion, expected_utility
from warranty2d.errors import InvalidParameterError
from warranty2d.mcmc import PosteriorChain
from warranty2d.optimizer import optimize_region, sensitivity_scan

from conftest import make_cost_config

STUB_STAR = np.array([0.2, 0.6, 0.15, 0.3])


def _stub(region, chain, cfg, nodes, paper_literal, rectangle_masses):
    d = region.as_array() - STUB_STAR
    return 50.0 - float(d @ d)


@pytest.fixture()
def stubbed(monkeypatch):
    monkeypatch.setattr(optimizer_mod, "expected_utility", _stub)


def test_recovers_concave_stub_optimum(stubbed, fixture_chain):
    cfg = make_cost_config()
    res = optimize_region(fixture_chain, cfg, n_restarts=4, seed=0)
    assert res.converged
    np.testing.assert_allclose(res.region.as_array(), STUB_STAR, atol=1e-4)
    assert res.utility == pytest.approx(50.0, abs=1e-7)


def test_stub_optimum_beats_perturbations(stubbed, fixture_chain):
    cfg = make_cost_config()
    res = optimize_region(fixture_chain, cfg, n_restarts=4, seed=0)
    best = _stub(res.region, None, None, None, None, None)
    rng = np.random.default_rng(123)
    cap_t, cap_u = 0.999 * cfg.lt, 0.999 * cfg.lu
    for _ in range(100):
        x = STUB_STAR + rng.uniform(-0.05, 0.05, size=4)
        t1, t2 = sorted(np.clip(x[:2], 0.0, cap_t - 1e-9))
        u1, u2 = sorted(np.clip(x[2:], 0.0, cap_u - 1e-9))
        other = WarrantyRegion(t1, t2, u1, u2)
        assert _stub(other, None, None, None, None, None) <= best + 1e-9


def test_restart_determinism(stubbed, fixture_chain):
    cfg = make_cost_config()
    a = optimize_region(fixture_chain, cfg, n_restarts=4, seed=5)
    b = optimize_region(fixture_chain, cfg, n_restarts=4, seed=5)
    np.testing.assert_array_equal(a.region.as_array(), b.region.as_array())
    assert a.utility == b.utility
    assert a.restarts_used == 4


def test_thread_count_does_not_change_result(stubbed, fixture_chain):
    cfg = make_cost_config()
    a = optimize_region(fixture_chain, cfg, n_restarts=4, seed=5, threads=1)
    b = optimize_region(fixture_chain, cfg, n_restarts=4, seed=5, threads=2)
    np.testing.assert_array_equal(a.region.as_array(), b.region.as_array())


def test_reported_utility_matches_objective(fixture_chain, baseline_region):
    cfg = make_cost_config()
    res = optimize_region(fixture_chain, cfg, init=baseline_region,
                          n_restarts=2, nodes=16, seed=0)
    recomputed = expected_utility(res.region, fixture_chain, cfg, nodes=16)
    assert res.utility == pytest.approx(recomputed, rel=1e-10)
    # the search at least matches its warm start
    assert res.utility >= expected_utility(baseline_region, fixture_chain,
                                           cfg, nodes=16) - 1e-9


def test_feasibility_of_result(fixture_chain, baseline_region):
    cfg = make_cost_config()
    res = optimize_region(fixture_chain, cfg, init=baseline_region,
                          n_restarts=2, nodes=16, seed=0)
    r = res.region
    assert 0.0 <= r.t_w1 <= r.t_w2 < cfg.lt
    assert 0.0 <= r.u_w1 <= r.u_w2 < cfg.lu


def test_optimize_validation(fixture_chain):
    cfg = make_cost_config()
    with pytest.raises(InvalidParameterError):
        optimize_region(fixture_chain, cfg, n_restarts=0)
    with pytest.raises(TypeError):
        optimize_region(None, cfg)


def test_scan_single_empty_row_equals_direct(stubbed, fixture_chain,
                                             baseline_region):
    cfg = make_cost_config()
    direct = optimize_region(fixture_chain, cfg, init=baseline_region,
                             n_restarts=2, seed=3)
    rows = sensitivity_scan(fixture_chain, cfg, [{}], n_restarts=2, seed=3,
                            init=baseline_region)
    assert len(rows) == 1
    row = rows[0]
    assert row.error is None and row.varied == {}
    np.testing.assert_array_equal(row.result.region.as_array(),
                                  direct.region.as_array())
    assert row.result.utility == direct.utility


def test_scan_overrides_and_errors(stubbed, fixture_chain):
    cfg = make_cost_config()
    grid = [
        {"s": 900.0, "c": 700.0},
        {"warranty_budget": 1.0},           # unknown key
        {"q_star": 0.8},                    # incomplete recalibration trio
        {"t0": 4.0},                        # incomplete censoring pair
        {"q_star": 0.8, "t_w": 0.25, "u_w": 0.09},
    ]
    rows = sensitivity_scan(fixture_chain, cfg, grid, n_restarts=2, seed=0)
    assert [row.varied for row in rows] == grid
    assert rows[0].error is None
    assert "unknown override keys" in rows[1].error
    assert "recalibration" in rows[2].error
    assert "censoring override" in rows[3].error
    assert rows[4].error is None
    # recalibration derived the benefit rates from the closed form
    assert set(rows[4].derived) == {"a2", "a3"}
    assert rows[4].derived["a2"] == pytest.approx(
        -(2.0 / 0.25) * np.log(0.2 / 0.8), rel=1e-12)


def test_scan_thins_before_optimizing(stubbed, baseline_region):
    draws = np.tile(np.array([1.5, 1.0, 0.7, 0.9, 0.2]), (64, 1))
    chain = PosteriorChain(draws, 0.4, 0)
    cfg = make_cost_config()
    rows = sensitivity_scan(chain, cfg, [{}], n_restarts=2, seed=0,
                            init=baseline_region, thin=8)
    assert rows[0].error is None
