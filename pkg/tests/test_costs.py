"""Benefit, warranty-cost, and dissatisfaction expectations.

The chain expectations were frozen from an independent implementation:
exact closed-form corner masses plus adaptive/Richardson-checked
quadrature of the per-draw density reductions, on the conftest fixture
chain at the baseline region. Both mass conventions are covered: the
default survival-complement combinations as printed, and the
inclusion-exclusion rectangle probabilities behind ``rectangle_masses``.
"""

import dataclasses
import math

import numpy as np
import pytest

from warranty2d.costs import (CostConfig, WarrantyRegion, benefit_ratio,
                              calibrate_benefit_rate, economic_benefit,
                              expected_dissatisfaction_cost,
                              expected_utility, expected_warranty_cost,
                              per_unit_dissatisfaction,
                              per_unit_warranty_cost, utility_breakdown)
from warranty2d.errors import ConfigError, InvalidParameterError
from warranty2d.mcmc import PosteriorChain
from warranty2d.model import joint_cdf

from conftest import make_cost_config

EB_BASE = 197.0127219764339461

EW_PRINTED = 26.040503576010074
ED_PRINTED_DEFAULT = 0.8584203103751081
ED_PRINTED_LITERAL = 2.4601064615549033
U_PRINTED_DEFAULT = 170.11379809004876
U_PRINTED_LITERAL = 168.51211193886894

EW_RECT = 10.803664946590015
ED_RECT_DEFAULT = 2.9701308242705835
ED_RECT_LITERAL = 1.5541013527399112
U_RECT_DEFAULT = 183.23892620557336
U_RECT_LITERAL = 184.65495567710403


# ---------------------------------------------------------------- benefit

def test_economic_benefit_reference(baseline_region, baseline_cfg):
    assert economic_benefit(baseline_region, baseline_cfg) == pytest.approx(
        EB_BASE, rel=1e-12)


def test_economic_benefit_scales_with_market(baseline_region, baseline_cfg):
    cfg2 = dataclasses.replace(baseline_cfg, m=2.5)
    assert economic_benefit(baseline_region, cfg2) == pytest.approx(
        2.5 * EB_BASE, rel=1e-12)


def test_benefit_ratio_range():
    assert 0.5 < benefit_ratio(10.0, 0.2) < 1.0
    # saturation: large A drives the ratio to 1, small A to 1/2
    assert benefit_ratio(500.0, 1.0) == pytest.approx(1.0, abs=1e-6)
    assert benefit_ratio(1e-6, 1.0) == pytest.approx(0.5, abs=1e-5)
    with pytest.raises(InvalidParameterError):
        benefit_ratio(-1.0, 0.2)


def test_calibration_round_trip():
    for x_w, q_star in [(0.2006, 0.75), (0.0787, 0.75), (1.3, 0.6),
                        (0.05, 0.99)]:
        a = calibrate_benefit_rate(x_w, q_star)
        assert benefit_ratio(a, x_w) == pytest.approx(q_star, abs=1e-12)


def test_calibration_closed_form():
    want = 2.0 * math.log(3.0) / 0.2006
    assert calibrate_benefit_rate(0.2006, 0.75) == pytest.approx(
        want, rel=1e-14)


def test_calibration_domain():
    with pytest.raises(InvalidParameterError):
        calibrate_benefit_rate(0.2, 0.5)  # ratio never reaches 1/2
    with pytest.raises(InvalidParameterError):
        calibrate_benefit_rate(0.2, 1.0)
    with pytest.raises(InvalidParameterError):
        calibrate_benefit_rate(-0.2, 0.75)


# --------------------------------------------------------------- per-unit

def test_per_unit_warranty_branches(baseline_region):
    r, s = baseline_region, 700.0
    assert per_unit_warranty_cost((0.05, 0.05), r, s) == s
    assert per_unit_warranty_cost((r.t_w1, r.u_w1), r, s) == s
    # age strip midpoint, usage inside FRW
    mid_t = 0.5 * (r.t_w1 + r.t_w2)
    assert per_unit_warranty_cost((mid_t, 0.05), r, s) == pytest.approx(
        0.5 * s, rel=1e-12)
    mid_u = 0.5 * (r.u_w1 + r.u_w2)
    assert per_unit_warranty_cost((mid_t, mid_u), r, s) == pytest.approx(
        0.25 * s, rel=1e-12)
    assert per_unit_warranty_cost((r.t_w2, 0.05), r, s) == 0.0
    assert per_unit_warranty_cost((r.t_w2 + 0.01, 0.05), r, s) == 0.0
    assert per_unit_warranty_cost((0.05, r.u_w2 + 0.01), r, s) == 0.0


def test_per_unit_warranty_degenerate_axis():
    region = WarrantyRegion(0.3, 0.3, 0.1, 0.2)
    assert per_unit_warranty_cost((0.2, 0.05), region, 100.0) == 100.0
    assert per_unit_warranty_cost((0.31, 0.05), region, 100.0) == 0.0


def test_per_unit_dissat_branches(baseline_region, baseline_cfg):
    r, cfg = baseline_region, baseline_cfg
    s = cfg.s
    assert per_unit_dissatisfaction((0.05, 0.05), r, cfg) == pytest.approx(
        0.5 * s * (cfg.q1t + cfg.q1u), rel=1e-12)
    # continuity at the outer corner: both zone terms hit q2
    assert per_unit_dissatisfaction((r.t_w2, r.u_w2), r, cfg) == \
        pytest.approx(0.5 * s * (cfg.q2t + cfg.q2u), rel=1e-12)
    assert per_unit_dissatisfaction((cfg.lt, cfg.lu), r, cfg) == 0.0
    assert per_unit_dissatisfaction((cfg.lt + 1.0, cfg.lu + 1.0),
                                    r, cfg) == 0.0
    # strip midpoints interpolate q1 -> q2
    mid_t = 0.5 * (r.t_w1 + r.t_w2)
    val = per_unit_dissatisfaction((mid_t, 0.05), r, cfg)
    assert val == pytest.approx(
        0.5 * s * (0.5 * (cfg.q1t + cfg.q2t) + cfg.q1u), rel=1e-12)
    # post-warranty decay, halfway between u_w2 and lu
    mid_post = 0.5 * (r.u_w2 + cfg.lu)
    val = per_unit_dissatisfaction((0.05, mid_post), r, cfg)
    assert val == pytest.approx(
        0.5 * s * (cfg.q1t + 0.5 * cfg.q2u), rel=1e-12)


def test_dissat_requires_region_inside_expected_life(baseline_cfg):
    region = WarrantyRegion(0.1, 1.5, 0.1, 0.2)  # t_w2 beyond lt
    with pytest.raises(ConfigError):
        per_unit_dissatisfaction((0.05, 0.05), region, baseline_cfg)


# ------------------------------------------------------------- validation

def test_warranty_region_validation():
    with pytest.raises(InvalidParameterError):
        WarrantyRegion(0.5, 0.4, 0.1, 0.2)
    with pytest.raises(InvalidParameterError):
        WarrantyRegion(-0.1, 0.4, 0.1, 0.2)
    with pytest.raises(InvalidParameterError):
        WarrantyRegion(0.1, math.inf, 0.1, 0.2)


def test_cost_config_validation():
    ok = make_cost_config()
    assert ok.a1 == pytest.approx(200.0)
    with pytest.raises(ConfigError):
        make_cost_config(a1=150.0)  # contradicts s - c
    assert make_cost_config(a1=200.0).a1 == 200.0
    with pytest.raises(ConfigError):
        make_cost_config(q1t=0.05, q2t=0.10)  # ordering
    with pytest.raises(ConfigError):
        make_cost_config(q2u=0.0)
    with pytest.raises(ConfigError):
        make_cost_config(s=-1.0, c=-3.0)
    with pytest.raises(ConfigError):
        make_cost_config(lt=0.0)


# ------------------------------------------------- chain expectations

def test_expected_warranty_cost_reference(fixture_chain, baseline_region,
                                          baseline_cfg):
    got = expected_warranty_cost(baseline_region, fixture_chain,
                                 baseline_cfg)
    assert got == pytest.approx(EW_PRINTED, rel=1e-10)
    got = expected_warranty_cost(baseline_region, fixture_chain,
                                 baseline_cfg, rectangle_masses=True)
    assert got == pytest.approx(EW_RECT, rel=1e-10)


def test_expected_dissatisfaction_reference(fixture_chain, baseline_region,
                                            baseline_cfg):
    args = (baseline_region, fixture_chain, baseline_cfg)
    assert expected_dissatisfaction_cost(*args) == pytest.approx(
        ED_PRINTED_DEFAULT, rel=1e-10)
    assert expected_dissatisfaction_cost(
        *args, paper_literal=True) == pytest.approx(
        ED_PRINTED_LITERAL, rel=1e-10)
    assert expected_dissatisfaction_cost(
        *args, rectangle_masses=True) == pytest.approx(
        ED_RECT_DEFAULT, rel=1e-10)
    assert expected_dissatisfaction_cost(
        *args, paper_literal=True, rectangle_masses=True) == pytest.approx(
        ED_RECT_LITERAL, rel=1e-10)


def test_expected_utility_reference(fixture_chain, baseline_region,
                                    baseline_cfg):
    args = (baseline_region, fixture_chain, baseline_cfg)
    assert expected_utility(*args) == pytest.approx(
        U_PRINTED_DEFAULT, rel=1e-10)
    assert expected_utility(*args, paper_literal=True) == pytest.approx(
        U_PRINTED_LITERAL, rel=1e-10)
    assert expected_utility(*args, rectangle_masses=True) == pytest.approx(
        U_RECT_DEFAULT, rel=1e-10)
    assert expected_utility(
        *args, paper_literal=True, rectangle_masses=True) == pytest.approx(
        U_RECT_LITERAL, rel=1e-10)


def test_utility_breakdown_consistent(fixture_chain, baseline_region,
                                      baseline_cfg):
    for rect in (False, True):
        bd = utility_breakdown(baseline_region, fixture_chain, baseline_cfg,
                               rectangle_masses=rect)
        assert bd["economic_benefit"] == pytest.approx(EB_BASE, rel=1e-12)
        assert bd["utility"] == pytest.approx(
            bd["economic_benefit"] - bd["warranty_cost"]
            - bd["dissatisfaction_cost"], rel=1e-12)
        assert bd["utility"] == pytest.approx(
            expected_utility(baseline_region, fixture_chain, baseline_cfg,
                             rectangle_masses=rect), rel=1e-12)


def test_node_count_converged(fixture_chain, baseline_region, baseline_cfg):
    for rect in (False, True):
        a32 = expected_warranty_cost(baseline_region, fixture_chain,
                                     baseline_cfg, nodes=32,
                                     rectangle_masses=rect)
        a64 = expected_warranty_cost(baseline_region, fixture_chain,
                                     baseline_cfg, nodes=64,
                                     rectangle_masses=rect)
        assert a64 == pytest.approx(a32, rel=1e-5)
        d32 = expected_dissatisfaction_cost(baseline_region, fixture_chain,
                                            baseline_cfg, nodes=32,
                                            rectangle_masses=rect)
        d64 = expected_dissatisfaction_cost(baseline_region, fixture_chain,
                                            baseline_cfg, nodes=64,
                                            rectangle_masses=rect)
        assert d64 == pytest.approx(d32, rel=1e-5)


def test_degenerate_region_closed_form(fixture_chain, baseline_cfg):
    """Pure FRW box: the only surviving term is S E[F(t,u)^2] under the
    printed convention (F the survival complement)."""
    region = WarrantyRegion(0.25, 0.25, 0.15, 0.15)
    f_vals = np.array([joint_cdf((0.25, 0.15), psi)
                       for psi in fixture_chain.param_vectors()])
    want = baseline_cfg.s * np.mean(f_vals ** 2)
    got = expected_warranty_cost(region, fixture_chain, baseline_cfg)
    assert got == pytest.approx(want, rel=1e-12)


def test_zero_region_costs_nothing(fixture_chain, baseline_cfg):
    region = WarrantyRegion(0.0, 0.0, 0.0, 0.0)
    assert expected_warranty_cost(region, fixture_chain,
                                  baseline_cfg) == pytest.approx(0.0,
                                                                 abs=1e-12)
    assert economic_benefit(region, baseline_cfg) == 0.0


def test_costs_scale_linearly(fixture_chain, baseline_region, baseline_cfg):
    """Doubling the market multiplier or the sale price doubles the
    matching cost exactly (every case term carries one factor of each)."""
    cfg_m = dataclasses.replace(baseline_cfg, m=2.0)
    assert expected_warranty_cost(
        baseline_region, fixture_chain, cfg_m) == pytest.approx(
        2.0 * EW_PRINTED, rel=1e-12)
    assert expected_dissatisfaction_cost(
        baseline_region, fixture_chain, cfg_m) == pytest.approx(
        2.0 * ED_PRINTED_DEFAULT, rel=1e-12)
    cfg_s = dataclasses.replace(baseline_cfg, s=1400.0, c=1200.0)
    assert expected_warranty_cost(
        baseline_region, fixture_chain, cfg_s) == pytest.approx(
        2.0 * EW_PRINTED, rel=1e-12)
    assert expected_dissatisfaction_cost(
        baseline_region, fixture_chain, cfg_s) == pytest.approx(
        2.0 * ED_PRINTED_DEFAULT, rel=1e-12)


def test_expectation_is_draw_mean(fixture_chain, baseline_region,
                                  baseline_cfg):
    head = PosteriorChain(fixture_chain.draws[:3], 0.3, 0)
    tail = PosteriorChain(fixture_chain.draws[3:], 0.3, 0)
    for kw in ({}, {"rectangle_masses": True}):
        full = expected_warranty_cost(baseline_region, fixture_chain,
                                      baseline_cfg, **kw)
        a = expected_warranty_cost(baseline_region, head, baseline_cfg, **kw)
        b = expected_warranty_cost(baseline_region, tail, baseline_cfg, **kw)
        assert full == pytest.approx((3.0 * a + 5.0 * b) / 8.0, rel=1e-12)


def test_costs_nonnegative_at_baseline(fixture_chain, baseline_region,
                                       baseline_cfg):
    for kw in ({}, {"paper_literal": True}, {"rectangle_masses": True},
               {"paper_literal": True, "rectangle_masses": True}):
        assert expected_warranty_cost(baseline_region, fixture_chain,
                                      baseline_cfg,
                                      **{k: v for k, v in kw.items()
                                         if k != "paper_literal"}) > 0.0
        assert expected_dissatisfaction_cost(
            baseline_region, fixture_chain, baseline_cfg, **kw) > 0.0


def test_rectangle_masses_shrink_warranty_cost(fixture_chain,
                                               baseline_region,
                                               baseline_cfg):
    """The survival-complement combination dominates the rectangle
    probability on origin boxes, so the printed convention charges more
    for free replacement at the baseline."""
    assert EW_PRINTED > EW_RECT
    got_printed = expected_warranty_cost(baseline_region, fixture_chain,
                                         baseline_cfg)
    got_rect = expected_warranty_cost(baseline_region, fixture_chain,
                                      baseline_cfg, rectangle_masses=True)
    assert got_printed > got_rect
