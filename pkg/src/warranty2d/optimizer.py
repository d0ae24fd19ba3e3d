"""Expected-utility maximization over the four thresholds, plus scans.

Search runs in an unconstrained 4-vector z through logistic maps:
t_w2 = 0.999 L_t sigma(z2), t_w1 = t_w2 sigma(z1) (usage analogous), so
every candidate satisfies 0 <= x_w1 <= x_w2 < L_x by construction. The
0.999 cap keeps the post-warranty case denominators L_x - x_w2 bounded
away from zero. Nelder-Mead from the supplied start plus Latin-hypercube
restarts; ties between restarts break toward the lexicographically
smaller region so results are reproducible.
"""

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace

import numpy as np
from scipy.optimize import minimize
from scipy.special import expit, logit
from scipy.stats import qmc

from .costs import (CostConfig, WarrantyRegion, _check_dissat_pre,
                    calibrate_benefit_rate, expected_utility)
from .errors import ConfigError, InvalidParameterError
from .inference import fit_mle
from .mcmc import (McmcConfig, elicit_hyperparams, mh_sample,
                   predictive_quantile)

__all__ = ["OptimResult", "SensitivityRow", "optimize_region",
           "sensitivity_scan"]

_CAP = 0.999
_RECAL_KEYS = {"q_star", "t_w", "u_w"}
_CENSOR_KEYS = {"t0", "u0"}


@dataclass(frozen=True)
class OptimResult:
    region: WarrantyRegion
    utility: float
    iterations: int
    converged: bool
    restarts_used: int


@dataclass(frozen=True)
class SensitivityRow:
    """One grid point of a scan: the overrides applied, derived quantities
    (recalibrated rates, refreshed quantiles), and the optimization result
    (None, with error set, when the row failed)."""

    varied: dict
    result: OptimResult = None
    derived: dict = None
    error: str = None


def _region_from_z(z, lt, lu):
    t2 = _CAP * lt * expit(z[1])
    u2 = _CAP * lu * expit(z[3])
    return WarrantyRegion(t2 * expit(z[0]), t2, u2 * expit(z[2]), u2)


def _z_from_region(region, lt, lu):
    def lg(p):
        return float(logit(min(max(p, 1e-6), 1.0 - 1e-6)))

    t2 = region.t_w2 / (_CAP * lt)
    u2 = region.u_w2 / (_CAP * lu)
    z1 = lg(region.t_w1 / region.t_w2) if region.t_w2 > 0 else 0.0
    z3 = lg(region.u_w1 / region.u_w2) if region.u_w2 > 0 else 0.0
    return np.array([z1, lg(t2), z3, lg(u2)])


def optimize_region(chain, cfg, init=None, n_restarts=16, nodes=32,
                    paper_literal=False, rectangle_masses=False, seed=0,
                    threads=1):
    """Best local maximizer of expected_utility over feasible regions.

    Runs Nelder-Mead (transformed coordinates, simplex tolerance 1e-6,
    at most 2000 iterations) from ``init`` and from ``n_restarts - 1``
    Latin-hypercube starts. The reported utility is the objective at the
    returned region for the chain exactly as given (thin beforehand for
    speed if wanted).
    """
    if len(chain) == 0:
        raise InvalidParameterError("chain must be non-empty")
    if init is None:
        init = WarrantyRegion(0.25 * cfg.lt, 0.5 * cfg.lt,
                              0.25 * cfg.lu, 0.5 * cfg.lu)
    _check_dissat_pre(init, cfg)
    if n_restarts < 1:
        raise InvalidParameterError("n_restarts must be >= 1")

    def objective(z):
        region = _region_from_z(z, cfg.lt, cfg.lu)
        assert region.t_w2 < cfg.lt and region.u_w2 < cfg.lu
        try:
            val = expected_utility(region, chain, cfg, nodes, paper_literal,
                                   rectangle_masses)
        except ConfigError:
            # literal-mode factors can divide by zero at isolated regions
            return 1e12
        return -val if math.isfinite(val) else 1e12

    starts = [_z_from_region(init, cfg.lt, cfg.lu)]
    if n_restarts > 1:
        sampler = qmc.LatinHypercube(d=4, seed=seed)
        pts = 0.05 + 0.9 * sampler.random(n_restarts - 1)
        starts.extend(logit(p) for p in pts)

    def run(z0):
        return minimize(objective, z0, method="Nelder-Mead",
                        options={"xatol": 1e-6, "fatol": 1e-8,
                                 "maxiter": 2000, "maxfev": 3000})

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(run, starts))
    else:
        results = [run(z) for z in starts]

    best = None
    best_key = None
    for res in results:
        region = _region_from_z(res.x, cfg.lt, cfg.lu)
        key = (res.fun, tuple(region.as_array()))
        if best is None or key < best_key:
            best, best_key = (res, region), key
    res, region = best
    return OptimResult(region=region, utility=-res.fun,
                       iterations=int(res.nit), converged=bool(res.success),
                       restarts_used=len(starts))


def _apply_overrides(base_cfg, varied, q_star):
    """New CostConfig for one grid row; returns (cfg, derived)."""
    derived = {}
    fields = {k: v for k, v in varied.items()
              if k not in _RECAL_KEYS | _CENSOR_KEYS}
    unknown = set(fields) - {"s", "c", "m", "a2", "a3",
                             "q1t", "q2t", "q1u", "q2u", "lt", "lu"}
    if unknown:
        raise ConfigError(f"unknown override keys {sorted(unknown)}")
    recal = _RECAL_KEYS & set(varied)
    if recal and recal != _RECAL_KEYS:
        raise ConfigError(
            "recalibration needs q_star, t_w and u_w together, got "
            f"{sorted(recal)}")
    cfg = replace(base_cfg, a1=None, **fields)
    if recal:
        a2 = calibrate_benefit_rate(varied["t_w"], varied["q_star"])
        a3 = calibrate_benefit_rate(varied["u_w"], varied["q_star"])
        derived.update(a2=a2, a3=a3)
        cfg = replace(cfg, a1=None, a2=a2, a3=a3)
    return cfg, derived


def _censored_row(varied, base_cfg, records, mcmc_config, censor_mode,
                  q_star, frw_quantile):
    """Full pipeline re-run for a (t0, u0) censoring override: re-censor,
    refit, re-elicit, resample, refresh quantiles, recalibrate."""
    from .data import apply_censoring

    t0, u0 = float(varied["t0"]), float(varied["u0"])
    data = apply_censoring(records, t0, u0)
    mle = fit_mle(data, censor_mode=censor_mode)
    if mle.std_errors is None:
        raise ConfigError(f"no standard errors at (t0={t0}, u0={u0}); "
                          "cannot elicit priors")
    hyper = elicit_hyperparams(mle.psi_hat.as_array(),
                               np.asarray(mle.std_errors) ** 2)
    chain = mh_sample(data, hyper, mle.psi_hat, mcmc_config,
                      censor_mode=censor_mode)
    t_w = predictive_quantile("age", frw_quantile, chain)
    u_w = predictive_quantile("usage", frw_quantile, chain)
    lt = predictive_quantile("age", 0.5, chain)
    lu = predictive_quantile("usage", 0.5, chain)
    a2 = calibrate_benefit_rate(t_w, q_star)
    a3 = calibrate_benefit_rate(u_w, q_star)
    cfg = replace(base_cfg, a1=None, a2=a2, a3=a3, lt=lt, lu=lu)
    derived = dict(t_w=t_w, u_w=u_w, a2=a2, a3=a3, lt=lt, lu=lu,
                   psi_hat=mle.psi_hat.as_array().tolist(),
                   acceptance_rate=chain.acceptance_rate)
    return cfg, chain, derived


def sensitivity_scan(chain, base_cfg, grid, n_restarts=16, nodes=32,
                     paper_literal=False, rectangle_masses=False, seed=0,
                     threads=1, init=None, records=None, mcmc_config=None,
                     censor_mode="window", q_star=0.75, frw_quantile=0.1,
                     thin=None):
    """One optimize_region per override map, rows in grid order.

    Plain rows override CostConfig fields (plus joint q_star/t_w/u_w
    recalibration). Rows carrying t0/u0 re-run the whole pipeline on
    re-censored data (requires ``records`` and ``mcmc_config``). Failures
    are caught per row and recorded on the row.
    """
    rows = []
    for varied in grid:
        try:
            row_chain = chain
            if _CENSOR_KEYS & set(varied):
                if (_CENSOR_KEYS & set(varied)) != _CENSOR_KEYS:
                    raise ConfigError("censoring override needs both t0 "
                                      "and u0")
                if records is None or mcmc_config is None:
                    raise ConfigError("censoring overrides need records= "
                                      "and mcmc_config=")
                cfg, row_chain, derived = _censored_row(
                    varied, base_cfg, records, mcmc_config, censor_mode,
                    q_star, frw_quantile)
            else:
                cfg, derived = _apply_overrides(base_cfg, varied, q_star)
            if thin is not None:
                row_chain = row_chain.thin(thin)
            result = optimize_region(row_chain, cfg, init=init,
                                     n_restarts=n_restarts, nodes=nodes,
                                     paper_literal=paper_literal,
                                     rectangle_masses=rectangle_masses,
                                     seed=seed, threads=threads)
            rows.append(SensitivityRow(varied=dict(varied), result=result,
                                       derived=derived))
        except Exception as exc:  # per-row isolation, scan continues
            rows.append(SensitivityRow(varied=dict(varied),
                                       error=f"{type(exc).__name__}: {exc}"))
    return rows
