"""Bayesian design of two-dimensional warranty regions.

Fits a dependent bivariate Weibull model to censored age/usage field
data, samples the posterior, and searches for the warranty region
(free replacement inside, pro-rata strips outside) that maximizes the
posterior-predictive expected utility.
"""

from .backend import BACKEND_NAME, using_compiled
from .config import RunConfig, load_run_config, resolve_config
from .costs import (CostConfig, WarrantyRegion, calibrate_benefit_rate,
                    economic_benefit, expected_dissatisfaction_cost,
                    expected_utility, expected_warranty_cost,
                    utility_breakdown)
from .data import (apply_censoring, load_dataset, load_locomotive,
                   load_starter, marginal_diagnostics)
from .inference import (Dataset, MleResult, fisher_information, fit_mle,
                        log_likelihood)
from .mcmc import (CHAIN_HEADER, McmcConfig, PosteriorChain, PriorHyper,
                   elicit_hyperparams, load_chain, mh_sample,
                   predictive_quantile, save_chain)
from .model import (LifePoint, ParamVector, joint_cdf, joint_pdf,
                    joint_reliability, marginal_quantile, sample_lifetimes)
from .optimizer import OptimResult, optimize_region, sensitivity_scan

__version__ = "0.1.0"

__all__ = [
    "BACKEND_NAME", "using_compiled",
    "RunConfig", "load_run_config", "resolve_config",
    "CostConfig", "WarrantyRegion", "calibrate_benefit_rate",
    "economic_benefit", "expected_dissatisfaction_cost",
    "expected_utility", "expected_warranty_cost", "utility_breakdown",
    "apply_censoring", "load_dataset", "load_locomotive", "load_starter",
    "marginal_diagnostics",
    "Dataset", "MleResult", "fisher_information", "fit_mle",
    "log_likelihood",
    "CHAIN_HEADER", "McmcConfig", "PosteriorChain", "PriorHyper",
    "elicit_hyperparams", "load_chain", "mh_sample",
    "predictive_quantile", "save_chain",
    "LifePoint", "ParamVector", "joint_cdf", "joint_pdf",
    "joint_reliability", "marginal_quantile", "sample_lifetimes",
    "OptimResult", "optimize_region", "sensitivity_scan",
    "__version__",
]
