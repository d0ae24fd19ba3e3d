"""Priors, random-walk Metropolis-Hastings sampling, posterior predictives.

The sampler walks in the unconstrained coordinates (log scales/shapes,
logit theta) with a fixed multivariate-normal proposal whose covariance is
the delta-method transform of the inverse Fisher information at the
starting point. The acceptance ratio therefore includes the change-of-
variables Jacobian eta_t * lambda_t * eta_u * lambda_u * theta * (1-theta).

Posterior-predictive quantities are plain averages over the retained
draws; predictive quantiles invert the averaged marginal CDF by bisection.
"""

import csv
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.special import betaln, gammaln

from . import backend
from .errors import DataError, InvalidParameterError, McmcError
from .inference import fisher_information, log_likelihood
from .model import ParamVector, from_unconstrained, to_unconstrained

__all__ = [
    "PriorHyper", "McmcConfig", "PosteriorChain",
    "elicit_hyperparams", "log_prior", "random_walk_metropolis", "mh_sample",
    "predictive_pdf", "predictive_cdf", "predictive_reliability",
    "predictive_quantile", "save_chain", "load_chain",
]

CHAIN_HEADER = ("eta_t", "lambda_t", "eta_u", "lambda_u", "theta")


@dataclass(frozen=True)
class PriorHyper:
    """Independent priors: Gamma(a_j, b_j) on the four positive parameters
    (order eta_t, lambda_t, eta_u, lambda_u), Beta(a_5, b_5) on theta."""

    a: np.ndarray
    b: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "a", np.asarray(self.a, dtype=float))
        object.__setattr__(self, "b", np.asarray(self.b, dtype=float))
        if self.a.shape != (5,) or self.b.shape != (5,):
            raise InvalidParameterError("hyperparameter vectors must have "
                                        "exactly 5 entries")
        if not (np.all(self.a > 0.0) and np.all(self.b > 0.0)):
            raise InvalidParameterError("hyperparameters must be positive")


@dataclass(frozen=True)
class McmcConfig:
    n_iter: int = 50_000
    burn_in: int = 10_000
    seed: int = 0
    proposal_scale: float = 1.0

    def __post_init__(self):
        if self.burn_in < 0 or self.n_iter <= 0:
            raise InvalidParameterError("n_iter and burn_in must be positive")
        if self.burn_in >= self.n_iter:
            raise InvalidParameterError(
                f"burn_in ({self.burn_in}) must be below n_iter ({self.n_iter})")
        if self.proposal_scale <= 0.0:
            raise InvalidParameterError("proposal_scale must be positive")


@dataclass(frozen=True)
class PosteriorChain:
    """Post-burn-in draws (k, 5) plus sampler metadata."""

    draws: np.ndarray
    acceptance_rate: float
    seed: int
    n_iter: int = 0
    burn_in: int = 0
    _marginals: dict = field(init=False, repr=False, compare=False,
                             default_factory=dict)

    def __post_init__(self):
        arr = np.ascontiguousarray(np.atleast_2d(
            np.asarray(self.draws, dtype=float)))
        if arr.ndim != 2 or arr.shape[1] != 5 or arr.shape[0] == 0:
            raise InvalidParameterError("draws must be a non-empty (k, 5) array")
        if (np.any(arr[:, :4] <= 0.0) or np.any(arr[:, 4] <= 0.0)
                or np.any(arr[:, 4] > 1.0) or not np.all(np.isfinite(arr))):
            raise InvalidParameterError("chain contains invalid parameter rows")
        object.__setattr__(self, "draws", arr)
        if not 0.0 <= self.acceptance_rate <= 1.0:
            raise InvalidParameterError(
                f"acceptance_rate {self.acceptance_rate} outside [0, 1]")

    def __len__(self):
        return self.draws.shape[0]

    def param_vectors(self):
        """Draws as ParamVector objects, in chain order."""
        return tuple(ParamVector.from_array(row) for row in self.draws)

    def marginal_params(self, scale):
        """(scale, shape) column pair for one axis, cached."""
        if scale not in self._marginals:
            if scale == "age":
                self._marginals[scale] = (self.draws[:, 0], self.draws[:, 1])
            elif scale == "usage":
                self._marginals[scale] = (self.draws[:, 2], self.draws[:, 3])
            else:
                raise InvalidParameterError(
                    f"scale must be 'age' or 'usage', got {scale!r}")
        return self._marginals[scale]

    def thin(self, max_draws):
        """Evenly spaced sub-chain with at most ``max_draws`` rows."""
        if max_draws <= 0:
            raise InvalidParameterError("max_draws must be positive")
        k = len(self)
        if max_draws >= k:
            return self
        idx = np.linspace(0, k - 1, max_draws).round().astype(int)
        return PosteriorChain(self.draws[idx], self.acceptance_rate,
                              self.seed, self.n_iter, self.burn_in)


def elicit_hyperparams(psi_hat, variances):
    """Method-of-moments priors from point estimates and variances.

    Gamma components: a = m^2/v, b = m/v. Beta component for theta:
    c = m(1-m)/v - 1 must be positive (moment feasibility), then
    a5 = m c, b5 = (1-m) c.
    """
    m = psi_hat.as_array() if isinstance(psi_hat, ParamVector) else np.asarray(psi_hat, float)
    v = np.asarray(variances, dtype=float)
    if v.shape != (5,):
        raise InvalidParameterError("variances must have 5 entries")
    if np.any(v <= 0.0):
        raise InvalidParameterError("variances must be positive")
    ParamVector.from_array(m)
    a = np.empty(5)
    b = np.empty(5)
    a[:4] = m[:4] ** 2 / v[:4]
    b[:4] = m[:4] / v[:4]
    c = m[4] * (1.0 - m[4]) / v[4] - 1.0
    if c <= 0.0:
        raise InvalidParameterError(
            f"beta moments infeasible: need var < mean(1-mean), got "
            f"var={v[4]} at mean={m[4]}")
    a[4] = m[4] * c
    b[4] = (1.0 - m[4]) * c
    return PriorHyper(a, b)


def log_prior(psi, hyper):
    """Log density of the independent Gamma x Beta prior; -inf off support."""
    p = psi.as_array() if isinstance(psi, ParamVector) else np.asarray(psi, float)
    if np.any(p[:4] <= 0.0) or not 0.0 < p[4] <= 1.0:
        return -math.inf
    a, b = hyper.a, hyper.b
    out = 0.0
    for j in range(4):
        out += (a[j] * math.log(b[j]) - gammaln(a[j])
                + (a[j] - 1.0) * math.log(p[j]) - b[j] * p[j])
    th = p[4]
    out -= betaln(a[4], b[4])
    out += (a[4] - 1.0) * math.log(th)
    if b[4] != 1.0:
        if th == 1.0:
            # limit at the right endpoint: the density vanishes for
            # b5 > 1 and diverges for b5 < 1
            return -math.inf if b[4] > 1.0 else math.inf
        out += (b[4] - 1.0) * math.log1p(-th)
    return float(out)


def random_walk_metropolis(log_target, z0, cov, n_iter, burn_in, rng):
    """Generic fixed-covariance Gaussian random walk in R^d.

    Returns (post-burn-in states (k, d), post-burn-in acceptance rate).
    ``log_target`` maps a state vector to an unnormalized log density;
    -inf rejects outright. Deterministic given ``rng`` state.
    """
    z0 = np.asarray(z0, dtype=float)
    d = z0.size
    cov = np.asarray(cov, dtype=float)
    try:
        chol = np.linalg.cholesky(cov)
    except np.linalg.LinAlgError:
        chol = np.linalg.cholesky(cov + 1e-8 * np.eye(d))
    steps = rng.standard_normal((n_iter, d)) @ chol.T
    log_u = np.log(rng.random(n_iter))
    out = np.empty((n_iter - burn_in, d))
    z = z0.copy()
    lt = log_target(z)
    if not math.isfinite(lt):
        raise McmcError("log target is not finite at the starting point")
    accepted_post = 0
    for i in range(n_iter):
        cand = z + steps[i]
        lt_cand = log_target(cand)
        if lt_cand - lt >= log_u[i]:
            z = cand
            lt = lt_cand
            if i >= burn_in:
                accepted_post += 1
        if i >= burn_in:
            out[i - burn_in] = z
    rate = accepted_post / max(1, n_iter - burn_in)
    return out, rate


def _proposal_covariance(psi0, data, scale, censor_mode):
    info = fisher_information(psi0, data.t0, data.u0, n=data.n,
                              censor_mode=censor_mode)
    try:
        cov_psi = np.linalg.inv(info)
    except np.linalg.LinAlgError:
        cov_psi = np.linalg.inv(info + 1e-8 * np.eye(5))
    p = psi0.as_array()
    # dz/dpsi for (log, log, log, log, logit)
    g = np.array([1.0 / p[0], 1.0 / p[1], 1.0 / p[2], 1.0 / p[3],
                  1.0 / (p[4] * (1.0 - p[4]))])
    cov_z = scale * (cov_psi * np.outer(g, g))
    return 0.5 * (cov_z + cov_z.T)


def mh_sample(data, hyper, psi0, cfg, censor_mode="window"):
    """Sample the posterior with random-walk MH in transformed coordinates.

    The proposal is N(z, proposal_scale * G I(psi0)^-1 G^T) with
    G = diag(dz/dpsi), held fixed across iterations. The target includes
    the transform Jacobian so the chain represents the posterior over the
    original parameters.

    Raises McmcError when the post-burn-in acceptance rate leaves
    [0.01, 0.95], which signals a mis-scaled proposal.
    """
    if psi0.theta >= 1.0:
        raise InvalidParameterError(
            "psi0.theta must be below 1 (logit transform)")
    cov_z = _proposal_covariance(psi0, data, cfg.proposal_scale, censor_mode)
    hyper_a, hyper_b = hyper.a, hyper.b  # touch to validate type early
    del hyper_a, hyper_b
    t_fail, u_fail = data.failures
    n_cens, t0, u0 = data.n_censored, data.t0, data.u0
    corner = censor_mode == "corner"

    def log_target(z):
        psi = from_unconstrained(z)
        lp = log_prior(psi, hyper)
        if not math.isfinite(lp):
            return -math.inf
        ll = float(backend.loglik(psi[None, :], t_fail, u_fail,
                                  n_cens, t0, u0, corner)[0])
        if math.isnan(ll):
            return -math.inf
        # log |dpsi/dz|: product of the positives times theta(1-theta)
        jac = float(np.sum(np.log(psi[:4]))
                    + math.log(psi[4]) + math.log1p(-psi[4]))
        return ll + lp + jac

    rng = np.random.default_rng(cfg.seed)
    states, rate = random_walk_metropolis(
        log_target, to_unconstrained(psi0), cov_z,
        cfg.n_iter, cfg.burn_in, rng)
    if rate < 0.01 or rate > 0.95:
        raise McmcError(
            f"post-burn-in acceptance rate {rate:.4f} outside [0.01, 0.95]; "
            f"adjust proposal_scale (currently {cfg.proposal_scale})")
    draws = np.column_stack([
        np.exp(states[:, 0]), np.exp(states[:, 1]),
        np.exp(states[:, 2]), np.exp(states[:, 3]),
        1.0 / (1.0 + np.exp(-states[:, 4])),
    ])
    return PosteriorChain(draws, rate, cfg.seed, cfg.n_iter, cfg.burn_in)


def predictive_pdf(t, u, chain):
    """Posterior-predictive density: mean of joint_pdf over draws."""
    lp = backend.log_pdf(chain.draws, np.atleast_1d(np.asarray(t, float)),
                         np.atleast_1d(np.asarray(u, float)))
    val = np.exp(lp).mean(axis=0)
    return float(val[0]) if val.size == 1 else val


def predictive_reliability(t, u, chain):
    """Posterior-predictive survival: mean of joint_reliability."""
    lr = backend.log_reliability(chain.draws,
                                 np.atleast_1d(np.asarray(t, float)),
                                 np.atleast_1d(np.asarray(u, float)))
    val = np.exp(lr).mean(axis=0)
    return float(val[0]) if val.size == 1 else val


def predictive_cdf(t, u, chain):
    """Posterior-predictive joint CDF (survival complement), averaged."""
    val = 1.0 - predictive_reliability(t, u, chain)
    return val


def predictive_quantile(scale, prob, chain):
    """Quantile of the averaged marginal CDF by bracketing bisection.

    Solves mean_i CDF(x | draw_i) = prob to absolute 1e-8 on x.
    """
    if not 0.0 < prob < 1.0:
        raise InvalidParameterError(f"prob must be in (0, 1), got {prob}")
    sc, sh = chain.marginal_params(scale)

    def cdf(x):
        return float(np.mean(-np.expm1(-(x / sc) ** sh)))

    hi = float(np.max(sc)) or 1.0
    for _ in range(200):
        if cdf(hi) >= prob:
            break
        hi *= 2.0
    else:
        raise McmcError(f"failed to bracket the {prob} quantile")
    lo = 0.0
    while hi - lo > 1e-8:
        mid = 0.5 * (lo + hi)
        if cdf(mid) < prob:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def save_chain(chain, csv_path):
    """Write draws as CSV plus a JSON metadata sidecar."""
    csv_path = Path(csv_path)
    with csv_path.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(CHAIN_HEADER)
        for row in chain.draws:
            w.writerow([repr(float(x)) for x in row])
    meta = {"seed": chain.seed, "n_iter": chain.n_iter,
            "burn_in": chain.burn_in,
            "acceptance_rate": chain.acceptance_rate}
    csv_path.with_suffix(".json").write_text(json.dumps(meta, indent=2) + "\n")


def load_chain(csv_path):
    """Inverse of save_chain."""
    csv_path = Path(csv_path)
    meta = json.loads(csv_path.with_suffix(".json").read_text())
    with csv_path.open(newline="") as fh:
        rd = csv.reader(fh)
        header = tuple(next(rd))
        if header != CHAIN_HEADER:
            raise DataError(f"{csv_path}: unexpected chain header {header}")
        rows = [[float(c) for c in row] for row in rd]
    return PosteriorChain(np.asarray(rows), float(meta["acceptance_rate"]),
                          int(meta["seed"]), int(meta.get("n_iter", 0)),
                          int(meta.get("burn_in", 0)))
