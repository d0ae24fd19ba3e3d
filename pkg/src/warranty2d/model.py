"""Dependent bivariate Weibull lifetime model.

A unit accrues age ``t`` and usage ``u``; both scales are Weibull
distributed and coupled through a single dependence parameter
``theta`` in (0, 1]. The joint reliability (survival) function is

    R(t, u) = exp(-[ (t/eta_t)^(lambda_t/theta)
                   + (u/eta_u)^(lambda_u/theta) ]^theta),

which reduces to the product of the two marginal Weibull survival
functions at ``theta = 1`` and tightens the coupling as ``theta``
decreases. The joint CDF is defined as the survival complement
``F = 1 - R``; note that this differs from the rectangle probability
``P(T <= t, U <= u)`` whenever the two scales are dependent, and every
downstream formula in this package uses the complement convention.

The joint density is the mixed partial derivative of ``R``:

    f(t, u) = lambda_t lambda_u / (eta_t^(lambda_t/theta) eta_u^(lambda_u/theta))
              * t^(lambda_t/theta - 1) u^(lambda_u/theta - 1)
              * s^(theta - 2) (s^theta + (1 - theta)/theta) exp(-s^theta),

with ``s = (t/eta_t)^(lambda_t/theta) + (u/eta_u)^(lambda_u/theta)``.
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import expit

from . import backend
from .errors import DomainError, InvalidParameterError

__all__ = [
    "ParamVector", "LifePoint",
    "joint_reliability", "joint_cdf", "joint_pdf", "log_joint_pdf",
    "marginal_quantile", "marginal_cdf", "sample_lifetimes",
    "to_unconstrained", "from_unconstrained",
]


@dataclass(frozen=True)
class ParamVector:
    """Model parameters (eta_t, lambda_t, eta_u, lambda_u, theta).

    Scales ``eta`` and shapes ``lambda`` are per marginal; ``theta`` is the
    dependence parameter, with ``theta = 1`` meaning independence.
    """

    eta_t: float
    lambda_t: float
    eta_u: float
    lambda_u: float
    theta: float

    def __post_init__(self):
        vals = self.as_array()
        if not np.all(np.isfinite(vals)):
            raise InvalidParameterError(f"non-finite parameter in {vals}")
        if np.any(vals[:4] <= 0.0):
            raise InvalidParameterError(
                f"scales and shapes must be positive, got {vals[:4]}")
        if not 0.0 < self.theta <= 1.0:
            raise InvalidParameterError(
                f"theta must lie in (0, 1], got {self.theta}")

    def as_array(self):
        return np.array([self.eta_t, self.lambda_t,
                         self.eta_u, self.lambda_u, self.theta])

    @classmethod
    def from_array(cls, arr):
        arr = np.asarray(arr, dtype=float)
        if arr.shape != (5,):
            raise InvalidParameterError(
                f"expected 5 parameters, got shape {arr.shape}")
        return cls(*arr)


@dataclass(frozen=True)
class LifePoint:
    """A point on the age x usage plane (both coordinates >= 0)."""

    t: float
    u: float

    def __post_init__(self):
        if not (math.isfinite(self.t) and math.isfinite(self.u)):
            raise DomainError(f"non-finite lifetime point ({self.t}, {self.u})")
        if self.t < 0.0 or self.u < 0.0:
            raise DomainError(
                f"lifetime coordinates must be >= 0, got ({self.t}, {self.u})")


def _point(p):
    if isinstance(p, LifePoint):
        return p.t, p.u
    t, u = p
    LifePoint(float(t), float(u))  # validation only
    return float(t), float(u)


def joint_reliability(p, psi):
    """R(t, u): probability a unit survives past age t and usage u.

    Parameters
    ----------
    p : LifePoint or (t, u) pair
    psi : ParamVector

    Returns
    -------
    float in [0, 1], with R(0, 0) = 1.
    """
    t, u = _point(p)
    lr = backend.log_reliability(psi.as_array()[None, :], [t], [u])[0, 0]
    return float(math.exp(lr))


def joint_cdf(p, psi):
    """F(t, u) = 1 - R(t, u), the survival-complement joint CDF.

    This is the convention used throughout the cost model. It is not the
    rectangle probability ``P(T <= t, U <= u)`` unless ``theta = 1``.
    """
    t, u = _point(p)
    lr = backend.log_reliability(psi.as_array()[None, :], [t], [u])[0, 0]
    return float(-math.expm1(lr))


def log_joint_pdf(p, psi):
    """log f(t, u); -inf where the density vanishes.

    Raises
    ------
    DomainError
        If t = 0 with lambda_t/theta < 1 (or the usage analogue), where the
        density is singular, or if both coordinates are zero.
    """
    t, u = _point(p)
    if t == 0.0 and u == 0.0:
        raise DomainError("joint density is not defined at the origin")
    if t == 0.0 and psi.lambda_t / psi.theta < 1.0:
        raise DomainError("density is singular at t = 0 for lambda_t/theta < 1")
    if u == 0.0 and psi.lambda_u / psi.theta < 1.0:
        raise DomainError("density is singular at u = 0 for lambda_u/theta < 1")
    if t == 0.0 or u == 0.0:
        # Non-singular boundary: the power factor either vanishes
        # (lambda/theta > 1) or is the finite lambda/theta = 1 limit.
        if psi.lambda_t / psi.theta > 1.0 and t == 0.0:
            return -math.inf
        if psi.lambda_u / psi.theta > 1.0 and u == 0.0:
            return -math.inf
        t = max(t, 5e-324)
        u = max(u, 5e-324)
    return float(backend.log_pdf(psi.as_array()[None, :], [t], [u])[0, 0])


def joint_pdf(p, psi):
    """f(t, u): joint density of failure age and usage (>= 0)."""
    return float(math.exp(log_joint_pdf(p, psi)))


def marginal_cdf(scale, x, psi):
    """Marginal CDF of one scale; ``scale`` is ``"age"`` or ``"usage"``."""
    eta, lam = _marginal(scale, psi)
    if x < 0.0:
        raise DomainError(f"negative {scale} value {x}")
    return float(-math.expm1(-((x / eta) ** lam)))


def marginal_quantile(scale, prob, psi):
    """Quantile of the marginal Weibull law of one scale.

    Parameters
    ----------
    scale : "age" or "usage"
    prob : float in [0, 1)
    psi : ParamVector
    """
    eta, lam = _marginal(scale, psi)
    if not 0.0 <= prob < 1.0:
        raise DomainError(f"prob must lie in [0, 1), got {prob}")
    return float(eta * (-math.log1p(-prob)) ** (1.0 / lam))


def _marginal(scale, psi):
    if scale == "age":
        return psi.eta_t, psi.lambda_t
    if scale == "usage":
        return psi.eta_u, psi.lambda_u
    raise DomainError(f"unknown scale {scale!r}, expected 'age' or 'usage'")


def sample_lifetimes(psi, size, rng):
    """Draw (t, u) pairs from the joint model.

    Uses the positive-stable frailty construction: given a one-sided
    stable variate V with Laplace transform exp(-s^theta), the pair
    ``X = (E1/V)^theta, Y = (E2/V)^theta`` of transformed unit
    exponentials has the required dependence, and the marginals are
    recovered through the Weibull inverse hazard.

    Parameters
    ----------
    psi : ParamVector
    size : int
    rng : numpy.random.Generator

    Returns
    -------
    ndarray of shape (size, 2) with columns (t, u).
    """
    th = psi.theta
    e1 = rng.exponential(size=size)
    e2 = rng.exponential(size=size)
    if th >= 1.0:
        v = np.ones(size)
    else:
        # Chambers-Mallows-Stuck for the one-sided stable law.
        wu = rng.uniform(0.0, np.pi, size=size)
        ev = rng.exponential(size=size)
        v = (np.sin(th * wu) / np.sin(wu) ** (1.0 / th)
             * (np.sin((1.0 - th) * wu) / ev) ** ((1.0 - th) / th))
    x = (e1 / v) ** th
    y = (e2 / v) ** th
    t = psi.eta_t * x ** (1.0 / psi.lambda_t)
    u = psi.eta_u * y ** (1.0 / psi.lambda_u)
    return np.column_stack([t, u])


def to_unconstrained(psi):
    """Map parameters to R^5: log scales/shapes, logit dependence."""
    arr = psi.as_array() if isinstance(psi, ParamVector) else np.asarray(psi, float)
    z = np.empty(5)
    z[:4] = np.log(arr[:4])
    z[4] = math.log(arr[4]) - math.log1p(-arr[4]) if arr[4] < 1.0 else math.inf
    return z


def from_unconstrained(z):
    """Inverse of :func:`to_unconstrained`, returned as a plain array."""
    z = np.asarray(z, dtype=float)
    out = np.empty(5)
    out[:4] = np.exp(z[:4])
    out[4] = expit(z[4])
    return out
