"""Pure-NumPy numeric kernels.

Reference implementation of the hot loops. ``warranty2d._kernels`` is the
compiled drop-in replacement; both are selected through
:mod:`warranty2d.backend` and must agree to floating round-off.

Conventions shared by both backends:

* parameter rows are ``(eta_t, lambda_t, eta_u, lambda_u, theta)`` with all
  entries positive and ``0 < theta <= 1``;
* evaluation points are strictly positive unless stated otherwise;
* no argument validation happens here, the public wrappers own it.
"""

import numpy as np

__all__ = ["log_reliability", "log_pdf", "log_censor_prob", "loglik",
           "rect_moments"]


def _columns(params):
    p = np.atleast_2d(np.asarray(params, dtype=np.float64))
    return (p[:, 0:1], p[:, 1:2], p[:, 2:3], p[:, 3:4], p[:, 4:5])


def log_reliability(params, t, u):
    """log R(t, u) for each parameter row at each point, shape (k, m).

    Accepts t = 0 and u = 0 (log R(0, 0) = 0).
    """
    eta_t, lam_t, eta_u, lam_u, theta = _columns(params)
    t = np.asarray(t, dtype=np.float64)[None, :]
    u = np.asarray(u, dtype=np.float64)[None, :]
    rt = lam_t / theta
    ru = lam_u / theta
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        la = rt * (np.log(t) - np.log(eta_t))
        lb = ru * (np.log(u) - np.log(eta_u))
        ls = np.logaddexp(la, lb)
        out = -np.exp(theta * ls)
    return out


def log_pdf(params, t, u):
    """log f(t, u) for each parameter row at each point, shape (k, m).

    Requires strictly positive coordinates; returns -inf where the density
    vanishes (including overflow of the outer exponent).
    """
    eta_t, lam_t, eta_u, lam_u, theta = _columns(params)
    t = np.asarray(t, dtype=np.float64)[None, :]
    u = np.asarray(u, dtype=np.float64)[None, :]
    rt = lam_t / theta
    ru = lam_u / theta
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        # log((1 - theta)/theta); -inf at theta == 1 collapses the
        # logaddexp below to its first argument, which is the exact limit.
        lc = np.log1p(-theta) - np.log(theta)
        la = rt * (np.log(t) - np.log(eta_t))
        lb = ru * (np.log(u) - np.log(eta_u))
        ls = np.logaddexp(la, lb)
        tl = theta * ls
        out = (np.log(lam_t) + np.log(lam_u)
               - rt * np.log(eta_t) - ru * np.log(eta_u)
               + (rt - 1.0) * np.log(t) + (ru - 1.0) * np.log(u)
               + (theta - 2.0) * ls + np.logaddexp(tl, lc) - np.exp(tl))
    return np.where(np.isnan(out), -np.inf, out)


def log_censor_prob(params, t0, u0, corner=False):
    """log probability that a unit is censored by the window, shape (k,).

    ``corner=False``: the event {T > t0 or U > u0}, with probability
    R_T(t0) + R_U(u0) - R(t0, u0); this is the complement of the window
    mass, so the score identity holds. ``corner=True``: log R(t0, u0),
    the survival-complement convention.
    """
    lj = log_reliability(params, [t0], [u0])[:, 0]
    if corner:
        return lj
    eta_t, lam_t, eta_u, lam_u, _ = _columns(params)
    with np.errstate(divide="ignore", over="ignore"):
        lt = -np.exp(lam_t[:, 0] * (np.log(t0) - np.log(eta_t[:, 0])))
        lu = -np.exp(lam_u[:, 0] * (np.log(u0) - np.log(eta_u[:, 0])))
    # R <= min(R_T, R_U), so the bracket below stays in (0, 2).
    m = np.maximum(lt, lu)
    return m + np.log(np.exp(lt - m) + np.exp(lu - m) - np.exp(lj - m))


def loglik(params, t_fail, u_fail, n_cens, t0, u0, corner=False):
    """Censored log-likelihood per parameter row, shape (k,).

    Sum of log f over the failed points plus ``n_cens`` copies of the
    log censoring probability (see log_censor_prob for ``corner``).
    """
    params = np.atleast_2d(np.asarray(params, dtype=np.float64))
    t_fail = np.asarray(t_fail, dtype=np.float64)
    k = params.shape[0]
    if t_fail.size:
        ll = log_pdf(params, t_fail, u_fail).sum(axis=1)
    else:
        ll = np.zeros(k)
    if n_cens:
        ll = ll + n_cens * log_censor_prob(params, t0, u0, corner)
    return ll


def rect_moments(params, rects, nodes, weights):
    """Weighted-moment integrals of the joint density over rectangles.

    For each parameter row and each rectangle ``(x1, x2, y1, y2)`` returns
    the Gauss-Legendre approximations of

        I00 = iint f dt du,    I10 = iint t f dt du,
        I01 = iint u f dt du,  I11 = iint t u f dt du,

    as an array of shape (k, r, 4). ``nodes``/``weights`` are a quadrature
    rule on the reference interval [0, 1]. Rectangles with a non-positive
    side length contribute zeros. Coordinates must stay within a few orders
    of magnitude of the scale parameters so that the power terms stay inside
    double range.
    """
    params = np.atleast_2d(np.asarray(params, dtype=np.float64))
    rects = np.atleast_2d(np.asarray(rects, dtype=np.float64))
    xi = np.asarray(nodes, dtype=np.float64)
    w = np.asarray(weights, dtype=np.float64)
    eta_t, lam_t, eta_u, lam_u, theta = _columns(params)
    rt = lam_t / theta
    ru = lam_u / theta
    c1 = (1.0 - theta) / theta
    out = np.zeros((params.shape[0], rects.shape[0], 4))
    for i, (x1, x2, y1, y2) in enumerate(rects):
        wx = x2 - x1
        wy = y2 - y1
        if wx <= 0.0 or wy <= 0.0:
            continue
        t = x1 + wx * xi
        u = y1 + wy * xi
        lt = np.log(t)[None, :]
        lu = np.log(u)[None, :]
        # One-dimensional factors of the density, quadrature weights folded in.
        gt = (wx * w)[None, :] * np.exp(
            (rt - 1.0) * lt + np.log(lam_t) - rt * np.log(eta_t))
        gu = (wy * w)[None, :] * np.exp(
            (ru - 1.0) * lu + np.log(lam_u) - ru * np.log(eta_u))
        a = np.exp(rt * (lt - np.log(eta_t)))
        b = np.exp(ru * (lu - np.log(eta_u)))
        s = a[:, :, None] + b[:, None, :]
        ls = np.log(s)
        sth = np.exp(theta[:, :, None] * ls)
        core = sth / (s * s) * (sth + c1[:, :, None]) * np.exp(-sth)
        v = gt[:, :, None] * gu[:, None, :] * core
        out[:, i, 0] = np.einsum("kij->k", v)
        out[:, i, 1] = np.einsum("kij,i->k", v, t)
        out[:, i, 2] = np.einsum("kij,j->k", v, u)
        out[:, i, 3] = np.einsum("kij,i,j->k", v, t, u)
    return out
