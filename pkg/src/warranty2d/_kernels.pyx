# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled numeric kernels.

Drop-in replacement for :mod:`warranty2d._kernels_py`; see that module for
the shared conventions and docstrings.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport exp, log, log1p, INFINITY, isnan

cnp.import_array()

__all__ = ["log_reliability", "log_pdf", "log_censor_prob", "loglik",
           "rect_moments"]


cdef inline double _logaddexp(double x, double y) nogil:
    if x == -INFINITY:
        return y
    if y == -INFINITY:
        return x
    if x >= y:
        return x + log1p(exp(y - x))
    return y + log1p(exp(x - y))


cdef inline double _log_rel(double let, double rt, double leu, double ru,
                            double theta, double lt, double lu) nogil:
    # lt, lu are log-coordinates (-inf encodes a zero coordinate).
    cdef double la = rt * (lt - let)
    cdef double lb = ru * (lu - leu)
    cdef double ls = _logaddexp(la, lb)
    if ls == -INFINITY:
        return 0.0
    return -exp(theta * ls)


cdef inline double _log_pdf(double let, double llt, double rt,
                            double leu, double llu, double ru,
                            double theta, double lc,
                            double lt, double lu) nogil:
    cdef double la = rt * (lt - let)
    cdef double lb = ru * (lu - leu)
    cdef double ls = _logaddexp(la, lb)
    cdef double tl = theta * ls
    cdef double out
    out = (llt + llu - rt * let - ru * leu
           + (rt - 1.0) * lt + (ru - 1.0) * lu
           + (theta - 2.0) * ls + _logaddexp(tl, lc) - exp(tl))
    if isnan(out):
        return -INFINITY
    return out


def log_reliability(params, t, u):
    cdef double[:, ::1] p = np.ascontiguousarray(
        np.atleast_2d(np.asarray(params, dtype=np.float64)))
    cdef double[::1] tv = np.ascontiguousarray(t, dtype=np.float64)
    cdef double[::1] uv = np.ascontiguousarray(u, dtype=np.float64)
    cdef Py_ssize_t k = p.shape[0], m = tv.shape[0], d, i
    out_arr = np.empty((k, m))
    cdef double[:, ::1] out = out_arr
    cdef double let, leu, rt, ru, theta, lt, lu
    with nogil:
        for d in range(k):
            let = log(p[d, 0]); rt = p[d, 1] / p[d, 4]
            leu = log(p[d, 2]); ru = p[d, 3] / p[d, 4]
            theta = p[d, 4]
            for i in range(m):
                lt = log(tv[i]) if tv[i] > 0.0 else -INFINITY
                lu = log(uv[i]) if uv[i] > 0.0 else -INFINITY
                out[d, i] = _log_rel(let, rt, leu, ru, theta, lt, lu)
    return out_arr


def log_pdf(params, t, u):
    cdef double[:, ::1] p = np.ascontiguousarray(
        np.atleast_2d(np.asarray(params, dtype=np.float64)))
    cdef double[::1] tv = np.ascontiguousarray(t, dtype=np.float64)
    cdef double[::1] uv = np.ascontiguousarray(u, dtype=np.float64)
    cdef Py_ssize_t k = p.shape[0], m = tv.shape[0], d, i
    out_arr = np.empty((k, m))
    cdef double[:, ::1] out = out_arr
    cdef double let, llt, leu, llu, rt, ru, theta, lc, lt, lu
    with nogil:
        for d in range(k):
            let = log(p[d, 0]); llt = log(p[d, 1])
            leu = log(p[d, 2]); llu = log(p[d, 3])
            theta = p[d, 4]
            rt = p[d, 1] / theta; ru = p[d, 3] / theta
            lc = log1p(-theta) - log(theta) if theta < 1.0 else -INFINITY
            for i in range(m):
                lt = log(tv[i]) if tv[i] > 0.0 else -INFINITY
                lu = log(uv[i]) if uv[i] > 0.0 else -INFINITY
                out[d, i] = _log_pdf(let, llt, rt, leu, llu, ru,
                                     theta, lc, lt, lu)
    return out_arr


cdef inline double _log_cens(double let, double leu,
                             double rt, double ru, double theta,
                             double lt0, double lu0, bint corner) nogil:
    cdef double lj = _log_rel(let, rt, leu, ru, theta, lt0, lu0)
    cdef double lmt, lmu, m
    if corner:
        return lj
    lmt = -exp((rt * theta) * (lt0 - let))
    lmu = -exp((ru * theta) * (lu0 - leu))
    m = lmt if lmt >= lmu else lmu
    # R <= min(R_T, R_U), so the bracket stays in (0, 2).
    return m + log(exp(lmt - m) + exp(lmu - m) - exp(lj - m))


def log_censor_prob(params, t0, u0, corner=False):
    cdef double[:, ::1] p = np.ascontiguousarray(
        np.atleast_2d(np.asarray(params, dtype=np.float64)))
    cdef Py_ssize_t k = p.shape[0], d
    cdef double ct0 = t0, cu0 = u0
    cdef bint crn = corner
    out_arr = np.empty(k)
    cdef double[::1] out = out_arr
    cdef double let, llt, leu, llu, rt, ru, theta, lt0, lu0
    lt0 = log(ct0) if ct0 > 0.0 else -INFINITY
    lu0 = log(cu0) if cu0 > 0.0 else -INFINITY
    with nogil:
        for d in range(k):
            let = log(p[d, 0]); llt = log(p[d, 1])
            leu = log(p[d, 2]); llu = log(p[d, 3])
            theta = p[d, 4]
            rt = p[d, 1] / theta; ru = p[d, 3] / theta
            out[d] = _log_cens(let, leu, rt, ru, theta, lt0, lu0, crn)
    return out_arr


def loglik(params, t_fail, u_fail, n_cens, t0, u0, corner=False):
    cdef double[:, ::1] p = np.ascontiguousarray(
        np.atleast_2d(np.asarray(params, dtype=np.float64)))
    cdef double[::1] tv = np.ascontiguousarray(t_fail, dtype=np.float64)
    cdef double[::1] uv = np.ascontiguousarray(u_fail, dtype=np.float64)
    cdef Py_ssize_t k = p.shape[0], m = tv.shape[0], d, i
    cdef double nc = n_cens
    cdef double ct0 = t0, cu0 = u0
    cdef bint crn = corner
    out_arr = np.zeros(k)
    cdef double[::1] out = out_arr
    cdef double let, llt, leu, llu, rt, ru, theta, lc, acc, lt0, lu0
    with nogil:
        for d in range(k):
            let = log(p[d, 0]); llt = log(p[d, 1])
            leu = log(p[d, 2]); llu = log(p[d, 3])
            theta = p[d, 4]
            rt = p[d, 1] / theta; ru = p[d, 3] / theta
            lc = log1p(-theta) - log(theta) if theta < 1.0 else -INFINITY
            acc = 0.0
            for i in range(m):
                acc += _log_pdf(let, llt, rt, leu, llu, ru, theta, lc,
                                log(tv[i]), log(uv[i]))
            if nc != 0.0:
                lt0 = log(ct0) if ct0 > 0.0 else -INFINITY
                lu0 = log(cu0) if cu0 > 0.0 else -INFINITY
                acc += nc * _log_cens(let, leu, rt, ru, theta,
                                      lt0, lu0, crn)
            out[d] = acc
    return out_arr


def rect_moments(params, rects, nodes, weights):
    cdef double[:, ::1] p = np.ascontiguousarray(
        np.atleast_2d(np.asarray(params, dtype=np.float64)))
    cdef double[:, ::1] rc = np.ascontiguousarray(
        np.atleast_2d(np.asarray(rects, dtype=np.float64)))
    cdef double[::1] xi = np.ascontiguousarray(nodes, dtype=np.float64)
    cdef double[::1] w = np.ascontiguousarray(weights, dtype=np.float64)
    cdef Py_ssize_t k = p.shape[0], r = rc.shape[0], n = xi.shape[0]
    cdef Py_ssize_t d, q, i, j
    out_arr = np.zeros((k, r, 4))
    cdef double[:, :, ::1] out = out_arr
    buf_arr = np.empty((4, n))
    cdef double[:, ::1] buf = buf_arr
    cdef double let, llt, leu, llu, rt, ru, theta, c1
    cdef double x1, x2, y1, y2, wx, wy, lt, lu
    cdef double a_i, gt_i, t_i, b_j, gu_j, u_j
    cdef double s, ls, sth, v
    cdef double m00, m10, m01, m11
    with nogil:
        for d in range(k):
            let = log(p[d, 0]); llt = log(p[d, 1])
            leu = log(p[d, 2]); llu = log(p[d, 3])
            theta = p[d, 4]
            rt = p[d, 1] / theta; ru = p[d, 3] / theta
            c1 = (1.0 - theta) / theta
            for q in range(r):
                x1 = rc[q, 0]; x2 = rc[q, 1]; y1 = rc[q, 2]; y2 = rc[q, 3]
                wx = x2 - x1; wy = y2 - y1
                if wx <= 0.0 or wy <= 0.0:
                    continue
                for j in range(n):
                    u_j = y1 + wy * xi[j]
                    lu = log(u_j)
                    buf[0, j] = exp(ru * (lu - leu))
                    buf[1, j] = wy * w[j] * exp(
                        (ru - 1.0) * lu + llu - ru * leu)
                    buf[2, j] = u_j
                m00 = 0.0; m10 = 0.0; m01 = 0.0; m11 = 0.0
                for i in range(n):
                    t_i = x1 + wx * xi[i]
                    lt = log(t_i)
                    a_i = exp(rt * (lt - let))
                    gt_i = wx * w[i] * exp((rt - 1.0) * lt + llt - rt * let)
                    for j in range(n):
                        b_j = buf[0, j]
                        gu_j = buf[1, j]
                        u_j = buf[2, j]
                        s = a_i + b_j
                        ls = log(s)
                        sth = exp(theta * ls)
                        v = gt_i * gu_j * sth / (s * s) * (sth + c1) * exp(-sth)
                        m00 += v
                        m10 += t_i * v
                        m01 += u_j * v
                        m11 += t_i * u_j * v
                out[d, q, 0] = m00
                out[d, q, 1] = m10
                out[d, q, 2] = m01
                out[d, q, 3] = m11
    return out_arr
