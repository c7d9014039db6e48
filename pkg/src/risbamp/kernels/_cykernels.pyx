# cython: boundscheck=False, wraparound=False, cdivision=True
"""Fused single-pass kernels for the elementwise message algebra.

Flat-array counterparts of the numpy backend; the python wrapper restores
shapes. All complex inputs are complex128, all variances float64.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport exp, log

cnp.import_array()

ctypedef double complex cplx


def observe(cplx[::1] Z, double[::1] V, cplx[::1] Y, double v_w, double floor):
    cdef Py_ssize_t i, n = Z.shape[0]
    zt_arr = np.empty(n, dtype=np.complex128)
    vt_arr = np.empty(n, dtype=np.float64)
    cdef cplx[::1] zt = zt_arr
    cdef double[::1] vt = vt_arr
    cdef double v
    for i in range(n):
        v = 1.0 / (1.0 / V[i] + 1.0 / v_w)
        if v < floor:
            v = floor
        vt[i] = v
        zt[i] = v * (Z[i] / V[i] + Y[i] / v_w)
    return zt_arr, vt_arr


def residual_step(cplx[::1] zt, double[::1] vt, cplx[::1] Z, double[::1] V,
                  double floor):
    cdef Py_ssize_t i, n = zt.shape[0]
    s_arr = np.empty(n, dtype=np.complex128)
    vs_arr = np.empty(n, dtype=np.float64)
    cdef cplx[::1] s = s_arr
    cdef double[::1] vs = vs_arr
    cdef double w
    for i in range(n):
        s[i] = (zt[i] - Z[i]) / V[i]
        w = (V[i] - vt[i]) / (V[i] * V[i])
        vs[i] = w if w > floor else floor
    return s_arr, vs_arr


def gaussian_product(cplx[::1] m1, double[::1] v1, cplx[::1] m2, double[::1] v2,
                     double floor):
    cdef Py_ssize_t i, n = m1.shape[0]
    m_arr = np.empty(n, dtype=np.complex128)
    v_arr = np.empty(n, dtype=np.float64)
    cdef cplx[::1] m = m_arr
    cdef double[::1] v = v_arr
    cdef double vv
    for i in range(n):
        vv = 1.0 / (1.0 / v1[i] + 1.0 / v2[i])
        if vv < floor:
            vv = floor
        v[i] = vv
        m[i] = vv * (m1[i] / v1[i] + m2[i] / v2[i])
    return m_arr, v_arr


def gaussian_division(cplx[::1] mb, double[::1] vb, cplx[::1] mc, double[::1] vc,
                      double floor):
    cdef Py_ssize_t i, n = mb.shape[0]
    m_arr = np.empty(n, dtype=np.complex128)
    v_arr = np.empty(n, dtype=np.float64)
    cdef cplx[::1] m = m_arr
    cdef double[::1] v = v_arr
    cdef double prec, vv, cap = 1.0 / floor
    for i in range(n):
        prec = 1.0 / vb[i] - 1.0 / vc[i]
        if prec < floor:
            v[i] = cap
            m[i] = mb[i]
        else:
            vv = 1.0 / prec
            if vv < floor:
                vv = floor
            v[i] = vv
            m[i] = vv * (mb[i] / vb[i] - mc[i] / vc[i])
    return m_arr, v_arr


def invert_precision(double[::1] prec, double floor):
    cdef Py_ssize_t i, n = prec.shape[0]
    out_arr = np.empty(n, dtype=np.float64)
    cdef double[::1] out = out_arr
    cdef double p, v
    for i in range(n):
        p = prec[i]
        if p < floor:
            p = floor
        v = 1.0 / p
        out[i] = v if v > floor else floor
    return out_arr


def extrinsic_mean(cplx[::1] mean, double[::1] sigma, double[::1] corr,
                   cplx[::1] matched):
    cdef Py_ssize_t i, n = mean.shape[0]
    out_arr = np.empty(n, dtype=np.complex128)
    cdef cplx[::1] out = out_arr
    for i in range(n):
        out[i] = mean[i] * (1.0 + sigma[i] * corr[i]) + sigma[i] * matched[i]
    return out_arr


def gaussian_posterior(cplx[::1] R, double[::1] sig, cplx m0, double v0,
                       double floor):
    cdef Py_ssize_t i, n = R.shape[0]
    m_arr = np.empty(n, dtype=np.complex128)
    v_arr = np.empty(n, dtype=np.float64)
    cdef cplx[::1] m = m_arr
    cdef double[::1] v = v_arr
    cdef double vv
    for i in range(n):
        vv = 1.0 / (1.0 / sig[i] + 1.0 / v0)
        if vv < floor:
            vv = floor
        v[i] = vv
        m[i] = vv * (R[i] / sig[i] + m0 / v0)
    return m_arr, v_arr


def bg_posterior(cplx[::1] R, double[::1] sig, double rho, double v0,
                 double floor):
    cdef Py_ssize_t i, n = R.shape[0]
    m_arr = np.empty(n, dtype=np.complex128)
    v_arr = np.empty(n, dtype=np.float64)
    cdef cplx[::1] m = m_arr
    cdef double[::1] v = v_arr
    cdef double tot, va, g, r2, lr, pi, e, vv, lodds
    cdef cplx ma
    cdef bint sparse = rho < 1.0
    lodds = log((1.0 - rho) / rho) if sparse else 0.0
    for i in range(n):
        tot = v0 + sig[i]
        va = v0 * sig[i] / tot
        g = v0 / tot
        ma = R[i] * g
        if sparse:
            r2 = R[i].real * R[i].real + R[i].imag * R[i].imag
            lr = lodds + log(tot / sig[i]) - r2 * (v0 / (sig[i] * tot))
            if lr > 0.0:
                e = exp(-lr)
                pi = e / (1.0 + e)
            else:
                pi = 1.0 / (1.0 + exp(lr))
        else:
            pi = 1.0
        m[i] = pi * ma
        vv = pi * (va + (ma.real * ma.real + ma.imag * ma.imag)) \
            - (m[i].real * m[i].real + m[i].imag * m[i].imag)
        v[i] = vv if vv > floor else floor
    return m_arr, v_arr


def discrete_posterior(cplx[::1] R, double[::1] sig, cplx[::1] points,
                       double[::1] logp, double floor):
    cdef Py_ssize_t i, j, n = R.shape[0], p = points.shape[0]
    m_arr = np.empty(n, dtype=np.complex128)
    v_arr = np.empty(n, dtype=np.float64)
    cdef cplx[::1] m = m_arr
    cdef double[::1] v = v_arr
    cdef double lw, lmax, wsum, w, ex2, vv, dr, di
    cdef cplx mi, d
    # logw buffer per entry; constellations are tiny so a local loop is fine
    cdef double[64] buf
    for i in range(n):
        lmax = -1e300
        for j in range(p):
            d = R[i] - points[j]
            dr = d.real
            di = d.imag
            lw = logp[j] - (dr * dr + di * di) / sig[i]
            buf[j] = lw
            if lw > lmax:
                lmax = lw
        wsum = 0.0
        mi = 0.0
        ex2 = 0.0
        for j in range(p):
            w = exp(buf[j] - lmax)
            wsum += w
            mi = mi + w * points[j]
            ex2 += w * (points[j].real * points[j].real
                        + points[j].imag * points[j].imag)
        mi = mi / wsum
        ex2 = ex2 / wsum
        m[i] = mi
        vv = ex2 - (mi.real * mi.real + mi.imag * mi.imag)
        v[i] = vv if vv > floor else floor
    return m_arr, v_arr


def damp(double[::1] prev, double[::1] new, double beta):
    cdef Py_ssize_t i, n = prev.shape[0]
    out_arr = np.empty(n, dtype=np.float64)
    cdef double[::1] out = out_arr
    for i in range(n):
        out[i] = (1.0 - beta) * prev[i] + beta * new[i]
    return out_arr
