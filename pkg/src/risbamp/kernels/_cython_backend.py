"""Shape-preserving wrappers around the compiled flat-array kernels."""

import numpy as np

from . import _cykernels as _ck
from . import _numpy_backend as _np_backend

NAME = "cython"

_MAX_POINTS = 64  # compiled discrete kernel uses a fixed scratch buffer


def _c(a):
    a = np.ascontiguousarray(a, dtype=np.complex128).ravel()
    return a if a.flags.writeable else a.copy()


def _f(a):
    a = np.ascontiguousarray(a, dtype=np.float64).ravel()
    return a if a.flags.writeable else a.copy()


def observe(Z, V, Y, v_w, floor):
    zt, vt = _ck.observe(_c(Z), _f(V), _c(Y), float(v_w), floor)
    return zt.reshape(np.shape(Z)), vt.reshape(np.shape(Z))


def residual_step(zt, vt, Z, V, floor):
    s, vs = _ck.residual_step(_c(zt), _f(vt), _c(Z), _f(V), floor)
    return s.reshape(np.shape(Z)), vs.reshape(np.shape(Z))


def gaussian_product(m1, v1, m2, v2, floor):
    m, v = _ck.gaussian_product(_c(m1), _f(v1), _c(m2), _f(v2), floor)
    return m.reshape(np.shape(m1)), v.reshape(np.shape(m1))


def gaussian_division(mb, vb, mc, vc, floor):
    m, v = _ck.gaussian_division(_c(mb), _f(vb), _c(mc), _f(vc), floor)
    return m.reshape(np.shape(mb)), v.reshape(np.shape(mb))


def invert_precision(prec, floor):
    return _ck.invert_precision(_f(prec), floor).reshape(np.shape(prec))


def extrinsic_mean(mean, sigma, corr, matched):
    out = _ck.extrinsic_mean(_c(mean), _f(sigma), _f(corr), _c(matched))
    return out.reshape(np.shape(mean))


def gaussian_posterior(R, sig, m0, v0, floor):
    m, v = _ck.gaussian_posterior(_c(R), _f(sig), complex(m0), float(v0), floor)
    return m.reshape(np.shape(R)), v.reshape(np.shape(R))


def bg_posterior(R, sig, rho, v0, floor):
    m, v = _ck.bg_posterior(_c(R), _f(sig), float(rho), float(v0), floor)
    return m.reshape(np.shape(R)), v.reshape(np.shape(R))


def discrete_posterior(R, sig, points, probs, floor):
    pts = np.asarray(points, dtype=np.complex128).reshape(-1)
    if pts.size > _MAX_POINTS:
        return _np_backend.discrete_posterior(
            np.asarray(R), np.asarray(sig), points, probs, floor
        )
    logp = np.log(np.asarray(probs, dtype=np.float64).reshape(-1))
    m, v = _ck.discrete_posterior(_c(R), _f(sig), pts, logp, floor)
    return m.reshape(np.shape(R)), v.reshape(np.shape(R))


def damp(prev, new, beta):
    return _ck.damp(_f(prev), _f(new), float(beta)).reshape(np.shape(prev))
