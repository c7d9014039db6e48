"""Pure-numpy implementations of the elementwise message kernels.

Mirrors the compiled backend function-for-function; selected automatically
when the extension is unavailable or RISBAMP_PURE_PYTHON=1 is set.
"""

import math

import numpy as np

NAME = "numpy"


def observe(Z, V, Y, v_w, floor):
    """Combine the plug-in output density N(Z, V) with the AWGN factor at Y."""
    vt = 1.0 / (1.0 / V + 1.0 / v_w)
    vt = np.maximum(vt, floor)
    zt = vt * (Z / V + Y / v_w)
    return zt, vt


def residual_step(zt, vt, Z, V, floor):
    """Scaled residual s = (zt - Z)/V and its variance vs = (V - vt)/V**2."""
    s = (zt - Z) / V
    vs = np.maximum((V - vt) / (V * V), floor)
    return s, vs


def gaussian_product(m1, v1, m2, v2, floor):
    """Precision-weighted product of two Gaussian messages."""
    v = 1.0 / (1.0 / v1 + 1.0 / v2)
    v = np.maximum(v, floor)
    m = v * (m1 / v1 + m2 / v2)
    return m, v


def gaussian_division(mb, vb, mc, vc, floor):
    """Gaussian division belief/cavity with a precision floor.

    Degenerate entries (non-positive precision difference) keep the belief
    mean and take the capped variance 1/floor.
    """
    prec = 1.0 / vb - 1.0 / vc
    bad = prec < floor
    prec = np.where(bad, 1.0, prec)
    v = np.maximum(1.0 / prec, floor)
    m = v * (mb / vb - mc / vc)
    cap = 1.0 / floor
    v = np.where(bad, cap, v)
    m = np.where(bad, mb, m)
    return m, v


def invert_precision(prec, floor):
    """Sigma = 1/prec with both precision and variance clamped to >= floor."""
    return np.maximum(1.0 / np.maximum(prec, floor), floor)


def extrinsic_mean(mean, sigma, corr, matched):
    """R = mean*(1 + sigma*corr) + sigma*matched (corr carries its own sign)."""
    return mean * (1.0 + sigma * corr) + sigma * matched


def gaussian_posterior(R, sig, m0, v0, floor):
    """Posterior moments under a circular Gaussian prior CN(m0, v0)."""
    v = 1.0 / (1.0 / sig + 1.0 / v0)
    v = np.maximum(v, floor)
    m = v * (R / sig + m0 / v0)
    return m, v


def bg_posterior(R, sig, rho, v0, floor):
    """Posterior moments under a Bernoulli-Gaussian prior.

    Prior: x = 0 w.p. 1-rho, x ~ CN(0, v0) w.p. rho.
    """
    tot = v0 + sig
    va = v0 * sig / tot
    ma = R * (v0 / tot)
    if rho < 1.0:
        # log-odds of the zero atom against the active component
        lr = (
            math.log((1.0 - rho) / rho)
            + np.log(tot / sig)
            - (np.abs(R) ** 2) * (v0 / (sig * tot))
        )
        pi = np.exp(-np.logaddexp(0.0, lr))
    else:
        pi = np.ones_like(sig)
    m = pi * ma
    ex2 = pi * (va + np.abs(ma) ** 2)
    v = np.maximum(ex2 - np.abs(m) ** 2, floor)
    return m, v


def discrete_posterior(R, sig, points, probs, floor):
    """Posterior moments under a finite constellation prior (exact enumeration)."""
    pts = np.asarray(points, dtype=np.complex128).reshape(-1)
    lp = np.log(np.asarray(probs, dtype=np.float64).reshape(-1))
    d = np.abs(R[..., None] - pts) ** 2
    logw = lp - d / sig[..., None]
    logw -= logw.max(axis=-1, keepdims=True)
    w = np.exp(logw)
    w /= w.sum(axis=-1, keepdims=True)
    m = (w * pts).sum(axis=-1)
    ex2 = (w * np.abs(pts) ** 2).sum(axis=-1)
    v = np.maximum(ex2 - np.abs(m) ** 2, floor)
    return m, v


def damp(prev, new, beta):
    """Convex mix of successive iterates: (1-beta)*prev + beta*new."""
    return (1.0 - beta) * prev + beta * new
