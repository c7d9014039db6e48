"""Slow independent references used by the selftest and the test suite.

Everything here recomputes posterior moments or message updates from first
principles (grid quadrature, exact enumeration, plain scalar loops) without
touching the fast kernels, so it can serve as an oracle for them.
"""

import math

import numpy as np

from .priors import BernoulliGaussianPrior, DiscretePrior, GaussianPrior


def _grid(center, width, n):
    lo = center - width
    hi = center + width
    return np.linspace(lo, hi, n)


def _complex_grid(R, scale, n):
    """Square re/im grid generously covering both the origin and R."""
    w = 8.0 * scale + abs(R)
    re = _grid(0.0, w, n)
    im = _grid(0.0, w, n)
    X = re[:, None] + 1j * im[None, :]
    da = (re[1] - re[0]) * (im[1] - im[0])
    return X, da


def posterior_moments_quadrature(prior, R, sigma, n=1201):
    """Posterior mean/variance of prior(x) * CN(R; x, sigma) by 2-D grid
    quadrature (re/im integrated independently; circular symmetry assumed).

    The Bernoulli-Gaussian zero atom is handled analytically; discrete priors
    use exact enumeration.
    """
    R = complex(R)
    sigma = float(sigma)
    if isinstance(prior, DiscretePrior):
        pts = np.asarray(prior.points, dtype=np.complex128)
        w = np.asarray(prior.probs) * np.exp(
            -(np.abs(R - pts) ** 2 - np.min(np.abs(R - pts) ** 2)) / sigma
        )
        w = w / w.sum()
        m = complex(np.sum(w * pts))
        v = float(np.sum(w * np.abs(pts) ** 2) - abs(m) ** 2)
        return m, v
    if isinstance(prior, GaussianPrior):
        def pdf(x):
            return np.exp(-np.abs(x - prior.mean) ** 2 / prior.var) / (
                math.pi * prior.var
            )

        spread = math.sqrt(prior.var + sigma)
        atom_weight = 0.0
    elif isinstance(prior, BernoulliGaussianPrior):
        def pdf(x):
            return (
                prior.density
                * np.exp(-np.abs(x) ** 2 / prior.var)
                / (math.pi * prior.var)
            )

        spread = math.sqrt(prior.var + sigma)
        atom_weight = (
            (1.0 - prior.density)
            * math.exp(-abs(R) ** 2 / sigma)
            / (math.pi * sigma)
        )
    else:
        raise TypeError(f"unsupported prior {type(prior).__name__}")
    X, da = _complex_grid(R, spread, n)
    like = np.exp(-np.abs(X - R) ** 2 / sigma) / (math.pi * sigma)
    f = pdf(X) * like
    z_cont = f.sum() * da
    z = z_cont + atom_weight
    m = complex((X * f).sum() * da / z)
    ex2 = float((np.abs(X) ** 2 * f).sum() * da / z)
    return m, ex2 - abs(m) ** 2


def product_moments_quadrature(m1, v1, m2, v2, n=1201):
    """Moments of the normalized product of two circular Gaussian densities."""
    m1, m2 = complex(m1), complex(m2)
    spread = math.sqrt(max(v1, v2))
    X, da = _complex_grid(m1, spread + abs(m2 - m1), n)
    f = np.exp(-np.abs(X - m1) ** 2 / v1 - np.abs(X - m2) ** 2 / v2)
    z = f.sum() * da
    m = complex((X * f).sum() * da / z)
    ex2 = float((np.abs(X) ** 2 * f).sum() * da / z)
    return m, ex2 - abs(m) ** 2


def wirtinger_derivative(fn, R, h=1e-5):
    """0.5*(d/da - i d/db) of a complex-valued fn at R = a + ib, by central
    differences."""
    da = (fn(R + h) - fn(R - h)) / (2.0 * h)
    db = (fn(R + 1j * h) - fn(R - 1j * h)) / (2.0 * h)
    return 0.5 * (da - 1j * db)


def scalar_backward_layer2(Z2, V2, Y, v_w, floor=1e-12):
    """Plain-python per-entry reference for the observation combine and the
    scaled-residual computation of the second layer."""
    K, T = np.shape(Z2)
    zt = np.zeros((K, T), dtype=complex)
    vt = np.zeros((K, T))
    s = np.zeros((K, T), dtype=complex)
    vs = np.zeros((K, T))
    for k in range(K):
        for t in range(T):
            v = 1.0 / (1.0 / V2[k][t] + 1.0 / v_w)
            v = max(v, floor)
            z = v * (Z2[k][t] / V2[k][t] + Y[k][t] / v_w)
            zt[k, t] = z
            vt[k, t] = v
            s[k, t] = (z - Z2[k][t]) / V2[k][t]
            vs[k, t] = max((V2[k][t] - v) / V2[k][t] ** 2, floor)
    return zt, vt, s, vs


def unsimplified_extrinsics(target, means, variances, s_res, vs_res):
    """(Sigma, R) with the full variance sums kept, i.e. without dropping the
    var*vs and var*|s|^2 cross terms from the precision.

    ``means``/``variances`` belong to the partner variable family that sits in
    the same factor as the target (q for u, u for q, b for x, x for b);
    ``s_res``/``vs_res`` are the residual fields of the factor's layer.
    """
    means = np.asarray(means)
    variances = np.asarray(variances)
    s_res = np.asarray(s_res)
    vs_res = np.asarray(vs_res)
    if target == "u":
        # sums over rows k of the second layer, result N x T
        rows, cols = means.shape[1], s_res.shape[1]
        prec = np.zeros((rows, cols))
        matched = np.zeros((rows, cols), dtype=complex)
        gain = np.zeros((rows, cols))
        for n in range(rows):
            for t in range(cols):
                for k in range(means.shape[0]):
                    aq2 = abs(means[k, n]) ** 2
                    prec[n, t] += (
                        aq2 * vs_res[k, t]
                        + variances[k, n] * vs_res[k, t]
                        - variances[k, n] * abs(s_res[k, t]) ** 2
                    )
                    matched[n, t] += np.conj(means[k, n]) * s_res[k, t]
                    gain[n, t] += aq2 * vs_res[k, t]
    elif target == "q":
        rows, cols = s_res.shape[0], means.shape[0]
        prec = np.zeros((rows, cols))
        matched = np.zeros((rows, cols), dtype=complex)
        gain = np.zeros((rows, cols))
        for k in range(rows):
            for n in range(cols):
                for t in range(s_res.shape[1]):
                    au2 = abs(means[n, t]) ** 2
                    prec[k, n] += (
                        au2 * vs_res[k, t]
                        + variances[n, t] * vs_res[k, t]
                        - variances[n, t] * abs(s_res[k, t]) ** 2
                    )
                    matched[k, n] += np.conj(means[n, t]) * s_res[k, t]
                    gain[k, n] += au2 * vs_res[k, t]
    elif target == "x":
        rows, cols = means.shape[1], s_res.shape[1]
        prec = np.zeros((rows, cols))
        matched = np.zeros((rows, cols), dtype=complex)
        gain = np.zeros((rows, cols))
        for m in range(rows):
            for t in range(cols):
                for n in range(means.shape[0]):
                    ab2 = abs(means[n, m]) ** 2
                    prec[m, t] += (
                        ab2 * vs_res[n, t]
                        + variances[n, m] * vs_res[n, t]
                        - variances[n, m] * abs(s_res[n, t]) ** 2
                    )
                    matched[m, t] += np.conj(means[n, m]) * s_res[n, t]
                    gain[m, t] += ab2 * vs_res[n, t]
    elif target == "b":
        rows, cols = s_res.shape[0], means.shape[0]
        prec = np.zeros((rows, cols))
        matched = np.zeros((rows, cols), dtype=complex)
        gain = np.zeros((rows, cols))
        for n in range(rows):
            for m in range(cols):
                for t in range(s_res.shape[1]):
                    ax2 = abs(means[m, t]) ** 2
                    prec[n, m] += (
                        ax2 * vs_res[n, t]
                        + variances[m, t] * vs_res[n, t]
                        - variances[m, t] * abs(s_res[n, t]) ** 2
                    )
                    matched[n, m] += np.conj(means[m, t]) * s_res[n, t]
                    gain[n, m] += ax2 * vs_res[n, t]
    else:
        raise ValueError("target must be one of x, b, u, q")
    sigma = 1.0 / prec
    return sigma, gain, matched


def full_extrinsic_pair(target, self_mean, means, variances, s_res, vs_res):
    """Full-form (Sigma, R): R = Sigma*(matched + self_mean*gain)."""
    sigma, gain, matched = unsimplified_extrinsics(
        target, means, variances, s_res, vs_res
    )
    R = sigma * (matched + np.asarray(self_mean) * gain)
    return sigma, R


def exact_anchored_scalar_posterior(y, q, x_p, v0_b, v_w, n=4001):
    """Quadrature posterior of the single unknown channel coefficient in the
    fully anchored scalar model y = q*x_p*h + w, h ~ CN(0, v0_b).

    Integrates over h on a 2-D grid; also returns the implied posterior of the
    noiseless output a = q*x_p*h.
    """
    g = q * x_p
    w = 8.0 * math.sqrt(v0_b) + abs(y / g)
    re = np.linspace(-w, w, n)
    H = re[:, None] + 1j * re[None, :]
    da = (re[1] - re[0]) ** 2
    f = np.exp(-np.abs(H) ** 2 / v0_b - np.abs(y - g * H) ** 2 / v_w)
    z = f.sum() * da
    mh = complex((H * f).sum() * da / z)
    vh = float((np.abs(H) ** 2 * f).sum() * da / z) - abs(mh) ** 2
    return mh, vh, g * mh, abs(g) ** 2 * vh
