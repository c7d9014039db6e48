"""Scalar posterior denoisers and Gaussian-message algebra.

All densities are circularly symmetric complex Gaussians. Every variance that
leaves this module is clamped to at least ``VAR_FLOOR``; precision-domain
subtractions that go non-positive are absorbed by the same clamp.
"""

from dataclasses import dataclass
from typing import Union

import numpy as np

from . import kernels

VAR_FLOOR = 1e-12


@dataclass(frozen=True)
class GaussianPrior:
    mean: complex = 0.0
    var: float = 1.0

    def __post_init__(self):
        if not self.var > 0:
            raise ValueError("prior variance must be positive")


@dataclass(frozen=True)
class BernoulliGaussianPrior:
    """Spike-and-slab prior: zero w.p. 1-density, CN(0, var) otherwise."""

    density: float
    var: float = 1.0

    def __post_init__(self):
        if not 0.0 < self.density <= 1.0:
            raise ValueError("density must lie in (0, 1]")
        if not self.var > 0:
            raise ValueError("prior variance must be positive")


@dataclass(frozen=True)
class DiscretePrior:
    """Finite constellation with point probabilities summing to one."""

    points: tuple
    probs: tuple

    def __post_init__(self):
        if len(self.points) != len(self.probs):
            raise ValueError("points and probs must have equal length")
        if abs(sum(self.probs) - 1.0) > 1e-12:
            raise ValueError("probs must sum to 1")

    @classmethod
    def qpsk(cls):
        s = 1.0 / np.sqrt(2.0)
        pts = (s * (1 + 1j), s * (1 - 1j), s * (-1 + 1j), s * (-1 - 1j))
        return cls(points=pts, probs=(0.25, 0.25, 0.25, 0.25))


Prior = Union[GaussianPrior, BernoulliGaussianPrior, DiscretePrior]


@dataclass
class GaussianMsg:
    """A Gaussian message (mean, var). Fields may be scalars or arrays."""

    mean: complex
    var: float


def _check_msg(msg):
    if not np.all(np.isfinite(msg.mean)) or not np.all(np.isfinite(msg.var)):
        raise ValueError("non-finite Gaussian message")
    if not np.all(np.asarray(msg.var) > 0):
        raise ValueError("message variance must be positive")


def denoise_arrays(prior, R, sigma, floor=VAR_FLOOR):
    """Posterior mean/variance arrays of the prior against CN(R; x, sigma)."""
    R = np.asarray(R, dtype=np.complex128)
    sigma = np.asarray(sigma, dtype=np.float64)
    if sigma.shape != R.shape:
        sigma = np.broadcast_to(sigma, R.shape)
    if isinstance(prior, GaussianPrior):
        return kernels.gaussian_posterior(R, sigma, prior.mean, prior.var, floor)
    if isinstance(prior, BernoulliGaussianPrior):
        return kernels.bg_posterior(R, sigma, prior.density, prior.var, floor)
    if isinstance(prior, DiscretePrior):
        return kernels.discrete_posterior(R, sigma, prior.points, prior.probs, floor)
    raise TypeError(f"unsupported prior {type(prior).__name__}")


def denoise(prior, msg):
    """Posterior-moment denoiser g: combines the prior with a Gaussian likelihood.

    Returns the GaussianMsg (E[x | R, sigma], Var[x | R, sigma]).
    """
    _check_msg(msg)
    m, v = denoise_arrays(prior, msg.mean, msg.var)
    if np.ndim(msg.mean) == 0:
        return GaussianMsg(complex(m), float(v))
    return GaussianMsg(m, v)


def gauss_combine(a, b):
    """Precision-weighted combination of two Gaussian messages."""
    am = np.asarray(a.mean, dtype=np.complex128)
    m, v = kernels.gaussian_product(
        am,
        np.broadcast_to(np.asarray(a.var, dtype=np.float64), am.shape),
        np.broadcast_to(np.asarray(b.mean, dtype=np.complex128), am.shape),
        np.broadcast_to(np.asarray(b.var, dtype=np.float64), am.shape),
        VAR_FLOOR,
    )
    if np.ndim(a.mean) == 0 and np.ndim(b.mean) == 0:
        return GaussianMsg(complex(m), float(v))
    return GaussianMsg(m, v)


def ep_extrinsic(belief, cavity):
    """Gaussian division belief/cavity.

    Degenerate divisions (precision difference below the floor) return the
    belief mean with the capped variance 1/VAR_FLOOR.
    """
    bm = np.asarray(belief.mean, dtype=np.complex128)
    m, v = kernels.gaussian_division(
        bm,
        np.broadcast_to(np.asarray(belief.var, dtype=np.float64), bm.shape),
        np.broadcast_to(np.asarray(cavity.mean, dtype=np.complex128), bm.shape),
        np.broadcast_to(np.asarray(cavity.var, dtype=np.float64), bm.shape),
        VAR_FLOOR,
    )
    if np.ndim(belief.mean) == 0 and np.ndim(cavity.mean) == 0:
        return GaussianMsg(complex(m), float(v))
    return GaussianMsg(m, v)


def ep_project_prior(prior, cavity):
    """Gaussian projection of a (possibly discrete) prior for EP-style updates.

    Moment-matches the belief prior*cavity, then divides the cavity back out.
    """
    return ep_extrinsic(denoise(prior, cavity), cavity)
