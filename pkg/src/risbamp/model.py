"""Synthetic ground truth for the two-hop reflecting-surface link.

Generates the cascaded channels, the reflection phase configuration, the
transmitted frame with its pilot block, and the noisy beamspace observation

    Y = Hr @ Phi @ Hb @ X + W,

with Hb (N x M) the base-station-to-surface channel, Hr (K x N) the
surface-to-users channel, Phi the diagonal unit-modulus phase matrix and
Q = Hr @ Phi the effective second-hop factor. All functions are pure; every
random draw flows through an explicitly seeded generator.
"""

import math
from dataclasses import dataclass, field, replace

import numpy as np

CHANNEL_MODELS = ("bernoulli_gaussian", "geometric")
PRIOR_KINDS = ("gaussian", "qpsk")


@dataclass(frozen=True)
class SystemDims:
    """Scenario sizes.

    M: base-station antennas, K: users, N: surface elements, T: time slots,
    T_p: pilot columns of X, K_p: anchored (known) rows of Hr. K >= N is
    recommended for identifiability of the bilinear second layer.
    """

    M: int
    K: int
    N: int
    T: int
    T_p: int
    K_p: int

    def __post_init__(self):
        for name in ("M", "K", "N", "T"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be positive")
        if not 0 <= self.T_p <= self.T:
            raise ValueError("require 0 <= T_p <= T")
        if not 0 <= self.K_p <= self.K:
            raise ValueError("require 0 <= K_p <= K")


@dataclass(frozen=True)
class GenConfig:
    """Everything needed to draw one scenario deterministically."""

    dims: SystemDims
    N_c: int = 3                  # propagation paths per element
    wavelength: float = 1.0
    spacing: float = 0.5          # element spacing, same units as wavelength
    rho_b: float = 0.25           # nonzero fraction of beamspace Hb
    rho_r: float = 0.25           # nonzero fraction of beamspace Hr
    snr_db: float = 30.0
    seed: int = 0
    channel_model: str = "bernoulli_gaussian"
    prior_kind: str = "gaussian"  # data-column prior of X
    phase_bits: int = 2           # Phi entries drawn from 2**bits phase levels

    def __post_init__(self):
        if self.N_c < 1:
            raise ValueError("N_c must be >= 1")
        for name in ("rho_b", "rho_r"):
            if not 0.0 < getattr(self, name) <= 1.0:
                raise ValueError(f"{name} must lie in (0, 1]")
        if self.spacing <= 0 or self.wavelength <= 0:
            raise ValueError("spacing and wavelength must be positive")
        if self.channel_model not in CHANNEL_MODELS:
            raise ValueError(f"channel_model must be one of {CHANNEL_MODELS}")
        if self.prior_kind not in PRIOR_KINDS:
            raise ValueError(f"prior_kind must be one of {PRIOR_KINDS}")
        if self.phase_bits < 1:
            raise ValueError("phase_bits must be >= 1")


@dataclass
class ChannelSet:
    """Ground-truth channel factors in beamspace plus the unitary transforms."""

    Hb: np.ndarray   # N x M
    Hr: np.ndarray   # K x N
    Phi: np.ndarray  # N x N diagonal, unit modulus
    Q: np.ndarray    # K x N, Hr @ Phi
    F1: np.ndarray   # K x K DFT
    F2: np.ndarray   # M x M DFT


@dataclass
class SignalFrame:
    """Transmitted beamspace frame; the first T_p columns are known pilots."""

    X: np.ndarray            # M x T
    pilot_mask: np.ndarray   # length-T boolean
    prior_kind: str

    @property
    def n_pilots(self):
        return int(self.pilot_mask.sum())

    @property
    def pilots(self):
        return self.X[:, self.pilot_mask]


@dataclass
class Observation:
    """Received beamspace frame, its noise level, and the hidden product."""

    Y: np.ndarray
    noise_var: float
    U_true: np.ndarray  # Hb @ X, kept for diagnostics only


def make_dft(size):
    """Normalized DFT matrix, entries (1/sqrt(size)) * exp(-2j*pi*p*q/size)."""
    if size < 1:
        raise ValueError("DFT size must be >= 1")
    idx = np.arange(size)
    return np.exp(-2j * np.pi * np.outer(idx, idx) / size) / math.sqrt(size)


def steering_vector(phi, n, spacing_over_wavelength):
    """Unit-norm uniform-linear-array response along direction phi."""
    k = 2.0 * np.pi * spacing_over_wavelength * math.sin(phi)
    return np.exp(1j * k * np.arange(n)) / math.sqrt(n)


def _geometric_matrix(n_rows, n_cols, cfg, rng):
    """Multipath matrix, one column per element: sum of N_c scaled steering
    vectors with CN(0,1) gains and uniform angles."""
    ratio = cfg.spacing / cfg.wavelength
    H = np.zeros((n_rows, n_cols), dtype=np.complex128)
    for col in range(n_cols):
        for _ in range(cfg.N_c):
            alpha = (rng.standard_normal() + 1j * rng.standard_normal()) / math.sqrt(2)
            dist = rng.uniform(0.0, 1.0) * cfg.wavelength * 100.0
            phase = np.exp(-2j * np.pi * dist / cfg.wavelength)
            phi = rng.uniform(-np.pi / 2, np.pi / 2)
            H[:, col] += alpha * phase * steering_vector(phi, n_rows, ratio)
    return H


def _sparsify(H, rho, rng):
    """Keep exactly round(rho*size) largest-magnitude entries, zero the rest,
    then rescale to unit average entry power."""
    size = H.size
    keep = max(1, int(round(rho * size)))
    flat = np.abs(H).ravel()
    order = np.argsort(flat)[::-1]
    mask = np.zeros(size, dtype=bool)
    mask[order[:keep]] = True
    out = np.where(mask.reshape(H.shape), H, 0.0)
    power = np.mean(np.abs(out) ** 2)
    return out / math.sqrt(power)


def _bernoulli_gaussian_matrix(shape, rho, rng):
    """Exactly round(rho*size) nonzero entries drawn CN(0, 1/rho)."""
    size = shape[0] * shape[1]
    keep = max(1, int(round(rho * size)))
    idx = rng.choice(size, size=keep, replace=False)
    vals = (rng.standard_normal(keep) + 1j * rng.standard_normal(keep)) * math.sqrt(
        0.5 / rho
    )
    out = np.zeros(size, dtype=np.complex128)
    out[idx] = vals
    return out.reshape(shape)


def _draw_phase_matrix(n, bits, rng):
    levels = 2 ** bits
    phases = np.exp(2j * np.pi * rng.integers(0, levels, size=n) / levels)
    return np.diag(phases)


def gen_channels(cfg, rng=None):
    """Draw a ChannelSet.

    In "geometric" mode the physical channels are built from steering vectors,
    moved to beamspace with the DFT factors, sparsified to the requested
    densities and power-normalized. In "bernoulli_gaussian" mode the beamspace
    matrices are drawn directly from the sparse prior, so estimation priors
    match generation exactly.
    """
    if rng is None:
        rng = np.random.default_rng([cfg.seed, 1])
    d = cfg.dims
    F1 = make_dft(d.K)
    F2 = make_dft(d.M)
    if cfg.channel_model == "geometric":
        Hr_phys = _geometric_matrix(d.K, d.N, cfg, rng)
        Hr = _sparsify(F1.conj().T @ Hr_phys, cfg.rho_r, rng)
        Hb_phys = _geometric_matrix(d.M, d.N, cfg, rng).T  # N x M
        Hb = _sparsify(Hb_phys @ F2.conj().T, cfg.rho_b, rng)
    else:
        Hr = _bernoulli_gaussian_matrix((d.K, d.N), cfg.rho_r, rng)
        Hb = _bernoulli_gaussian_matrix((d.N, d.M), cfg.rho_b, rng)
    Phi = _draw_phase_matrix(d.N, cfg.phase_bits, rng)
    Q = Hr @ Phi
    return ChannelSet(Hb=Hb, Hr=Hr, Phi=Phi, Q=Q, F1=F1, F2=F2)


def pilot_block(M, T_p):
    """Unit-modulus pilot block with full row rank min(M, T_p): scaled rows of
    a DFT matrix of size max(M, T_p)."""
    n = max(M, T_p)
    F = make_dft(n) * math.sqrt(n)
    return np.ascontiguousarray(F[:M, :T_p])


def gen_signal(cfg, rng=None):
    """Draw a SignalFrame: known pilot block followed by data columns from the
    configured prior (unit-power complex Gaussian or QPSK)."""
    if rng is None:
        rng = np.random.default_rng([cfg.seed, 2])
    d = cfg.dims
    if d.T_p > d.T:
        raise ValueError("T_p exceeds T")
    X = np.empty((d.M, d.T), dtype=np.complex128)
    X[:, : d.T_p] = pilot_block(d.M, d.T_p)
    n_data = d.T - d.T_p
    if n_data:
        if cfg.prior_kind == "qpsk":
            bits = rng.integers(0, 2, size=(2, d.M, n_data))
            X[:, d.T_p :] = ((2 * bits[0] - 1) + 1j * (2 * bits[1] - 1)) / math.sqrt(2)
        else:
            X[:, d.T_p :] = (
                rng.standard_normal((d.M, n_data))
                + 1j * rng.standard_normal((d.M, n_data))
            ) / math.sqrt(2)
    mask = np.zeros(d.T, dtype=bool)
    mask[: d.T_p] = True
    return SignalFrame(X=X, pilot_mask=mask, prior_kind=cfg.prior_kind)


def simulate(ch, sig, snr_db, rng=None, noise_floor=1e-12):
    """Push the frame through the cascade and add white noise at the requested
    SNR (measured on the noiseless output). snr_db=inf disables the noise and
    records the floor as the nominal noise level."""
    U = ch.Hb @ sig.X
    A = ch.Q @ U
    K, T = A.shape
    sig_power = float(np.sum(np.abs(A) ** 2)) / (K * T)
    if math.isinf(snr_db):
        return Observation(Y=A.copy(), noise_var=noise_floor, U_true=U)
    if rng is None:
        rng = np.random.default_rng()
    v_w = sig_power / (10.0 ** (snr_db / 10.0))
    W = (rng.standard_normal(A.shape) + 1j * rng.standard_normal(A.shape)) * math.sqrt(
        v_w / 2.0
    )
    return Observation(Y=A + W, noise_var=v_w, U_true=U)


def generate_scenario(cfg):
    """Seed-deterministic end-to-end draw: (ChannelSet, SignalFrame, Observation).

    Channels, signal and noise use disjoint child streams of cfg.seed.
    """
    ch = gen_channels(cfg, np.random.default_rng([cfg.seed, 1]))
    sig = gen_signal(cfg, np.random.default_rng([cfg.seed, 2]))
    obs = simulate(ch, sig, cfg.snr_db, np.random.default_rng([cfg.seed, 3]))
    return ch, sig, obs


def with_overrides(cfg, **kwargs):
    """GenConfig copy with dims-level or top-level fields replaced."""
    dims_fields = {k: v for k, v in kwargs.items() if hasattr(cfg.dims, k)}
    top_fields = {k: v for k, v in kwargs.items() if k not in dims_fields}
    dims = replace(cfg.dims, **dims_fields) if dims_fields else cfg.dims
    return replace(cfg, dims=dims, **top_fields)
