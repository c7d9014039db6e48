"""Bidirectional two-layer approximate message passing engine.

One outer iteration is a backward sweep (observation -> second-layer
extrinsics -> first-layer extrinsics) followed by a forward sweep (variable
denoising -> Onsager-corrected plug-in recursions). The "butamp" scheme adds
an inner SVD-transformed solver that refines the second-hop factor Q each
iteration. Pilot entries of X and anchored rows of Q are clamped to their
known values after every update.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .model import SignalFrame, SystemDims
from .priors import (
    BernoulliGaussianPrior,
    DiscretePrior,
    GaussianPrior,
    VAR_FLOOR,
    denoise_arrays,
)

SCHEMES = ("bamp", "butamp")


class DivergenceError(RuntimeError):
    """Raised when the state goes non-finite or the residual explodes."""

    def __init__(self, iteration, residual_trace):
        self.iteration = iteration
        self.residual_trace = list(residual_trace)
        super().__init__(
            f"estimator diverged at iteration {iteration} "
            f"(last residual {residual_trace[-1] if residual_trace else 'n/a'})"
        )


@dataclass
class BampConfig:
    scheme: str = "bamp"
    damping: float = 0.3
    max_iter: int = 200
    tol: float = 1e-8
    var_floor: float = VAR_FLOOR
    inner_iters: int = 5           # inner solver rounds per outer iteration
    priors: dict = field(default_factory=dict)  # tags "x", "b", "q"
    residual_cap: float = 1e6      # divergence threshold on the stop metric

    def __post_init__(self):
        if self.scheme not in SCHEMES:
            raise ValueError(f"scheme must be one of {SCHEMES}")
        if not 0.0 < self.damping <= 1.0:
            raise ValueError("damping must lie in (0, 1]")
        if self.max_iter < 1:
            raise ValueError("max_iter must be >= 1")
        if not self.tol > 0:
            raise ValueError("tol must be positive")


@dataclass
class SideInfo:
    """Receiver-side knowledge: phase matrix, pilot frame, anchored Hr rows."""

    phi: np.ndarray            # N x N diagonal, unit modulus
    frame: SignalFrame         # pilots live in the first T_p columns
    hr_rows: np.ndarray        # K_p x N known rows of Hr (may be empty)


@dataclass
class LayerState:
    """All per-iteration fields of the two-layer message passing recursion."""

    x_mean: np.ndarray
    x_var: np.ndarray
    b_mean: np.ndarray
    b_var: np.ndarray
    u_mean: np.ndarray
    u_var: np.ndarray
    q_mean: np.ndarray
    q_var: np.ndarray
    Z1: np.ndarray
    V1: np.ndarray
    Z2: np.ndarray
    V2: np.ndarray
    Zbar1: np.ndarray
    Vbar1: np.ndarray
    Zbar2: np.ndarray
    Vbar2: np.ndarray
    s1: np.ndarray
    vs1: np.ndarray
    s2: np.ndarray
    vs2: np.ndarray
    zt1: np.ndarray
    vt1: np.ndarray
    zt2: np.ndarray
    vt2: np.ndarray
    Sx: np.ndarray
    Rx: np.ndarray
    Sb: np.ndarray
    Rb: np.ndarray
    Su: np.ndarray
    Ru: np.ndarray
    Sq: np.ndarray
    Rq: np.ndarray
    pilot_values: np.ndarray   # M x T_p
    anchor_values: np.ndarray  # K_p x N rows of Q
    hx_prev: np.ndarray

    @property
    def n_pilots(self):
        return self.pilot_values.shape[1]

    @property
    def n_anchors(self):
        return self.anchor_values.shape[0]


@dataclass
class EstimateSet:
    """Converged estimates plus run metadata."""

    Hb_hat: np.ndarray
    Q_hat: np.ndarray
    Hr_hat: np.ndarray
    X_hat: np.ndarray
    U_hat: np.ndarray
    iterations_used: int
    converged: bool
    residual_trace: list


def _clamp_pilots(state, floor):
    tp = state.n_pilots
    if tp:
        state.x_mean[:, :tp] = state.pilot_values
        state.x_var[:, :tp] = floor


def _clamp_anchors(state, floor):
    kp = state.n_anchors
    if kp:
        state.q_mean[:kp, :] = state.anchor_values
        state.q_var[:kp, :] = floor


def init_state(dims, cfg, side):
    """Fresh LayerState: zero means and unit variances everywhere, with pilot
    entries of X and anchored rows of Q clamped to their known values, plug-in
    (Z, V) set to the implied product moments, s = 0 and vs = 1."""
    M, K, N, T = dims.M, dims.K, dims.N, dims.T
    frame = side.frame
    if frame.X.shape != (M, T):
        raise ValueError("pilot frame shape disagrees with dims")
    if side.hr_rows.shape[0] != dims.K_p or (
        dims.K_p and side.hr_rows.shape[1] != N
    ):
        raise ValueError("anchor block shape disagrees with dims")
    if side.phi.shape != (N, N):
        raise ValueError("phase matrix shape disagrees with dims")
    fl = cfg.var_floor
    cpx = np.complex128
    st = LayerState(
        x_mean=np.zeros((M, T), cpx),
        x_var=np.ones((M, T)),
        b_mean=np.zeros((N, M), cpx),
        b_var=np.ones((N, M)),
        u_mean=np.zeros((N, T), cpx),
        u_var=np.ones((N, T)),
        q_mean=np.zeros((K, N), cpx),
        q_var=np.ones((K, N)),
        Z1=np.zeros((N, T), cpx),
        V1=np.ones((N, T)),
        Z2=np.zeros((K, T), cpx),
        V2=np.ones((K, T)),
        Zbar1=np.zeros((N, T), cpx),
        Vbar1=np.zeros((N, T)),
        Zbar2=np.zeros((K, T), cpx),
        Vbar2=np.zeros((K, T)),
        s1=np.zeros((N, T), cpx),
        vs1=np.ones((N, T)),
        s2=np.zeros((K, T), cpx),
        vs2=np.ones((K, T)),
        zt1=np.zeros((N, T), cpx),
        vt1=np.ones((N, T)),
        zt2=np.zeros((K, T), cpx),
        vt2=np.ones((K, T)),
        Sx=np.ones((M, T)),
        Rx=np.zeros((M, T), cpx),
        Sb=np.ones((N, M)),
        Rb=np.zeros((N, M), cpx),
        Su=np.ones((N, T)),
        Ru=np.zeros((N, T), cpx),
        Sq=np.ones((K, N)),
        Rq=np.zeros((K, N), cpx),
        pilot_values=frame.X[:, : dims.T_p].copy(),
        anchor_values=np.asarray(side.hr_rows, dtype=cpx) @ side.phi,
        hx_prev=np.zeros((N, T), cpx),
    )
    _clamp_pilots(st, fl)
    _clamp_anchors(st, fl)
    _refresh_plugins(st, cfg)
    # U carries no prior of its own; its opening message is the layer-1
    # plug-in, so an all-ones variance would understate the product scale
    # by a factor of M and destabilize the first sweeps.
    st.u_var = st.V1.copy()
    st.u_mean = st.Z1.copy()
    au2 = np.abs(st.u_mean) ** 2
    aq2 = np.abs(st.q_mean) ** 2
    st.Zbar2 = st.q_mean @ st.u_mean
    st.Vbar2 = st.q_var @ au2 + aq2 @ st.u_var
    st.V2 = np.maximum(st.Vbar2 + st.q_var @ st.u_var, fl)
    st.Z2 = st.Zbar2.copy()
    return st


def _refresh_plugins(state, cfg):
    """Plug-in products and variances from the current posterior fields,
    without Onsager shifts (used only at initialization)."""
    ax2 = np.abs(state.x_mean) ** 2
    ab2 = np.abs(state.b_mean) ** 2
    state.Zbar1 = state.b_mean @ state.x_mean
    state.Vbar1 = state.b_var @ ax2 + ab2 @ state.x_var
    state.V1 = np.maximum(state.Vbar1 + state.b_var @ state.x_var, cfg.var_floor)
    state.Z1 = state.Zbar1.copy()
    au2 = np.abs(state.u_mean) ** 2
    aq2 = np.abs(state.q_mean) ** 2
    state.Zbar2 = state.q_mean @ state.u_mean
    state.Vbar2 = state.q_var @ au2 + aq2 @ state.u_var
    state.V2 = np.maximum(state.Vbar2 + state.q_var @ state.u_var, cfg.var_floor)
    state.Z2 = state.Zbar2.copy()


def output_posterior(state, Y, v_w, cfg):
    """Combine the layer-2 plug-in density with the AWGN likelihood at Y."""
    state.zt2, state.vt2 = kernels.observe(
        state.Z2, state.V2, Y, max(v_w, cfg.var_floor), cfg.var_floor
    )
    return state.zt2, state.vt2


def residual_update(state, layer, cfg, damp=True):
    """Scaled residual and its variance for one layer; the variance iterate is
    damped against its previous value when requested."""
    fl = cfg.var_floor
    if layer == 2:
        s, vs = kernels.residual_step(state.zt2, state.vt2, state.Z2, state.V2, fl)
        if damp:
            vs = kernels.damp(state.vs2, vs, cfg.damping)
        state.s2, state.vs2 = s, vs
    elif layer == 1:
        s, vs = kernels.residual_step(state.zt1, state.vt1, state.Z1, state.V1, fl)
        if damp:
            vs = kernels.damp(state.vs1, vs, cfg.damping)
        state.s1, state.vs1 = s, vs
    else:
        raise ValueError("layer must be 1 or 2")
    return s, vs


def extrinsic_stats(state, target, cfg):
    """(Sigma, R) extrinsic pair for one variable family.

    Precisions use only the |mean|^2 * vs sums. The means carry the
    Onsager-style correction mean*(1 - Sigma * sum(var * vs)) plus the
    matched-filter term; the residual-fluctuation terms var*|s|^2 are dropped
    uniformly for all four families (they vanish in the large-system limit
    and their sample fluctuations destabilize small systems).
    """
    fl = cfg.var_floor
    if target == "u":
        aq2 = np.abs(state.q_mean) ** 2
        prec = aq2.T @ state.vs2
        sig = kernels.invert_precision(prec, fl)
        corr = -(state.q_var.T @ state.vs2)
        matched = state.q_mean.conj().T @ state.s2
        R = kernels.extrinsic_mean(state.u_mean, sig, corr, matched)
        state.Su, state.Ru = sig, R
    elif target == "q":
        au2 = np.abs(state.u_mean) ** 2
        prec = state.vs2 @ au2.T
        sig = kernels.invert_precision(prec, fl)
        corr = -(state.vs2 @ state.u_var.T)
        matched = state.s2 @ state.u_mean.conj().T
        R = kernels.extrinsic_mean(state.q_mean, sig, corr, matched)
        state.Sq, state.Rq = sig, R
    elif target == "x":
        ab2 = np.abs(state.b_mean) ** 2
        prec = ab2.T @ state.vs1
        sig = kernels.invert_precision(prec, fl)
        corr = -(state.b_var.T @ state.vs1)
        matched = state.b_mean.conj().T @ state.s1
        R = kernels.extrinsic_mean(state.x_mean, sig, corr, matched)
        state.Sx, state.Rx = sig, R
    elif target == "b":
        ax2 = np.abs(state.x_mean) ** 2
        prec = state.vs1 @ ax2.T
        sig = kernels.invert_precision(prec, fl)
        corr = -(state.vs1 @ state.x_var.T)
        matched = state.s1 @ state.x_mean.conj().T
        R = kernels.extrinsic_mean(state.b_mean, sig, corr, matched)
        state.Sb, state.Rb = sig, R
    else:
        raise ValueError("target must be one of x, b, u, q")
    return sig, R


def interlayer_combine(state, cfg):
    """Gaussian combine of the layer-1 plug-in density with the extrinsic
    message that the second layer produced for U."""
    state.zt1, state.vt1 = kernels.gaussian_product(
        state.Z1, state.V1, state.Ru, state.Su, cfg.var_floor
    )
    return state.zt1, state.vt1


def backward_sweep(state, Y, v_w, cfg):
    """Observation -> layer-2 residual -> (u, q) extrinsics -> layer-1
    residual -> (x, b) extrinsics."""
    output_posterior(state, Y, v_w, cfg)
    residual_update(state, 2, cfg)
    extrinsic_stats(state, "u", cfg)
    extrinsic_stats(state, "q", cfg)
    interlayer_combine(state, cfg)
    residual_update(state, 1, cfg)
    extrinsic_stats(state, "x", cfg)
    extrinsic_stats(state, "b", cfg)


def forward_update(state, cfg, Y=None, v_w=None):
    """Denoise all variables and rebuild the Onsager-corrected plug-ins.

    The U update combines the layer-1 output message N(Z1, V1), which acts as
    its prior, with the extrinsic (Ru, Su) from the second layer. Under the
    "butamp" scheme the plain q denoise is replaced by the SVD-transformed
    inner solver (requires Y and v_w).
    """
    fl = cfg.var_floor
    state.x_mean, state.x_var = denoise_arrays(
        cfg.priors["x"], state.Rx, state.Sx, fl
    )
    _clamp_pilots(state, fl)
    state.b_mean, state.b_var = denoise_arrays(
        cfg.priors["b"], state.Rb, state.Sb, fl
    )

    ax2 = np.abs(state.x_mean) ** 2
    ab2 = np.abs(state.b_mean) ** 2
    state.Zbar1 = state.b_mean @ state.x_mean
    state.Vbar1 = state.b_var @ ax2 + ab2 @ state.x_var
    V1_new = np.maximum(state.Vbar1 + state.b_var @ state.x_var, fl)
    state.V1 = kernels.damp(state.V1, V1_new, cfg.damping)
    state.Z1 = state.Zbar1 - state.s1 * state.Vbar1

    state.u_mean, state.u_var = kernels.gaussian_product(
        state.Z1, state.V1, state.Ru, state.Su, fl
    )

    if cfg.scheme == "butamp":
        if Y is None or v_w is None:
            raise ValueError("butamp forward update needs Y and v_w")
        state.q_mean, state.q_var = utamp_refine_q(
            state.u_mean,
            state.u_var,
            Y,
            v_w,
            cfg.priors["q"],
            cfg.inner_iters,
            floor=fl,
            q_init=state.q_mean,
            v_init=state.q_var,
        )
    else:
        state.q_mean, state.q_var = denoise_arrays(
            cfg.priors["q"], state.Rq, state.Sq, fl
        )
    _clamp_anchors(state, fl)

    au2 = np.abs(state.u_mean) ** 2
    aq2 = np.abs(state.q_mean) ** 2
    state.Zbar2 = state.q_mean @ state.u_mean
    state.Vbar2 = state.q_var @ au2 + aq2 @ state.u_var
    V2_new = np.maximum(state.Vbar2 + state.q_var @ state.u_var, fl)
    state.V2 = kernels.damp(state.V2, V2_new, cfg.damping)
    state.Z2 = state.Zbar2 - state.s2 * state.Vbar2


def apply_damping(state, beta, prev):
    """Mix the vs and V fields of ``state`` against those stored in ``prev``
    (a dict with keys vs1, vs2, V1, V2); beta = 1 leaves the state unchanged."""
    state.vs1 = kernels.damp(prev["vs1"], state.vs1, beta)
    state.vs2 = kernels.damp(prev["vs2"], state.vs2, beta)
    state.V1 = kernels.damp(prev["V1"], state.V1, beta)
    state.V2 = kernels.damp(prev["V2"], state.V2, beta)
    return state


def prior_second_moment(prior):
    """E|x|^2 under a prior spec."""
    if isinstance(prior, GaussianPrior):
        return prior.var + abs(prior.mean) ** 2
    if isinstance(prior, BernoulliGaussianPrior):
        return prior.density * prior.var
    if isinstance(prior, DiscretePrior):
        return float(
            sum(p * abs(a) ** 2 for a, p in zip(prior.points, prior.probs))
        )
    raise TypeError(f"unsupported prior {type(prior).__name__}")


def svd_transform(U_hat, Y):
    """Full-unitary right transform of the second-layer model.

    Returns (R, Utilde) with R = Y Vh^H and Utilde = Us*Lambda padded to the
    shape of U_hat, so that ||Y - Q U_hat||_F == ||R - Q Utilde||_F for any Q.
    """
    if not np.all(np.isfinite(U_hat)):
        raise ValueError("non-finite input to SVD")
    N, T = U_hat.shape
    Us, sv, Vh = np.linalg.svd(U_hat, full_matrices=True)
    R = Y @ Vh.conj().T
    Ut = np.zeros((N, T), dtype=np.complex128)
    r = sv.shape[0]
    Ut[:, :r] = Us[:, :r] * sv
    return R, Ut


def utamp_refine_q(U_hat, v_u, Y, v_w, prior_q, L_in, floor=VAR_FLOOR,
                   q_init=None, v_init=None):
    """Refine Q through the SVD-transformed linear model.

    With U_hat = Us L Vh, each receiver row solves r_k = (Us L)^T q_k + noise
    after right-multiplying Y by Vh^H. The residual uncertainty of U inflates
    the effective noise level. Returns posterior (q_mean, q_var), K x N.
    """
    if not np.all(np.isfinite(U_hat)):
        raise ValueError("non-finite input to SVD")
    K = Y.shape[0]
    N = U_hat.shape[0]
    Us, sv, Vh = np.linalg.svd(U_hat, full_matrices=False)
    r = sv.shape[0]
    Yt = (Y @ Vh.conj().T).T                     # r x K transformed observations
    A = (Us * sv).T                              # r x N transformed matrix
    phi2 = sv ** 2
    v_eff = max(
        v_w + prior_second_moment(prior_q) * float(np.mean(np.sum(v_u, axis=0))),
        floor,
    )
    if q_init is None:
        Xh = np.zeros((N, K), dtype=np.complex128)
        vbar = np.full(K, prior_second_moment(prior_q))
    else:
        Xh = np.asarray(q_init, dtype=np.complex128).T.copy()
        vbar = np.asarray(v_init).mean(axis=1)
    vbar = np.maximum(vbar, floor)
    srs = np.zeros((r, K), dtype=np.complex128)
    Vq = np.broadcast_to(vbar, (N, K)).copy()
    for _ in range(L_in):
        tau_p = phi2[:, None] * vbar[None, :]
        P = A @ Xh - tau_p * srs
        tau_s = 1.0 / (tau_p + v_eff)
        srs = tau_s * (Yt - P)
        tau_q = N / np.maximum(phi2 @ tau_s, 1.0 / (N / floor))
        Rq = Xh + tau_q[None, :] * (A.conj().T @ srs)
        Xh, Vq = denoise_arrays(
            prior_q, Rq, np.broadcast_to(tau_q, (N, K)), floor
        )
        vbar = np.maximum(Vq.mean(axis=0), floor)
    return Xh.T.copy(), Vq.T.copy()


def _rel_change_sq(new, prev):
    num = float(np.sum(np.abs(new - prev) ** 2))
    den = float(np.sum(np.abs(new) ** 2))
    return num / max(den, 1e-300)


def _state_is_finite(state):
    for a in (state.x_mean, state.b_mean, state.u_mean, state.q_mean,
              state.Z1, state.Z2, state.V1, state.V2):
        if not np.all(np.isfinite(a)):
            return False
    return True


def _nmse_db(est, truth, floor_db=-120.0):
    err = float(np.sum(np.abs(est - truth) ** 2))
    ref = float(np.sum(np.abs(truth) ** 2))
    if ref == 0.0:
        raise ValueError("zero-norm reference")
    if err == 0.0:
        return floor_db
    return max(10.0 * math.log10(err / ref), floor_db)


def run(obs, side, cfg, truth=None, trace_writer=None, iteration_hook=None):
    """Alternate backward and forward sweeps until the relative squared change
    of Hb_hat @ X_hat drops to cfg.tol or cfg.max_iter is reached.

    A single-iteration stop never counts as converged: the first residual
    measures distance from the zero initialization, not stability. Raises
    DivergenceError on non-finite state or residual beyond cfg.residual_cap.
    ``truth`` (ChannelSet, SignalFrame) enables the per-iteration trace rows;
    ``iteration_hook(state, iteration)`` is called after every forward sweep.
    """
    Y = obs.Y
    K, T = Y.shape
    N = side.phi.shape[0]
    M = side.frame.X.shape[0]
    dims = SystemDims(
        M=M, K=K, N=N, T=T, T_p=side.frame.n_pilots, K_p=side.hr_rows.shape[0]
    )
    v_w = max(obs.noise_var, cfg.var_floor)
    state = init_state(dims, cfg, side)
    qu_prev = np.zeros((K, T), dtype=np.complex128)
    residuals = []
    converged = False
    it = 0
    for it in range(1, cfg.max_iter + 1):
        backward_sweep(state, Y, v_w, cfg)
        forward_update(state, cfg, Y=Y, v_w=v_w)
        if iteration_hook is not None:
            iteration_hook(state, it)
        hx = state.b_mean @ state.x_mean
        res = _rel_change_sq(hx, state.hx_prev)
        residuals.append(res)
        if trace_writer is not None and truth is not None:
            ch, sig = truth
            qu = state.q_mean @ state.u_mean
            row_common = (
                _nmse_db(state.x_mean, sig.X),
                _nmse_db(state.b_mean, ch.Hb),
                _nmse_db(state.q_mean @ side.phi.conj().T, ch.Hr),
            )
            trace_writer.writerow((it, 1, repr(res)) + tuple(map(repr, row_common)))
            trace_writer.writerow(
                (it, 2, repr(_rel_change_sq(qu, qu_prev)))
                + tuple(map(repr, row_common))
            )
            qu_prev = qu
        if not math.isfinite(res) or res > cfg.residual_cap or not _state_is_finite(state):
            raise DivergenceError(it, residuals)
        if res <= cfg.tol:
            converged = it >= 2
            break
        state.hx_prev = hx
    return EstimateSet(
        Hb_hat=state.b_mean.copy(),
        Q_hat=state.q_mean.copy(),
        Hr_hat=state.q_mean @ side.phi.conj().T,
        X_hat=state.x_mean.copy(),
        U_hat=state.u_mean.copy(),
        iterations_used=it,
        converged=converged,
        residual_trace=residuals,
    )


def _diag_scale_fit(est_block, known_block, tiny=1e-30):
    """Per-column least-squares scales c with est*c ~= known; columns without
    usable energy on either side keep scale 1."""
    num = np.sum(est_block.conj() * known_block, axis=0)
    den = np.sum(np.abs(est_block) ** 2, axis=0)
    known_energy = np.sum(np.abs(known_block) ** 2, axis=0)
    usable = (den > tiny) & (known_energy > tiny)
    c = np.ones(est_block.shape[1], dtype=np.complex128)
    c[usable] = num[usable] / den[usable]
    return c


def anchor_ambiguity(est, known_rows, frame):
    """Resolve the two diagonal ambiguities of the trilinear factorization.

    The anchored rows of Hr fix the per-column scaling between Q and U; the
    pilot columns of X fix the per-row scaling between X and Hb. Alignment is
    least squares over all anchored entries (never per-entry division) and is
    idempotent on already-aligned estimates.
    """
    known_rows = np.asarray(known_rows)
    kp = known_rows.shape[0]
    if kp < 1 or frame.n_pilots < 1:
        raise ValueError("anchoring needs at least one known row and one pilot")
    if not np.any(np.abs(known_rows) > 0):
        raise ValueError("degenerate anchor block: all known rows are zero")
    c = _diag_scale_fit(est.Hr_hat[:kp, :], known_rows)
    Hr = est.Hr_hat * c[None, :]
    Q = est.Q_hat * c[None, :]
    U = est.U_hat / c[:, None]

    pilots = frame.X[:, frame.pilot_mask]
    d = _diag_scale_fit(est.X_hat[:, frame.pilot_mask].T, pilots.T)
    X = est.X_hat * d[:, None]
    Hb = est.Hb_hat / d[None, :]
    return EstimateSet(
        Hb_hat=Hb,
        Q_hat=Q,
        Hr_hat=Hr,
        X_hat=X,
        U_hat=U,
        iterations_used=est.iterations_used,
        converged=est.converged,
        residual_trace=list(est.residual_trace),
    )


def bilinear_pilot_stage(Y_win, X_p, phi, priors, cfg, noise_var=None,
                         anchor_rows=None, hr_col0=None):
    """Two-layer run over the pilot window with X fixed, reducing the first
    layer to a linear model in Hb.

    Estimates Hb and the Q rows covered by Y_win. With anchor_rows given the
    diagonal ambiguity is resolved by least-squares row alignment; otherwise a
    known first column of the Hr window fixes a single global scale. A window
    narrower than M (T_p < M) leaves the first layer underdetermined and the
    result is flagged converged=False.
    """
    from .model import Observation  # local import to avoid a cycle at load

    K_w, T_p = Y_win.shape
    M = X_p.shape[0]
    if X_p.shape[1] != T_p:
        raise ValueError("pilot block width disagrees with the observation window")
    mask = np.ones(T_p, dtype=bool)
    frame = SignalFrame(X=X_p.copy(), pilot_mask=mask, prior_kind="gaussian")
    anchors = (
        np.asarray(anchor_rows)
        if anchor_rows is not None
        else np.zeros((0, phi.shape[0]), dtype=np.complex128)
    )
    side = SideInfo(phi=phi, frame=frame, hr_rows=anchors)
    stage_priors = dict(priors)
    stage_priors.setdefault("x", GaussianPrior())
    pilot_cfg = BampConfig(
        scheme=cfg.scheme,
        damping=cfg.damping,
        max_iter=cfg.max_iter,
        tol=cfg.tol,
        var_floor=cfg.var_floor,
        inner_iters=cfg.inner_iters,
        priors=stage_priors,
        residual_cap=cfg.residual_cap,
    )
    obs = Observation(
        Y=Y_win,
        noise_var=cfg.var_floor if noise_var is None else noise_var,
        U_true=None,
    )
    est = run(obs, side, pilot_cfg)
    if T_p < M:
        est.converged = False
    if anchors.shape[0]:
        est = anchor_ambiguity(est, anchors, frame)
    elif hr_col0 is not None:
        col = est.Hr_hat[:, 0]
        den = float(np.sum(np.abs(col) ** 2))
        ref = float(np.sum(np.abs(np.asarray(hr_col0)) ** 2))
        if den > 1e-30 and ref > 1e-30:
            c = complex(np.sum(col.conj() * np.asarray(hr_col0)) / den)
            est.Hr_hat = est.Hr_hat * c
            est.Q_hat = est.Q_hat * c
            est.U_hat = est.U_hat / c
    return est
