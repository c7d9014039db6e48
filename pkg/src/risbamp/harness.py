"""Experiment orchestration: Monte Carlo trials, NMSE metrics, parameter
sweeps, the two-stage pilot baseline, and CSV/JSON result emission."""

import csv
import dataclasses
import json
import math
import time
from dataclasses import dataclass, field

import numpy as np

from .bamp import (
    BampConfig,
    DivergenceError,
    SideInfo,
    anchor_ambiguity,
    bilinear_pilot_stage,
    EstimateSet,
    run,
)
from .model import GenConfig, SystemDims, generate_scenario, with_overrides
from .priors import BernoulliGaussianPrior, DiscretePrior, GaussianPrior

NMSE_FLOOR_DB = -120.0
SWEEP_AXES = ("snr_db", "T_p", "K_p", "N", "damping")
CSV_HEADER = (
    "sweep_value",
    "mean_nmse_b_db",
    "mean_nmse_r_db",
    "mean_nmse_x_db",
    "divergence_rate",
    "n_trials",
)

# NMSE level reported for diverged trials; excluded from means either way.
DIVERGED_SENTINEL_DB = 0.0


def default_priors(gen):
    """Estimation priors matched to the generator settings."""
    if gen.prior_kind == "qpsk":
        x_prior = DiscretePrior.qpsk()
    else:
        x_prior = GaussianPrior(0.0, 1.0)
    return {
        "x": x_prior,
        "b": BernoulliGaussianPrior(gen.rho_b, 1.0 / gen.rho_b),
        # Q inherits the Hr sparsity pattern since Phi is unit-modulus diagonal
        "q": BernoulliGaussianPrior(gen.rho_r, 1.0 / gen.rho_r),
    }


def _ratio_db(err, ref):
    if ref == 0.0:
        raise ValueError("zero-norm reference matrix")
    if err == 0.0:
        return NMSE_FLOOR_DB
    return max(10.0 * math.log10(err / ref), NMSE_FLOOR_DB)


def nmse(est, ch, sig):
    """(nmse_b, nmse_r, nmse_x) in dB: squared Frobenius error over squared
    Frobenius norm of the truth, floored at -120 dB. Ambiguities must already
    be anchored."""
    eb = float(np.sum(np.abs(est.Hb_hat - ch.Hb) ** 2))
    er = float(np.sum(np.abs(est.Hr_hat - ch.Hr) ** 2))
    ex = float(np.sum(np.abs(est.X_hat - sig.X) ** 2))
    return (
        _ratio_db(eb, float(np.sum(np.abs(ch.Hb) ** 2))),
        _ratio_db(er, float(np.sum(np.abs(ch.Hr) ** 2))),
        _ratio_db(ex, float(np.sum(np.abs(sig.X) ** 2))),
    )


def mse_per_entry(est, ch, sig):
    """Linear-scale per-entry MSE triple: errors divided by KN, NM and MT."""
    K, N = ch.Hr.shape
    M = ch.Hb.shape[1]
    T = sig.X.shape[1]
    return (
        float(np.sum(np.abs(est.Hb_hat - ch.Hb) ** 2)) / (N * M),
        float(np.sum(np.abs(est.Hr_hat - ch.Hr) ** 2)) / (K * N),
        float(np.sum(np.abs(est.X_hat - sig.X) ** 2)) / (M * T),
    )


@dataclass
class ExperimentSpec:
    """One experiment: generator plus engine config, a sweep axis with its
    values, and the Monte Carlo budget."""

    gen: GenConfig
    engine: BampConfig
    sweep_axis: str = "snr_db"
    sweep_values: tuple = (30.0,)
    n_trials: int = 1
    base_seed: int = 0

    def __post_init__(self):
        if self.sweep_axis not in SWEEP_AXES:
            raise ValueError(f"sweep_axis must be one of {SWEEP_AXES}")
        if self.n_trials < 1:
            raise ValueError("n_trials must be >= 1")


@dataclass
class TrialResult:
    nmse_b: float
    nmse_r: float
    nmse_x: float
    iterations: int
    converged: bool
    diverged: bool
    wall_time: float
    seed: int


@dataclass
class SweepPoint:
    sweep_value: float
    mean_nmse_b_db: float
    mean_nmse_r_db: float
    mean_nmse_x_db: float
    median_nmse_b_db: float
    median_nmse_r_db: float
    median_nmse_x_db: float
    divergence_rate: float
    n_trials: int
    trials: list = field(default_factory=list)


@dataclass
class SweepResult:
    axis: str
    points: list = field(default_factory=list)


def _apply_axis(spec, value):
    """GenConfig/BampConfig pair for one sweep point."""
    gen, eng = spec.gen, spec.engine
    if spec.sweep_axis == "snr_db":
        gen = with_overrides(gen, snr_db=float(value))
    elif spec.sweep_axis == "damping":
        eng = dataclasses.replace(eng, damping=float(value))
    else:
        gen = with_overrides(gen, **{spec.sweep_axis: int(value)})
    return gen, eng


def _side_info(ch, sig, dims):
    return SideInfo(phi=ch.Phi, frame=sig, hr_rows=ch.Hr[: dims.K_p, :].copy())


def run_trial(spec, seed, gen=None, eng=None, trace_writer=None):
    """One seeded joint-estimation trial: generate, simulate, run, anchor,
    score. A DivergenceError is absorbed into converged=False/diverged=True
    with sentinel metrics."""
    gen = spec.gen if gen is None else gen
    eng = spec.engine if eng is None else eng
    gen = with_overrides(gen, seed=int(seed))
    ch, sig, obs = generate_scenario(gen)
    side = _side_info(ch, sig, gen.dims)
    t0 = time.perf_counter()
    try:
        est = run(
            obs, side, eng,
            truth=(ch, sig) if trace_writer is not None else None,
            trace_writer=trace_writer,
        )
        est = anchor_ambiguity(est, side.hr_rows, sig)
        nb, nr, nx = nmse(est, ch, sig)
        wall = time.perf_counter() - t0
        return TrialResult(
            nmse_b=nb, nmse_r=nr, nmse_x=nx,
            iterations=est.iterations_used,
            converged=est.converged,
            diverged=False,
            wall_time=wall,
            seed=int(seed),
        )
    except DivergenceError as err:
        wall = time.perf_counter() - t0
        return TrialResult(
            nmse_b=DIVERGED_SENTINEL_DB,
            nmse_r=DIVERGED_SENTINEL_DB,
            nmse_x=DIVERGED_SENTINEL_DB,
            iterations=err.iteration,
            converged=False,
            diverged=True,
            wall_time=wall,
            seed=int(seed),
        )


def baseline_bigamp_ls(obs, side, cfg, priors):
    """Two-stage benchmark: bilinear recovery of both channels over the pilot
    window, then least-squares data detection through the estimated cascade."""
    frame = side.frame
    T_p = frame.n_pilots
    if T_p < 1:
        raise ValueError("the baseline needs at least one pilot column")
    X_p = frame.X[:, :T_p]
    stage1 = bilinear_pilot_stage(
        obs.Y[:, :T_p],
        X_p,
        side.phi,
        priors,
        cfg,
        noise_var=obs.noise_var,
        anchor_rows=side.hr_rows if side.hr_rows.shape[0] else None,
    )
    cascade = stage1.Q_hat @ stage1.Hb_hat  # K x M effective channel
    ls = ls_recover_data(cascade, obs.Y[:, T_p:])
    M, T = frame.X.shape
    X_hat = np.empty((M, T), dtype=np.complex128)
    X_hat[:, :T_p] = X_p
    X_hat[:, T_p:] = ls.X_d
    return EstimateSet(
        Hb_hat=stage1.Hb_hat,
        Q_hat=stage1.Q_hat,
        Hr_hat=stage1.Hr_hat,
        X_hat=X_hat,
        U_hat=stage1.Hb_hat @ X_hat,
        iterations_used=stage1.iterations_used,
        converged=stage1.converged and not ls.underdetermined,
        residual_trace=list(stage1.residual_trace),
    )


@dataclass
class LsResult:
    X_d: np.ndarray
    residual: float
    underdetermined: bool


def ls_recover_data(cascade, Y_d, rcond=1e-10):
    """Pseudo-inverse detection of the data columns through a K x M cascade.

    K < M is flagged underdetermined (min-norm solution); the fit residual is
    reported either way. Singular values below rcond*max are truncated.
    """
    K, M = cascade.shape
    X_d = np.linalg.pinv(cascade, rcond=rcond) @ Y_d
    residual = float(np.linalg.norm(cascade @ X_d - Y_d))
    return LsResult(X_d=X_d, residual=residual, underdetermined=K < M)


def baseline_trial(spec, seed, gen=None, eng=None):
    """Baseline counterpart of run_trial on the bit-identical Observation."""
    gen = spec.gen if gen is None else gen
    eng = spec.engine if eng is None else eng
    gen = with_overrides(gen, seed=int(seed))
    ch, sig, obs = generate_scenario(gen)
    side = _side_info(ch, sig, gen.dims)
    t0 = time.perf_counter()
    try:
        est = baseline_bigamp_ls(obs, side, eng, default_priors(gen))
        nb, nr, nx = nmse(est, ch, sig)
        return TrialResult(
            nmse_b=nb, nmse_r=nr, nmse_x=nx,
            iterations=est.iterations_used,
            converged=est.converged,
            diverged=False,
            wall_time=time.perf_counter() - t0,
            seed=int(seed),
        )
    except DivergenceError as err:
        return TrialResult(
            nmse_b=DIVERGED_SENTINEL_DB,
            nmse_r=DIVERGED_SENTINEL_DB,
            nmse_x=DIVERGED_SENTINEL_DB,
            iterations=err.iteration,
            converged=False,
            diverged=True,
            wall_time=time.perf_counter() - t0,
            seed=int(seed),
        )


def _aggregate(value, trials):
    """Linear-domain means over non-diverged trials, then back to dB."""
    ok = [t for t in trials if not t.diverged]
    div_rate = 1.0 - len(ok) / len(trials)

    def mean_db(vals):
        if not vals:
            return float("nan")
        lin = np.mean([10.0 ** (v / 10.0) for v in vals])
        return float(10.0 * math.log10(max(lin, 10.0 ** (NMSE_FLOOR_DB / 10.0))))

    def median_db(vals):
        return float(np.median(vals)) if vals else float("nan")

    return SweepPoint(
        sweep_value=float(value),
        mean_nmse_b_db=mean_db([t.nmse_b for t in ok]),
        mean_nmse_r_db=mean_db([t.nmse_r for t in ok]),
        mean_nmse_x_db=mean_db([t.nmse_x for t in ok]),
        median_nmse_b_db=median_db([t.nmse_b for t in ok]),
        median_nmse_r_db=median_db([t.nmse_r for t in ok]),
        median_nmse_x_db=median_db([t.nmse_x for t in ok]),
        divergence_rate=div_rate,
        n_trials=len(trials),
        trials=list(trials),
    )


def monte_carlo(spec, trial_fn=run_trial, progress=None):
    """Run n_trials per sweep point with seeds base_seed + global index.

    Trials are deterministic in (spec, seed); aggregation is ordered by seed,
    so the result does not depend on execution order.
    """
    points = []
    for p_idx, value in enumerate(spec.sweep_values):
        gen, eng = _apply_axis(spec, value)
        trials = []
        for t_idx in range(spec.n_trials):
            seed = spec.base_seed + p_idx * spec.n_trials + t_idx
            trials.append(trial_fn(spec, seed, gen=gen, eng=eng))
            if progress is not None:
                progress(value, t_idx)
        trials.sort(key=lambda t: t.seed)
        points.append(_aggregate(value, trials))
    return SweepResult(axis=spec.sweep_axis, points=points)


def spec_to_dict(spec):
    d = dataclasses.asdict(spec)
    d["engine"]["priors"] = {
        tag: {"kind": type(p).__name__, **dataclasses.asdict(p)}
        for tag, p in spec.engine.priors.items()
    }
    return d


def _prior_from_dict(d):
    kind = d.pop("kind")
    cls = {
        "GaussianPrior": GaussianPrior,
        "BernoulliGaussianPrior": BernoulliGaussianPrior,
        "DiscretePrior": DiscretePrior,
    }[kind]
    if cls is DiscretePrior:
        d["points"] = tuple(complex(re, im) for re, im in d["points"])
        d["probs"] = tuple(d["probs"])
    if cls is GaussianPrior and isinstance(d.get("mean"), (list, tuple)):
        d["mean"] = complex(*d["mean"])
    return cls(**d)


def spec_from_dict(d):
    gen_d = dict(d["gen"])
    gen_d["dims"] = SystemDims(**gen_d["dims"])
    eng_d = dict(d["engine"])
    eng_d["priors"] = {
        tag: _prior_from_dict(dict(pd)) for tag, pd in eng_d["priors"].items()
    }
    return ExperimentSpec(
        gen=GenConfig(**gen_d),
        engine=BampConfig(**eng_d),
        sweep_axis=d["sweep_axis"],
        sweep_values=tuple(d["sweep_values"]),
        n_trials=d["n_trials"],
        base_seed=d["base_seed"],
    )


class _ComplexEncoder(json.JSONEncoder):
    def default(self, o):
        if isinstance(o, complex):
            return [o.real, o.imag]
        if isinstance(o, np.floating):
            return float(o)
        if isinstance(o, np.integer):
            return int(o)
        return super().default(o)


def emit(result, out_dir, spec=None, stem="results"):
    """Write the sweep CSV (fixed header, one row per point) and a JSON
    sidecar holding the spec and the per-trial records. Returns both paths."""
    import os

    os.makedirs(out_dir, exist_ok=True)
    csv_path = os.path.join(out_dir, f"{stem}.csv")
    json_path = os.path.join(out_dir, f"{stem}.json")
    try:
        with open(csv_path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(CSV_HEADER)
            for p in result.points:
                w.writerow(
                    [
                        repr(p.sweep_value),
                        repr(p.mean_nmse_b_db),
                        repr(p.mean_nmse_r_db),
                        repr(p.mean_nmse_x_db),
                        repr(p.divergence_rate),
                        p.n_trials,
                    ]
                )
        payload = {
            "axis": result.axis,
            "points": [dataclasses.asdict(p) for p in result.points],
        }
        if spec is not None:
            payload["spec"] = spec_to_dict(spec)
        with open(json_path, "w") as fh:
            json.dump(payload, fh, indent=1, cls=_ComplexEncoder)
    except OSError as err:
        raise OSError(f"failed writing results under {out_dir}: {err}") from err
    return csv_path, json_path


def sweep_result_from_json(path):
    """Rebuild a SweepResult from an emitted sidecar."""
    with open(path) as fh:
        payload = json.load(fh)
    points = []
    for pd in payload["points"]:
        trials = [TrialResult(**td) for td in pd.pop("trials")]
        points.append(SweepPoint(**pd, trials=trials))
    return SweepResult(axis=payload["axis"], points=points)


def time_per_iteration(gen, eng, n_iters=30, repeats=3):
    """Median wall-clock seconds per outer iteration at the given sizes."""
    gen = with_overrides(gen)
    ch, sig, obs = generate_scenario(gen)
    side = _side_info(ch, sig, gen.dims)
    eng = dataclasses.replace(eng, max_iter=n_iters, tol=1e-300)
    times = []
    for _ in range(repeats):
        t0 = time.perf_counter()
        try:
            run(obs, side, eng)
        except DivergenceError:
            pass
        times.append((time.perf_counter() - t0) / n_iters)
    return float(np.median(times))
