"""Quick oracle suite behind the `selftest` CLI subcommand.

Each check recomputes a core quantity through an independent route (grid
quadrature, exact enumeration, closed forms) and compares it with the fast
path. Runs in well under a minute.
"""

import math
from dataclasses import dataclass

import numpy as np

from . import reference
from .bamp import BampConfig, SideInfo, run, svd_transform, utamp_refine_q
from .harness import default_priors, nmse
from .model import (
    GenConfig,
    SystemDims,
    generate_scenario,
    make_dft,
)
from .priors import (
    BernoulliGaussianPrior,
    DiscretePrior,
    GaussianMsg,
    GaussianPrior,
    denoise,
    ep_extrinsic,
    gauss_combine,
)


@dataclass
class CheckResult:
    name: str
    passed: bool
    detail: str


def _check(name, passed, detail=""):
    return CheckResult(name=name, passed=bool(passed), detail=detail)


def check_dft_unitary():
    worst = 0.0
    for n in (1, 2, 8, 17):
        F = make_dft(n)
        worst = max(worst, float(np.max(np.abs(F.conj().T @ F - np.eye(n)))))
    return _check("dft-unitary", worst < 1e-12, f"max deviation {worst:.2e}")


def check_denoisers(n_cases=8, tol=1e-6):
    rng = np.random.default_rng(7)
    priors = (
        GaussianPrior(0.0, 1.0),
        BernoulliGaussianPrior(0.4, 1.5),
        DiscretePrior.qpsk(),
    )
    worst = 0.0
    for prior in priors:
        for _ in range(n_cases):
            R = complex(rng.normal(), rng.normal())
            sig = float(rng.uniform(0.05, 2.0))
            out = denoise(prior, GaussianMsg(R, sig))
            m_ref, v_ref = reference.posterior_moments_quadrature(prior, R, sig)
            worst = max(worst, abs(out.mean - m_ref), abs(out.var - v_ref))
    return _check("denoiser-quadrature", worst < tol, f"max abs error {worst:.2e}")


def check_gaussian_algebra(tol=1e-10):
    rng = np.random.default_rng(11)
    worst = 0.0
    for _ in range(10):
        a = GaussianMsg(complex(rng.normal(), rng.normal()), float(rng.uniform(0.1, 2)))
        b = GaussianMsg(complex(rng.normal(), rng.normal()), float(rng.uniform(0.1, 2)))
        belief = gauss_combine(a, b)
        back = ep_extrinsic(belief, b)
        worst = max(worst, abs(back.mean - a.mean), abs(back.var - a.var))
    return _check("gaussian-roundtrip", worst < tol, f"max abs error {worst:.2e}")


def check_derivative_identity(tol=1e-5):
    rng = np.random.default_rng(13)
    worst = 0.0
    for prior in (GaussianPrior(0.0, 1.0), BernoulliGaussianPrior(0.3, 1.0)):
        for _ in range(6):
            R = complex(rng.normal(), rng.normal())
            sig = float(rng.uniform(0.1, 1.5))

            def g(r, _p=prior, _s=sig):
                return denoise(_p, GaussianMsg(r, _s)).mean

            v = denoise(prior, GaussianMsg(R, sig)).var
            d = reference.wirtinger_derivative(g, R)
            rel = abs(sig * d.real - v) / max(v, 1e-30)
            worst = max(worst, rel)
    return _check("variance-derivative-identity", worst < tol, f"max rel error {worst:.2e}")


def check_unitary_identity(tol=1e-10):
    rng = np.random.default_rng(17)
    U = rng.standard_normal((6, 12)) + 1j * rng.standard_normal((6, 12))
    Y = rng.standard_normal((5, 12)) + 1j * rng.standard_normal((5, 12))
    Q = rng.standard_normal((5, 6)) + 1j * rng.standard_normal((5, 6))
    R, Ut = svd_transform(U, Y)
    lhs = np.linalg.norm(Y - Q @ U)
    rhs = np.linalg.norm(R - Q @ Ut)
    return _check(
        "svd-residual-identity", abs(lhs - rhs) < tol, f"|lhs-rhs| {abs(lhs - rhs):.2e}"
    )


def check_inner_solver_ls(tol=1e-6):
    rng = np.random.default_rng(19)
    K, N, T = 4, 3, 8
    U = rng.standard_normal((N, T)) + 1j * rng.standard_normal((N, T))
    Q = rng.standard_normal((K, N)) + 1j * rng.standard_normal((K, N))
    Y = Q @ U
    q_hat, _ = utamp_refine_q(
        U, np.zeros((N, T)), Y, 1e-12, GaussianPrior(0.0, 1e9), 60
    )
    q_ls = Y @ np.linalg.pinv(U)
    err = float(np.max(np.abs(q_hat - q_ls)))
    return _check("inner-solver-vs-pinv", err < tol, f"max abs error {err:.2e}")


def check_noiseless_recovery():
    dims = SystemDims(M=2, K=4, N=2, T=8, T_p=4, K_p=2)
    gen = GenConfig(dims=dims, snr_db=math.inf, seed=3, rho_b=1.0, rho_r=1.0)
    ch, sig, obs = generate_scenario(gen)
    side = SideInfo(phi=ch.Phi, frame=sig, hr_rows=ch.Hr[: dims.K_p, :].copy())
    priors = default_priors(gen)
    cfg = BampConfig(scheme="bamp", damping=0.5, max_iter=200, tol=1e-14, priors=priors)
    est = run(obs, side, cfg)
    nb, nr, nx = nmse(est, ch, sig)
    ok = max(nb, nr, nx) <= -40.0
    return _check(
        "noiseless-recovery",
        ok,
        f"nmse b/r/x = {nb:.1f}/{nr:.1f}/{nx:.1f} dB in {est.iterations_used} iters",
    )


ALL_CHECKS = (
    check_dft_unitary,
    check_denoisers,
    check_gaussian_algebra,
    check_derivative_identity,
    check_unitary_identity,
    check_inner_solver_ls,
    check_noiseless_recovery,
)


def run_selftest(out=print):
    results = []
    for fn in ALL_CHECKS:
        res = fn()
        results.append(res)
        status = "PASS" if res.passed else "FAIL"
        out(f"[{status}] {res.name}: {res.detail}")
    return results
