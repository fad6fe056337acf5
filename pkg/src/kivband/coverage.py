"""Monte Carlo coverage of the bootstrap bands on simulated data."""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from .bootstrap import confidence_band, derive_seed, run_bootstrap
from .dgp import DgpSpec, simulate_iv, structural_coefficients
from .estimator import RegPair, fit_kiv
from .kernels import KernelSpec, kernel_bound


@dataclass(frozen=True)
class Replication:
    index: int
    t_hat: float
    radius_rkhs: float
    radius_sup: float
    sup_error: float
    rkhs_error: float | None
    sup_covered: bool
    rkhs_covered: bool | None
    rkhs_covered_contracted: bool | None


def _rate(hits: list) -> dict:
    R = len(hits)
    p = sum(hits) / R
    return {"rate": p, "se": math.sqrt(p * (1.0 - p) / R), "hits": int(sum(hits)), "reps": R}


def one_replication(
    index: int,
    dgp: DgpSpec,
    kx: KernelSpec,
    kz: KernelSpec,
    reg: RegPair,
    B: int,
    chi: float,
    seed: int,
    contraction: float,
) -> Replication:
    spec = replace(dgp, seed=derive_seed(seed, index, 0))
    data, h0 = simulate_iv(spec)
    fit = fit_kiv(data, kx, kz, reg)
    _, t_hat = run_bootstrap(fit, B=B, chi=chi, seed=derive_seed(seed, index, 1))
    kappa = kernel_bound(kx, data.X)
    band = confidence_band(fit, t_hat, chi, kappa)
    truth = h0(data.X)
    sup_err = float(np.max(np.abs(band.h_hat - truth)))

    rkhs_err = rkhs_cov = rkhs_con = None
    if kx.family == "linear" and dgp.kind == "linear":
        # linear RKHS: ||h_gamma|| = |gamma|, and h_hat = x' X' alpha
        gamma_hat = data.X.T @ fit.alpha
        rkhs_err = float(np.linalg.norm(gamma_hat - structural_coefficients(dgp)))
        rkhs_cov = rkhs_err <= band.radius_rkhs
        rkhs_con = rkhs_err <= (1.0 - contraction) * band.radius_rkhs
    return Replication(
        index=index,
        t_hat=t_hat,
        radius_rkhs=band.radius_rkhs,
        radius_sup=band.radius_sup,
        sup_error=sup_err,
        rkhs_error=rkhs_err,
        sup_covered=band.covers(truth),
        rkhs_covered=rkhs_cov,
        rkhs_covered_contracted=rkhs_con,
    )


def run_coverage(
    dgp: DgpSpec,
    reps: int,
    B: int = 400,
    chi: float = 0.05,
    seed: int = 0,
    lam: float | None = None,
    mu: float | None = None,
    kx: KernelSpec | None = None,
    kz: KernelSpec | None = None,
    threads: int = 1,
) -> dict:
    """Simulate, fit, bootstrap and check coverage ``reps`` times.

    lam and mu default to n^{-1/2}. The RKHS-ball check applies to a linear
    covariate kernel on a linear design; the contracted check shrinks the
    ball by 2/ln(n) towards h_hat (a sharpness probe).
    """
    if reps < 1:
        raise ValueError("reps must be >= 1")
    n = int(dgp.n)
    lam = n**-0.5 if lam is None else lam
    mu = n**-0.5 if mu is None else mu
    reg = RegPair(lam, mu)
    kx = kx or KernelSpec("linear")
    kz = kz or KernelSpec("linear")
    contraction = 2.0 / math.log(n)

    def job(r: int) -> Replication:
        return one_replication(r, dgp, kx, kz, reg, B, chi, seed, contraction)

    if threads <= 1:
        results = [job(r) for r in range(reps)]
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(job, range(reps)))

    out = {
        "reps": reps,
        "n": n,
        "B": B,
        "chi": chi,
        "nominal": 1.0 - chi,
        "lam": lam,
        "mu": mu,
        "seed": seed,
        "kernel_x": str(kx),
        "kernel_z": str(kz),
        "contraction": contraction,
        "sup_coverage": _rate([r.sup_covered for r in results]),
        "mean_t_hat": float(np.mean([r.t_hat for r in results])),
        "mean_radius_sup": float(np.mean([r.radius_sup for r in results])),
    }
    if results[0].rkhs_covered is not None:
        out["rkhs_coverage"] = _rate([r.rkhs_covered for r in results])
        out["rkhs_contracted_coverage"] = _rate([r.rkhs_covered_contracted for r in results])
        out["mean_radius_rkhs"] = float(np.mean([r.radius_rkhs for r in results]))
    else:
        out["rkhs_coverage"] = None
    return out
