"""Gating acceptance criteria, one test per criterion.

Each test prints a single PASS/FAIL line (also collected in the terminal
summary) with the measured quantity next to its tolerance.
"""

import math
import time

import numpy as np
import pytest

from conftest import random_linear_data
from oracles import bootstrap_terms, explicit_m, explicit_T_spectrum, features
from kivband import Dataset, KernelSpec, RegPair, fit_kiv
from kivband import cli
from kivband.bootstrap import (
    bootstrap_coefficients,
    bootstrap_draw,
    bootstrap_reference,
    draw_multipliers,
    draw_stream,
)
from kivband.coverage import run_coverage
from kivband.dgp import DgpSpec
from kivband.diagnostics import (
    RegimeParams,
    check_regime,
    effective_dim_tilde,
    effective_dim_z,
    t_operator_eigs,
)
from kivband.estimator import fit_krr, predict, regularized_2sls
from kivband.io import write_dataset
from kivband.kernels import gram_matrix

pytestmark = pytest.mark.acceptance

LIN = KernelSpec("linear")
POLY = KernelSpec("polynomial", degree=2, offset=1.0)


def rel_err(a, b):
    return float(np.max(np.abs(np.asarray(a) - np.asarray(b))) / np.max(np.abs(b)))


def test_linear_kernels_reduce_to_2sls(verdict):
    start = time.perf_counter()
    worst = 0.0
    for seed in range(25):
        rng = np.random.default_rng(1000 + seed)
        data = random_linear_data(rng, n=50, p=3, q=4)
        fit = fit_kiv(data, LIN, LIN, RegPair(0.1, 0.1))
        gamma = regularized_2sls(data.Z, data.X, data.Y, 0.1, 0.1)
        pts = np.vstack([data.X, rng.standard_normal((10, 3))])
        worst = max(worst, rel_err(predict(fit, pts), pts @ gamma))
    elapsed = time.perf_counter() - start
    verdict(
        "[1] 2SLS reduction",
        worst <= 1e-8 and elapsed < 5.0,
        f"max rel err {worst:.2e} (tol 1e-8) over 25 instances in {elapsed:.2f}s (limit 5s)",
    )


def test_polynomial_primal_dual_agreement(verdict):
    from oracles import primal_weights

    rng = np.random.default_rng(2)
    data = random_linear_data(rng, n=30, p=2, q=2)
    fit = fit_kiv(data, POLY, POLY, RegPair(0.1, 0.05))
    w = primal_weights(features(data.X, POLY), features(data.Z, POLY), data.Y, 0.1, 0.05)
    pts = np.vstack([data.X, rng.standard_normal((20, 2))])
    err = rel_err(predict(fit, pts), features(pts, POLY) @ w)
    verdict("[2] polynomial primal-dual agreement", err <= 1e-8, f"max rel err {err:.2e} (tol 1e-8)")


def test_krr_limit(verdict):
    rng = np.random.default_rng(3)
    X = rng.standard_normal((5, 5))
    assert np.linalg.matrix_rank(X) == 5
    Y = rng.standard_normal(5)
    fit = fit_kiv(Dataset(X, X, Y), LIN, LIN, RegPair(0.1, 1e-10))
    pts = np.vstack([X, rng.standard_normal((5, 5))])
    krr = gram_matrix(LIN, pts, X) @ fit_krr(X, Y, LIN, 0.1)
    err = float(np.max(np.abs(predict(fit, pts) - krr)))
    verdict("[3] KRR reduction", err <= 1e-6, f"max abs err {err:.2e} (tol 1e-6)")


def test_bootstrap_closed_form(verdict):
    rng = np.random.default_rng(4)
    data = random_linear_data(rng, n=20, p=2, q=2)
    fit = fit_kiv(data, POLY, POLY, RegPair(0.1, 0.05))
    h = rng.standard_normal((20, 20))
    pts = rng.standard_normal((10, 2))
    A, B, C = bootstrap_terms(features(data.X, POLY), features(data.Z, POLY), fit.resid, h, 0.1, 0.05)
    err = rel_err(bootstrap_reference(fit, h, pts), features(pts, POLY) @ (A + B - C))
    verdict("[4] bootstrap closed-form equivalence", err <= 1e-8, f"max rel err {err:.2e} (tol 1e-8)")


def test_multiplier_law(verdict):
    n, R = 5, 100_000
    Q = np.empty((R, n))
    worst_sum = 0.0
    for b in range(R):
        q = draw_multipliers(n, draw_stream(55, b))
        worst_sum = max(worst_sum, abs(q.sum()) / np.linalg.norm(q))
        Q[b] = q
    cov_err = float(np.max(np.abs(np.cov(Q.T, bias=True) - (np.eye(n) - 1 / n))))
    verdict(
        "[5] multiplier law",
        cov_err <= 0.02 and worst_sum <= 1e-12,
        f"cov err {cov_err:.4f} (tol 0.02), max |sum|/norm {worst_sum:.1e} (tol 1e-12)",
    )


def test_rkhs_norm_oracle(verdict):
    rng = np.random.default_rng(6)
    data = random_linear_data(rng, n=20, p=2, q=2)
    fit = fit_kiv(data, POLY, POLY, RegPair(0.1, 0.05))
    Psi = features(data.X, POLY)
    worst = 0.0
    for b in range(50):
        q = draw_multipliers(20, draw_stream(6, b))
        w = Psi.T @ bootstrap_coefficients(fit, q)
        worst = max(worst, abs(bootstrap_draw(fit, q) ** 2 - w @ w) / (w @ w))
    verdict("[6] RKHS-norm oracle", worst <= 1e-8, f"max rel err {worst:.2e} over 50 draws (tol 1e-8)")


@pytest.mark.slow
def test_validity_at_desk_scale(verdict):
    start = time.perf_counter()
    res = run_coverage(DgpSpec(kind="linear", n=200, p=2, q=3, rho=0.5, sigma=1.0), reps=300, B=400, chi=0.05, seed=2024)
    elapsed = time.perf_counter() - start
    rk, sup = res["rkhs_coverage"]["rate"], res["sup_coverage"]["rate"]
    verdict(
        "[7] validity at desk scale",
        rk >= 0.91 and sup >= 0.91 and elapsed <= 600,
        f"RKHS-ball coverage {rk:.3f}, sup-band coverage {sup:.3f} (each >= 0.91), {elapsed:.0f}s",
    )


def test_spectrum_identity(verdict):
    rng = np.random.default_rng(8)
    data = random_linear_data(rng, n=25, p=2, q=2)
    fit = fit_kiv(data, POLY, POLY, RegPair(0.1, 0.05))
    ref = explicit_T_spectrum(features(data.X, POLY), features(data.Z, POLY), 0.05)
    got = t_operator_eigs(fit.K, fit.K_XX)
    err = rel_err(got[: len(ref)], ref)
    tail = float(np.max(np.abs(got[len(ref):])) / ref[0])
    verdict(
        "[8] spectrum identity",
        err <= 1e-8 and tail <= 1e-8,
        f"max rel err {err:.2e} on {len(ref)} nonzero eigenvalues, remainder {tail:.1e} (tol 1e-8)",
    )


def test_effective_dimension_ordering(verdict):
    slack = np.inf
    for seed in range(25):
        rng = np.random.default_rng(900 + seed)
        data = random_linear_data(rng, n=30, p=2, q=3)
        Psi, Phi = features(data.X, POLY), features(data.Z, POLY)
        lam, mu = rng.uniform(0.01, 1.0), rng.uniform(0.001, 1.0)
        slack = min(slack, explicit_m(Psi, Phi, lam, mu) - effective_dim_tilde(Psi, Phi, lam, mu))
    rng = np.random.default_rng(9)
    Kzz = gram_matrix(POLY, rng.standard_normal((40, 3))) / 40
    nz = [effective_dim_z(np.linalg.eigvalsh(Kzz), mu) for mu in (0.01, 0.1, 1.0)]
    verdict(
        "[9] effective-dimension ordering",
        slack >= 0 and nz[0] > nz[1] > nz[2],
        f"min(m - m_tilde) {slack:.3g} over 25 instances; n_z {nz[0]:.3f} > {nz[1]:.3f} > {nz[2]:.3f}",
    )


def test_regime_checker_examples(verdict):
    def failing(alpha, rho_x):
        return [r["row"] for r in check_regime(RegimeParams(alpha, rho_x, 1.1, 1.0)).rows if not r["pass"]]

    a, b, c = failing(1, 1.6), failing(0, 2), failing(1, 2)
    rows = check_regime(RegimeParams(0, 2, 1.1, 1.0)).rows
    r2 = next(r for r in rows if r["row"] == "R_res(2)")
    q = check_regime(RegimeParams(1, 2, 1.1, 1.0)).rows[0]
    ok = (
        a == []
        and "R_res(2)" in b
        and (r2["lhs"], r2["rhs"]) == (3.0, 2.0)
        and "Q_bullet" in c
        and (q["lhs"], q["rhs"]) == (4.0, 4.0)
    )
    verdict(
        "[10] regime checker",
        ok,
        f"failing rows: all-pass {a}, R_res(2) case {b}, Q_bullet case {c}",
    )


def test_band_determinism(verdict, tmp_path):
    data = random_linear_data(np.random.default_rng(11), n=60, p=2, q=3)
    write_dataset(tmp_path / "data.csv", data)
    argv = ["band", "--input", str(tmp_path / "data.csv"), "--out", str(tmp_path / "out"), "--kernel-x",
            "poly:d=2,c=1", "--kernel-z", "gaussian:l=2", "--lambda", "0.1", "--mu", "0.05", "--seed", "17"]
    outputs = []
    for _ in range(2):
        assert cli.main(argv) == 0
        outputs.append({f: (tmp_path / "out" / f).read_bytes() for f in ("band.csv", "summary.json", "config.json")})
        for f in outputs[-1]:
            (tmp_path / "out" / f).unlink()
    same = outputs[0] == outputs[1]
    verdict("[11] determinism", same, f"band.csv, summary.json, config.json byte-identical: {same}")
