"""Anti-symmetric Gaussian multiplier bootstrap and uniform confidence bands.

Each draw takes centred Gaussian multipliers q ~ N(0, I - 11'/n), forms the
coefficient vector

    gamma = sqrt(n) A C diag(resid) q,      C = 2K - K^2,

of the bootstrap function B = sum_i gamma_i k_x(., X_i), and records its
RKHS norm M = sqrt(gamma' K_XX gamma). The chi-quantile t_hat of M gives

    RKHS ball:  ||h - h_hat||_H <= t_hat n^{-1/2} (1 + 1/ln n)
    sup band:   h_hat(x) +/- t_hat n^{-1/2} kappa_x (1 + 1/ln n)
"""

from __future__ import annotations

import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, InputError
from .estimator import FitState, predict
from .kernels import gram_matrix

DEFAULT_B = 1000
_SEED_MASK = (1 << 64) - 1


# ---------------------------------------------------------------------------
# Random streams
# ---------------------------------------------------------------------------


def draw_stream(seed: int, index: int) -> np.random.Generator:
    """Counter-based generator for draw ``index`` under ``seed``.

    Philox keyed by the seed, with the draw index in the top counter word,
    so every draw owns a disjoint block of the counter space and the set of
    draws does not depend on the order they are computed in.
    """
    bitgen = np.random.Philox(key=int(seed) & _SEED_MASK, counter=[0, 0, 0, int(index)])
    return np.random.Generator(bitgen)


def derive_seed(seed: int, *tags: int) -> int:
    """Deterministic 64-bit child seed for (seed, tags...)."""
    ss = np.random.SeedSequence([int(seed) & _SEED_MASK, *map(int, tags)])
    return int(ss.generate_state(1, np.uint64)[0])


def draw_multipliers(n: int, stream: np.random.Generator) -> np.ndarray:
    """q = g - mean(g) for g ~ N(0, I_n); Cov(q) = I - 11'/n exactly."""
    if n < 1:
        raise ConfigError(f"n must be >= 1, got {n}")
    g = stream.standard_normal(n)
    return g - g.mean()


def antisymmetric_multipliers(h) -> np.ndarray:
    """(h - h') 1 / sqrt(2) for a square matrix h of standard normals."""
    h = np.asarray(h, dtype=np.float64)
    if h.ndim != 2 or h.shape[0] != h.shape[1]:
        raise InputError(f"h must be square, got shape {h.shape}")
    return (h - h.T).sum(axis=1) / math.sqrt(2.0)


# ---------------------------------------------------------------------------
# Single draws
# ---------------------------------------------------------------------------


def bootstrap_operator(fit: FitState) -> np.ndarray:
    """W = sqrt(n) A C diag(resid), so that gamma = W q."""
    return math.sqrt(fit.n) * (fit.A @ fit.C) * fit.resid[None, :]


def _norm(fit: FitState, gamma: np.ndarray, statistic: str) -> float:
    if statistic == "rkhs":
        sq = gamma @ fit.K_XX @ gamma
    elif statistic == "projector":
        sq = gamma @ fit.K @ gamma
    else:
        raise ConfigError(f"unknown statistic {statistic!r}; use 'rkhs' or 'projector'")
    return math.sqrt(max(float(sq), 0.0))


def bootstrap_coefficients(fit: FitState, q) -> np.ndarray:
    q = np.asarray(q, dtype=np.float64).reshape(-1)
    if q.shape[0] != fit.n:
        raise InputError(f"multiplier vector has length {q.shape[0]}, expected {fit.n}")
    return math.sqrt(fit.n) * (fit.A @ (fit.C @ (fit.resid * q)))


def bootstrap_draw(fit: FitState, q, statistic: str = "rkhs") -> float:
    """RKHS norm of the bootstrap function for multipliers ``q``.

    ``statistic="projector"`` gives the variant sqrt(gamma' K gamma) that
    weights by the first-stage smoother instead of K_XX; kept only for
    comparison.
    """
    return _norm(fit, bootstrap_coefficients(fit, q), statistic)


def bootstrap_reference(fit: FitState, h, eval_points) -> np.ndarray:
    """Bootstrap function values from the double-sum closed form.

    B(x) = K_xX (K K_XX + n lam)^{-1} (2K - K^2) beta,
    beta = diag(resid) (h - h') 1 / sqrt(2).

    Independent of the q-based path in :func:`bootstrap_draw`; tests use it
    as an oracle.
    """
    h = np.asarray(h, dtype=np.float64)
    if h.shape != (fit.n, fit.n):
        raise InputError(f"h must be {fit.n}x{fit.n}, got {h.shape}")
    beta = fit.resid * antisymmetric_multipliers(h)
    coef = fit.A @ ((2.0 * fit.K - fit.K @ fit.K) @ beta)
    return gram_matrix(fit.kx, eval_points, fit.data.X) @ coef


# ---------------------------------------------------------------------------
# Many draws, quantile, band
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class BootstrapDraws:
    values: np.ndarray
    seed: int
    stream_ids: np.ndarray
    statistic: str = "rkhs"

    @property
    def B(self) -> int:
        return len(self.values)


def run_bootstrap(
    fit: FitState,
    B: int = DEFAULT_B,
    chi: float = 0.05,
    seed: int = 0,
    threads: int = 1,
    statistic: str = "rkhs",
) -> tuple[BootstrapDraws, float]:
    """Draw B bootstrap norms and return them with their chi-quantile.

    Draw ``b`` always uses stream ``(seed, b)`` and lands at index ``b``,
    so results are identical for any ``threads``.
    """
    B = int(B)
    if B < 1:
        raise ConfigError(f"B must be >= 1, got {B}")
    _check_chi(chi)
    if B < 100:
        warnings.warn(f"B={B} bootstrap draws is small; quantiles will be noisy", stacklevel=2)
    if statistic not in ("rkhs", "projector"):
        raise ConfigError(f"unknown statistic {statistic!r}")

    W = bootstrap_operator(fit)
    G = fit.K_XX if statistic == "rkhs" else fit.K
    n = fit.n
    values = np.empty(B)

    def work(lo: int, hi: int) -> None:
        for b in range(lo, hi):
            q = draw_multipliers(n, draw_stream(seed, b))
            gamma = W @ q
            values[b] = math.sqrt(max(float(gamma @ (G @ gamma)), 0.0))

    threads = max(1, int(threads))
    if threads == 1:
        work(0, B)
    else:
        edges = np.linspace(0, B, threads + 1).astype(int)
        with ThreadPoolExecutor(max_workers=threads) as pool:
            list(pool.map(lambda ab: work(*ab), zip(edges[:-1], edges[1:])))

    draws = BootstrapDraws(values, int(seed), np.arange(B), statistic)
    return draws, bootstrap_quantile(draws, chi)


def _check_chi(chi: float) -> None:
    if not (0.0 < chi < 1.0):
        raise ConfigError(f"chi must lie in (0, 1), got {chi}")


def bootstrap_quantile(draws, chi: float) -> float:
    """Upper-tail order statistic: the ceil(B(1 - chi))-th smallest draw.

    No interpolation, so at most a fraction chi of the draws exceed it.
    """
    _check_chi(chi)
    values = np.asarray(getattr(draws, "values", draws), dtype=np.float64).reshape(-1)
    if values.size == 0:
        raise InputError("no bootstrap draws")
    B = values.size
    # round away representation noise such as 100 * 0.93 = 93.00000000000001
    k = math.ceil(round(B * (1.0 - chi), 9))
    k = min(max(k, 1), B)
    return float(np.partition(values, k - 1)[k - 1])


@dataclass(frozen=True)
class ConfidenceBand:
    n: int
    chi: float
    t_hat: float
    kappa_x: float
    inflation: float
    radius_rkhs: float
    radius_sup: float
    h_hat: np.ndarray = field(repr=False)
    lower: np.ndarray = field(repr=False)
    upper: np.ndarray = field(repr=False)
    kappa_data_dependent: bool = False

    def covers(self, values) -> bool:
        """Whether every value lies inside its interval."""
        v = np.asarray(values, dtype=np.float64)
        return bool(np.all((self.lower <= v) & (v <= self.upper)))

    def summary(self) -> dict:
        return {
            "n": self.n,
            "chi": self.chi,
            "t_hat": self.t_hat,
            "kappa_x": self.kappa_x,
            "kappa_data_dependent": self.kappa_data_dependent,
            "inflation": self.inflation,
            "radius_sup": self.radius_sup,
            "radius_rkhs": self.radius_rkhs,
        }


def inflation_factor(n: int) -> float:
    return 1.0 + 1.0 / math.log(n)


def confidence_band(
    fit: FitState,
    t_hat: float,
    chi: float,
    kappa_x: float,
    eval_points=None,
    kappa_data_dependent: bool | None = None,
) -> ConfidenceBand:
    """Uniform band h_hat(x) +/- t_hat n^{-1/2} kappa_x (1 + 1/ln n).

    ``eval_points`` defaults to the training covariates.
    """
    n = fit.n
    if n < 3:
        raise InputError("a band needs n >= 3")
    if not (t_hat >= 0 and math.isfinite(t_hat)):
        raise ConfigError(f"t_hat must be finite and >= 0, got {t_hat}")
    if not (kappa_x > 0 and math.isfinite(kappa_x)):
        raise ConfigError(f"kappa_x must be finite and > 0, got {kappa_x}")
    _check_chi(chi)
    pts = fit.data.X if eval_points is None else eval_points
    h_hat = predict(fit, pts)
    infl = inflation_factor(n)
    radius_rkhs = t_hat / math.sqrt(n) * infl
    radius_sup = radius_rkhs * kappa_x
    if kappa_data_dependent is None:
        kappa_data_dependent = not fit.kx.is_bounded
    return ConfidenceBand(
        n=n,
        chi=float(chi),
        t_hat=float(t_hat),
        kappa_x=float(kappa_x),
        inflation=infl,
        radius_rkhs=radius_rkhs,
        radius_sup=radius_sup,
        h_hat=h_hat,
        lower=h_hat - radius_sup,
        upper=h_hat + radius_sup,
        kappa_data_dependent=bool(kappa_data_dependent),
    )
