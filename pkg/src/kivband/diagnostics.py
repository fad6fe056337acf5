"""Spectral diagnostics and the parameter-regime checker.

The operator T_mu = S*(S_z + mu)^{-1} S has, on a sample, the same nonzero
spectrum as the n x n matrix (1/n) K K_XX (push-through identity), so its
effective dimension can be computed for any kernel. The instrument-strength
dimension m_tilde needs the operators themselves and is only available for
kernels with explicit finite feature maps.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .errors import ConfigError, InputError
from .estimator import FitState
from .features import feature_map
from .linalg import product_spectrum, sym_eigvals

DECAY_MIN_EIGS = 5
FLAT_SLOPE = 1e-10


def local_width(eigs, m: int) -> float:
    """Tail sum of eigenvalues beyond the first ``m``."""
    eigs = np.asarray(eigs, dtype=np.float64).reshape(-1)
    if m < 0:
        raise ConfigError(f"m must be >= 0, got {m}")
    if eigs.size > 1 and np.any(np.diff(eigs) > 0):
        raise InputError("eigenvalues must be sorted in descending order")
    return float(eigs[int(m):].sum())


def _pos_eigs(eigs) -> np.ndarray:
    return np.clip(np.asarray(eigs, dtype=np.float64).reshape(-1), 0.0, None)


def effective_dim(eigs, reg: float) -> float:
    """sum_s nu_s / (nu_s + reg)^2."""
    if not reg > 0:
        raise ConfigError(f"regularization must be > 0, got {reg}")
    nu = _pos_eigs(eigs)
    return float(np.sum(nu / (nu + reg) ** 2))


def effective_dim_z(eigs_z, mu: float) -> float:
    """n_z(mu) = tr (S_z + mu)^{-2} S_z from eigenvalues of (1/n) K_ZZ."""
    return effective_dim(eigs_z, mu)


def t_operator_eigs(K, K_XX) -> np.ndarray:
    """Descending spectrum of (1/n) K K_XX."""
    n = np.shape(K_XX)[0]
    return product_spectrum(K, K_XX) / n


def effective_dim_T(fit: FitState, lam: float | None = None) -> float:
    """m(lam, mu) = tr (T_mu + lam)^{-2} T_mu for the fitted first stage."""
    lam = fit.reg.lam if lam is None else lam
    return effective_dim(t_operator_eigs(fit.K, fit.K_XX), lam)


@dataclass(frozen=True)
class FeatureOperators:
    """Empirical covariance operators in explicit feature coordinates."""

    S: np.ndarray  # (M_z, M_x), cross-covariance Phi' Psi / n
    S_z: np.ndarray  # (M_z, M_z)
    S_x: np.ndarray  # (M_x, M_x)
    T_mu: np.ndarray  # (M_x, M_x), S' (S_z + mu)^{-1} S
    mu: float


def feature_operators(Psi, Phi, mu: float) -> FeatureOperators:
    Psi = np.asarray(Psi, dtype=np.float64)
    Phi = np.asarray(Phi, dtype=np.float64)
    n = Psi.shape[0]
    if Phi.shape[0] != n:
        raise InputError("feature matrices have different row counts")
    if not mu > 0:
        raise ConfigError(f"mu must be > 0, got {mu}")
    S = Phi.T @ Psi / n
    S_z = Phi.T @ Phi / n
    S_x = Psi.T @ Psi / n
    T = S.T @ np.linalg.solve(S_z + mu * np.eye(len(S_z)), S)
    return FeatureOperators(S, S_z, S_x, 0.5 * (T + T.T), mu)


def effective_dim_tilde(Psi, Phi, lam: float, mu: float) -> float:
    """m_tilde = tr T_{mu,lam}^{-1} S*(S_z+mu)^{-1} S_z (S_z+mu)^{-1} S T_{mu,lam}^{-1}."""
    if not lam > 0:
        raise ConfigError(f"lam must be > 0, got {lam}")
    ops = feature_operators(Psi, Phi, mu)
    Mz = len(ops.S_z)
    R = np.linalg.solve(ops.S_z + mu * np.eye(Mz), ops.S)  # (S_z+mu)^{-1} S
    middle = R.T @ ops.S_z @ R
    Tl = ops.T_mu + lam * np.eye(len(ops.T_mu))
    Ti = np.linalg.inv(Tl)
    return float(np.trace(Ti @ middle @ Ti))


def effective_dim_tilde_fit(fit: FitState, lam: float | None = None) -> float:
    """m_tilde for a fit whose kernels have explicit features (linear/polynomial)."""
    lam = fit.reg.lam if lam is None else lam
    Psi = feature_map(fit.kx, fit.data.X)
    Phi = feature_map(fit.kz, fit.data.Z)
    return effective_dim_tilde(Psi, Phi, lam, fit.reg.mu)


def fit_decay(eigs) -> tuple[float, float]:
    """Fit nu_s ~ omega * s^{-1/(rho-1)} by least squares on the log scale.

    Uses the leading min(len/2, #{nu > 1e-12 max}) eigenvalues, at least 5.
    Returns (rho_hat, omega_hat). A flat spectrum gives rho_hat = inf.
    """
    nu = np.asarray(eigs, dtype=np.float64).reshape(-1)
    if nu.size == 0 or nu[0] <= 0:
        raise InputError("need positive eigenvalues to fit a decay rate")
    k = min(nu.size // 2, int(np.count_nonzero(nu > 1e-12 * nu.max())))
    # short exact lists: fall back to all positive values
    if k < DECAY_MIN_EIGS:
        k = int(np.count_nonzero(nu > 1e-12 * nu.max()))
    if k < DECAY_MIN_EIGS:
        raise InputError(f"need at least {DECAY_MIN_EIGS} positive eigenvalues, got {k}")
    s = np.arange(1, k + 1, dtype=np.float64)
    slope, intercept = np.polyfit(np.log(s), np.log(nu[:k]), 1)
    # a flat spectrum fits a slope of order 1e-15, not exactly zero
    rho = math.inf if slope > -FLAT_SLOPE else 1.0 + 1.0 / abs(slope)
    return float(rho), float(math.exp(intercept))


# ---------------------------------------------------------------------------
# Regime checker
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class RegimeParams:
    """Source (alpha), link (beta), decay (rho_x, rho_z) and lam = mu^iota."""

    alpha: float
    rho_x: float
    rho_z: float
    iota: float
    beta: float = 0.5

    def __post_init__(self) -> None:
        if not 0.0 <= self.alpha <= 1.0:
            raise ConfigError(f"alpha must lie in [0, 1], got {self.alpha}")
        if not 0.5 <= self.beta <= 1.0:
            raise ConfigError(f"beta must lie in [1/2, 1], got {self.beta}")
        for name in ("rho_x", "rho_z"):
            v = getattr(self, name)
            if not 1.0 < v <= 2.0:
                raise ConfigError(f"{name} must lie in (1, 2], got {v}")
        if not 0.0 < self.iota <= 1.0:
            raise ConfigError(f"iota must lie in (0, 1], got {self.iota}")


def _regime_rows(p: RegimeParams):
    a, rx, rz, i = p.alpha, p.rho_x, p.rho_z, p.iota
    # every row reads lhs < rhs
    return [
        ("Q_bullet", 2 * rx, 3 + 2 * a - 1 / i),
        ("R_bullet", 1 / i, rx + 2 * a),
        ("Q_res(1)", rz + 1, i * (3 * a + 1.5 * rx - 1)),
        ("Q_res(2)", rz + 1 / 3, i * (2 * a + 4 / 3 * rx - 1)),
        ("Q_res(3)", rz + 2, i * (4 * a + 3 * rx - 2)),
        ("R_res(1)", 4.0, i * (4 * a + 2 * rx - 2)),
        ("R_res(2)", 3.0, i * (2 * a + 2 * rx - 2)),
        ("R_res(3)", 2 * rz + 4, i * (6 * a + 3 * rx - 3)),
        ("R_res(4)", 3 * rz + 3, i * (6 * a + 4 * rx - 4)),
        ("R_res(5)", rz + 4, i * (4 * a + 3 * rx - 3)),
    ]


def _sample_size_rows(p: RegimeParams, n: float, lam: float, mu: float):
    a, rx, rz = p.alpha, p.rho_x, p.rho_z
    # (row, lhs, rhs) with pass = lhs < rhs
    return [
        ("B", n, lam ** -(rx + 2 * a)),
        ("Q_bullet", mu**-1 * lam ** -(3 * rx - 3), n),
        ("R_bullet", mu**-1, n),
        ("Q_res(1)", lam ** (a - 1 + rx / 2) * mu ** -(1 + rz), n),
        ("Q_res(2)", lam ** (-1 + rx / 3) * mu ** (-1 / 3 - rz), n),
        ("Q_res(3)", lam ** (-1 + rx / 2) * mu ** -(1 + rz / 2), n),
        ("R_res(1)", mu**-4 * lam ** (2 * a - 2 + rx), n),
        ("R_res(2)", mu**-3 * lam ** (-2 + rx), n),
        ("R_res(3)", mu ** -(2 + rz) * lam ** (a - 1.5 + rx / 2), n),
        ("R_res(4)", mu ** -(1 + rz) * lam ** (-4 / 3 + rx / 3), n),
        ("R_res(5)", mu ** -(2 + rz / 2) * lam ** (-1.5 + rx / 2), n),
    ]


@dataclass(frozen=True)
class RegimeVerdict:
    rows: list
    sample_size_rows: list | None = None

    @property
    def passed(self) -> bool:
        return all(r["pass"] for r in self.rows)

    @property
    def sample_size_passed(self) -> bool | None:
        if self.sample_size_rows is None:
            return None
        return all(r["pass"] for r in self.sample_size_rows)

    def to_dict(self) -> dict:
        out = {"rows": self.rows, "overall": self.passed}
        if self.sample_size_rows is not None:
            out["sample_size_rows"] = self.sample_size_rows
            out["sample_size_overall"] = self.sample_size_passed
        return out


def check_regime(
    params: RegimeParams, n: float | None = None, lam: float | None = None, mu: float | None = None
) -> RegimeVerdict:
    """Evaluate the ten strict parameter inequalities (lhs < rhs each).

    Comparisons are exact floating point: a row sitting on its boundary
    fails. Given (n, lam, mu), also evaluates the sample-size restrictions,
    read as plain strict inequalities with all constants set to one.
    """
    rows = [
        {"row": name, "lhs": float(lhs), "rhs": float(rhs), "pass": bool(lhs < rhs)}
        for name, lhs, rhs in _regime_rows(params)
    ]
    ss = None
    if n is not None or lam is not None or mu is not None:
        if n is None or lam is None or mu is None:
            raise ConfigError("sample-size check needs all of n, lam, mu")
        if not (n > 0 and lam > 0 and mu > 0):
            raise ConfigError("n, lam, mu must be > 0")
        ss = [
            {"row": name, "lhs": float(lhs), "rhs": float(rhs), "pass": bool(lhs < rhs)}
            for name, lhs, rhs in _sample_size_rows(params, float(n), float(lam), float(mu))
        ]
    return RegimeVerdict(rows, ss)


# ---------------------------------------------------------------------------
# Report
# ---------------------------------------------------------------------------


@dataclass
class SpectralReport:
    n: int
    lam: float
    mu: float
    eigs_x: np.ndarray = field(repr=False)
    eigs_z: np.ndarray = field(repr=False)
    eigs_T: np.ndarray = field(repr=False)
    n_z_mu: float
    m_lam_mu: float
    m_tilde: float | None
    rho_x_hat: float | None
    omega_x_hat: float | None
    rho_z_hat: float | None
    omega_z_hat: float | None
    strong_instrument_stat: float | None
    flags: list

    def to_dict(self) -> dict:
        d = asdict(self)
        for k in ("eigs_x", "eigs_z", "eigs_T"):
            d[k] = [float(v) for v in np.asarray(d[k])]
        for k, v in d.items():
            if isinstance(v, float) and not math.isfinite(v):
                d[k] = None if math.isnan(v) else ("inf" if v > 0 else "-inf")
        return d


def _try_decay(eigs, label: str, flags: list):
    try:
        rho, omega = fit_decay(eigs)
    except InputError as exc:
        flags.append(f"{label}: decay not fitted ({exc})")
        return None, None
    if not (1.0 < rho <= 2.0):
        flags.append(f"{label}: fitted decay exponent {rho:.4g} outside (1, 2]")
    return rho, omega


def spectral_report(fit: FitState) -> SpectralReport:
    n = fit.n
    eigs_x = np.clip(sym_eigvals(fit.K_XX / n), 0.0, None)
    eigs_z = np.clip(sym_eigvals(fit.K_ZZ / n), 0.0, None)
    eigs_T = t_operator_eigs(fit.K, fit.K_XX)
    lam, mu = fit.reg.lam, fit.reg.mu
    flags: list = []
    rho_x, omega_x = _try_decay(eigs_x, "X", flags)
    rho_z, omega_z = _try_decay(eigs_z, "Z", flags)
    m_tilde = None
    stat = None
    if fit.kx.family in ("linear", "polynomial") and fit.kz.family in ("linear", "polynomial"):
        m_tilde = effective_dim_tilde_fit(fit)
        if rho_x is not None and math.isfinite(rho_x):
            # descriptive only: m_tilde * lam^rho_x should stay bounded away from 0
            stat = m_tilde * lam**rho_x
    return SpectralReport(
        n=n,
        lam=lam,
        mu=mu,
        eigs_x=eigs_x,
        eigs_z=eigs_z,
        eigs_T=eigs_T,
        n_z_mu=effective_dim_z(eigs_z, mu),
        m_lam_mu=effective_dim(eigs_T, lam),
        m_tilde=m_tilde,
        rho_x_hat=rho_x,
        omega_x_hat=omega_x,
        rho_z_hat=rho_z,
        omega_z_hat=omega_z,
        strong_instrument_stat=stat,
        flags=flags,
    )
