"""Closed-form kernel instrumental variable regression.

Given Gram matrices K_XX, K_ZZ and penalties (lam, mu) the fit is

    K     = K_ZZ (K_ZZ + n mu I)^{-1}          first-stage smoother
    A     = (K K_XX + n lam I)^{-1}
    alpha = A K Y
    h(x)  = K_xX alpha

The matrices are kept on the returned :class:`FitState` so the bootstrap
can reuse them without further factorizations.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla

from .errors import ConfigError, InputError, NumericalError
from .kernels import KernelSpec, as_points, gram_matrix
from .linalg import RESIDUAL_TOL, ridge_solve


@dataclass(frozen=True)
class Dataset:
    """n observations of (instrument Z, covariate X, outcome Y).

    ``Z`` and ``X`` are 2-D (one point per row); for ranking-valued data
    they hold integer rank vectors.
    """

    Z: np.ndarray
    X: np.ndarray
    Y: np.ndarray

    def __post_init__(self) -> None:
        Z = _rows(self.Z, "Z")
        X = _rows(self.X, "X")
        Y = np.asarray(self.Y, dtype=np.float64).reshape(-1)
        if not (len(Z) == len(X) == len(Y)):
            raise InputError(f"Z, X, Y lengths differ: {len(Z)}, {len(X)}, {len(Y)}")
        if len(Y) < 2:
            raise InputError("need at least two observations")
        if not np.all(np.isfinite(Y)):
            raise InputError("outcomes must be finite")
        object.__setattr__(self, "Z", Z)
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "Y", Y)

    @property
    def n(self) -> int:
        return len(self.Y)

    def with_outcome(self, Y) -> "Dataset":
        return Dataset(self.Z, self.X, Y)


def _rows(arr, name: str) -> np.ndarray:
    arr = np.asarray(arr)
    if arr.ndim == 1:
        arr = arr[:, None]
    if arr.ndim != 2:
        raise InputError(f"{name} must be 1-D or 2-D")
    return arr


@dataclass(frozen=True)
class RegPair:
    """Second-stage (lam) and first-stage (mu) ridge penalties."""

    lam: float
    mu: float

    def __post_init__(self) -> None:
        for name in ("lam", "mu"):
            v = getattr(self, name)
            if not (isinstance(v, (int, float, np.floating)) and math.isfinite(v) and v > 0):
                raise ConfigError(f"{name} must be finite and > 0, got {v!r}")
            object.__setattr__(self, name, float(v))

    @property
    def ordered(self) -> bool:
        """Whether mu <= lam <= 1, the regime the coverage theory assumes."""
        return self.mu <= self.lam <= 1.0

    @property
    def iota(self) -> float | None:
        """Exponent with lam = mu**iota, or None when mu == 1."""
        if self.mu == 1.0:
            return None
        return math.log(self.lam) / math.log(self.mu)


@dataclass(frozen=True)
class FitState:
    data: Dataset
    kx: KernelSpec
    kz: KernelSpec
    reg: RegPair
    K_XX: np.ndarray
    K_ZZ: np.ndarray
    K: np.ndarray
    A: np.ndarray
    C: np.ndarray
    alpha: np.ndarray
    resid: np.ndarray
    meta: dict = field(default_factory=dict)

    @property
    def n(self) -> int:
        return self.data.n

    def fitted(self) -> np.ndarray:
        return self.K_XX @ self.alpha


def first_stage_smoother(K_ZZ: np.ndarray, mu: float) -> np.ndarray:
    """K = K_ZZ (K_ZZ + n mu I)^{-1}, symmetrized."""
    n = K_ZZ.shape[0]
    S = ridge_solve(K_ZZ, n * mu, K_ZZ)
    return 0.5 * (S + S.T)


def _check_residual(M: np.ndarray, X: np.ndarray, B: np.ndarray, what: str) -> float:
    scale = np.linalg.norm(B)
    if scale == 0.0:
        return 0.0
    rel = float(np.linalg.norm(M @ X - B) / scale)
    if not rel <= RESIDUAL_TOL:
        raise NumericalError(f"{what}: relative residual {rel:.2e} exceeds {RESIDUAL_TOL:g}")
    return rel


def fit_from_grams(
    data: Dataset, kx: KernelSpec, kz: KernelSpec, reg: RegPair, K_XX: np.ndarray, K_ZZ: np.ndarray
) -> FitState:
    """Run the closed form on precomputed Gram matrices."""
    n = data.n
    if K_XX.shape != (n, n) or K_ZZ.shape != (n, n):
        raise InputError("Gram matrices do not match the sample size")
    if not reg.ordered:
        warnings.warn(
            f"mu <= lam <= 1 does not hold (lam={reg.lam:g}, mu={reg.mu:g}); "
            "the fit is defined but coverage guarantees assume it",
            stacklevel=3,
        )
    K = first_stage_smoother(K_ZZ, reg.mu)
    # K K_XX is not symmetric; LU with partial pivoting, not Cholesky
    M = K @ K_XX + n * reg.lam * np.eye(n)
    try:
        lu = sla.lu_factor(M, check_finite=False)
    except (ValueError, np.linalg.LinAlgError) as exc:  # pragma: no cover
        raise NumericalError(f"LU factorization failed: {exc}") from exc
    A = sla.lu_solve(lu, np.eye(n), check_finite=False)
    if not np.all(np.isfinite(A)):
        raise NumericalError("second-stage inverse is not finite")
    inv_resid = _check_residual(M, A, np.eye(n), "second-stage inverse")
    KY = K @ data.Y
    alpha = A @ KY
    alpha_resid = _check_residual(M, alpha, KY, "dual coefficients")
    resid = data.Y - K_XX @ alpha
    C = 2.0 * K - K @ K
    C = 0.5 * (C + C.T)
    meta = {
        "n": n,
        "lam": reg.lam,
        "mu": reg.mu,
        "iota_hat": reg.iota,
        "regime_ordered": reg.ordered,
        "inverse_residual": inv_resid,
        "alpha_residual": alpha_resid,
        "resid_norm": float(np.linalg.norm(resid)),
        "resid_rms": float(np.sqrt(np.mean(resid**2))),
    }
    return FitState(data, kx, kz, reg, K_XX, K_ZZ, K, A, C, alpha, resid, meta)


def fit_kiv(data: Dataset, kx: KernelSpec, kz: KernelSpec, reg: RegPair) -> FitState:
    """Fit KIV in closed form and cache everything the bootstrap needs."""
    K_XX = gram_matrix(kx, data.X)
    K_ZZ = gram_matrix(kz, data.Z)
    return fit_from_grams(data, kx, kz, reg, K_XX, K_ZZ)


def predict(fit: FitState, points) -> np.ndarray:
    """h_hat at each row of ``points``."""
    pts = as_points(fit.kx, points)
    if pts.shape[1] != fit.data.X.shape[1]:
        raise InputError(
            f"evaluation points have dimension {pts.shape[1]}, training X has {fit.data.X.shape[1]}"
        )
    return gram_matrix(fit.kx, pts, fit.data.X) @ fit.alpha


def predict_one(fit: FitState, x_star) -> float:
    x_star = np.asarray(x_star)
    if x_star.ndim == 0:
        x_star = x_star[None]
    return float(predict(fit, x_star[None, :])[0])


def kiv_objective(fit: FitState, alpha) -> float:
    """(1/n)(Y - K_XX a)^T K (Y - K_XX a) + lam a^T K_XX a."""
    alpha = np.asarray(alpha, dtype=np.float64)
    r = fit.data.Y - fit.K_XX @ alpha
    return float(r @ fit.K @ r / fit.n + fit.reg.lam * alpha @ fit.K_XX @ alpha)


def fit_krr(X, Y, kx: KernelSpec, lam: float) -> np.ndarray:
    """Kernel ridge regression dual coefficients (K_XX + n lam I)^{-1} Y."""
    Y = np.asarray(Y, dtype=np.float64).reshape(-1)
    n = len(Y)
    if n < 2:
        raise InputError("need at least two observations")
    if not lam > 0:
        raise ConfigError(f"lam must be > 0, got {lam}")
    K_XX = gram_matrix(kx, X)
    if K_XX.shape[0] != n:
        raise InputError("X and Y lengths differ")
    return ridge_solve(K_XX, n * lam, Y)


def regularized_2sls(Z, X, Y, lam: float, mu: float) -> np.ndarray:
    """Primal regularized two-stage least squares.

    gamma = [X'Z (Z'Z + n mu)^{-1} Z'X + n lam]^{-1} X'Z (Z'Z + n mu)^{-1} Z'Y

    With explicit polynomial feature matrices in place of X and Z this is
    the feature-space form of the polynomial-kernel fit.
    """
    Z = np.asarray(Z, dtype=np.float64)
    X = np.asarray(X, dtype=np.float64)
    Y = np.asarray(Y, dtype=np.float64).reshape(-1)
    Z = Z[:, None] if Z.ndim == 1 else Z
    X = X[:, None] if X.ndim == 1 else X
    n = len(Y)
    if n < 2 or len(Z) != n or len(X) != n:
        raise InputError("Z, X, Y must share n >= 2 rows")
    RegPair(lam, mu)
    ZtX = Z.T @ X
    ZtY = Z.T @ Y
    G = ridge_solve(Z.T @ Z, n * mu, np.column_stack([ZtX, ZtY]))
    first = ZtX.T @ G[:, :-1]
    rhs = ZtX.T @ G[:, -1]
    return ridge_solve(0.5 * (first + first.T), n * lam, rhs)
