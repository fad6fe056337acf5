"""Dense symmetric solves and spectra.

Everything here is a thin layer over LAPACK (via scipy) that adds the
symmetry checks, jitter policy and residual guarantees the estimator
relies on.
"""

from __future__ import annotations

import numpy as np
import scipy.linalg as sla

from .errors import InputError, NumericalError

SYM_TOL = 1e-12
RESIDUAL_TOL = 1e-8
MAX_JITTER_STEPS = 3


def as_sym(M, tol: float = SYM_TOL) -> np.ndarray:
    """Check that ``M`` is square and symmetric, then return (M + M^T)/2."""
    M = np.asarray(M, dtype=np.float64)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise InputError(f"expected a square matrix, got shape {M.shape}")
    if not np.all(np.isfinite(M)):
        raise InputError("matrix has non-finite entries")
    scale = np.max(np.abs(M)) if M.size else 0.0
    if np.max(np.abs(M - M.T), initial=0.0) > tol * max(scale, 1.0):
        raise InputError("matrix is not symmetric")
    return 0.5 * (M + M.T)


def ridge_solve(M, rho: float, rhs) -> np.ndarray:
    """Solve (M + rho I) S = rhs for symmetric PSD ``M`` and rho > 0.

    Uses a Cholesky factorization. If that fails (numerically indefinite
    input) the diagonal shift is grown by 1e-12 * trace/n, then 10x that,
    then 100x, before giving up.
    """
    if not rho > 0:
        raise InputError(f"ridge parameter must be > 0, got {rho}")
    M = as_sym(M)
    rhs = np.asarray(rhs, dtype=np.float64)
    n = M.shape[0]
    if rhs.shape[0] != n:
        raise InputError(f"right-hand side has {rhs.shape[0]} rows, expected {n}")

    base = 1e-12 * max(np.trace(M) / max(n, 1), 1.0)
    shift = rho
    for step in range(MAX_JITTER_STEPS + 1):
        try:
            factor = sla.cho_factor(M + shift * np.eye(n), lower=True, check_finite=False)
        except np.linalg.LinAlgError:
            shift = rho + base * 10.0**step
            continue
        sol = sla.cho_solve(factor, rhs, check_finite=False)
        resid = np.linalg.norm((M + rho * np.eye(n)) @ sol - rhs)
        if resid <= RESIDUAL_TOL * max(np.linalg.norm(rhs), np.finfo(float).tiny):
            return sol
        shift = rho + base * 10.0**step
    raise NumericalError("ridge_solve: factorization failed after jitter escalation")


def sym_eigvals(M) -> np.ndarray:
    """Eigenvalues of a symmetric matrix in descending order."""
    M = np.asarray(M, dtype=np.float64)
    if not np.all(np.isfinite(M)):
        raise InputError("matrix has non-finite entries")
    M = as_sym(M)
    return np.linalg.eigvalsh(M)[::-1].copy()


def psd_sqrt(M) -> np.ndarray:
    """Symmetric square root, clamping small negative eigenvalues to zero."""
    w, V = np.linalg.eigh(as_sym(M))
    scale = max(np.max(np.abs(w), initial=0.0), 1.0)
    if w.size and w.min() < -1e-8 * scale:
        raise InputError(f"matrix is indefinite (min eigenvalue {w.min():.3e})")
    w = np.clip(w, 0.0, None)
    R = (V * np.sqrt(w)) @ V.T
    return 0.5 * (R + R.T)


def product_spectrum(K, G) -> np.ndarray:
    """Descending eigenvalues of K @ G for symmetric PSD K and G.

    Computed as the spectrum of the symmetric matrix K^{1/2} G K^{1/2},
    which is similar to K G. Tiny negative values from rounding are
    clamped to zero.
    """
    K = as_sym(K)
    G = as_sym(G)
    if K.shape != G.shape:
        raise InputError(f"orders differ: {K.shape} vs {G.shape}")
    R = psd_sqrt(K)
    # psd check on G: its eigenvalues must be >= -tol as well
    wg = np.linalg.eigvalsh(G)
    if wg.size and wg.min() < -1e-8 * max(np.max(np.abs(wg)), 1.0):
        raise InputError(f"matrix is indefinite (min eigenvalue {wg.min():.3e})")
    P = R @ G @ R
    eig = sym_eigvals(0.5 * (P + P.T))
    return np.clip(eig, 0.0, None)
