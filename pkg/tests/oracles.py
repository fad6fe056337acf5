"""Explicit feature-space computations used as independent checks.

Everything here works with the primal operators on polynomial feature
vectors; nothing goes through Gram matrices or the dual formulas.
"""

import numpy as np

from kivband.features import polynomial_features


def features(X, spec):
    if spec.family == "linear":
        return np.asarray(X, dtype=float)
    return polynomial_features(X, spec.degree, spec.offset)


def empirical_operators(Psi, Phi, mu):
    n = Psi.shape[0]
    S = Phi.T @ Psi / n
    Sz = Phi.T @ Phi / n
    Szi = np.linalg.inv(Sz + mu * np.eye(len(Sz)))
    T = S.T @ Szi @ S
    return S, Sz, Szi, T


def primal_weights(Psi, Phi, Y, lam, mu):
    """w = [Psi'Phi (Phi'Phi + n mu)^{-1} Phi'Psi + n lam]^{-1} Psi'Phi (Phi'Phi + n mu)^{-1} Phi'Y."""
    n = len(Y)
    P = Psi.T @ Phi @ np.linalg.inv(Phi.T @ Phi + n * mu * np.eye(Phi.shape[1]))
    return np.linalg.solve(P @ Phi.T @ Psi + n * lam * np.eye(Psi.shape[1]), P @ Phi.T @ Y)


def bootstrap_terms(Psi, Phi, resid, h, lam, mu):
    """Feature-space vectors of the A, B, C terms of the double-sum bootstrap.

    Each term is written through the normalized covariance operators:
      A = B = T_{mu,lam}^{-1} S*(S_z + mu)^{-1} (Phi' beta / n)
      C     = T_{mu,lam}^{-1} S*(S_z + mu)^{-1} S_z (S_z + mu)^{-1} (Phi' beta / n)
    with beta = diag(resid) (h - h') 1 / sqrt(2); the bootstrap function is A + B - C.
    """
    S, Sz, Szi, T = empirical_operators(Psi, Phi, mu)
    n = Psi.shape[0]
    Ti = np.linalg.inv(T + lam * np.eye(len(T)))
    beta = resid * (h - h.T).sum(axis=1) / np.sqrt(2.0)
    u = Phi.T @ beta / n
    A = Ti @ S.T @ Szi @ u
    B = Ti @ (Psi.T @ Phi / n) @ Szi @ u
    C = Ti @ S.T @ Szi @ Sz @ Szi @ u
    return A, B, C


def explicit_T_spectrum(Psi, Phi, mu):
    _, _, _, T = empirical_operators(Psi, Phi, mu)
    return np.sort(np.linalg.eigvalsh(0.5 * (T + T.T)))[::-1]


def explicit_m(Psi, Phi, lam, mu):
    _, _, _, T = empirical_operators(Psi, Phi, mu)
    Ti = np.linalg.inv(T + lam * np.eye(len(T)))
    return float(np.trace(Ti @ Ti @ T))
