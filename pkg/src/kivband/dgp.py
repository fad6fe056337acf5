"""Synthetic instrumental-variable data with a known structural function.

    Z ~ N(0, I_q)                  instruments
    u ~ N(0, 1)                    unobserved confounder
    X = Z Pi + sqrt(1 - rho) v + sqrt(rho) u 1_p
    eps = sigma * tanh(rho u + sqrt(1 - rho^2) w)
    Y = h0(X) + eps

eps depends on (u, w) only, so E(eps | Z) = 0, |eps| <= sigma, and for
rho > 0 eps is correlated with X through u. ``z_equals_x`` replaces Z by
X (a smoke-test design; only meaningful with rho = 0). None of these constants come
from a reference design; they are test plumbing.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import ConfigError
from .estimator import Dataset


def strong_first_stage(q: int, p: int, rng: np.random.Generator) -> np.ndarray:
    """q x p matrix with singular values spread evenly over [0.8, 1.2]."""
    r = min(p, q)
    U, _ = np.linalg.qr(rng.standard_normal((q, q)))
    V, _ = np.linalg.qr(rng.standard_normal((p, p)))
    s = np.linspace(0.8, 1.2, r) if r > 1 else np.array([1.0])
    return U[:, :r] @ np.diag(s) @ V[:, :r].T


@dataclass(frozen=True)
class DgpSpec:
    kind: str = "linear"
    n: int = 200
    p: int = 2
    q: int = 3
    rho: float = 0.5
    sigma: float = 1.0
    seed: int = 0
    z_equals_x: bool = False
    Pi: np.ndarray | None = field(default=None, repr=False)
    gamma: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self) -> None:
        if self.kind not in ("linear", "nonlinear"):
            raise ConfigError(f"kind must be 'linear' or 'nonlinear', got {self.kind!r}")
        if int(self.n) < 2 or int(self.p) < 1 or int(self.q) < 1:
            raise ConfigError(f"need n >= 2, p >= 1, q >= 1 (got n={self.n}, p={self.p}, q={self.q})")
        if not (0.0 <= self.rho < 1.0):
            raise ConfigError(f"endogeneity rho must lie in [0, 1), got {self.rho}")
        if not self.sigma > 0:
            raise ConfigError(f"noise bound sigma must be > 0, got {self.sigma}")
        if self.Pi is not None and np.shape(self.Pi) != (self.q, self.p):
            raise ConfigError(f"Pi must have shape ({self.q}, {self.p}), got {np.shape(self.Pi)}")
        if self.gamma is not None and np.shape(self.gamma) != (self.p,):
            raise ConfigError(f"gamma must have length {self.p}")

    def to_dict(self) -> dict:
        d = {k: getattr(self, k) for k in ("kind", "n", "p", "q", "rho", "sigma", "seed", "z_equals_x")}
        if self.Pi is not None:
            d["Pi"] = np.asarray(self.Pi).tolist()
        if self.gamma is not None:
            d["gamma"] = np.asarray(self.gamma).tolist()
        return d


def structural_coefficients(spec: DgpSpec) -> np.ndarray:
    if spec.gamma is not None:
        return np.asarray(spec.gamma, dtype=np.float64)
    return np.ones(spec.p)


def make_h0(spec: DgpSpec) -> Callable[[np.ndarray], np.ndarray]:
    gamma = structural_coefficients(spec)
    if spec.kind == "linear":
        return lambda X: np.atleast_2d(X) @ gamma

    def h0(X):
        X = np.atleast_2d(X)
        return np.sin(X @ gamma) + 0.5 * np.tanh(X[:, 0])

    return h0


def simulate_iv(spec: DgpSpec) -> tuple[Dataset, Callable[[np.ndarray], np.ndarray]]:
    """Draw one dataset; identical specs give bit-identical data."""
    rng = np.random.default_rng(np.random.SeedSequence(int(spec.seed)))
    n, p, q, rho = int(spec.n), int(spec.p), int(spec.q), float(spec.rho)
    Pi = np.asarray(spec.Pi, dtype=np.float64) if spec.Pi is not None else strong_first_stage(q, p, rng)
    Z = rng.standard_normal((n, q))
    u = rng.standard_normal(n)
    v = rng.standard_normal((n, p))
    w = rng.standard_normal(n)
    X = Z @ Pi + np.sqrt(1.0 - rho) * v + np.sqrt(rho) * u[:, None]
    eps = spec.sigma * np.tanh(rho * u + np.sqrt(1.0 - rho**2) * w)
    h0 = make_h0(spec)
    Y = h0(X) + eps
    if spec.z_equals_x:
        # degenerate design: the covariate instruments itself
        Z = X.copy()
    return Dataset(Z, X, Y), h0
