"""Explicit finite-dimensional feature maps for the linear and polynomial kernels.

Used by the feature-space diagnostics (which need the operators themselves,
not just their Gram representations) and as an independent check on the
kernel-trick code paths.
"""

from __future__ import annotations

import itertools
import math

import numpy as np

from .errors import ConfigError
from .kernels import KernelSpec, as_points


def _multi_indices(p: int, degree: int):
    """All exponent tuples a in N^p with |a| <= degree."""
    for total in range(degree + 1):
        for combo in itertools.combinations_with_replacement(range(p), total):
            a = [0] * p
            for k in combo:
                a[k] += 1
            yield tuple(a)


def polynomial_features(X, degree: int, offset: float = 0.0) -> np.ndarray:
    """Feature matrix Psi with Psi @ Psi.T == (X X^T + offset)^degree.

    Has C(p + degree, degree) columns. Expanding the binomial and the
    multinomial gives weight C(d, |a|) * c^(d-|a|) * |a|! / prod(a_k!) on the
    monomial x^a.
    """
    X = np.asarray(X, dtype=np.float64)
    if X.ndim == 1:
        X = X[:, None]
    n, p = X.shape
    cols = []
    for a in _multi_indices(p, degree):
        k = sum(a)
        coef = math.comb(degree, k) * math.factorial(k)
        for ak in a:
            coef /= math.factorial(ak)
        if offset == 0.0:
            weight = coef if k == degree else 0.0
        else:
            weight = coef * offset ** (degree - k)
        cols.append(math.sqrt(weight) * np.prod(X ** np.asarray(a, dtype=np.float64), axis=1))
    return np.column_stack(cols) if cols else np.zeros((n, 0))


def feature_map(spec: KernelSpec, rows) -> np.ndarray:
    """Explicit features for a linear or polynomial kernel."""
    if spec.family == "linear":
        return as_points(spec, rows).copy()
    if spec.family == "polynomial":
        return polynomial_features(as_points(spec, rows), spec.degree, spec.offset)
    raise ConfigError(f"no explicit finite feature map for the {spec.family} kernel")
