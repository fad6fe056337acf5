"""Kernel evaluation and Gram matrices.

Four families are supported:

* ``linear``      k(a, b) = a.b
* ``polynomial``  k(a, b) = (a.b + c)^d
* ``gaussian``    k(a, b) = exp(-|a - b|^2 / (2 l^2))
* ``kendall``     k(a, b) = exp(-N(a, b)), N = number of discordant item pairs

Vector points are rows of a float array. Rankings are rows of an integer
array where position ``i`` holds the rank of item ``i`` (a permutation of
``1..m``).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import _backend
from .errors import ConfigError, InputError

FAMILIES = ("linear", "polynomial", "gaussian", "kendall")

_ALIASES = {
    "linear": "linear",
    "lin": "linear",
    "poly": "polynomial",
    "polynomial": "polynomial",
    "gaussian": "gaussian",
    "rbf": "gaussian",
    "kendall": "kendall",
}


@dataclass(frozen=True)
class KernelSpec:
    """A kernel family together with its parameters.

    Only the parameters relevant to ``family`` are used; the others keep
    their defaults and are ignored.
    """

    family: str
    degree: int = 2
    offset: float = 0.0
    lengthscale: float = 1.0

    def __post_init__(self) -> None:
        fam = _ALIASES.get(str(self.family).lower())
        if fam is None:
            raise ConfigError(f"unknown kernel family {self.family!r}; expected one of {FAMILIES}")
        object.__setattr__(self, "family", fam)
        if fam == "polynomial":
            if int(self.degree) != self.degree or self.degree < 1:
                raise ConfigError(f"polynomial degree must be a positive integer, got {self.degree}")
            if not (self.offset >= 0 and math.isfinite(self.offset)):
                raise ConfigError(f"polynomial offset must be >= 0, got {self.offset}")
            object.__setattr__(self, "degree", int(self.degree))
            object.__setattr__(self, "offset", float(self.offset))
        if fam == "gaussian":
            if not (self.lengthscale > 0 and math.isfinite(self.lengthscale)):
                raise ConfigError(f"gaussian lengthscale must be > 0, got {self.lengthscale}")
            object.__setattr__(self, "lengthscale", float(self.lengthscale))

    @property
    def is_ranking(self) -> bool:
        return self.family == "kendall"

    @property
    def is_bounded(self) -> bool:
        """True when sup_x k(x, x) is finite over the whole input space."""
        return self.family in ("gaussian", "kendall")

    @classmethod
    def parse(cls, text: str) -> "KernelSpec":
        """Parse ``"linear"``, ``"poly:d=2,c=1"``, ``"gaussian:l=0.5"`` or ``"kendall"``."""
        name, _, rest = text.strip().partition(":")
        kwargs: dict = {}
        for item in filter(None, (s.strip() for s in rest.split(","))):
            key, eq, val = item.partition("=")
            if not eq:
                raise ConfigError(f"bad kernel parameter {item!r} in {text!r}")
            key = key.strip().lower()
            try:
                if key in ("d", "degree"):
                    kwargs["degree"] = int(val)
                elif key in ("c", "offset"):
                    kwargs["offset"] = float(val)
                elif key in ("l", "ell", "lengthscale"):
                    kwargs["lengthscale"] = float(val)
                else:
                    raise ConfigError(f"unknown kernel parameter {key!r} in {text!r}")
            except ValueError as exc:
                if isinstance(exc, ConfigError):
                    raise
                raise ConfigError(f"bad kernel parameter {item!r} in {text!r}") from exc
        return cls(name, **kwargs)

    def __str__(self) -> str:
        if self.family == "polynomial":
            return f"polynomial:d={self.degree},c={self.offset!r}"
        if self.family == "gaussian":
            return f"gaussian:l={self.lengthscale!r}"
        return self.family


# ---------------------------------------------------------------------------
# Rankings
# ---------------------------------------------------------------------------


def parse_ranking(text: str) -> np.ndarray:
    """``"3|1|2"`` -> array([3, 1, 2])."""
    try:
        perm = np.array([int(tok) for tok in text.strip().split("|")], dtype=np.int64)
    except ValueError as exc:
        raise InputError(f"ranking {text!r} is not a '|'-separated list of integers") from exc
    check_rankings(perm[None, :])
    return perm


def format_ranking(perm) -> str:
    return "|".join(str(int(v)) for v in perm)


def check_rankings(arr: np.ndarray) -> np.ndarray:
    """Validate that every row is a permutation of 1..m with m >= 2."""
    arr = np.asarray(arr)
    if arr.ndim != 2:
        raise InputError("rankings must be a 2-D array (one ranking per row)")
    m = arr.shape[1]
    if m < 2:
        raise InputError("rankings need at least two items")
    if not np.issubdtype(arr.dtype, np.integer):
        if not np.all(np.isfinite(arr)) or np.any(arr != np.round(arr)):
            raise InputError("rankings must be integer valued")
    arr = arr.astype(np.int64)
    expected = np.arange(1, m + 1)
    if not np.array_equal(np.sort(arr, axis=1), np.broadcast_to(expected, arr.shape)):
        raise InputError(f"every ranking must be a permutation of 1..{m}")
    return np.ascontiguousarray(arr)


def kendall_disagreements(a, b) -> int:
    """Number of item pairs ordered oppositely by rankings ``a`` and ``b``."""
    a = check_rankings(np.atleast_2d(a))[0]
    b = check_rankings(np.atleast_2d(b))[0]
    if a.shape != b.shape:
        raise InputError(f"rankings have different lengths ({a.size} vs {b.size})")
    m = a.size
    count = 0
    for i in range(m):
        for j in range(i + 1, m):
            if (a[i] - a[j]) * (b[i] - b[j]) < 0:
                count += 1
    return count


# ---------------------------------------------------------------------------
# Evaluation
# ---------------------------------------------------------------------------


def as_points(spec: KernelSpec, rows) -> np.ndarray:
    """Coerce ``rows`` to the 2-D array layout the given family expects."""
    if spec.is_ranking:
        arr = np.asarray(rows)
        if arr.ndim == 1:
            arr = arr[None, :]
        if arr.size == 0:
            raise InputError("empty point list")
        return check_rankings(arr)
    try:
        arr = np.asarray(rows, dtype=np.float64)
    except (TypeError, ValueError) as exc:
        raise InputError("points must be numeric vectors") from exc
    if arr.ndim == 1:
        arr = arr[:, None]
    if arr.ndim != 2 or arr.shape[0] == 0 or arr.shape[1] == 0:
        raise InputError("points must be a nonempty 2-D array")
    if not np.all(np.isfinite(arr)):
        raise InputError("points contain non-finite values")
    return np.ascontiguousarray(arr)


def gram_matrix(spec: KernelSpec, rows_a, rows_b=None) -> np.ndarray:
    """Kernel matrix with entry (i, j) = k(rows_a[i], rows_b[j]).

    With ``rows_b`` omitted the result is the (exactly symmetric) Gram
    matrix of ``rows_a`` with itself.
    """
    same = rows_b is None or rows_b is rows_a
    a = as_points(spec, rows_a)
    b = a if same else as_points(spec, rows_b)
    if a.shape[1] != b.shape[1]:
        raise InputError(f"point dimensions differ ({a.shape[1]} vs {b.shape[1]})")

    fam = spec.family
    if fam == "linear":
        g = a @ b.T
    elif fam == "polynomial":
        g = (a @ b.T + spec.offset) ** spec.degree
    elif fam == "gaussian":
        g = np.exp(-_backend.sq_dists(a, b) / (2.0 * spec.lengthscale**2))
    else:
        g = _backend.kendall_gram(a, b)

    if same:
        # mirror the upper triangle so symmetry is exact, not just up to rounding
        g = np.triu(g) + np.triu(g, 1).T
    return g


def eval_kernel(spec: KernelSpec, a, b) -> float:
    a = np.asarray(a)
    b = np.asarray(b)
    if a.ndim != 1 or b.ndim != 1:
        raise InputError("eval_kernel takes single points (1-D)")
    if a.shape != b.shape:
        raise InputError(f"dimension mismatch ({a.size} vs {b.size})")
    if spec.is_ranking:
        return math.exp(-kendall_disagreements(a, b))
    return float(gram_matrix(spec, a[None, :], b[None, :])[0, 0])


def kernel_diag(spec: KernelSpec, rows) -> np.ndarray:
    """k(x, x) for every row."""
    pts = as_points(spec, rows)
    if spec.family in ("gaussian", "kendall"):
        return np.ones(pts.shape[0])
    sq = np.einsum("ij,ij->i", pts, pts)
    if spec.family == "linear":
        return sq
    return (sq + spec.offset) ** spec.degree


def kernel_bound(spec: KernelSpec, eval_points: Sequence | np.ndarray) -> float:
    """Estimate of kappa = sup_x sqrt(k(x, x)) over the supplied points.

    Exact (= 1) for the bounded families; data-dependent otherwise.
    """
    diag = kernel_diag(spec, eval_points)
    if spec.is_bounded:
        return 1.0
    return float(np.sqrt(np.max(diag)))
