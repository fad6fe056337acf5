"""Pure-numpy versions of the routines in ``_core.pyx``."""

from __future__ import annotations

import numpy as np


def kendall_counts(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    a = np.asarray(a, dtype=np.int64)
    b = np.asarray(b, dtype=np.int64)
    m = a.shape[1]
    s, t = np.triu_indices(m, k=1)
    # sign of each item pair's order, shape (rows, pairs)
    sa = np.sign(a[:, s] - a[:, t]).astype(np.int8)
    sb = np.sign(b[:, s] - b[:, t]).astype(np.int8)
    out = np.empty((a.shape[0], b.shape[0]), dtype=np.int64)
    for i in range(a.shape[0]):
        out[i] = np.count_nonzero(sa[i] * sb < 0, axis=1)
    return out


def kendall_gram(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return np.exp(-kendall_counts(a, b).astype(np.float64))


def sq_dists(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    diff = a[:, None, :] - b[None, :, :]
    return np.einsum("ijk,ijk->ij", diff, diff)
