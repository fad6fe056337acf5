# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled inner loops for Gram construction.

Mirrors :mod:`kivband._fallback` exactly; both are checked against each
other in the test suite.
"""

import numpy as np
cimport numpy as cnp
from libc.math cimport exp

cnp.import_array()


cdef cnp.int8_t[:, ::1] _pair_signs(const cnp.int64_t[:, ::1] r):
    """Sign of r[s] - r[t] for every item pair s < t, one row per ranking."""
    cdef Py_ssize_t n = r.shape[0], m = r.shape[1], i, s, t, k
    cdef cnp.int64_t d
    out = np.empty((n, m * (m - 1) // 2), dtype=np.int8)
    cdef cnp.int8_t[:, ::1] o = out
    for i in range(n):
        k = 0
        for s in range(m):
            for t in range(s + 1, m):
                d = r[i, s] - r[i, t]
                o[i, k] = (d > 0) - (d < 0)
                k += 1
    return o


def kendall_counts(const cnp.int64_t[:, ::1] a, const cnp.int64_t[:, ::1] b):
    """Pairwise disagreement counts between two stacks of rank vectors."""
    cdef cnp.int8_t[:, ::1] sa = _pair_signs(a)
    cdef cnp.int8_t[:, ::1] sb = _pair_signs(b)
    cdef Py_ssize_t na = sa.shape[0], nb = sb.shape[0], npairs = sa.shape[1]
    cdef Py_ssize_t i, j, k
    cdef cnp.int64_t count
    cdef const cnp.int8_t* ra
    cdef const cnp.int8_t* rb
    out = np.zeros((na, nb), dtype=np.int64)
    cdef cnp.int64_t[:, ::1] o = out
    if npairs == 0:
        return out
    for i in range(na):
        ra = &sa[i, 0]
        for j in range(nb):
            rb = &sb[j, 0]
            count = 0
            # discordant pairs have opposite signs
            for k in range(npairs):
                count += (ra[k] * rb[k]) < 0
            o[i, j] = count
    return out


def kendall_gram(const cnp.int64_t[:, ::1] a, const cnp.int64_t[:, ::1] b):
    """exp(-N) for every pair of rows."""
    cdef cnp.int64_t[:, ::1] c = kendall_counts(a, b)
    cdef Py_ssize_t i, j
    out = np.empty((c.shape[0], c.shape[1]), dtype=np.float64)
    cdef double[:, ::1] o = out
    for i in range(c.shape[0]):
        for j in range(c.shape[1]):
            o[i, j] = exp(-<double>c[i, j])
    return out


def sq_dists(const double[:, ::1] a, const double[:, ::1] b):
    """Squared Euclidean distances, accumulated coordinate by coordinate."""
    cdef Py_ssize_t na = a.shape[0], nb = b.shape[0], p = a.shape[1]
    cdef Py_ssize_t i, j, k
    cdef double acc, d
    out = np.empty((na, nb), dtype=np.float64)
    cdef double[:, ::1] o = out
    for i in range(na):
        for j in range(nb):
            acc = 0.0
            for k in range(p):
                d = a[i, k] - b[j, k]
                acc += d * d
            o[i, j] = acc
    return out
