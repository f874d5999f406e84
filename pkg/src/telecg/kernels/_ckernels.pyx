# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled twins of the hot kernels; see _reference.py for the semantics."""

import numpy as np

cimport numpy as cnp

cnp.import_array()


def moving_window_integral(const double[::1] x, Py_ssize_t width):
    cdef Py_ssize_t n = x.shape[0]
    out_arr = np.empty(n, dtype=np.float64)
    cdef double[::1] out = out_arr
    cdef double acc = 0.0
    cdef Py_ssize_t i
    for i in range(n):
        acc += x[i]
        if i >= width:
            acc -= x[i - width]
            out[i] = acc / width
        else:
            out[i] = acc / (i + 1)
    return out_arr


def variable_window_mean(const double[::1] x, const cnp.int64_t[::1] half_widths):
    cdef Py_ssize_t n = x.shape[0]
    csum_arr = np.empty(n + 1, dtype=np.float64)
    cdef double[::1] csum = csum_arr
    cdef Py_ssize_t i
    csum[0] = 0.0
    for i in range(n):
        csum[i + 1] = csum[i] + x[i]
    out_arr = np.empty(n, dtype=np.float64)
    cdef double[::1] out = out_arr
    cdef Py_ssize_t lo, hi
    cdef cnp.int64_t h
    for i in range(n):
        h = half_widths[i]
        lo = i - h
        if lo < 0:
            lo = 0
        hi = i + h + 1
        if hi > n:
            hi = n
        out[i] = (csum[hi] - csum[lo]) / (hi - lo)
    return out_arr


def local_maxima(const double[::1] x):
    cdef Py_ssize_t n = x.shape[0]
    if n < 3:
        return np.empty(0, dtype=np.int64)
    idx_arr = np.empty(n, dtype=np.int64)
    cdef cnp.int64_t[::1] idx = idx_arr
    cdef Py_ssize_t i, count = 0
    for i in range(1, n - 1):
        if x[i] > x[i - 1] and x[i] >= x[i + 1]:
            idx[count] = i
            count += 1
    return idx_arr[:count].copy()
