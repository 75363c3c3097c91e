# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled inner loops: windowed RMS, pattern-stack MSE, projected power."""
from libc.math cimport sqrt

import numpy as np


def sliding_rms(const double[::1] x, const ssize_t[::1] starts, Py_ssize_t win_n):
    """RMS of each window x[s : s + win_n]."""
    cdef Py_ssize_t n_win = starts.shape[0]
    cdef Py_ssize_t i, j, s
    cdef double acc
    out_arr = np.empty(n_win, dtype=np.float64)
    cdef double[::1] out = out_arr
    for i in range(n_win):
        s = starts[i]
        acc = 0.0
        for j in range(win_n):
            acc += x[s + j] * x[s + j]
        out[i] = sqrt(acc / win_n)
    return out_arr


def mse_to_stack(const double[:, ::1] pattern, const double[:, :, ::1] stack):
    """Mean squared difference of one pattern against each stacked pattern."""
    cdef Py_ssize_t n_pat = stack.shape[0]
    cdef Py_ssize_t n_ch = stack.shape[1]
    cdef Py_ssize_t n_seg = stack.shape[2]
    cdef Py_ssize_t k, c, t
    cdef double acc, d
    out_arr = np.empty(n_pat, dtype=np.float64)
    cdef double[::1] out = out_arr
    for k in range(n_pat):
        acc = 0.0
        for c in range(n_ch):
            for t in range(n_seg):
                d = stack[k, c, t] - pattern[c, t]
                acc += d * d
        out[k] = acc / (n_ch * n_seg)
    return out_arr


def projected_power(const double[:, ::1] projection, const double[:, :, ::1] covs):
    """Per-segment power of each spatial filter: diag(P C P^T)."""
    cdef Py_ssize_t n_filt = projection.shape[0]
    cdef Py_ssize_t n_ch = projection.shape[1]
    cdef Py_ssize_t n_seg = covs.shape[0]
    cdef Py_ssize_t s, f, i, j
    cdef double acc, row
    out_arr = np.empty((n_seg, n_filt), dtype=np.float64)
    cdef double[:, ::1] out = out_arr
    for s in range(n_seg):
        for f in range(n_filt):
            acc = 0.0
            for i in range(n_ch):
                row = 0.0
                for j in range(n_ch):
                    row += covs[s, i, j] * projection[f, j]
                acc += projection[f, i] * row
            out[s, f] = acc
    return out_arr
