# cython: language_level=3, boundscheck=False, wraparound=False, initializedcheck=False
"""Compiled best-response solver, same arithmetic as ``_sweep.solve``."""

import numpy as np
cimport numpy as cnp
from libc.math cimport log2, sqrt, INFINITY, log

cnp.import_array()


cdef inline void _rates(const double[:, ::1] g, const double[::1] p, double sigma2,
                        double bandwidth, double[:, ::1] out, Py_ssize_t row) noexcept nogil:
    cdef Py_ssize_t n = p.shape[0]
    cdef Py_ssize_t l, k
    cdef double interference
    for l in range(n):
        interference = 0.0
        for k in range(n):
            if k != l:
                interference += g[l, k] * p[k]
        out[row, l] = bandwidth * log2(1.0 + g[l, l] * p[l] / (sigma2 + interference))


def solve(gains, weights, double bandwidth, double sigma2, double p_max, double lam,
          p_init, double eps, Py_ssize_t max_iter):
    cdef const double[:, ::1] g = np.ascontiguousarray(gains, dtype=np.float64)
    cdef const double[::1] w = np.ascontiguousarray(weights, dtype=np.float64)
    p_arr = np.array(p_init, dtype=np.float64)
    cdef double[::1] p = p_arr
    cdef Py_ssize_t n = p.shape[0]
    power_arr = np.zeros((max_iter + 1, n))
    rate_arr = np.zeros((max_iter + 1, n))
    diff_arr = np.zeros(max_iter)
    cdef double[:, ::1] power_trace = power_arr
    cdef double[:, ::1] rate_trace = rate_arr
    cdef double[::1] diffs = diff_arr
    cdef double[:, ::1] buf = np.zeros((2, n))
    cdef Py_ssize_t pi = 0, ci = 1
    cdef double ln2 = log(2.0)
    cdef double interference, target, acc, d, diff
    cdef Py_ssize_t l, k, it = 0
    cdef bint converged = False

    with nogil:
        _rates(g, p, sigma2, bandwidth, buf, pi)
        for l in range(n):
            power_trace[0, l] = p[l]
            rate_trace[0, l] = buf[pi, l]
        while it < max_iter:
            it += 1
            for l in range(n):
                interference = 0.0
                for k in range(n):
                    if k != l:
                        interference += g[l, k] * p[k]
                if lam > 0.0:
                    target = w[l] * bandwidth / (lam * ln2) - (sigma2 + interference) / g[l, l]
                else:
                    target = INFINITY
                if target < 0.0:
                    target = 0.0
                elif target > p_max:
                    target = p_max
                p[l] = target
            _rates(g, p, sigma2, bandwidth, buf, ci)
            acc = 0.0
            for l in range(n):
                d = buf[ci, l] - buf[pi, l]
                acc += d * d
            diff = sqrt(acc)
            diffs[it - 1] = diff
            for l in range(n):
                power_trace[it, l] = p[l]
                rate_trace[it, l] = buf[ci, l]
            pi, ci = ci, pi
            if diff < eps:
                converged = True
                break

    return (p_arr, it, converged, diff_arr[:it].copy(),
            power_arr[:it + 1].copy(), rate_arr[:it + 1].copy())
