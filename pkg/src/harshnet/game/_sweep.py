"""Pure-Python best-response solver; reference twin of ``_csweep.pyx``.

Both implementations perform the same floating-point operations in the same
order, so they return bit-identical results.
"""

from __future__ import annotations

import math

import numpy as np

LN2 = math.log(2.0)


def _rates(g, p, sigma2, bandwidth, out):
    n = len(p)
    for l in range(n):
        interference = 0.0
        row = g[l]
        for k in range(n):
            if k != l:
                interference += row[k] * p[k]
        out[l] = bandwidth * math.log2(1.0 + row[l] * p[l] / (sigma2 + interference))


def solve(gains, weights, bandwidth, sigma2, p_max, lam, p_init, eps, max_iter):
    """Gauss-Seidel best-response iteration.

    Returns ``(powers, iterations, converged, diffs, power_trace, rate_trace)``
    where row 0 of each trace holds the initial state and ``diffs[j-1]`` is
    the Euclidean norm of the rate change made by sweep ``j``.
    """
    g = np.asarray(gains, dtype=float).tolist()
    w = [float(v) for v in weights]
    p = [float(v) for v in p_init]
    n = len(p)
    bandwidth = float(bandwidth)
    sigma2 = float(sigma2)
    p_max = float(p_max)
    lam = float(lam)
    power_trace = np.zeros((max_iter + 1, n))
    rate_trace = np.zeros((max_iter + 1, n))
    diffs = np.zeros(max_iter)
    prev = [0.0] * n
    cur = [0.0] * n
    _rates(g, p, sigma2, bandwidth, prev)
    power_trace[0] = p
    rate_trace[0] = prev
    converged = False
    it = 0
    while it < max_iter:
        it += 1
        for l in range(n):
            row = g[l]
            interference = 0.0
            for k in range(n):
                if k != l:
                    interference += row[k] * p[k]
            if lam > 0.0:
                target = w[l] * bandwidth / (lam * LN2) - (sigma2 + interference) / row[l]
            else:
                target = math.inf
            if target < 0.0:
                target = 0.0
            elif target > p_max:
                target = p_max
            p[l] = target
        _rates(g, p, sigma2, bandwidth, cur)
        acc = 0.0
        for l in range(n):
            d = cur[l] - prev[l]
            acc += d * d
        diff = math.sqrt(acc)
        diffs[it - 1] = diff
        power_trace[it] = p
        rate_trace[it] = cur
        prev, cur = cur, prev
        if diff < eps:
            converged = True
            break
    return (np.array(p), it, converged, diffs[:it].copy(),
            power_trace[:it + 1].copy(), rate_trace[:it + 1].copy())
