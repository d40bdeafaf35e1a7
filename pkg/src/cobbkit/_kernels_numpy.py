"""Pure-numpy fallbacks for the JIT kernels in _kernels_numba.

Same contracts, no numba dependency. The non-local filters loop over
pixels and vectorize the window work; expect roughly an order of
magnitude slower than the JIT path (see benchmarks/backend_bench.py).
"""

import math

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

WEISZFELD_EPS = 1e-12


def _window_bounds(c, radius, size):
    lo = c - radius if c - radius > 0 else 0
    hi = c + radius if c + radius < size - 1 else size - 1
    return lo, hi


def nl_trimmed(padded, height, width, r, s, h, alpha):
    R = 2 * r + 1
    inv_h2 = 1.0 / (h * h)
    flat = sliding_window_view(padded, (R, R)).reshape(height, width, R * R)
    out = np.empty((height, width))
    for y in range(height):
        y0, y1 = _window_bounds(y, s, height)
        for x in range(width):
            x0, x1 = _window_bounds(x, s, width)
            cands = flat[y0 : y1 + 1, x0 : x1 + 1].reshape(-1, R * R)
            dsum = ((cands - flat[y, x]) ** 2).sum(axis=1)
            wts = np.exp(-dsum * inv_h2)
            vals = cands[:, r * R + r]
            if alpha > 0.0:
                order = np.argsort(vals, kind="mergesort")
                vals = vals[order]
                wts = wts[order]
                total = wts.sum()
                lo = alpha * total * 0.5
                cum = np.cumsum(wts)
                wts = np.clip(np.minimum(cum, total - lo) - np.maximum(cum - wts, lo),
                              0.0, None)
            out[y, x] = (wts * vals).sum() / wts.sum()
    return out


def nl_euclid_median(padded, height, width, r, s, h, tol, max_iter):
    R = 2 * r + 1
    inv_h2 = 1.0 / (h * h)
    flat = sliding_window_view(padded, (R, R)).reshape(height, width, R * R)
    center = r * R + r
    out = np.empty((height, width))
    for y in range(height):
        y0, y1 = _window_bounds(y, s, height)
        for x in range(width):
            x0, x1 = _window_bounds(x, s, width)
            patches = flat[y0 : y1 + 1, x0 : x1 + 1].reshape(-1, R * R)
            dsum = ((patches - flat[y, x]) ** 2).sum(axis=1)
            wts = np.exp(-dsum * inv_h2)
            cur = (wts[:, None] * patches).sum(axis=0) / wts.sum()
            for _ in range(max_iter):
                dist = np.sqrt(((cur - patches) ** 2).sum(axis=1))
                coef = wts / (dist + WEISZFELD_EPS)
                nxt = (coef[:, None] * patches).sum(axis=0) / coef.sum()
                move = math.sqrt(((nxt - cur) ** 2).sum())
                norm = math.sqrt((cur**2).sum())
                cur = nxt
                if move <= tol * (norm + WEISZFELD_EPS):
                    break
            out[y, x] = cur[center]
    return out


def nonmax_suppress(mag, gx, gy):
    height, width = mag.shape
    ang = np.arctan2(gy, gx)
    ang[ang < 0] += math.pi
    d = np.floor(ang / (math.pi / 4.0) + 0.5).astype(np.int64) % 4
    out = np.zeros((height, width), dtype=np.bool_)
    m = mag[1:-1, 1:-1]
    # neighbor pairs per quantized direction: (earlier, later) in scan order
    shifts = {
        0: (mag[1:-1, :-2], mag[1:-1, 2:]),
        1: (mag[:-2, :-2], mag[2:, 2:]),
        2: (mag[:-2, 1:-1], mag[2:, 1:-1]),
        3: (mag[:-2, 2:], mag[2:, :-2]),
    }
    inner = np.zeros_like(m, dtype=np.bool_)
    dc = d[1:-1, 1:-1]
    for q, (a, b) in shifts.items():
        inner |= (dc == q) & (m > 0.0) & (m >= a) & (m > b)
    out[1:-1, 1:-1] = inner
    return out


def hough_votes(xs, ys, cos_t, sin_t, rho_res, n_half):
    n_theta = cos_t.shape[0]
    n_rho = 2 * n_half + 1
    acc = np.zeros((n_rho, n_theta), dtype=np.int64)
    for j in range(n_theta):
        rho = xs * cos_t[j] + ys * sin_t[j]
        ri = np.floor(rho / rho_res + 0.5).astype(np.int64) + n_half
        acc[:, j] = np.bincount(ri, minlength=n_rho)
    return acc
