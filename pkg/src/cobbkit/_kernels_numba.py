"""JIT-compiled kernels for the per-pixel hot loops.

Each kernel has a pure-numpy twin in _kernels_numpy with identical
semantics; cobbkit.kernels picks between them. Outer loops parallelize
over rows/bins only, so results do not depend on thread scheduling.
"""

import math

import numpy as np
from numba import njit, prange

WEISZFELD_EPS = 1e-12


@njit(cache=True, parallel=True)
def nl_trimmed(padded, height, width, r, s, h, alpha):
    """Windowed non-local average with two-sided trimming of candidate values.

    padded is the image edge-replicated by r on every side. For each pixel,
    candidates are the pixels of the border-clipped window of radius s;
    patch distance is the summed squared difference over (2r+1)^2 offsets.
    Trimming drops alpha/2 of the candidate weight mass from each value
    tail (boundary candidates keep partial weight); alpha = 0 reduces to
    the plain weighted mean (classical non-local means).
    """
    R = 2 * r + 1
    inv_h2 = 1.0 / (h * h)
    nmax = (2 * s + 1) * (2 * s + 1)
    out = np.empty((height, width))
    for y in prange(height):
        vals = np.empty(nmax)
        wts = np.empty(nmax)
        for x in range(width):
            y0 = y - s if y - s > 0 else 0
            y1 = y + s if y + s < height - 1 else height - 1
            x0 = x - s if x - s > 0 else 0
            x1 = x + s if x + s < width - 1 else width - 1
            n = 0
            for qy in range(y0, y1 + 1):
                for qx in range(x0, x1 + 1):
                    dsum = 0.0
                    for dy in range(-r, r + 1):
                        for dx in range(-r, r + 1):
                            diff = (
                                padded[y + r + dy, x + r + dx]
                                - padded[qy + r + dy, qx + r + dx]
                            )
                            dsum += diff * diff
                    vals[n] = padded[qy + r, qx + r]
                    wts[n] = math.exp(-dsum * inv_h2)
                    n += 1
            num = 0.0
            den = 0.0
            if alpha == 0.0:
                for i in range(n):
                    num += wts[i] * vals[i]
                    den += wts[i]
            else:
                total = 0.0
                for i in range(n):
                    total += wts[i]
                lo = alpha * total * 0.5
                hi = total - lo
                order = np.argsort(vals[:n], kind="mergesort")
                cum = 0.0
                for i in range(n):
                    j = order[i]
                    c0 = cum
                    cum += wts[j]
                    top = cum if cum < hi else hi
                    bot = c0 if c0 > lo else lo
                    kept = top - bot
                    if kept > 0.0:
                        num += kept * vals[j]
                        den += kept
            out[y, x] = num / den
    return out


@njit(cache=True, parallel=True)
def nl_euclid_median(padded, height, width, r, s, h, tol, max_iter):
    """Windowed non-local filter aggregating by weighted geometric patch median.

    The median patch minimizes sum_q w(p,q) * ||P - P(q)||_2, found by
    iteratively re-weighted averaging from the weighted-mean patch. The
    output pixel is the median patch's center value.
    """
    R = 2 * r + 1
    P = R * R
    center = r * R + r
    inv_h2 = 1.0 / (h * h)
    nmax = (2 * s + 1) * (2 * s + 1)
    out = np.empty((height, width))
    for y in prange(height):
        patches = np.empty((nmax, P))
        wts = np.empty(nmax)
        cur = np.empty(P)
        nxt = np.empty(P)
        for x in range(width):
            y0 = y - s if y - s > 0 else 0
            y1 = y + s if y + s < height - 1 else height - 1
            x0 = x - s if x - s > 0 else 0
            x1 = x + s if x + s < width - 1 else width - 1
            n = 0
            for qy in range(y0, y1 + 1):
                for qx in range(x0, x1 + 1):
                    dsum = 0.0
                    m = 0
                    for dy in range(-r, r + 1):
                        for dx in range(-r, r + 1):
                            pv = padded[y + r + dy, x + r + dx]
                            qv = padded[qy + r + dy, qx + r + dx]
                            diff = pv - qv
                            dsum += diff * diff
                            patches[n, m] = qv
                            m += 1
                    wts[n] = math.exp(-dsum * inv_h2)
                    n += 1
            wsum = 0.0
            for j in range(P):
                cur[j] = 0.0
            for i in range(n):
                wsum += wts[i]
                for j in range(P):
                    cur[j] += wts[i] * patches[i, j]
            for j in range(P):
                cur[j] /= wsum
            for _ in range(max_iter):
                csum = 0.0
                for j in range(P):
                    nxt[j] = 0.0
                for i in range(n):
                    dist = 0.0
                    for j in range(P):
                        diff = cur[j] - patches[i, j]
                        dist += diff * diff
                    coef = wts[i] / (math.sqrt(dist) + WEISZFELD_EPS)
                    csum += coef
                    for j in range(P):
                        nxt[j] += coef * patches[i, j]
                move = 0.0
                norm = 0.0
                for j in range(P):
                    nxt[j] /= csum
                    dj = nxt[j] - cur[j]
                    move += dj * dj
                    norm += cur[j] * cur[j]
                    cur[j] = nxt[j]
                if math.sqrt(move) <= tol * (math.sqrt(norm) + WEISZFELD_EPS):
                    break
            out[y, x] = cur[center]
    return out


@njit(cache=True)
def nonmax_suppress(mag, gx, gy):
    """Thin gradient magnitude to 1-px ridges along 4 quantized directions.

    Ties resolve toward the pixel later in scan order: a pixel survives
    when it is >= its earlier neighbor and > its later neighbor. The
    outermost ring is always suppressed.
    """
    height, width = mag.shape
    out = np.zeros((height, width), dtype=np.bool_)
    for y in range(1, height - 1):
        for x in range(1, width - 1):
            m = mag[y, x]
            if m <= 0.0:
                continue
            ang = math.atan2(gy[y, x], gx[y, x])
            if ang < 0.0:
                ang += math.pi
            d = int(math.floor(ang / (math.pi / 4.0) + 0.5)) % 4
            if d == 0:
                a = mag[y, x - 1]
                b = mag[y, x + 1]
            elif d == 1:
                a = mag[y - 1, x - 1]
                b = mag[y + 1, x + 1]
            elif d == 2:
                a = mag[y - 1, x]
                b = mag[y + 1, x]
            else:
                a = mag[y - 1, x + 1]
                b = mag[y + 1, x - 1]
            if m >= a and m > b:
                out[y, x] = True
    return out


@njit(cache=True, parallel=True)
def hough_votes(xs, ys, cos_t, sin_t, rho_res, n_half):
    """Accumulate rho-theta votes: one vote per edge pixel per theta bin."""
    n_theta = cos_t.shape[0]
    n_pts = xs.shape[0]
    acc = np.zeros((2 * n_half + 1, n_theta), dtype=np.int64)
    for j in prange(n_theta):
        c = cos_t[j]
        sn = sin_t[j]
        for i in range(n_pts):
            rho = xs[i] * c + ys[i] * sn
            ri = int(math.floor(rho / rho_res + 0.5)) + n_half
            acc[ri, j] += 1
    return acc
