"""numba-compiled versions of the numpy reference kernels.

Loop order mirrors the numpy path so results agree to rounding; the test
suite checks both backends against each other.
"""

import math

import numpy as np
from numba import njit

from ._common import CIRCLE_DX, CIRCLE_DY, POPCOUNT8, WARP_EDGE_TOL

_JIT = dict(nogil=True, cache=True, fastmath=False)


@njit(**_JIT)
def correlate_replicate(img, weights, anchor_y, anchor_x):
    kh, kw = weights.shape
    h, w = img.shape
    out = np.zeros((h, w), dtype=np.float64)
    for y in range(h):
        for x in range(w):
            acc = 0.0
            for j in range(kh):
                yy = min(max(y - anchor_y + j, 0), h - 1)
                for i in range(kw):
                    xx = min(max(x - anchor_x + i, 0), w - 1)
                    acc += weights[j, i] * img[yy, xx]
            out[y, x] = acc
    return out


@njit(**_JIT)
def warp_affine(img, matrix, out_h, out_w, fill, clamp):
    h, w = img.shape
    out = np.empty((out_h, out_w), dtype=np.float64)
    for oy in range(out_h):
        for ox in range(out_w):
            fxo = float(ox)
            fyo = float(oy)
            sx = matrix[0, 0] * fxo + matrix[0, 1] * fyo + matrix[0, 2]
            sy = matrix[1, 0] * fxo + matrix[1, 1] * fyo + matrix[1, 2]
            if not clamp and (
                sx < -WARP_EDGE_TOL
                or sx > w - 1 + WARP_EDGE_TOL
                or sy < -WARP_EDGE_TOL
                or sy > h - 1 + WARP_EDGE_TOL
            ):
                out[oy, ox] = fill
                continue
            sx = min(max(sx, 0.0), w - 1.0)
            sy = min(max(sy, 0.0), h - 1.0)
            x0 = int(math.floor(sx))
            y0 = int(math.floor(sy))
            x1 = min(x0 + 1, w - 1)
            y1 = min(y0 + 1, h - 1)
            fx = sx - x0
            fy = sy - y0
            top = img[y0, x0] * (1.0 - fx) + img[y0, x1] * fx
            bot = img[y1, x0] * (1.0 - fx) + img[y1, x1] * fx
            out[oy, ox] = top * (1.0 - fy) + bot * fy
    return out


@njit(**_JIT)
def cell_histograms(mag, ang, cell, nbins):
    h, w = mag.shape
    ncy = h // cell
    ncx = w // cell
    hist = np.zeros((ncy, ncx, nbins), dtype=np.float64)
    width = 180.0 / nbins
    for y in range(ncy * cell):
        cy = y // cell
        for x in range(ncx * cell):
            cx = x // cell
            pos = ang[y, x] / width - 0.5
            lo = math.floor(pos)
            frac = pos - lo
            b0 = int(lo) % nbins
            b1 = (b0 + 1) % nbins
            m = mag[y, x]
            hist[cy, cx, b0] += m * (1.0 - frac)
            hist[cy, cx, b1] += m * frac
    return hist


@njit(**_JIT)
def fast_scores(img, threshold, arc):
    h, w = img.shape
    scores = np.zeros((h, w), dtype=np.float64)
    bright = np.zeros(16 + arc - 1, dtype=np.bool_)
    dark = np.zeros(16 + arc - 1, dtype=np.bool_)
    for y in range(3, h - 3):
        for x in range(3, w - 3):
            c = img[y, x]
            sb = 0.0
            sd = 0.0
            for k in range(16):
                v = img[y + CIRCLE_DY[k], x + CIRCLE_DX[k]]
                bright[k] = v > c + threshold
                dark[k] = v < c - threshold
                sb += (v - c) if bright[k] else 0.0
                sd += (c - v) if dark[k] else 0.0
            for k in range(arc - 1):
                bright[16 + k] = bright[k]
                dark[16 + k] = dark[k]
            corner = False
            run_b = 0
            run_d = 0
            for k in range(16 + arc - 1):
                run_b = run_b + 1 if bright[k] else 0
                run_d = run_d + 1 if dark[k] else 0
                if run_b >= arc or run_d >= arc:
                    corner = True
                    break
            if corner:
                scores[y, x] = max(sb - threshold, sd - threshold)
    return scores


@njit(**_JIT)
def brief_bits(img, xs, ys, angle_idx, tables):
    n = xs.shape[0]
    nbits = tables.shape[1]
    out = np.zeros((n, (nbits + 7) // 8), dtype=np.uint8)
    for p in range(n):
        t = tables[angle_idx[p]]
        x = xs[p]
        y = ys[p]
        for i in range(nbits):
            if img[y + t[i, 1], x + t[i, 0]] < img[y + t[i, 3], x + t[i, 2]]:
                out[p, i // 8] |= np.uint8(1 << (7 - i % 8))
    return out


@njit(**_JIT)
def hamming_matrix(a, b):
    na = a.shape[0]
    nb = b.shape[0]
    nbytes = a.shape[1]
    out = np.zeros((na, nb), dtype=np.int64)
    for i in range(na):
        for j in range(nb):
            d = 0
            for k in range(nbytes):
                d += POPCOUNT8[a[i, k] ^ b[j, k]]
            out[i, j] = d
    return out
