"""Reference implementations in plain numpy."""

import numpy as np

from ._common import CIRCLE_DX, CIRCLE_DY, POPCOUNT8, WARP_EDGE_TOL


def correlate_replicate(img, weights, anchor_y, anchor_x):
    kh, kw = weights.shape
    h, w = img.shape
    padded = np.pad(
        img,
        ((anchor_y, kh - 1 - anchor_y), (anchor_x, kw - 1 - anchor_x)),
        mode="edge",
    )
    out = np.zeros((h, w), dtype=np.float64)
    for j in range(kh):
        for i in range(kw):
            out += weights[j, i] * padded[j : j + h, i : i + w]
    return out


def warp_affine(img, matrix, out_h, out_w, fill, clamp):
    h, w = img.shape
    ys, xs = np.mgrid[0:out_h, 0:out_w].astype(np.float64)
    sx = matrix[0, 0] * xs + matrix[0, 1] * ys + matrix[0, 2]
    sy = matrix[1, 0] * xs + matrix[1, 1] * ys + matrix[1, 2]
    if clamp:
        inside = np.ones((out_h, out_w), dtype=bool)
    else:
        inside = (
            (sx >= -WARP_EDGE_TOL)
            & (sx <= w - 1 + WARP_EDGE_TOL)
            & (sy >= -WARP_EDGE_TOL)
            & (sy <= h - 1 + WARP_EDGE_TOL)
        )
    sx = np.clip(sx, 0.0, w - 1)
    sy = np.clip(sy, 0.0, h - 1)
    x0 = np.floor(sx).astype(np.int64)
    y0 = np.floor(sy).astype(np.int64)
    x1 = np.minimum(x0 + 1, w - 1)
    y1 = np.minimum(y0 + 1, h - 1)
    fx = sx - x0
    fy = sy - y0
    top = img[y0, x0] * (1.0 - fx) + img[y0, x1] * fx
    bot = img[y1, x0] * (1.0 - fx) + img[y1, x1] * fx
    out = top * (1.0 - fy) + bot * fy
    return np.where(inside, out, fill)


def cell_histograms(mag, ang, cell, nbins):
    h, w = mag.shape
    ncy, ncx = h // cell, w // cell
    mag = mag[: ncy * cell, : ncx * cell]
    ang = ang[: ncy * cell, : ncx * cell]
    pos = ang / (180.0 / nbins) - 0.5
    lo = np.floor(pos)
    frac = pos - lo
    b0 = lo.astype(np.int64) % nbins
    b1 = (b0 + 1) % nbins
    ys, xs = np.mgrid[0 : ncy * cell, 0 : ncx * cell]
    cell_idx = (ys // cell) * ncx + xs // cell
    n = ncy * ncx * nbins
    hist = np.bincount((cell_idx * nbins + b0).ravel(), (mag * (1.0 - frac)).ravel(), n)
    hist += np.bincount((cell_idx * nbins + b1).ravel(), (mag * frac).ravel(), n)
    return hist.reshape(ncy, ncx, nbins)


def fast_scores(img, threshold, arc):
    h, w = img.shape
    scores = np.zeros((h, w), dtype=np.float64)
    if h < 7 or w < 7:
        return scores
    center = img[3 : h - 3, 3 : w - 3]
    ring = np.stack(
        [img[3 + dy : h - 3 + dy, 3 + dx : w - 3 + dx] for dx, dy in zip(CIRCLE_DX, CIRCLE_DY)]
    )
    bright = ring > center + threshold
    dark = ring < center - threshold
    corner = np.zeros(center.shape, dtype=bool)
    for flags in (bright, dark):
        ext = np.concatenate([flags, flags[: arc - 1]])
        for start in range(16):
            corner |= np.all(ext[start : start + arc], axis=0)
    sb = np.where(bright, ring - center, 0.0).sum(axis=0) - threshold
    sd = np.where(dark, center - ring, 0.0).sum(axis=0) - threshold
    scores[3 : h - 3, 3 : w - 3] = np.where(corner, np.maximum(sb, sd), 0.0)
    return scores


def brief_bits(img, xs, ys, angle_idx, tables):
    t = tables[angle_idx]  # (n, nbits, 4)
    x = xs[:, None]
    y = ys[:, None]
    v1 = img[y + t[:, :, 1], x + t[:, :, 0]]
    v2 = img[y + t[:, :, 3], x + t[:, :, 2]]
    return np.packbits(v1 < v2, axis=1)


def hamming_matrix(a, b):
    if len(a) == 0 or len(b) == 0:
        return np.zeros((len(a), len(b)), dtype=np.int64)
    return POPCOUNT8[a[:, None, :] ^ b[None, :, :]].sum(axis=2)
