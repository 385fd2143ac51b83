"""Grayscale image primitives used by the preprocessing pipeline.

Gray images are 2-D ``float64`` numpy arrays indexed ``[row, col]`` with
intensities on the 0..255 scale.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .errors import RoiOutOfBoundsError

# BT.601 luma weights
LUMA_WEIGHTS = (0.299, 0.587, 0.114)

DEFAULT_SMOOTH_SIZE = 4
DEFAULT_SMOOTH_SIGMA = 1.0


@dataclass(frozen=True, eq=False)
class Kernel:
    """A normalized 2-D filter with an explicit anchor.

    Output pixel ``(y, x)`` reads the window whose top-left corner is
    ``(y - anchor[0], x - anchor[1])``.
    """

    weights: np.ndarray
    anchor: tuple[int, int]

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=np.float64)
        if w.ndim != 2 or w.size == 0:
            raise ValueError("kernel weights must be a non-empty 2-D array")
        if abs(w.sum() - 1.0) > 1e-9:
            raise ValueError(f"kernel weights must sum to 1, got {w.sum()!r}")
        ay, ax = self.anchor
        if not (0 <= ay < w.shape[0] and 0 <= ax < w.shape[1]):
            raise ValueError("kernel anchor outside the kernel")
        w.setflags(write=False)
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "anchor", (int(ay), int(ax)))

    @property
    def size(self):
        return self.weights.shape

    def compose(self, other):
        """Kernel equivalent to smoothing with ``self`` then ``other`` (away from borders)."""
        a, b = self.weights, other.weights
        out = np.zeros((a.shape[0] + b.shape[0] - 1, a.shape[1] + b.shape[1] - 1))
        for j in range(b.shape[0]):
            for i in range(b.shape[1]):
                out[j : j + a.shape[0], i : i + a.shape[1]] += b[j, i] * a
        out /= out.sum()
        return Kernel(out, (self.anchor[0] + other.anchor[0], self.anchor[1] + other.anchor[1]))


def gaussian_kernel(size=DEFAULT_SMOOTH_SIZE, sigma=DEFAULT_SMOOTH_SIGMA):
    """Sampled isotropic Gaussian on a ``size x size`` grid centred between pixels for even sizes.

    Offsets are ``i - (size - 1) / 2``; for size 4 that is -1.5, -0.5, 0.5, 1.5
    and the anchor sits at the top-left of the central 2x2 quad.
    """
    if size < 1:
        raise ValueError("kernel size must be >= 1")
    if not sigma > 0:
        raise ValueError("sigma must be positive")
    offsets = np.arange(size, dtype=np.float64) - (size - 1) / 2.0
    g = np.exp(-(offsets**2) / (2.0 * sigma * sigma))
    w = np.outer(g, g)
    anchor = (size - 1) // 2
    return Kernel(w / w.sum(), (anchor, anchor))


def to_grayscale(img):
    img = np.asarray(img)
    if img.ndim == 2:
        return img.astype(np.float64)
    rgb = img[..., :3].astype(np.float64)
    r, g, b = LUMA_WEIGHTS
    return r * rgb[..., 0] + g * rgb[..., 1] + b * rgb[..., 2]


def _snap(v):
    # exact zeros/ones for multiples of 90 degrees keep those rotations lossless
    r = round(v)
    return float(r) if abs(v - r) < 1e-12 else v


def _canvas_side(extent, parity):
    n = max(1, math.ceil(round(extent, 9)))
    return n + 1 if (n - parity) % 2 else n


def rotate(img, deg):
    """Rotate counterclockwise (as displayed, rows growing downward) about the centre.

    The canvas grows to hold the whole rotated image; uncovered pixels are 0.
    Canvas sides keep the parity of the source side they mostly come from,
    so the pixel grid stays aligned with the source centre.
    """
    if not math.isfinite(deg):
        raise ValueError("rotation angle must be finite")
    img = np.asarray(img, dtype=np.float64)
    h, w = img.shape
    theta = math.radians(deg)
    c, s = _snap(math.cos(theta)), _snap(math.sin(theta))
    upright = abs(c) >= abs(s)
    out_w = _canvas_side(abs(w * c) + abs(h * s), w if upright else h)
    out_h = _canvas_side(abs(w * s) + abs(h * c), h if upright else w)
    cx, cy = (w - 1) / 2.0, (h - 1) / 2.0
    ocx, ocy = (out_w - 1) / 2.0, (out_h - 1) / 2.0
    # inverse map: output offset (u, v) -> source offset (u c - v s, u s + v c)
    matrix = np.array(
        [
            [c, -s, cx - c * ocx + s * ocy],
            [s, c, cy - s * ocx - c * ocy],
        ]
    )
    return _kernels.warp_affine(np.ascontiguousarray(img), matrix, out_h, out_w, 0.0, False)


def crop_roi(img, roi):
    img = np.asarray(img)
    h, w = img.shape[:2]
    if not roi.contains(w, h):
        raise RoiOutOfBoundsError(f"ROI {roi} exceeds image {w}x{h}")
    return img[roi.y : roi.y + roi.h, roi.x : roi.x + roi.w].copy()


def gaussian_smooth(img, kernel=None):
    """Filter with ``kernel`` (default 4x4, sigma 1), replicating edge pixels."""
    if kernel is None:
        kernel = gaussian_kernel()
    img = np.ascontiguousarray(img, dtype=np.float64)
    ay, ax = kernel.anchor
    return _kernels.correlate_replicate(img, np.ascontiguousarray(kernel.weights), ay, ax)


def resize(img, out_w, out_h):
    """Bilinear resampling with pixel centres aligned (half-pixel convention)."""
    if out_w < 1 or out_h < 1:
        raise ValueError("output size must be at least 1x1")
    img = np.ascontiguousarray(img, dtype=np.float64)
    h, w = img.shape
    sx, sy = w / out_w, h / out_h
    matrix = np.array([[sx, 0.0, 0.5 * sx - 0.5], [0.0, sy, 0.5 * sy - 0.5]])
    return _kernels.warp_affine(img, matrix, out_h, out_w, 0.0, True)


def preprocess(rgb, rotation_deg, roi, window=(96, 128), kernel=None):
    """Full chain: grayscale, rotate, crop, smooth, resize to ``window`` (width, height)."""
    gray = to_grayscale(rgb)
    if rotation_deg != 0:
        gray = rotate(gray, rotation_deg)
    roi_img = crop_roi(gray, roi)
    smoothed = gaussian_smooth(roi_img, kernel)
    return resize(smoothed, window[0], window[1])
