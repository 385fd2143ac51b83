"""Histogram of Oriented Gradients over a fixed ROI window.

Defaults describe a 96x128 window split into 8x8-pixel cells, 2x2-cell
blocks sliding one cell at a time and 9 unsigned orientation bins, which
gives 11 * 15 * 36 = 5940 values.

Votes are interpolated between neighbouring orientation bins only (no
spatial interpolation, no Gaussian block window) and each block is
normalized with plain L2 plus a small epsilon.
"""

from __future__ import annotations

import json
import math
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import _kernels
from .errors import IncompatibleGeometryError, LengthMismatchError

BLOCK_EPS = 1e-3

_MAGIC = b"HOGD"
_VERSION = 1
_HEADER = struct.Struct("<4sIQ")  # magic, version, length -> 16 bytes


@dataclass(frozen=True)
class HogParams:
    window_w: int = 96
    window_h: int = 128
    cell: int = 8
    block: int = 2
    block_stride: int = 1
    bins: int = 9

    @property
    def cells_x(self):
        return self.window_w // self.cell

    @property
    def cells_y(self):
        return self.window_h // self.cell

    @property
    def blocks_x(self):
        return (self.cells_x - self.block) // self.block_stride + 1

    @property
    def blocks_y(self):
        return (self.cells_y - self.block) // self.block_stride + 1

    @property
    def block_len(self):
        return self.block * self.block * self.bins

    def validate(self):
        for name in ("window_w", "window_h", "cell", "block", "block_stride", "bins"):
            if getattr(self, name) < 1:
                raise IncompatibleGeometryError(f"{name} must be >= 1")
        if self.window_w % self.cell or self.window_h % self.cell:
            raise IncompatibleGeometryError(
                f"window {self.window_w}x{self.window_h} not divisible by cell size {self.cell}"
            )
        if self.block > self.cells_x or self.block > self.cells_y:
            raise IncompatibleGeometryError("block larger than the cell grid")
        return self


@dataclass(frozen=True, eq=False)
class GradientField:
    magnitude: np.ndarray
    orientation: np.ndarray  # degrees in [0, 180)


@dataclass(frozen=True, eq=False)
class HogDescriptor:
    values: np.ndarray
    params: HogParams

    def __len__(self):
        return len(self.values)

    def block_norms(self):
        return np.linalg.norm(self.values.reshape(-1, self.params.block_len), axis=1)


def descriptor_len(params=HogParams()):
    p = params.validate()
    return p.blocks_x * p.blocks_y * p.block_len


def compute_gradients(img):
    """Central differences ``(I[x+1] - I[x-1]) / 2`` with replicated borders.

    Orientation is ``atan2(gy, gx)`` in degrees folded into [0, 180).
    """
    img = np.asarray(img, dtype=np.float64)
    padded = np.pad(img, 1, mode="edge")
    gx = (padded[1:-1, 2:] - padded[1:-1, :-2]) / 2.0
    gy = (padded[2:, 1:-1] - padded[:-2, 1:-1]) / 2.0
    mag = np.sqrt(gx * gx + gy * gy)
    ang = np.arctan2(gy, gx) * (180.0 / math.pi)
    ang = np.mod(ang, 180.0)
    ang[ang >= 180.0] -= 180.0
    return GradientField(mag, ang)


def cell_histograms(grad, params=HogParams()):
    """Per-cell orientation histograms, shape ``(cells_y, cells_x, bins)``.

    Bin ``b`` is centred on ``(b + 0.5) * 180 / bins`` degrees; each pixel
    splits its magnitude linearly between the two nearest centres, wrapping
    around at 180.
    """
    params.validate()
    mag = np.ascontiguousarray(grad.magnitude, dtype=np.float64)
    ang = np.ascontiguousarray(grad.orientation, dtype=np.float64)
    if mag.shape != (params.window_h, params.window_w):
        raise IncompatibleGeometryError(
            f"gradient field {mag.shape[1]}x{mag.shape[0]} does not match window "
            f"{params.window_w}x{params.window_h}"
        )
    return _kernels.cell_histograms(mag, ang, params.cell, params.bins)


def block_normalize(cells, params=HogParams(), eps=BLOCK_EPS):
    params.validate()
    cells = np.asarray(cells, dtype=np.float64)
    if cells.shape != (params.cells_y, params.cells_x, params.bins):
        raise IncompatibleGeometryError(f"cell grid shape {cells.shape} does not match params")
    b, s = params.block, params.block_stride
    ny, nx = params.blocks_y, params.blocks_x
    parts = [
        cells[dy : dy + s * (ny - 1) + 1 : s, dx : dx + s * (nx - 1) + 1 : s]
        for dy in range(b)
        for dx in range(b)
    ]
    blocks = np.concatenate(parts, axis=2)  # (ny, nx, b*b*bins), cells row-major within a block
    energy = np.sum(blocks * blocks, axis=2, keepdims=True)
    blocks = blocks / np.sqrt(energy + eps * eps)
    values = blocks.reshape(-1)
    assert len(values) == descriptor_len(params)
    return HogDescriptor(values, params)


def compute_hog(img, params=HogParams()):
    """HOG of a window-sized 0..255 image (intensities are rescaled to 0..1 first)."""
    params.validate()
    img = np.asarray(img, dtype=np.float64)
    if img.shape != (params.window_h, params.window_w):
        raise IncompatibleGeometryError(
            f"image {img.shape[1]}x{img.shape[0]} does not match window {params.window_w}x{params.window_h}"
        )
    grad = compute_gradients(img / 255.0)
    return block_normalize(cell_histograms(grad, params), params)


def hog_distance(a, b):
    va = a.values if isinstance(a, HogDescriptor) else np.asarray(a)
    vb = b.values if isinstance(b, HogDescriptor) else np.asarray(b)
    if va.shape != vb.shape:
        raise LengthMismatchError(f"descriptor lengths differ: {va.shape} vs {vb.shape}")
    if isinstance(a, HogDescriptor) and isinstance(b, HogDescriptor) and a.params != b.params:
        raise LengthMismatchError("descriptors computed with different parameters")
    return float(pairwise_distances(va[None, :], vb[None, :])[0, 0])


def pairwise_distances(queries, gallery):
    """Euclidean distance matrix between two stacks of descriptor vectors."""
    q = np.asarray(queries, dtype=np.float64)
    g = np.asarray(gallery, dtype=np.float64)
    out = np.empty((len(q), len(g)))
    for i, row in enumerate(q):
        diff = g - row
        out[i] = np.sqrt(np.einsum("jk,jk->j", diff, diff))
    return out


def write_descriptor(desc, path):
    """Binary cache: 16-byte little-endian header then float32 values."""
    values = np.asarray(desc.values, dtype="<f4")
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(_MAGIC, _VERSION, len(values)))
        fh.write(values.tobytes())


def read_descriptor(path, params=HogParams()):
    data = Path(path).read_bytes()
    if len(data) < _HEADER.size:
        raise LengthMismatchError("descriptor file shorter than its header")
    magic, version, n = _HEADER.unpack_from(data)
    if magic != _MAGIC or version != _VERSION:
        raise LengthMismatchError(f"not a descriptor file (magic={magic!r}, version={version})")
    body = data[_HEADER.size :]
    if len(body) != 4 * n:
        raise LengthMismatchError(f"header says {n} values, file holds {len(body) // 4}")
    values = np.frombuffer(body, dtype="<f4").astype(np.float64)
    return HogDescriptor(values, params)


def descriptor_to_json(desc):
    return json.dumps(
        {
            "params": {
                "window_w": desc.params.window_w,
                "window_h": desc.params.window_h,
                "cell": desc.params.cell,
                "block": desc.params.block,
                "block_stride": desc.params.block_stride,
                "bins": desc.params.bins,
            },
            "length": len(desc.values),
            "values": [float(v) for v in desc.values],
        }
    )
