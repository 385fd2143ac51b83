"""Synthetic stand-in for carapace photographs.

Each class is a fixed Voronoi tiling ("scutes") inside an elliptical shell;
scute borders are drawn as faint dark lines. Individual images of a class
differ by a sub-pixel shift, a global brightness factor and sensor noise,
so the only identity cue is a low-contrast line pattern.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

from .dataset import RoiRect, SampleRecord, save_png, write_manifest

IMAGE_W, IMAGE_H = 192, 256
BORDER = 8

BACKGROUND = 96.0
SHELL = 112.0
LINE_DEPTH = 20.0
LINE_WIDTH = 1.6
NOISE_SIGMA = 4.0
BRIGHTNESS_JITTER = 0.10
MAX_SHIFT = 3.0
SEED_JITTER = 11.0

# nominal scute centres in shell-normalized coordinates (-1..1)
_LAYOUT = np.array(
    [[0.0, y] for y in (-0.72, -0.36, 0.0, 0.36, 0.72)]
    + [[sx * 0.55, y] for sx in (-1, 1) for y in (-0.55, -0.18, 0.18, 0.55)]
    + [[sx * 0.9, y] for sx in (-1, 1) for y in (-0.3, 0.3)]
)


def class_seeds(rng, width=IMAGE_W, height=IMAGE_H):
    ax, ay = 0.40 * width, 0.42 * height
    pts = _LAYOUT * [ax, ay] + [width / 2.0, height / 2.0]
    return pts + rng.normal(0.0, SEED_JITTER, pts.shape)


def render(seeds, shift=(0.0, 0.0), brightness=1.0, noise_rng=None, width=IMAGE_W, height=IMAGE_H):
    """Gray carapace image for a seed layout, shifted by ``shift`` pixels."""
    ys, xs = np.mgrid[0:height, 0:width].astype(np.float64)
    xs -= shift[0]
    ys -= shift[1]
    cx, cy = width / 2.0, height / 2.0
    ax, ay = 0.40 * width, 0.42 * height
    r = np.sqrt(((xs - cx) / ax) ** 2 + ((ys - cy) / ay) ** 2)
    # soft shell edge about 2 px wide
    shell = 1.0 / (1.0 + np.exp((r - 1.0) * min(ax, ay) / 1.0))
    d = np.sqrt((xs[..., None] - seeds[:, 0]) ** 2 + (ys[..., None] - seeds[:, 1]) ** 2)
    d.sort(axis=2)
    gap = (d[..., 1] - d[..., 0]) / 2.0  # distance to the nearest Voronoi border
    lines = LINE_DEPTH * np.exp(-((gap / LINE_WIDTH) ** 2))
    img = BACKGROUND + shell * (SHELL - BACKGROUND - lines)
    img = img * brightness
    if noise_rng is not None:
        img = img + noise_rng.normal(0.0, NOISE_SIGMA, img.shape)
    return np.clip(img, 0.0, 255.0)


def make_surrogate(out_dir, n_classes=16, per_class=4, seed=0):
    """Write ``n_classes * per_class`` PNGs plus ``manifest.csv``; return the records."""
    out_dir = Path(out_dir)
    (out_dir / "images").mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(seed)
    records = []
    roi = RoiRect(BORDER, BORDER, IMAGE_W - 2 * BORDER, IMAGE_H - 2 * BORDER)
    for c in range(1, n_classes + 1):
        seeds = class_seeds(rng)
        label = f"turtle_{c:02d}"
        for k in range(per_class):
            radius = MAX_SHIFT * np.sqrt(rng.uniform())
            angle = rng.uniform(0.0, 2.0 * np.pi)
            shift = (radius * np.cos(angle), radius * np.sin(angle))
            brightness = rng.uniform(1.0 - BRIGHTNESS_JITTER, 1.0 + BRIGHTNESS_JITTER)
            gray = render(seeds, shift, brightness, rng)
            rgb = np.repeat(np.rint(gray).astype(np.uint8)[..., None], 3, axis=2)
            path = out_dir / "images" / f"{label}_{chr(ord('a') + k)}.png"
            save_png(rgb, path)
            records.append(SampleRecord(path, label, 0.0, roi, f"images__{path.stem}"))
    write_manifest(records, out_dir / "manifest.csv")
    return records
