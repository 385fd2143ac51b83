"""Dataset manifest and image loading.

A manifest is a UTF-8 CSV with the header::

    image_path,individual_id,rotation_deg,roi_x,roi_y,roi_w,roi_h

Lines starting with ``#`` are ignored. Image paths are resolved relative to
the directory holding the manifest. The ROI is expressed in the frame of the
image *after* rotation.
"""

from __future__ import annotations

import csv
import io
import math
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path, PurePosixPath

import numpy as np
from PIL import Image, UnidentifiedImageError

from .errors import DecodeError, InvalidRoiError, MissingFileError, ParseError

MANIFEST_HEADER = ("image_path", "individual_id", "rotation_deg", "roi_x", "roi_y", "roi_w", "roi_h")


@dataclass(frozen=True)
class RoiRect:
    x: int
    y: int
    w: int
    h: int

    def __post_init__(self):
        if self.w < 1 or self.h < 1:
            raise ValueError(f"degenerate ROI {self.w}x{self.h}")

    def contains(self, width, height):
        return self.x >= 0 and self.y >= 0 and self.x + self.w <= width and self.y + self.h <= height


@dataclass(frozen=True)
class SampleRecord:
    image_path: Path
    individual_id: str
    rotation_deg: float
    roi: RoiRect
    sample_id: str = ""

    def __post_init__(self):
        if not self.individual_id:
            raise ValueError("individual_id must be non-empty")
        if not math.isfinite(self.rotation_deg):
            raise ValueError("rotation_deg must be finite")
        if not self.sample_id:
            object.__setattr__(self, "sample_id", _default_sample_id(self.image_path))


@dataclass(frozen=True)
class DatasetStats:
    counts: dict[str, int] = field(default_factory=dict)
    total: int = 0


def _default_sample_id(path):
    return Path(path).stem


def _sample_id_from_relpath(rel):
    parts = PurePosixPath(rel.replace("\\", "/")).with_suffix("").parts
    return "__".join(p for p in parts if p not in ("", ".", ".."))


def load_manifest(path):
    """Parse a manifest CSV into a list of :class:`SampleRecord`.

    Row order is preserved. Sample ids are derived from the image path
    (relative to the manifest, extension dropped, ``/`` replaced by ``__``)
    and must be unique.
    """
    path = Path(path)
    if not path.is_file():
        raise MissingFileError(f"manifest not found: {path}")
    try:
        text = path.read_text(encoding="utf-8")
    except UnicodeDecodeError as exc:
        raise ParseError(0, f"not valid UTF-8: {exc}") from None
    base = path.parent

    lines = [(n, line) for n, line in enumerate(text.splitlines(), start=1)]
    lines = [(n, line) for n, line in lines if line.strip() and not line.lstrip().startswith("#")]
    if not lines:
        return []

    header_no, header_line = lines[0]
    header = tuple(h.strip() for h in next(csv.reader([header_line])))
    if header != MANIFEST_HEADER:
        raise ParseError(header_no, f"expected header {','.join(MANIFEST_HEADER)}")

    records = []
    seen = {}
    for line_no, line in lines[1:]:
        row = [c.strip() for c in next(csv.reader([line]))]
        if len(row) != len(MANIFEST_HEADER):
            raise ParseError(line_no, f"expected {len(MANIFEST_HEADER)} fields, got {len(row)}")
        rel, ident, rot, *roi_fields = row
        if not rel:
            raise ParseError(line_no, "empty image_path")
        if not ident:
            raise ParseError(line_no, "empty individual_id")
        try:
            rotation = float(rot)
        except ValueError:
            raise ParseError(line_no, f"rotation_deg not a number: {rot!r}") from None
        if not math.isfinite(rotation):
            raise ParseError(line_no, "rotation_deg must be finite")
        try:
            x, y, w, h = (int(v) for v in roi_fields)
        except ValueError:
            raise ParseError(line_no, f"ROI fields must be integers: {roi_fields}") from None
        if w < 1 or h < 1:
            raise InvalidRoiError(line_no)
        if x < 0 or y < 0:
            raise InvalidRoiError(line_no, "ROI origin must be non-negative")
        sample_id = _sample_id_from_relpath(rel)
        if sample_id in seen:
            raise ParseError(line_no, f"duplicate sample id {sample_id!r} (first on line {seen[sample_id]})")
        seen[sample_id] = line_no
        records.append(
            SampleRecord(
                image_path=base / rel,
                individual_id=ident,
                rotation_deg=rotation,
                roi=RoiRect(x, y, w, h),
                sample_id=sample_id,
            )
        )
    return records


def write_manifest(records, path):
    """Write records as a manifest; image paths are stored relative to ``path``'s directory."""
    path = Path(path)
    base = path.parent.resolve()
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(MANIFEST_HEADER)
    for r in records:
        img = Path(r.image_path).resolve()
        try:
            rel = img.relative_to(base).as_posix()
        except ValueError:
            rel = img.as_posix()
        writer.writerow([rel, r.individual_id, repr(float(r.rotation_deg)), r.roi.x, r.roi.y, r.roi.w, r.roi.h])
    path.write_text(buf.getvalue(), encoding="utf-8")


def dataset_stats(records):
    counts = Counter(r.individual_id for r in records)
    return DatasetStats(counts=dict(sorted(counts.items())), total=sum(counts.values()))


def load_image(path):
    """Decode a PNG, PGM (or any Pillow-readable raster) into an ``(H, W, 3)`` uint8 array."""
    path = Path(path)
    if not path.is_file():
        raise MissingFileError(f"image not found: {path}")
    try:
        with Image.open(path) as im:
            im.load()
            if im.mode in ("I;16", "I;16B", "I;16L", "I"):
                arr = np.asarray(im, dtype=np.float64)
                peak = 65535.0 if arr.max(initial=0) > 255 else 255.0
                gray = np.clip(np.rint(arr * (255.0 / peak)), 0, 255).astype(np.uint8)
                return np.repeat(gray[:, :, None], 3, axis=2)
            rgb = im.convert("RGB")
            return np.array(rgb, dtype=np.uint8)
    except (UnidentifiedImageError, OSError, SyntaxError, ValueError) as exc:
        raise DecodeError(f"cannot decode {path}: {exc}") from None


def save_pgm(img, path):
    """Write a grayscale raster as binary 8-bit PGM (values rounded and clipped to 0..255)."""
    arr = np.clip(np.rint(np.asarray(img, dtype=np.float64)), 0, 255).astype(np.uint8)
    Image.fromarray(arr).save(Path(path), format="PPM")


def save_png(img, path):
    arr = np.asarray(img)
    if arr.dtype != np.uint8:
        arr = np.clip(np.rint(arr), 0, 255).astype(np.uint8)
    Image.fromarray(arr).save(Path(path), format="PNG")
