"""ORB-style keypoint baseline: FAST-9 corners, intensity-centroid
orientation, steered BRIEF bits and ratio-tested Hamming matching.

Single scale only. Used to show that sparse keypoints find little to work
with on smooth, low-contrast carapace crops.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from importlib import resources

import numpy as np
from scipy.ndimage import maximum_filter

from . import _kernels
from ._kernels._common import POPCOUNT8
from .errors import EmptyGalleryError, PatchOutOfBoundsError
from .imgproc import gaussian_kernel, gaussian_smooth

FAST_THRESHOLD = 20.0
FAST_ARC = 9
MAX_KEYPOINTS = 500
PATCH_SIZE = 31
PATCH_RADIUS = PATCH_SIZE // 2
MARGIN = 16
N_BITS = 256
N_ANGLES = 30
ANGLE_STEP = 360.0 / N_ANGLES
PATTERN_SEED = 20180110
DEFAULT_ACCEPTANCE = 0.8

# pre-smoothing applied before sampling BRIEF pairs
BRIEF_SMOOTH_SIZE = 5
BRIEF_SMOOTH_SIGMA = 2.0


@dataclass(frozen=True)
class Keypoint:
    x: float
    y: float
    response: float
    orientation: float  # degrees in [0, 360)


@dataclass(frozen=True, eq=False)
class BinaryDescriptor:
    bits: np.ndarray  # packed, 32 bytes

    def __post_init__(self):
        b = np.asarray(self.bits, dtype=np.uint8).reshape(-1)
        if b.size * 8 != N_BITS:
            raise ValueError(f"binary descriptor must hold {N_BITS} bits")
        object.__setattr__(self, "bits", b)

    def __eq__(self, other):
        return isinstance(other, BinaryDescriptor) and np.array_equal(self.bits, other.bits)

    def __hash__(self):
        return hash(self.bits.tobytes())


@dataclass(frozen=True)
class KeypointMatchResult:
    matches: tuple  # (query index, gallery index, hamming distance)
    positive_match_count: int


@dataclass(frozen=True, eq=False)
class KeypointSet:
    keypoints: tuple
    descriptors: np.ndarray  # (n, 32) uint8

    def __len__(self):
        return len(self.keypoints)


def hamming(a, b):
    return int(POPCOUNT8[np.bitwise_xor(a.bits, b.bits)].sum())


# -- sampling pattern ---------------------------------------------------------


def generate_pattern(seed=PATTERN_SEED, n_pairs=N_BITS, radius=PATCH_RADIUS):
    """Draw BRIEF test pairs from an isotropic Gaussian (sigma = patch / 5).

    Points are rounded to integers and kept inside a disc of ``radius`` so
    every rotation of the pattern stays inside the patch.
    """
    rng = np.random.default_rng(seed)
    sigma = PATCH_SIZE / 5.0
    pairs = []
    while len(pairs) < n_pairs:
        x1, y1, x2, y2 = (int(v) for v in np.rint(rng.normal(0.0, sigma, 4)))
        if x1 * x1 + y1 * y1 > radius * radius or x2 * x2 + y2 * y2 > radius * radius:
            continue
        if (x1, y1) == (x2, y2):
            continue
        pairs.append((x1, y1, x2, y2))
    return np.array(pairs, dtype=np.int64)


def format_pattern(pattern):
    return "".join(f"{x1} {y1} {x2} {y2}\n" for x1, y1, x2, y2 in pattern)


def parse_pattern(text):
    rows = [line.split() for line in text.splitlines() if line.strip() and not line.startswith("#")]
    pattern = np.array([[int(v) for v in row] for row in rows], dtype=np.int64)
    if pattern.shape != (N_BITS, 4):
        raise ValueError(f"pattern table must be {N_BITS} rows of 4 integers, got {pattern.shape}")
    return pattern


@lru_cache(maxsize=1)
def load_pattern():
    text = resources.files("carapace_id").joinpath("data/brief_pattern.txt").read_text()
    pattern = parse_pattern(text)
    pattern.setflags(write=False)
    return pattern


def rotate_pattern(pattern, angle_deg):
    a = math.radians(angle_deg)
    c, s = math.cos(a), math.sin(a)
    xy = pattern.reshape(-1, 2).astype(np.float64)
    rx = np.rint(xy[:, 0] * c - xy[:, 1] * s)
    ry = np.rint(xy[:, 0] * s + xy[:, 1] * c)
    return np.stack([rx, ry], axis=1).astype(np.int64).reshape(pattern.shape)


@lru_cache(maxsize=1)
def rotated_tables():
    pattern = load_pattern()
    tables = np.stack([rotate_pattern(pattern, k * ANGLE_STEP) for k in range(N_ANGLES)])
    tables.setflags(write=False)
    return tables


def angle_index(orientation_deg):
    return int(round(orientation_deg / ANGLE_STEP)) % N_ANGLES


# -- detection ----------------------------------------------------------------


@lru_cache(maxsize=4)
def _disc_offsets(radius):
    ys, xs = np.mgrid[-radius : radius + 1, -radius : radius + 1]
    inside = xs * xs + ys * ys <= radius * radius
    return xs[inside].astype(np.float64), ys[inside].astype(np.float64), xs[inside], ys[inside]


def centroid_orientation(img, x, y, radius=PATCH_RADIUS):
    """Angle of the intensity centroid of a disc patch, degrees in [0, 360)."""
    fx, fy, ix, iy = _disc_offsets(radius)
    vals = img[int(y) + iy, int(x) + ix]
    m10 = float(np.dot(fx, vals))
    m01 = float(np.dot(fy, vals))
    ang = math.degrees(math.atan2(m01, m10)) % 360.0
    return 0.0 if ang >= 360.0 else ang


def detect_fast(img, threshold=FAST_THRESHOLD, max_keypoints=MAX_KEYPOINTS):
    """FAST-9 corners with 3x3 non-maximum suppression, strongest first."""
    img = np.ascontiguousarray(img, dtype=np.float64)
    h, w = img.shape
    if h < 2 * MARGIN or w < 2 * MARGIN:
        raise ValueError(f"image must be at least {2 * MARGIN}x{2 * MARGIN}, got {w}x{h}")
    scores = _kernels.fast_scores(img, float(threshold), FAST_ARC)
    peaks = (scores > 0) & (scores >= maximum_filter(scores, size=3, mode="constant", cval=0.0))
    peaks[:MARGIN, :] = False
    peaks[h - MARGIN :, :] = False
    peaks[:, :MARGIN] = False
    peaks[:, w - MARGIN :] = False
    ys, xs = np.nonzero(peaks)
    resp = scores[ys, xs]
    order = np.lexsort((xs, ys, -resp))[:max_keypoints]
    return [
        Keypoint(float(xs[i]), float(ys[i]), float(resp[i]), centroid_orientation(img, xs[i], ys[i]))
        for i in order
    ]


# -- description ----------------------------------------------------------------


def _check_patch(img, x, y):
    h, w = img.shape
    if x - PATCH_RADIUS < 0 or y - PATCH_RADIUS < 0 or x + PATCH_RADIUS >= w or y + PATCH_RADIUS >= h:
        raise PatchOutOfBoundsError(f"patch around ({x}, {y}) leaves the {w}x{h} image")


def describe_many(img, keypoints):
    """Packed descriptors ``(n, 32)`` for keypoints on an already smoothed image."""
    img = np.ascontiguousarray(img, dtype=np.float64)
    if not keypoints:
        return np.zeros((0, N_BITS // 8), dtype=np.uint8)
    xs = np.array([int(round(k.x)) for k in keypoints], dtype=np.int64)
    ys = np.array([int(round(k.y)) for k in keypoints], dtype=np.int64)
    for x, y in zip(xs, ys):
        _check_patch(img, x, y)
    idx = np.array([angle_index(k.orientation) for k in keypoints], dtype=np.int64)
    return _kernels.brief_bits(img, xs, ys, idx, rotated_tables())


def describe_brief(img, kp):
    """Steered BRIEF: bit i is set when the second point of pair i is strictly brighter."""
    return BinaryDescriptor(describe_many(img, [kp])[0])


def brief_presmooth(img):
    return gaussian_smooth(img, gaussian_kernel(BRIEF_SMOOTH_SIZE, BRIEF_SMOOTH_SIGMA))


def extract_keypoints(img, threshold=FAST_THRESHOLD, max_keypoints=MAX_KEYPOINTS):
    kps = detect_fast(img, threshold, max_keypoints)
    descs = describe_many(brief_presmooth(img), kps)
    return KeypointSet(tuple(kps), descs)


# -- matching -----------------------------------------------------------------


def _as_packed(descs):
    if isinstance(descs, np.ndarray):
        return np.ascontiguousarray(descs, dtype=np.uint8).reshape(len(descs), N_BITS // 8)
    if len(descs) == 0:
        return np.zeros((0, N_BITS // 8), dtype=np.uint8)
    return np.stack([d.bits for d in descs])


def match_keypoints(query_descs, gallery_descs, acceptance_threshold=DEFAULT_ACCEPTANCE):
    """Ratio test on Hamming distances: keep a query when nearest / second < threshold.

    A zero second-nearest distance is treated as ratio 1 (fully ambiguous).
    """
    if not 0 < acceptance_threshold <= 1:
        raise ValueError("acceptance_threshold must be in (0, 1]")
    q = _as_packed(query_descs)
    g = _as_packed(gallery_descs)
    if len(g) < 2:
        raise EmptyGalleryError("need at least two gallery descriptors for a distance ratio")
    dist = _kernels.hamming_matrix(q, g)
    matches = []
    for i, row in enumerate(dist):
        order = np.argsort(row, kind="stable")
        d1, d2 = int(row[order[0]]), int(row[order[1]])
        ratio = d1 / d2 if d2 > 0 else 1.0
        if ratio < acceptance_threshold:
            matches.append((i, int(order[0]), d1))
    return KeypointMatchResult(tuple(matches), len(matches))


def score_sets(query, gallery, acceptance_threshold=DEFAULT_ACCEPTANCE):
    if len(query) == 0 or len(gallery) < 2:
        return 0
    return match_keypoints(query.descriptors, gallery.descriptors, acceptance_threshold).positive_match_count


def keypoint_image_score(query_img, gallery_img, acceptance_threshold=DEFAULT_ACCEPTANCE,
                         threshold=FAST_THRESHOLD, max_keypoints=MAX_KEYPOINTS):
    """Number of ratio-test survivors when matching query keypoints into the gallery image."""
    q = extract_keypoints(query_img, threshold, max_keypoints)
    g = extract_keypoints(gallery_img, threshold, max_keypoints)
    return score_sets(q, g, acceptance_threshold)


def match_count_distance(count):
    """Turn a match count into a distance usable by the NNDR classifier."""
    return 1.0 / (1.0 + count)
