import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from carapace_id import synthetic
from carapace_id.errors import EmptyGalleryError, PatchOutOfBoundsError
from carapace_id.imgproc import gaussian_smooth
from carapace_id.keypoints import (
    ANGLE_STEP,
    PATTERN_SEED,
    BinaryDescriptor,
    Keypoint,
    describe_brief,
    detect_fast,
    extract_keypoints,
    generate_pattern,
    hamming,
    keypoint_image_score,
    load_pattern,
    match_keypoints,
    rotated_tables,
)
from carapace_id._kernels import fast_scores
from conftest import blocky_texture

CIRCLE = [(0, -3), (1, -3), (2, -2), (3, -1), (3, 0), (3, 1), (2, 2), (1, 3),
          (0, 3), (-1, 3), (-2, 2), (-3, 1), (-3, 0), (-3, -1), (-2, -2), (-1, -3)]


def segment_test_oracle(img, t, arc=9):
    """Pixels passing the FAST segment test, by exhaustive scan."""
    h, w = img.shape
    found = set()
    for y in range(3, h - 3):
        for x in range(3, w - 3):
            c = img[y, x]
            ring = [img[y + dy, x + dx] for dx, dy in CIRCLE]
            for test in (lambda v: v > c + t, lambda v: v < c - t):
                flags = [test(v) for v in ring]
                if any(all(flags[(s + k) % 16] for k in range(arc)) for s in range(16)):
                    found.add((x, y))
    return found


def _desc(bits):
    return BinaryDescriptor(np.packbits(np.asarray(bits, dtype=bool)))


# -- detection -----------------------------------------------------------------


def test_constant_image_has_no_corners():
    assert detect_fast(np.full((48, 48), 90.0)) == []


def test_square_corners():
    img = np.full((48, 48), 10.0)
    img[22:25, 22:25] = 240.0
    scores = fast_scores(img, 20.0, 9)
    assert set(zip(*np.nonzero(scores.T))) == segment_test_oracle(img, 20.0)
    kps = detect_fast(img)
    assert len(kps) >= 1
    for cx, cy in [(22, 22), (24, 22), (22, 24), (24, 24)]:
        assert min(np.hypot(k.x - cx, k.y - cy) for k in kps) <= 2.0


def test_scores_match_oracle_on_texture(rng):
    img = blocky_texture(rng, 40, 36, block=4)
    found = set(zip(*np.nonzero(fast_scores(img, 20.0, 9).T)))
    assert found == segment_test_oracle(img, 20.0)


def test_detection_commutes_with_rot90(rng):
    img = blocky_texture(rng, 80, 64)
    kps = detect_fast(img, max_keypoints=10_000)
    rot = detect_fast(np.rot90(img), max_keypoints=10_000)
    w = img.shape[1]
    expected = {(k.y, w - 1 - k.x) for k in kps}
    got = {(k.x, k.y) for k in rot}
    assert len(got) > 10
    for p in expected:
        assert min(np.hypot(p[0] - q[0], p[1] - q[1]) for q in got) <= 1.0
    assert len(got) == len(expected)


def test_detection_deterministic(rng):
    img = blocky_texture(rng, 64, 64)
    assert detect_fast(img) == detect_fast(img.copy())


def test_keypoints_respect_margin_and_limit(rng):
    img = blocky_texture(rng, 96, 128)
    kps = detect_fast(img, max_keypoints=25)
    assert 0 < len(kps) <= 25
    assert all(16 <= k.x <= 128 - 17 and 16 <= k.y <= 96 - 17 for k in kps)
    assert all(0 <= k.orientation < 360 for k in kps)
    resp = [k.response for k in kps]
    assert resp == sorted(resp, reverse=True)


def test_too_small_image():
    with pytest.raises(ValueError):
        detect_fast(np.zeros((20, 40)))


def test_low_contrast_carapace_yields_few_keypoints():
    rng = np.random.default_rng(7)
    for _ in range(5):
        seeds = synthetic.class_seeds(rng, 96, 128)
        img = synthetic.render(seeds, width=96, height=128)
        img = 100.0 + (img - img.min()) * (10.0 / np.ptp(img))  # contrast of 10 levels
        img = gaussian_smooth(img + rng.normal(0, 4.0, img.shape))
        assert len(detect_fast(img)) < 5


# -- pattern and description ---------------------------------------------------------


def test_shipped_pattern_is_reproducible():
    pattern = load_pattern()
    assert pattern.shape == (256, 4)
    assert np.array_equal(pattern, generate_pattern(PATTERN_SEED))
    pts = pattern.reshape(-1, 2)
    assert np.all(pts[:, 0] ** 2 + pts[:, 1] ** 2 <= 15**2)
    tables = rotated_tables()
    assert tables.shape == (30, 256, 4) and np.abs(tables).max() <= 15


def test_constant_patch_all_zero():
    d = describe_brief(np.full((40, 40), 50.0), Keypoint(20, 20, 1.0, 33.0))
    assert not d.bits.any()


def test_rotated_copy_gives_identical_descriptor(rng):
    tables = rotated_tables()
    base, turned = tables[0], tables[1]
    assert ANGLE_STEP == 12.0
    rotated_patch = rng.uniform(0, 255, (64, 64))
    upright = rng.uniform(0, 255, (64, 64))
    c = 32
    # the upright patch samples, at each pattern point, what the rotated copy holds at the rotated point
    for cols in ((0, 1), (2, 3)):
        for p, q in zip(base[:, cols], turned[:, cols]):
            upright[c + p[1], c + p[0]] = rotated_patch[c + q[1], c + q[0]]
    a = describe_brief(upright, Keypoint(c, c, 1.0, 0.0))
    b = describe_brief(rotated_patch, Keypoint(c, c, 1.0, 12.0))
    assert a == b
    assert a.bits.any()


def test_inverted_patch_complements_bits(rng):
    img = rng.uniform(0, 255, (48, 48))
    kp = Keypoint(24, 24, 1.0, 100.0)
    a = np.unpackbits(describe_brief(img, kp).bits)
    b = np.unpackbits(describe_brief(255.0 - img, kp).bits)
    assert np.all(a != b)  # continuous random values: no exact ties


def test_patch_out_of_bounds():
    with pytest.raises(PatchOutOfBoundsError):
        describe_brief(np.zeros((40, 40)), Keypoint(5, 20, 1.0, 0.0))


# -- matching -----------------------------------------------------------------------


def test_match_identical_descriptor(rng):
    q = _desc(rng.integers(0, 2, 256))
    far = []
    for _ in range(4):
        bits = np.unpackbits(q.bits).copy()
        flip = rng.choice(256, 130, replace=False)
        bits[flip] ^= 1
        far.append(_desc(bits))
    res = match_keypoints([q], far[:2] + [q] + far[2:], 0.05)
    assert res.positive_match_count == 1
    assert res.matches == ((0, 2, 0),)


def test_match_equidistant_rejected():
    q = _desc([0] * 256)
    g1 = _desc([1] * 10 + [0] * 246)
    g2 = _desc([0] * 246 + [1] * 10)
    for t in (0.2, 0.5, 0.8, 0.99, 1.0):
        assert match_keypoints([q], [g1, g2], t).positive_match_count == 0


def test_match_errors():
    d = _desc([0] * 256)
    with pytest.raises(EmptyGalleryError):
        match_keypoints([d], [d], 0.8)
    with pytest.raises(ValueError):
        match_keypoints([d], [d, d], 0.0)


def test_each_query_matched_once(rng):
    q = rng.integers(0, 256, (20, 32), dtype=np.uint8)
    g = rng.integers(0, 256, (30, 32), dtype=np.uint8)
    res = match_keypoints(q, np.concatenate([g, q[:5]]), 0.8)
    idx = [m[0] for m in res.matches]
    assert len(idx) == len(set(idx)) == res.positive_match_count


_bits = st.lists(st.booleans(), min_size=256, max_size=256).map(_desc)


@settings(max_examples=100, deadline=None)
@given(_bits, _bits, _bits)
def test_hamming_is_a_metric(a, b, c):
    assert hamming(a, a) == 0
    assert hamming(a, b) == hamming(b, a)
    assert (hamming(a, b) == 0) == (a == b)
    assert hamming(a, c) <= hamming(a, b) + hamming(b, c)


# -- image scores -------------------------------------------------------------------


def test_self_match(rng):
    img = blocky_texture(rng, 128, 96)
    n = len(extract_keypoints(img))
    assert n > 20
    assert keypoint_image_score(img, img) >= 0.9 * n


def test_constant_images_score_zero():
    flat = np.full((128, 96), 80.0)
    assert keypoint_image_score(flat, flat) == 0


def test_unrelated_noise_scores_low():
    rng = np.random.default_rng(2024)
    img = blocky_texture(rng, 128, 96)
    noise = rng.uniform(0, 255, (128, 96))
    n = len(extract_keypoints(img))
    assert keypoint_image_score(img, noise) < 0.1 * n
