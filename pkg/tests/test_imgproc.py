"""Pixel-level stages: canonization, thresholding, morphology, hole
filling and connected-component statistics.
"""
import numpy as np
import pytest
import scipy.ndimage as ndi

from mccfind import imgproc
from mccfind.errors import InvalidInputError

RNG = np.random.default_rng(99)


def gray_image(h, w, level=128):
    return np.full((h, w, 3), level, dtype=np.uint8)


class TestCanonize:
    def test_portrait_rescale(self):
        out = imgproc.canonize(gray_image(1200, 800))
        assert out.shape[:2] == (600, 400)

    def test_landscape_rescale(self):
        out = imgproc.canonize(gray_image(640, 1024))
        assert out.shape[:2] == (400, 640)

    def test_uniform_gray_survives_wiener(self):
        out = imgproc.canonize(gray_image(400, 400), normalize=False)
        assert out.shape[:2] == (400, 400)
        assert np.all(np.abs(out.astype(int) - 128) <= 1)

    def test_dimension_idempotence(self):
        once = imgproc.canonize(gray_image(500, 900))
        twice = imgproc.canonize(once)
        assert once.shape == twice.shape

    def test_channel_max_normalization(self):
        img = RNG.integers(10, 120, size=(400, 400, 3), dtype=np.uint8)
        out = imgproc.canonize(img)
        for c in range(3):
            assert out[..., c].max() == 255

    def test_too_small_rejected(self):
        with pytest.raises(InvalidInputError):
            imgproc.canonize(gray_image(20, 400))
        with pytest.raises(InvalidInputError):
            imgproc.canonize(np.zeros((100, 100), dtype=np.uint8))


def local_means_oracle(luma, window):
    """Brute-force local means with edge-duplicating reflect padding."""
    pad = window // 2
    padded = np.pad(luma, pad, mode="symmetric")
    h, w = luma.shape
    out = np.empty_like(luma, dtype=float)
    for r in range(h):
        for c in range(w):
            out[r, c] = padded[r:r + window, c:c + window].mean()
    return out


class TestAdaptiveThreshold:
    def test_uniform_image_is_background(self):
        mask = imgproc.adaptive_threshold(gray_image(64, 64), window=31)
        assert not mask.any()

    def test_black_square_on_white_matches_oracle(self):
        img = gray_image(60, 60, 255)
        img[20:30, 25:35] = 0
        mask = imgproc.adaptive_threshold(img, window=31, offset=5.0)
        luma = imgproc.rgb_to_luma(img)
        expect = luma < local_means_oracle(luma, 31) - 5.0
        np.testing.assert_array_equal(mask, expect)
        assert mask[22:28, 27:33].all()

    def test_random_image_matches_oracle(self):
        img = RNG.integers(0, 255, size=(40, 48, 3), dtype=np.uint8)
        mask = imgproc.adaptive_threshold(img, window=7, offset=5.0)
        luma = imgproc.rgb_to_luma(img)
        expect = luma < local_means_oracle(luma, 7) - 5.0
        np.testing.assert_array_equal(mask, expect)

    def test_luma_shift_invariance(self):
        img = RNG.integers(60, 160, size=(50, 50, 3))
        shifted = img + 40
        m1 = imgproc.adaptive_threshold(img.astype(float), window=9)
        m2 = imgproc.adaptive_threshold(shifted.astype(float), window=9)
        np.testing.assert_array_equal(m1, m2)

    def test_window_validation(self):
        with pytest.raises(InvalidInputError):
            imgproc.adaptive_threshold(gray_image(64, 64), window=4)
        with pytest.raises(InvalidInputError):
            imgproc.adaptive_threshold(gray_image(16, 16), window=31)


class TestMorphCleanup:
    def test_isolated_pixel_removed(self):
        mask = np.zeros((20, 20), dtype=bool)
        mask[10, 10] = True
        assert not imgproc.morph_cleanup(mask).any()

    def test_center_block_survives(self):
        mask = np.zeros((20, 20), dtype=bool)
        mask[8:13, 8:13] = True
        out = imgproc.morph_cleanup(mask)
        np.testing.assert_array_equal(out, mask)

    def test_border_block_removed(self):
        mask = np.zeros((20, 20), dtype=bool)
        mask[0:5, 8:13] = True
        assert not imgproc.morph_cleanup(mask).any()

    def test_idempotence(self):
        mask = RNG.random((40, 40)) > 0.6
        once = imgproc.morph_cleanup(mask)
        np.testing.assert_array_equal(imgproc.morph_cleanup(once), once)


class TestFillHoles:
    def test_small_hole_filled(self):
        mask = np.zeros((30, 30), dtype=bool)
        mask[5:20, 5:20] = True
        mask[10:15, 10:15] = False
        out = imgproc.fill_holes(mask)
        assert out[10:15, 10:15].all()

    def test_oversized_hole_left_open(self):
        # a one-pixel frame around a 26x26 hole: hole is ~26x the frame
        mask = np.zeros((30, 30), dtype=bool)
        mask[1:29, 1:29] = True
        mask[2:28, 2:28] = False
        out = imgproc.fill_holes(mask, max_hole_ratio=4.0)
        np.testing.assert_array_equal(out, mask)

    def test_none_ratio_fills_everything(self):
        mask = np.zeros((30, 30), dtype=bool)
        mask[1:29, 1:29] = True
        mask[2:28, 2:28] = False
        out = imgproc.fill_holes(mask, max_hole_ratio=None)
        assert out[2:28, 2:28].all()


class TestConnectedComponents:
    def test_two_blocks(self):
        mask = np.zeros((30, 30), dtype=bool)
        mask[2:6, 2:6] = True
        mask[20:28, 20:26] = True
        regions = imgproc.connected_components(mask, gray_image(30, 30))
        counts = sorted(r.pixel_count for r in regions)
        assert counts == [16, 48]

    def test_solid_square_stats(self):
        mask = np.zeros((30, 30), dtype=bool)
        mask[10:20, 10:20] = True
        [r] = imgproc.connected_components(mask, gray_image(30, 30))
        assert r.pixel_count == 100
        assert r.convex_area == 100
        assert r.axis_major == pytest.approx(r.axis_minor)
        assert r.perimeter == pytest.approx(36.0)
        np.testing.assert_allclose(r.centroid, [14.5, 14.5])
        assert r.convexity == pytest.approx(1.0)
        assert r.axis_ratio == pytest.approx(1.0)

    def test_constant_gray_entropy_zero(self):
        mask = np.zeros((20, 20), dtype=bool)
        mask[5:15, 5:15] = True
        [r] = imgproc.connected_components(mask, gray_image(20, 20))
        assert r.entropy == 0.0

    def test_entropy_log2_of_level_count(self):
        mask = np.zeros((8, 8), dtype=bool)
        mask[0:4, 0:4] = True
        img = np.zeros((8, 8, 3), dtype=np.uint8)
        # four equally frequent gray levels inside the region
        levels = np.repeat([10, 60, 110, 160], 4).reshape(4, 4)
        img[0:4, 0:4] = levels[..., None]
        [r] = imgproc.connected_components(img=img, mask=mask)
        assert r.entropy == pytest.approx(2.0)

    def test_pixel_count_partition(self):
        mask = RNG.random((50, 50)) > 0.5
        regions = imgproc.connected_components(mask, gray_image(50, 50))
        assert sum(r.pixel_count for r in regions) == int(mask.sum())

    def test_area_ordering_invariant(self):
        mask = ndi.binary_dilation(RNG.random((60, 60)) > 0.9,
                                   iterations=2)
        regions = imgproc.connected_components(mask, gray_image(60, 60))
        for r in regions:
            assert r.pixel_count <= r.convex_area
            ys = r.contour[:, 1]
            xs = r.contour[:, 0]
            bbox_area = (ys.max() - ys.min() + 1) * (xs.max() - xs.min() + 1)
            assert r.convex_area <= bbox_area + 1e-9
            assert 0.0 <= r.entropy <= 8.0

    def test_empty_mask(self):
        mask = np.zeros((10, 10), dtype=bool)
        assert imgproc.connected_components(mask, gray_image(10, 10)) == []

    def test_dimension_mismatch(self):
        with pytest.raises(InvalidInputError):
            imgproc.connected_components(np.zeros((5, 5), dtype=bool),
                                         gray_image(6, 6))
