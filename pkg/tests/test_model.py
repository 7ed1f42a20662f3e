"""Chart model: palette validity, layout geometry and CSV round trip."""
import numpy as np
import pytest

from mccfind.model import COLS, N_PATCHES, ROWS, ColorCheckerModel
from mccfind.errors import InvalidInputError


class TestPalette:
    def test_shape_and_range(self, model):
        colors = model.reference_colors
        assert colors.shape == (N_PATCHES, 3)
        assert colors.min() >= 0.0 and colors.max() <= 1.0

    def test_all_distinct(self, model):
        assert len(np.unique(np.round(model.reference_colors, 9), axis=0)) \
            == N_PATCHES

    def test_bottom_row_is_grayscale(self, model):
        grays = model.colors_grid[ROWS - 1]
        assert np.allclose(grays[:, 0], grays[:, 1])
        assert np.allclose(grays[:, 1], grays[:, 2])
        assert np.all(np.diff(grays[:, 0]) < 0)

    def test_duplicate_colors_rejected(self):
        colors = ColorCheckerModel.synthetic().reference_colors.copy()
        colors[1] = colors[0]
        with pytest.raises(InvalidInputError):
            ColorCheckerModel(colors)

    def test_out_of_range_rejected(self):
        colors = ColorCheckerModel.synthetic().reference_colors.copy()
        colors[0, 0] = 1.5
        with pytest.raises(InvalidInputError):
            ColorCheckerModel(colors)


class TestLayout:
    def test_patch_size(self, model):
        assert model.patch_size == pytest.approx((11.0 - 7 * 0.25) / 6.0)

    def test_centers_form_uniform_lattice(self, model):
        centers = model.patch_centers.reshape(ROWS, COLS, 2)
        pitch = model.patch_size + model.gap
        dx = np.diff(centers[..., 0], axis=1)
        dy = np.diff(centers[..., 1], axis=0)
        assert np.allclose(dx, pitch)
        assert np.allclose(dy, pitch)

    def test_quads_inside_outline(self, model):
        quads = model.patch_quads.reshape(-1, 2)
        assert quads[:, 0].min() >= 0 and quads[:, 0].max() <= model.width
        assert quads[:, 1].min() >= 0 and quads[:, 1].max() <= model.height

    def test_grid_is_centered(self, model):
        x0, y0, x1, y1 = model.grid_bbox
        assert x0 == pytest.approx(model.width - x1)
        assert y0 == pytest.approx(model.height - y1)

    def test_patch_quad_matches_edges(self, model):
        quad = model.patch_quad(2, 3)
        x0, x1 = model.patch_x_edges(3)
        y0, y1 = model.patch_y_edges(2)
        np.testing.assert_allclose(
            quad, [[x0, y0], [x1, y0], [x1, y1], [x0, y1]])


class TestCsv:
    def test_round_trip(self, model, tmp_path):
        path = tmp_path / "palette.csv"
        model.to_csv(path)
        back = ColorCheckerModel.from_csv(path)
        np.testing.assert_allclose(back.reference_colors,
                                   model.reference_colors, atol=1e-5)

    def test_wrong_row_count_rejected(self, tmp_path):
        path = tmp_path / "short.csv"
        path.write_text("name,R,G,B\np1,10,20,30\n")
        with pytest.raises(InvalidInputError):
            ColorCheckerModel.from_csv(path)

    def test_comments_and_header_skipped(self, model, tmp_path):
        path = tmp_path / "palette.csv"
        model.to_csv(path)
        text = "# a comment line\n" + path.read_text()
        path.write_text(text)
        back = ColorCheckerModel.from_csv(path)
        assert back.reference_colors.shape == (N_PATCHES, 3)
