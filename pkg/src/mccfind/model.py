"""Reference geometry and colors of the 4x6 ColorChecker Classic chart.

The canonical chart lives in "model units": an 11 x 8.25 rectangle with a
centered 4x6 grid of square patches separated by 0.25-unit gaps.  Cell
indices are row-major, row 0 at the top, column 0 at the left; patch #1
sits at cell (0, 0).
"""
from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidInputError

ROWS = 4
COLS = 6
N_PATCHES = ROWS * COLS


def _synthetic_palette() -> np.ndarray:
    """24 well-separated reference colors for fixtures and self tests.

    18 chromatic colors are picked by greedy farthest-point sampling on a
    5^3 RGB lattice (bright near-white candidates excluded so they keep
    contrast against the light chart substrate); the last row holds six
    gray levels, matching the grayscale bottom row of the real chart.
    """
    levels = np.linspace(0.05, 0.95, 5)
    grid = np.array(np.meshgrid(levels, levels, levels)).T.reshape(-1, 3)
    luma = grid @ np.array([0.299, 0.587, 0.114])
    cands = grid[luma <= 0.85]
    chosen = [np.array([0.95, 0.05, 0.05])]
    dists = np.linalg.norm(cands - chosen[0], axis=1)
    while len(chosen) < 18:
        idx = int(np.argmax(dists))
        chosen.append(cands[idx])
        dists = np.minimum(dists, np.linalg.norm(cands - cands[idx], axis=1))
    grays = np.repeat(np.array([0.95, 0.78, 0.62, 0.45, 0.28, 0.12])[:, None], 3, axis=1)
    return np.vstack([np.array(chosen), grays])


@dataclass
class ColorCheckerModel:
    """Canonical 4x6 chart: patch colors plus layout geometry."""
    reference_colors: np.ndarray  # (24, 3) in [0, 1]
    width: float = 11.0
    height: float = 8.25
    gap: float = 0.25
    patch_size: float = field(init=False)

    def __post_init__(self):
        colors = np.asarray(self.reference_colors, dtype=float)
        if colors.shape != (N_PATCHES, 3):
            raise InvalidInputError("reference colors must be 24 RGB triples")
        if colors.min() < 0 or colors.max() > 1:
            raise InvalidInputError("reference colors must lie in [0, 1]")
        if len(np.unique(np.round(colors, 9), axis=0)) != N_PATCHES:
            raise InvalidInputError("reference colors must be distinct")
        self.reference_colors = colors
        self.patch_size = (self.width - (COLS + 1) * self.gap) / COLS
        grid_w = COLS * self.patch_size + (COLS - 1) * self.gap
        grid_h = ROWS * self.patch_size + (ROWS - 1) * self.gap
        self._margin_x = (self.width - grid_w) / 2.0
        self._margin_y = (self.height - grid_h) / 2.0

    @classmethod
    def synthetic(cls) -> "ColorCheckerModel":
        return cls(_synthetic_palette())

    @classmethod
    def from_csv(cls, path) -> "ColorCheckerModel":
        """Load reference colors from a name,R,G,B (0-255) CSV."""
        rows = []
        with open(path, newline="") as fh:
            for rec in csv.reader(fh):
                if not rec or rec[0].strip().startswith("#"):
                    continue
                if rec[0].strip().lower() == "name":
                    continue
                if len(rec) < 4:
                    raise InvalidInputError(f"bad CSV row: {rec}")
                rows.append([float(v) / 255.0 for v in rec[1:4]])
        if len(rows) != N_PATCHES:
            raise InvalidInputError(f"expected 24 color rows, got {len(rows)}")
        return cls(np.array(rows))

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["name", "R", "G", "B"])
            for k, c in enumerate(self.reference_colors, start=1):
                w.writerow([f"patch{k:02d}"] + [f"{v * 255.0:.3f}" for v in c])

    # -- layout geometry ------------------------------------------------

    @property
    def colors_grid(self) -> np.ndarray:
        return self.reference_colors.reshape(ROWS, COLS, 3)

    @property
    def outline(self) -> np.ndarray:
        """Chart outline corners, clockwise from the patch-#1 corner."""
        return np.array([[0.0, 0.0], [self.width, 0.0],
                         [self.width, self.height], [0.0, self.height]])

    def patch_x_edges(self, col: int) -> tuple[float, float]:
        x0 = self._margin_x + col * (self.patch_size + self.gap)
        return x0, x0 + self.patch_size

    def patch_y_edges(self, row: int) -> tuple[float, float]:
        y0 = self._margin_y + row * (self.patch_size + self.gap)
        return y0, y0 + self.patch_size

    def patch_center(self, row: int, col: int) -> np.ndarray:
        x0, x1 = self.patch_x_edges(col)
        y0, y1 = self.patch_y_edges(row)
        return np.array([(x0 + x1) / 2.0, (y0 + y1) / 2.0])

    def patch_quad(self, row: int, col: int) -> np.ndarray:
        x0, x1 = self.patch_x_edges(col)
        y0, y1 = self.patch_y_edges(row)
        return np.array([[x0, y0], [x1, y0], [x1, y1], [x0, y1]])

    @property
    def patch_quads(self) -> np.ndarray:
        """All 24 patch quads, row-major, each clockwise from top-left."""
        return np.array([self.patch_quad(r, c)
                         for r in range(ROWS) for c in range(COLS)])

    @property
    def patch_centers(self) -> np.ndarray:
        return np.array([self.patch_center(r, c)
                         for r in range(ROWS) for c in range(COLS)])

    @property
    def grid_bbox(self) -> tuple[float, float, float, float]:
        """Outer edges of the patch grid (excluding the chart margin)."""
        return (self.patch_x_edges(0)[0], self.patch_y_edges(0)[0],
                self.patch_x_edges(COLS - 1)[1], self.patch_y_edges(ROWS - 1)[1])
