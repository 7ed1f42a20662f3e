"""Pixel-level preprocessing: canonization, thresholding, morphology and
connected-component region statistics.

Images are uint8 arrays of shape (h, w, 3); binary masks are boolean
arrays of shape (h, w).
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.ndimage as ndi
from PIL import Image

from .errors import InvalidInputError

_STRUCT8 = np.ones((3, 3), dtype=bool)

# step offsets for Moore boundary tracing, clockwise starting north
_MOORE = [(-1, 0), (-1, 1), (0, 1), (1, 1), (1, 0), (1, -1), (0, -1), (-1, -1)]


def rgb_to_luma(img: np.ndarray) -> np.ndarray:
    """ITU-R BT.601 luma of an RGB image, as float."""
    a = np.asarray(img, dtype=float)
    if a.ndim == 2:
        return a
    return 0.299 * a[..., 0] + 0.587 * a[..., 1] + 0.114 * a[..., 2]


def _wiener2(channel: np.ndarray, window: int) -> np.ndarray:
    """Local adaptive Wiener filter; noise power is the mean of the local
    variances (MATLAB wiener2 convention)."""
    size = (window, window)
    mean = ndi.uniform_filter(channel, size, mode="reflect")
    sqmean = ndi.uniform_filter(channel * channel, size, mode="reflect")
    var = np.maximum(sqmean - mean * mean, 0.0)
    noise = var.mean()
    out = mean + np.where(var > noise, (var - noise) / np.where(var > 0, var, 1.0), 0.0) * (channel - mean)
    return out


def canonize(img: np.ndarray, min_dim: int = 400, wiener_window: int = 5,
             normalize: bool = True) -> np.ndarray:
    """Rescale so the smaller dimension equals ``min_dim`` (bilinear,
    aspect preserved), denoise with an adaptive Wiener filter and
    max-normalize each RGB channel."""
    a = np.asarray(img)
    if a.ndim != 3 or a.shape[2] != 3:
        raise InvalidInputError("expected an RGB image")
    h, w = a.shape[:2]
    if min(h, w) < 24:
        raise InvalidInputError(f"image too small: {w}x{h}")
    if h <= w:
        nh, nw = min_dim, int(round(w * min_dim / h))
    else:
        nw, nh = min_dim, int(round(h * min_dim / w))
    if (nh, nw) != (h, w):
        a = np.asarray(Image.fromarray(a.astype(np.uint8)).resize((nw, nh), Image.BILINEAR))
    out = a.astype(float)
    for c in range(3):
        out[..., c] = _wiener2(out[..., c], wiener_window)
    if normalize:
        for c in range(3):
            m = out[..., c].max()
            if m > 0:
                out[..., c] *= 255.0 / m
    return np.clip(np.round(out), 0, 255).astype(np.uint8)


def adaptive_threshold(img: np.ndarray, window: int = 31, offset: float = 5.0
                       ) -> np.ndarray:
    """Foreground where luma drops below the local mean minus ``offset``."""
    if window < 3 or window % 2 == 0:
        raise InvalidInputError("window must be odd and >= 3")
    luma = rgb_to_luma(img)
    h, w = luma.shape
    if window > min(h, w):
        raise InvalidInputError("window larger than image")
    local_mean = ndi.uniform_filter(luma, (window, window), mode="reflect")
    return luma < local_mean - offset


def fill_holes(mask: np.ndarray,
               max_hole_ratio: float | None = 4.0) -> np.ndarray:
    """Fill enclosed background holes of foreground components.

    A component only larger than the local-mean window thresholds as a
    ring (foreground near the edges, a hole in the middle); filling turns
    it back into a solid region.  Holes larger than ``max_hole_ratio``
    times the component's own pixel count are left open, so a thin blob
    encircling a large area (for example a dark background band around a
    whole chart) does not swallow everything inside it.  With
    ``max_hole_ratio=None`` every hole is filled unconditionally.
    """
    if max_hole_ratio is None:
        return ndi.binary_fill_holes(mask)
    labels, n = ndi.label(mask, structure=_STRUCT8)
    out = mask.copy()
    for idx, sl in enumerate(ndi.find_objects(labels), start=1):
        if sl is None:
            continue
        sub = labels[sl] == idx
        filled = ndi.binary_fill_holes(sub)
        hole = int(filled.sum()) - int(sub.sum())
        if 0 < hole <= max_hole_ratio * sub.sum():
            out[sl] |= filled
    return out


def morph_cleanup(mask: np.ndarray) -> np.ndarray:
    """3x3 opening followed by removal of border-touching components."""
    m = ndi.binary_opening(mask, structure=_STRUCT8)
    labels, n = ndi.label(m, structure=_STRUCT8)
    if n:
        border = np.unique(np.concatenate([
            labels[0], labels[-1], labels[:, 0], labels[:, -1]]))
        border = border[border > 0]
        if border.size:
            m[np.isin(labels, border)] = False
    return m


@dataclass
class Region:
    """One 8-connected foreground component with its shape statistics."""
    label: int
    pixel_count: int
    perimeter: float
    convex_area: float
    axis_major: float
    axis_minor: float
    centroid: np.ndarray
    contour: np.ndarray  # ordered boundary points, (n, 2) as (x, y)
    entropy: float
    features: dict = field(default_factory=dict)

    @property
    def convexity(self) -> float:
        return self.pixel_count / self.convex_area if self.convex_area else 0.0

    @property
    def axis_ratio(self) -> float:
        return self.axis_minor / self.axis_major if self.axis_major else 0.0

    @property
    def circularity(self) -> float:
        return 4.0 * np.pi * self.pixel_count / self.perimeter ** 2


def trace_boundary(mask: np.ndarray) -> np.ndarray:
    """Moore-neighbor boundary trace of a single component.

    Returns ordered (row, col) boundary pixels.  ``mask`` must contain one
    8-connected component.
    """
    rows, cols = np.nonzero(mask)
    if len(rows) == 0:
        return np.zeros((0, 2), dtype=int)
    order = np.lexsort((cols, rows))
    start = (int(rows[order[0]]), int(cols[order[0]]))
    if len(rows) == 1:
        return np.array([start])

    h, w = mask.shape

    def at(r, c):
        return 0 <= r < h and 0 <= c < w and mask[r, c]

    boundary = [start]
    # backtrack starts west of the raster-first pixel
    prev_dir = 6
    cur = start
    first_move = None
    while True:
        found = False
        for k in range(8):
            d = (prev_dir + 1 + k) % 8
            dr, dc = _MOORE[d]
            nr, nc = cur[0] + dr, cur[1] + dc
            if at(nr, nc):
                move = (cur, (nr, nc))
                if first_move is None:
                    first_move = move
                elif move == first_move:
                    return np.array(boundary[:-1])
                boundary.append((nr, nc))
                cur = (nr, nc)
                prev_dir = (d + 4) % 8
                found = True
                break
        if not found:  # isolated pixel
            return np.array(boundary)
        if len(boundary) > 8 * len(rows) + 8:
            return np.array(boundary)  # safety bound, never hit in practice


def _chain_perimeter(boundary: np.ndarray) -> float:
    if len(boundary) < 2:
        return 1.0
    diffs = np.abs(np.diff(np.vstack([boundary, boundary[:1]]), axis=0))
    steps = np.where(diffs.sum(axis=1) == 2, np.sqrt(2.0), 1.0)
    return float(steps.sum())


def _ellipse_axes(ys: np.ndarray, xs: np.ndarray) -> tuple[float, float]:
    """Major/minor axis lengths of the ellipse with the same normalized
    second central moments, with the 1/12 unit-pixel term included."""
    cx, cy = xs.mean(), ys.mean()
    mu20 = ((xs - cx) ** 2).mean() + 1.0 / 12.0
    mu02 = ((ys - cy) ** 2).mean() + 1.0 / 12.0
    mu11 = ((xs - cx) * (ys - cy)).mean()
    common = np.sqrt(((mu20 - mu02) / 2.0) ** 2 + mu11 ** 2)
    lam1 = (mu20 + mu02) / 2.0 + common
    lam2 = max((mu20 + mu02) / 2.0 - common, 0.0)
    return 4.0 * np.sqrt(lam1), 4.0 * np.sqrt(lam2)


def _convex_pixel_area(boundary: np.ndarray, pixel_count: int) -> float:
    """Number of pixels whose centers lie inside the convex hull of the
    boundary pixel centers."""
    from .geometry import convex_hull

    pts = boundary[:, ::-1].astype(float)  # to (x, y)
    hull = convex_hull(pts)
    if len(hull) < 3:
        return float(pixel_count)
    x0, x1 = int(np.floor(hull[:, 0].min())), int(np.ceil(hull[:, 0].max()))
    y0, y1 = int(np.floor(hull[:, 1].min())), int(np.ceil(hull[:, 1].max()))
    gx, gy = np.meshgrid(np.arange(x0, x1 + 1, dtype=float),
                         np.arange(y0, y1 + 1, dtype=float))
    inside = np.ones(gx.shape, dtype=bool)
    for i in range(len(hull)):
        a, b = hull[i], hull[(i + 1) % len(hull)]
        inside &= ((b[0] - a[0]) * (gy - a[1]) - (b[1] - a[1]) * (gx - a[0])) >= -1e-9
    return float(max(int(inside.sum()), pixel_count))


def _histogram_entropy(values: np.ndarray) -> float:
    counts = np.bincount(values, minlength=256)
    p = counts[counts > 0] / counts.sum()
    return float(-(p * np.log2(p)).sum())


def connected_components(mask: np.ndarray, img: np.ndarray) -> list[Region]:
    """Label the mask with 8-connectivity and compute per-region stats.

    Grayscale statistics (entropy) are taken from ``img``.
    """
    mask = np.asarray(mask, dtype=bool)
    if mask.shape != np.asarray(img).shape[:2]:
        raise InvalidInputError("mask and image dimensions differ")
    labels, n = ndi.label(mask, structure=_STRUCT8)
    if n == 0:
        return []
    luma = np.clip(np.round(rgb_to_luma(img)), 0, 255).astype(np.uint8)
    regions = []
    slices = ndi.find_objects(labels)
    for idx, sl in enumerate(slices, start=1):
        if sl is None:
            continue
        sub = labels[sl] == idx
        ys, xs = np.nonzero(sub)
        oy, ox = sl[0].start, sl[1].start
        ys_g = ys + oy
        xs_g = xs + ox
        boundary = trace_boundary(sub)
        boundary_g = boundary + np.array([oy, ox])
        perimeter = _chain_perimeter(boundary)
        axis_major, axis_minor = _ellipse_axes(ys_g.astype(float), xs_g.astype(float))
        convex_area = _convex_pixel_area(boundary, len(ys))
        entropy = _histogram_entropy(luma[ys_g, xs_g])
        regions.append(Region(
            label=idx,
            pixel_count=int(len(ys)),
            perimeter=perimeter,
            convex_area=convex_area,
            axis_major=axis_major,
            axis_minor=axis_minor,
            centroid=np.array([xs_g.mean(), ys_g.mean()]),
            contour=boundary_g[:, ::-1].astype(float),  # (x, y)
            entropy=entropy,
        ))
    return regions
