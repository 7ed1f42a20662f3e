"""Chart recognition: patch filtering, clustering, grid completion,
orientation fitting, hypothesis scoring and multi-chart selection.
"""
from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
import scipy.sparse.csgraph as csgraph

from . import geometry as geo
from . import imgproc
from .errors import (GeometryError, InvalidHypothesisError, InvalidInputError,
                     MalformedGroupError)
from .imgproc import Region
from .model import COLS, N_PATCHES, ROWS, ColorCheckerModel


@dataclass
class PatchCandidate:
    """A quadrilateral color-patch hypothesis."""
    quad: np.ndarray          # (4, 2) clockwise
    center: np.ndarray        # (2,)
    area: float
    axis_max: float
    mean_color: np.ndarray    # (3,) in [0, 1]


@dataclass
class CheckerHypothesis:
    """A full 24-patch chart pose awaiting or carrying its cost."""
    corners: np.ndarray       # (4, 2), clockwise from the patch-#1 corner
    homography: np.ndarray    # 3x3, model plane -> image
    patch_quads: np.ndarray   # (24, 4, 2)
    theta: int                # degrees in {0, 90, 180, 270}
    delta: int                # placement index, row-major from 1
    mu: np.ndarray = field(default_factory=lambda: np.zeros((N_PATCHES, 3)))
    sigma: np.ndarray = field(default_factory=lambda: np.zeros((N_PATCHES, 3)))
    cost: float = np.inf

    @property
    def bbox(self) -> tuple[float, float, float, float]:
        return geo.bbox_of(np.vstack([self.corners, self.patch_quads.reshape(-1, 2)]))


@dataclass
class DetectionResult:
    hypotheses: list[CheckerHypothesis]
    elapsed: float = 0.0
    rois: list | None = None


def filter_regions(regions: list[Region],
                   convexity_min: float = 0.90,
                   axis_ratio_min: float = 0.4,
                   circularity_range: tuple[float, float] = (0.65, 0.97),
                   entropy_max: float = 4.9) -> list[Region]:
    """Keep regions passing all four shape/homogeneity criteria."""
    lo, hi = circularity_range
    out = []
    for r in regions:
        if r.convexity <= convexity_min:
            continue
        if r.axis_ratio <= axis_ratio_min:
            continue
        if not (lo < r.circularity < hi):
            continue
        if r.entropy >= entropy_max:
            continue
        out.append(r)
    return out


def extract_patches(regions: list[Region], img: np.ndarray,
                    rdp_epsilon_factor: float = 0.05,
                    sample_shrink: float = 0.7) -> list[PatchCandidate]:
    """Quadrilateral candidates from filtered regions.

    A region survives when its simplified contour has four vertices (five
    are tolerated, covering a square with one rounded-off corner) and its
    pixels fill most of the minimum bounding parallelogram of the
    contour; that parallelogram becomes the candidate quad.
    """
    img = np.asarray(img)
    h, w = img.shape[:2]
    out = []
    for r in regions:
        if len(r.contour) < 4:
            continue
        try:
            simplified = geo.rdp_simplify(r.contour, rdp_epsilon_factor * r.perimeter)
        except GeometryError:
            continue
        if not 4 <= len(simplified) <= 5:
            continue
        try:
            quad = geo.min_bounding_parallelogram(r.contour)
        except GeometryError:
            continue
        quad_area = geo.polygon_area(quad)
        if quad_area <= 0 or r.pixel_count < 0.7 * quad_area:
            continue
        center = quad.mean(axis=0)
        color = _sample_mean_color(img, quad, sample_shrink)
        if color is None:
            continue
        out.append(PatchCandidate(
            quad=quad,
            center=center,
            area=geo.polygon_area(quad),
            axis_max=r.axis_major,
            mean_color=color,
        ))
    return out


def _sample_mean_color(img: np.ndarray, quad: np.ndarray, shrink: float
                       ) -> np.ndarray | None:
    h, w = img.shape[:2]
    inner = geo.shrink_polygon(quad, shrink)
    ys, xs = geo.rasterize_convex_polygon(inner, w, h)
    if len(ys) == 0:
        cx, cy = quad.mean(axis=0)
        ix, iy = int(round(cx)), int(round(cy))
        if not (0 <= ix < w and 0 <= iy < h):
            return None
        return img[iy, ix].astype(float) / 255.0
    return img[ys, xs].mean(axis=0) / 255.0


def cluster_patches(patches: list[PatchCandidate],
                    b0_factor: float = 1.65,
                    min_group_size: int = 4) -> list[list[PatchCandidate]]:
    """Group patches by the area-weighted center-distance graph.

    d_ij = (1 + |A_i - A_j| / (A_i + A_j)) * ||X_i - X_j||; an undirected
    edge exists when d_ij falls under either endpoint's radius
    B_0 = AxisMax * b0_factor.  Groups are the connected components;
    groups smaller than ``min_group_size`` are dropped.
    """
    n = len(patches)
    if n == 0:
        return []
    centers = np.array([p.center for p in patches])
    areas = np.array([p.area for p in patches])
    radii = np.array([p.axis_max for p in patches]) * b0_factor
    diff = centers[:, None, :] - centers[None, :, :]
    dist = np.hypot(diff[..., 0], diff[..., 1])
    denom = areas[:, None] + areas[None, :]
    wij = np.abs(areas[:, None] - areas[None, :]) / np.where(denom > 0, denom, 1.0)
    d = (1.0 + wij) * dist
    adj = (d < radii[:, None]) | (d < radii[None, :])
    np.fill_diagonal(adj, False)
    n_comp, labels = csgraph.connected_components(sp.csr_matrix(adj), directed=False)
    groups = []
    for k in range(n_comp):
        members = [patches[i] for i in np.nonzero(labels == k)[0]]
        if len(members) >= min_group_size:
            groups.append(members)
    return groups


_UNIT_CORNERS = np.array([[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]])


@dataclass
class GridCompletion:
    """A patch group arranged on a sub-lattice of the chart grid."""
    group: list[PatchCandidate]
    meq: np.ndarray               # (4, 2) enclosing quad in image coords
    h_img_to_unit: np.ndarray     # image -> unit square over the MEQ
    col_coords: np.ndarray        # unit-square x of each column, ascending
    row_coords: np.ndarray        # unit-square y of each row, ascending
    cells: np.ndarray             # (rows, cols) index into group, -1 = missing
    completed_centers: np.ndarray  # (rows * cols, 2) image coords, row-major

    @property
    def shape(self) -> tuple[int, int]:
        return self.cells.shape


def _lattice_axis(values: np.ndarray, pitch: float
                  ) -> tuple[np.ndarray, np.ndarray]:
    """Snap 1D coordinates onto lattice lines of roughly known pitch.

    Returns (line coordinates including empty lines, line index of each
    value).  The origin and pitch are refined by a least-squares line fit
    once an initial assignment exists.
    """
    vals = np.asarray(values, dtype=float)
    if pitch <= 0:
        raise MalformedGroupError("non-positive lattice pitch")
    idx = np.round((vals - vals.min()) / pitch).astype(int)
    a, b = float(vals.min()), pitch
    if idx.max() > 0:
        b, a = np.polyfit(idx, vals, 1)
        if b > 0.25 * pitch:
            idx = np.round((vals - a) / b).astype(int)
            idx -= idx.min()
            if idx.max() > 0:
                b, a = np.polyfit(idx, vals, 1)
        else:
            a, b = float(vals.min()), pitch
    centers = a + b * np.arange(idx.max() + 1)
    return centers, idx


# ratio of cell pitch (patch plus gap) to patch size for the default
# chart geometry; used when no model is supplied
_DEFAULT_PITCH_RATIO = (11.0 - 7 * 0.25) / 6.0
_DEFAULT_PITCH_RATIO = (_DEFAULT_PITCH_RATIO + 0.25) / _DEFAULT_PITCH_RATIO


def complete_grid(group: list[PatchCandidate],
                  min_angle_deg: float = 30.0,
                  pitch_ratio: float = _DEFAULT_PITCH_RATIO) -> GridCompletion:
    """Arrange a patch group on a sub-lattice of the chart grid.

    The group's minimum enclosing quadrilateral is mapped to the unit
    square; the lattice pitch along each axis follows from the median
    patch extent there (scaled by ``pitch_ratio``, the cell-to-patch size
    ratio), patch centers snap to the nearest lattice line, and the
    Cartesian product of the line coordinates yields center estimates for
    the missing cells.
    """
    if len(group) < 4:
        raise MalformedGroupError("group smaller than 4 patches")
    areas = np.array([p.area for p in group])
    med_area = float(np.median(areas))
    keep = (areas > 0.35 * med_area) & (areas < 3.0 * med_area)
    if keep.sum() >= 4:
        group = [p for p, k in zip(group, keep) if k]
    try:
        meq = geo.min_enclosing_quadrilateral([p.quad for p in group],
                                              min_angle_deg=min_angle_deg,
                                              containment_tol=5.0,
                                              support_tol=1.5)
        h_img_to_unit = geo.estimate_homography(meq, _UNIT_CORNERS)
        centers = np.array([p.center for p in group])
        centers_u = geo.apply_homography(h_img_to_unit, centers)
        quads_u = np.array([geo.apply_homography(h_img_to_unit, p.quad)
                            for p in group])
    except GeometryError as e:
        raise MalformedGroupError(str(e)) from e

    # the patch edges run parallel to the grid axes, so their direction
    # families give the lattice basis; this stays correct even when the
    # enclosing quad is sheared relative to the grid
    edges = np.roll(quads_u, -1, axis=1) - quads_u
    h_angles, v_angles, h_lens, v_lens = [], [], [], []
    for quad_edges in edges:
        for e in quad_edges:
            length = float(np.hypot(*e))
            if length < 1e-9:
                continue
            ang = np.arctan2(e[1], e[0]) % np.pi
            if min(ang, np.pi - ang) <= np.pi / 4:
                h_angles.append(ang if ang < np.pi / 2 else ang - np.pi)
                h_lens.append(length)
            else:
                v_angles.append(ang)
                v_lens.append(length)
    if h_angles and v_angles:
        ha = float(np.median(h_angles))
        va = float(np.median(v_angles))
        u_dir = np.array([np.cos(ha), np.sin(ha)])
        v_dir = np.array([np.cos(va), np.sin(va)])
        pitch_u = float(np.median(h_lens)) * pitch_ratio
        pitch_v = float(np.median(v_lens)) * pitch_ratio
    else:
        u_dir, v_dir = np.array([1.0, 0.0]), np.array([0.0, 1.0])
        pitch_u = float(np.median(
            quads_u[..., 0].max(axis=1) - quads_u[..., 0].min(axis=1)
        )) * pitch_ratio
        pitch_v = float(np.median(
            quads_u[..., 1].max(axis=1) - quads_u[..., 1].min(axis=1)
        )) * pitch_ratio

    # refine the basis with the single-step vectors between adjacent
    # patch centers: for each patch the closest neighbor along each
    # direction family is one lattice step away
    steps = ([], [])
    cos45 = np.cos(np.pi / 4)
    for i in range(len(group)):
        nearest = [None, None]
        for j in range(len(group)):
            if j == i:
                continue
            d = centers_u[j] - centers_u[i]
            length = float(np.hypot(*d))
            if length < 1e-9:
                continue
            for fam, fdir in ((0, u_dir), (1, v_dir)):
                if abs(d @ fdir) / length > cos45:
                    if nearest[fam] is None or length < nearest[fam][0]:
                        nearest[fam] = (length, d if d @ fdir > 0 else -d)
        for fam in (0, 1):
            if nearest[fam] is not None:
                steps[fam].append(nearest[fam][1])
    p_u = (np.median(steps[0], axis=0) if len(steps[0]) >= 3
           else u_dir * pitch_u)
    p_v = (np.median(steps[1], axis=0) if len(steps[1]) >= 3
           else v_dir * pitch_v)
    basis = np.column_stack([p_u, p_v])
    if abs(np.linalg.det(basis)) < 0.1 * np.hypot(*p_u) * np.hypot(*p_v):
        raise MalformedGroupError("degenerate lattice basis")
    coords_uv = np.linalg.solve(basis, centers_u.T).T
    col_coords, col_of = _lattice_axis(coords_uv[:, 0], 1.0)
    row_coords, row_of = _lattice_axis(coords_uv[:, 1], 1.0)

    # refine with a homography fitted from lattice indices to centers;
    # this absorbs the shear and keystone left by an imperfect enclosing
    # quad, which per-axis snapping cannot see
    h_lattice = None
    cr = coords_uv
    for _ in range(5):
        src = np.column_stack([col_of, row_of]).astype(float)
        try:
            fitted = geo.estimate_homography(src, centers_u)
            cr = geo.apply_homography(np.linalg.inv(fitted), centers_u)
        except (GeometryError, np.linalg.LinAlgError):
            break
        h_lattice = fitted
        new_col = np.round(cr[:, 0]).astype(int)
        new_row = np.round(cr[:, 1]).astype(int)
        new_col -= new_col.min()
        new_row -= new_row.min()
        if np.array_equal(new_col, col_of) and np.array_equal(new_row, row_of):
            break
        col_of, row_of = new_col, new_row

    nc, nr = col_of.max() + 1, row_of.max() + 1
    fits = (nc <= COLS and nr <= ROWS) or (nc <= ROWS and nr <= COLS)
    if not fits:
        if len(group) > 4:
            # one off-lattice candidate can stretch the lattice past the
            # grid bounds; retry without the worst-fitting patch
            resid = np.max(np.abs(cr - np.round(cr)), axis=1)
            worst = int(np.argmax(resid))
            trimmed = [p for k, p in enumerate(group) if k != worst]
            return complete_grid(trimmed, min_angle_deg, pitch_ratio)
        raise MalformedGroupError(f"lattice {nr}x{nc} exceeds the 4x6 grid")

    def node(r, c):
        if h_lattice is not None:
            return geo.apply_homography(h_lattice, np.array([float(c), float(r)]))
        return basis @ np.array([col_coords[min(c, len(col_coords) - 1)],
                                 row_coords[min(r, len(row_coords) - 1)]])

    cells = np.full((nr, nc), -1, dtype=int)
    for i, p in enumerate(group):
        r, c = row_of[i], col_of[i]
        if cells[r, c] >= 0:
            # keep the candidate closest to the lattice node
            prev = centers_u[cells[r, c]]
            if (np.hypot(*(centers_u[i] - node(r, c)))
                    >= np.hypot(*(prev - node(r, c)))):
                continue
        cells[r, c] = i

    col_coords = np.array([node(0, c)[0] for c in range(nc)])
    row_coords = np.array([node(r, 0)[1] for r in range(nr)])
    grid_u = np.array([node(r, c) for r in range(nr) for c in range(nc)])
    try:
        h_unit_to_img = np.linalg.inv(h_img_to_unit)
        completed = geo.apply_homography(h_unit_to_img, grid_u)
    except (np.linalg.LinAlgError, GeometryError) as e:
        raise MalformedGroupError(str(e)) from e

    return GridCompletion(group=group, meq=meq, h_img_to_unit=h_img_to_unit,
                          col_coords=col_coords, row_coords=row_coords,
                          cells=cells, completed_centers=completed)


@dataclass
class OrientationFit:
    theta: int       # degrees
    delta: int       # row-major placement index, starting at 1
    quarter_turns: int
    row0: int
    col0: int
    cost: float


def fit_orientation(completion: GridCompletion, model: ColorCheckerModel
                    ) -> OrientationFit:
    """Discrete search over 4 rotations x all grid shifts.

    The detected sub-grid's mean colors are compared cell-wise (squared
    RGB distance) against every placement of the sub-grid inside the 4x6
    template; only cells occupied by detected patches contribute.
    """
    nr, nc = completion.shape
    colors = np.full((nr, nc, 3), np.nan)
    for r in range(nr):
        for c in range(nc):
            i = completion.cells[r, c]
            if i >= 0:
                colors[r, c] = completion.group[i].mean_color
    if np.sum(~np.isnan(colors[..., 0])) < 4:
        raise MalformedGroupError("fewer than 4 patches with colors")

    template = model.colors_grid
    best = None
    for q in range(4):
        rot = np.rot90(colors, q)
        R, C = rot.shape[:2]
        if R > ROWS or C > COLS:
            continue
        n_col_pos = COLS - C + 1
        for r0 in range(ROWS - R + 1):
            for c0 in range(n_col_pos):
                diff = rot - template[r0:r0 + R, c0:c0 + C]
                cost = float(np.nansum(diff * diff))
                delta = r0 * n_col_pos + c0 + 1
                key = (cost, delta, 90 * q)
                if best is None or key < best[0]:
                    best = (key, OrientationFit(theta=90 * q, delta=delta,
                                                quarter_turns=q, row0=r0,
                                                col0=c0, cost=cost))
    if best is None:
        raise MalformedGroupError("sub-grid does not fit the 4x6 template")
    return best[1]


def build_hypothesis(completion: GridCompletion, fit: OrientationFit,
                     model: ColorCheckerModel) -> CheckerHypothesis:
    """Project the full chart model into the image for a fitted group."""
    nr, nc = completion.shape
    ii, jj = np.meshgrid(np.arange(nr), np.arange(nc), indexing="ij")
    ir = np.rot90(ii, fit.quarter_turns)
    jr = np.rot90(jj, fit.quarter_turns)
    R, C = ir.shape

    x_lo = model.patch_x_edges(fit.col0)[0]
    x_hi = model.patch_x_edges(fit.col0 + C - 1)[1]
    y_lo = model.patch_y_edges(fit.row0)[0]
    y_hi = model.patch_y_edges(fit.row0 + R - 1)[1]

    # rotated position of each original sub-grid cell
    pos = np.empty((nr, nc, 2), dtype=int)
    for a in range(R):
        for b in range(C):
            pos[ir[a, b], jr[a, b]] = (a, b)

    # the four original corner cells anchor the unit square to the model
    unit_pts, model_pts = [], []
    for (ci, cj), u in zip([(0, 0), (0, nc - 1), (nr - 1, nc - 1), (nr - 1, 0)],
                           _UNIT_CORNERS):
        a, b = pos[ci, cj]
        mx = x_lo if b == 0 else x_hi
        my = y_lo if a == 0 else y_hi
        unit_pts.append(u)
        model_pts.append([mx, my])
    h_unit_to_img = np.linalg.inv(completion.h_img_to_unit)
    img_anchor = geo.apply_homography(h_unit_to_img, np.array(unit_pts, dtype=float))

    src = list(model_pts)
    dst = list(img_anchor)
    for r in range(nr):
        for c in range(nc):
            i = completion.cells[r, c]
            if i < 0:
                continue
            a, b = pos[r, c]
            src.append(model.patch_center(fit.row0 + a, fit.col0 + b))
            dst.append(completion.group[i].center)
    H = geo.estimate_homography(np.array(src), np.array(dst))

    corners = geo.apply_homography(H, model.outline)
    quads = np.array([geo.apply_homography(H, model.patch_quad(r, c))
                      for r in range(ROWS) for c in range(COLS)])
    return CheckerHypothesis(corners=corners, homography=H, patch_quads=quads,
                             theta=fit.theta, delta=fit.delta)


def score_hypothesis(hyp: CheckerHypothesis, img: np.ndarray,
                     model: ColorCheckerModel,
                     sample_shrink: float = 0.7) -> float:
    """Cosine color mismatch plus intra-patch variance over all 24 cells.

    Each term is 1 - cos(mu_k, r_k) + ||sigma_k||^2; a patch that falls
    entirely off the image contributes the maximal angular term 2.
    """
    img = np.asarray(img)
    h, w = img.shape[:2]
    cost = 0.0
    n_inside = 0
    for k in range(N_PATCHES):
        inner = geo.shrink_polygon(hyp.patch_quads[k], sample_shrink)
        ys, xs = geo.rasterize_convex_polygon(inner, w, h)
        if len(ys) == 0:
            cx, cy = hyp.patch_quads[k].mean(axis=0)
            ix, iy = int(round(cx)), int(round(cy))
            if 0 <= ix < w and 0 <= iy < h:
                ys = np.array([iy])
                xs = np.array([ix])
        if len(ys) == 0:
            hyp.mu[k] = 0.0
            hyp.sigma[k] = 0.0
            cost += 2.0
            continue
        n_inside += 1
        samples = img[ys, xs].astype(float) / 255.0
        mu = samples.mean(axis=0)
        sigma = samples.std(axis=0)
        hyp.mu[k] = mu
        hyp.sigma[k] = sigma
        ref = model.reference_colors[k]
        nm, nref = np.linalg.norm(mu), np.linalg.norm(ref)
        if nm < 1e-9 or nref < 1e-9:
            cost += 1.0
        else:
            cost += 1.0 - float(mu @ ref) / (nm * nref)
        cost += float(sigma @ sigma)
    if n_inside == 0:
        raise InvalidHypothesisError("all 24 patches outside the image")
    hyp.cost = cost
    return cost


def select_hypotheses(candidates: list[CheckerHypothesis],
                      n_expected: int | None = None,
                      cost_threshold: float | None = None,
                      nms_iou: float = 0.5) -> DetectionResult:
    """Greedy non-maximum suppression on bounding boxes, lowest cost first,
    then truncation to ``n_expected`` or the cost threshold."""
    ranked = sorted(candidates, key=lambda hh: hh.cost)
    accepted: list[CheckerHypothesis] = []
    for cand in ranked:
        if all(geo.iou_box(cand.bbox, a.bbox) < nms_iou for a in accepted):
            accepted.append(cand)
    if n_expected is not None:
        accepted = accepted[:n_expected]
    elif cost_threshold is not None:
        accepted = [a for a in accepted if a.cost < cost_threshold]
    return DetectionResult(hypotheses=accepted)


# -- end-to-end recognition ---------------------------------------------


def _recognize_canonical(canon: np.ndarray, model: ColorCheckerModel, cfg
                         ) -> list[CheckerHypothesis]:
    """Run steps 03-11 on an already-canonized image."""
    mask = imgproc.adaptive_threshold(canon, cfg.thresh_window, cfg.thresh_offset)
    mask = imgproc.morph_cleanup(mask)
    if cfg.fill_holes:
        mask = imgproc.fill_holes(mask)
    regions = imgproc.connected_components(mask, canon)
    regions = filter_regions(regions, cfg.convexity_min, cfg.axis_ratio_min,
                             cfg.circularity_range, cfg.entropy_max)
    patches = extract_patches(regions, canon, cfg.rdp_epsilon_factor,
                              cfg.sample_shrink)
    groups = cluster_patches(patches, cfg.b0_factor, cfg.min_group_size)
    pitch_ratio = (model.patch_size + model.gap) / model.patch_size
    hyps = []
    for group in groups:
        try:
            completion = complete_grid(group, pitch_ratio=pitch_ratio)
            fit = fit_orientation(completion, model)
            hyp = build_hypothesis(completion, fit, model)
            score_hypothesis(hyp, canon, model, cfg.sample_shrink)
        except (MalformedGroupError, GeometryError, InvalidHypothesisError):
            continue
        hyps.append(hyp)
    return hyps


def _shift_hypothesis(hyp: CheckerHypothesis, scale: float, ox: float, oy: float
                      ) -> CheckerHypothesis:
    T = np.array([[1.0 / scale, 0.0, ox], [0.0, 1.0 / scale, oy], [0.0, 0.0, 1.0]])
    H = T @ hyp.homography
    if abs(H[2, 2]) > 1e-8:
        H = H / H[2, 2]
    return CheckerHypothesis(
        corners=hyp.corners / scale + [ox, oy],
        homography=H,
        patch_quads=hyp.patch_quads / scale + [ox, oy],
        theta=hyp.theta, delta=hyp.delta,
        mu=hyp.mu.copy(), sigma=hyp.sigma.copy(), cost=hyp.cost)


def detect(img: np.ndarray, model: ColorCheckerModel,
           rois: list | None = None,
           n_expected: int | None = None,
           config=None) -> DetectionResult:
    """Detect ColorChecker charts in an image.

    With ``rois`` the recognition chain runs per crop and results are
    mapped back to full-image coordinates; otherwise the whole image is
    processed.  Hypotheses are re-scored on the original-resolution image
    before selection.
    """
    from .config import DetectorConfig

    cfg = config or DetectorConfig()
    img = np.asarray(img)
    if img.ndim != 3 or img.shape[2] != 3:
        raise InvalidInputError("expected an RGB image")
    h, w = img.shape[:2]
    t0 = time.perf_counter()

    if rois is not None:
        windows = []
        for (x0, y0, x1, y1) in rois:
            if not (0 <= x0 < x1 <= w and 0 <= y0 < y1 <= h):
                raise InvalidInputError(f"roi out of bounds: {(x0, y0, x1, y1)}")
            px = (x1 - x0) * cfg.roi_pad
            py = (y1 - y0) * cfg.roi_pad
            windows.append((max(int(np.floor(x0 - px)), 0),
                            max(int(np.floor(y0 - py)), 0),
                            min(int(np.ceil(x1 + px)), w),
                            min(int(np.ceil(y1 + py)), h)))
    else:
        windows = [(0, 0, w, h)]

    all_hyps: list[CheckerHypothesis] = []
    for (x0, y0, x1, y1) in windows:
        crop = img[y0:y1, x0:x1]
        if min(crop.shape[:2]) < 24:
            continue
        try:
            canon = imgproc.canonize(crop, cfg.canon_min_dim, cfg.wiener_window,
                                     cfg.normalize)
        except InvalidInputError:
            continue
        scale = canon.shape[0] / crop.shape[0]
        for hyp in _recognize_canonical(canon, model, cfg):
            mapped = _shift_hypothesis(hyp, scale, x0, y0)
            try:
                score_hypothesis(mapped, img, model, cfg.sample_shrink)
            except InvalidHypothesisError:
                continue
            all_hyps.append(mapped)

    result = select_hypotheses(all_hyps, n_expected=n_expected,
                               cost_threshold=cfg.cost_threshold,
                               nms_iou=cfg.nms_iou)
    result.elapsed = time.perf_counter() - t0
    result.rois = list(rois) if rois is not None else None
    return result
