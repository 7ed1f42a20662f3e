"""Planar geometry primitives used across the detection pipeline.

Conventions: points are float arrays of shape (2,) or (n, 2) with x right
and y down (image coordinates).  A quadrilateral is a (4, 2) array whose
corners are ordered clockwise on screen, starting from the corner nearest
the top-left.  Lines are homogeneous triples [nx, ny, d] normalized so
that nx**2 + ny**2 == 1.
"""
from __future__ import annotations

import numpy as np

from .errors import GeometryError

_EPS = 1e-12


def _cross2(a, b):
    """z component of the cross product of 2-d vectors (broadcasting)."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    return a[..., 0] * b[..., 1] - a[..., 1] * b[..., 0]


def polygon_area(points: np.ndarray) -> float:
    """Unsigned area of a simple polygon (shoelace)."""
    p = np.asarray(points, dtype=float)
    x, y = p[:, 0], p[:, 1]
    return abs(np.dot(x, np.roll(y, -1)) - np.dot(y, np.roll(x, -1))) / 2.0


def signed_area(points: np.ndarray) -> float:
    p = np.asarray(points, dtype=float)
    x, y = p[:, 0], p[:, 1]
    return (np.dot(x, np.roll(y, -1)) - np.dot(y, np.roll(x, -1))) / 2.0


def convex_hull(points: np.ndarray) -> np.ndarray:
    """Convex hull via monotone chain; vertices ordered counter-clockwise
    in (x, y) math orientation (clockwise on screen with y down)."""
    pts = np.unique(np.asarray(points, dtype=float), axis=0)
    if len(pts) < 3:
        return pts
    order = np.lexsort((pts[:, 1], pts[:, 0]))
    pts = pts[order]

    def build(seq):
        out = []
        for p in seq:
            while len(out) >= 2 and _cross2(out[-1] - out[-2], p - out[-2]) <= 0:
                out.pop()
            out.append(p)
        return out

    lower = build(pts)
    upper = build(pts[::-1])
    hull = np.array(lower[:-1] + upper[:-1])
    if len(hull) < 3:
        return hull
    return hull


def order_quad(points: np.ndarray) -> np.ndarray:
    """Order 4 points clockwise on screen, starting top-left-most."""
    p = np.asarray(points, dtype=float)
    c = p.mean(axis=0)
    ang = np.arctan2(p[:, 1] - c[1], p[:, 0] - c[0])
    p = p[np.argsort(ang)]
    start = int(np.argmin(p[:, 0] + p[:, 1]))
    return np.roll(p, -start, axis=0)


def is_convex_quad(quad: np.ndarray) -> bool:
    q = np.asarray(quad, dtype=float)
    crosses = []
    for i in range(4):
        a = q[(i + 1) % 4] - q[i]
        b = q[(i + 2) % 4] - q[(i + 1) % 4]
        crosses.append(_cross2(a, b))
    crosses = np.array(crosses)
    return bool(np.all(crosses > 0) or np.all(crosses < 0))


def rdp_simplify(contour: np.ndarray, epsilon: float) -> np.ndarray:
    """Ramer-Douglas-Peucker simplification of a closed contour.

    The contour is split at the point farthest from the first vertex and
    both open chains are simplified independently; the result is always a
    subsequence of the input vertices.
    """
    pts = np.asarray(contour, dtype=float)
    if len(pts) < 3:
        raise GeometryError("contour needs at least 3 points")
    if epsilon <= 0:
        raise GeometryError("epsilon must be positive")
    far = int(np.argmax(np.hypot(*(pts - pts[0]).T)))
    if far == 0:
        return pts[:1]
    first = _rdp_open(pts[: far + 1], epsilon)
    second = _rdp_open(np.vstack([pts[far:], pts[:1]]), epsilon)
    return np.vstack([first[:-1], second[:-1]])


def _rdp_open(pts: np.ndarray, epsilon: float) -> np.ndarray:
    if len(pts) <= 2:
        return pts
    d = _point_segment_dist(pts[1:-1], pts[0], pts[-1])
    imax = int(np.argmax(d))
    if d[imax] <= epsilon:
        return np.array([pts[0], pts[-1]])
    left = _rdp_open(pts[: imax + 2], epsilon)
    right = _rdp_open(pts[imax + 1:], epsilon)
    return np.vstack([left[:-1], right])


def _point_segment_dist(pts: np.ndarray, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    ab = b - a
    n = np.hypot(*ab)
    if n < _EPS:
        return np.hypot(*(pts - a).T)
    return np.abs(_cross2(ab, pts - a)) / n


def min_bounding_parallelogram(points: np.ndarray) -> np.ndarray:
    """Minimum-area parallelogram enclosing a point set.

    Both side directions of the optimum are flush with convex-hull edges,
    so all hull-edge direction pairs are enumerated.
    """
    hull = convex_hull(points)
    if len(hull) < 3:
        raise GeometryError("points are collinear")
    edges = np.roll(hull, -1, axis=0) - hull
    lengths = np.hypot(edges[:, 0], edges[:, 1])
    dirs = edges[lengths > _EPS] / lengths[lengths > _EPS, None]
    # deduplicate directions modulo sign
    uniq = []
    for d in dirs:
        if not any(abs(_cross2(d, u)) < 1e-9 for u in uniq):
            uniq.append(d)
    if len(uniq) < 2:
        raise GeometryError("points are collinear")

    best = None
    best_area = np.inf
    for i in range(len(uniq)):
        for j in range(i + 1, len(uniq)):
            u, v = uniq[i], uniq[j]
            s = _cross2(u, v)
            if abs(s) < 1e-9:
                continue
            basis = np.column_stack([u, v])
            ab = np.linalg.solve(basis, hull.T)
            a0, a1 = ab[0].min(), ab[0].max()
            b0, b1 = ab[1].min(), ab[1].max()
            area = (a1 - a0) * (b1 - b0) * abs(s)
            if area < best_area:
                best_area = area
                corners = [a0 * u + b0 * v, a1 * u + b0 * v,
                           a1 * u + b1 * v, a0 * u + b1 * v]
                best = np.array(corners)
    if best is None:
        raise GeometryError("no valid direction pair")
    return order_quad(best)


def quad_edge_lines(quad: np.ndarray) -> list[np.ndarray]:
    """Edge lines of a quad, oriented so the interior is non-negative."""
    q = np.asarray(quad, dtype=float)
    c = q.mean(axis=0)
    lines = []
    for i in range(4):
        p1, p2 = q[i], q[(i + 1) % 4]
        l = np.cross([p1[0], p1[1], 1.0], [p2[0], p2[1], 1.0])
        n = np.hypot(l[0], l[1])
        if n < _EPS:
            continue
        l = l / n
        if l[0] * c[0] + l[1] * c[1] + l[2] < 0:
            l = -l
        lines.append(l)
    return lines


def min_enclosing_quadrilateral(charts: list[np.ndarray],
                                min_angle_deg: float = 30.0,
                                containment_tol: float = 1.5,
                                support_tol: float = 0.0) -> np.ndarray:
    """Four-line enclosing quadrilateral of a set of corner quads.

    Every consecutive corner pair of every input quad contributes a line;
    lines are ranked by how many corners fall outside them (beyond
    ``support_tol``), ties broken toward lines touching more corners and
    then toward lines farther from the centroid, and four mutually
    non-parallel lines (pairwise angle > ``min_angle_deg`` between unit
    normals) are picked greedily.  Their cyclic intersections form the
    output quad.  A nonzero ``support_tol`` absorbs sub-pixel corner noise
    so a true support line is not beaten by a slightly tilted one.
    """
    if not charts:
        raise GeometryError("need at least one chart")
    all_points = np.vstack([np.asarray(c, dtype=float) for c in charts])
    lines = []
    for chart in charts:
        lines.extend(quad_edge_lines(np.asarray(chart, dtype=float)))
    if len(lines) < 4:
        raise GeometryError("not enough edge lines")

    centroid = all_points.mean(axis=0)
    vals = np.array([all_points @ l[:2] + l[2] for l in lines])
    outside = np.sum(vals < -(support_tol + 1e-9), axis=1)
    touching = np.sum(np.abs(vals) <= support_tol + 1e-9, axis=1)
    centroid_dist = np.array([abs(centroid @ l[:2] + l[2]) for l in lines])
    order = np.lexsort((-centroid_dist, -touching, outside))

    selected: list[np.ndarray] = []
    for idx in order:
        cand = lines[idx]
        ok = True
        for s in selected:
            cosang = float(np.clip(cand[:2] @ s[:2], -1.0, 1.0))
            if np.degrees(np.arccos(cosang)) <= min_angle_deg:
                ok = False
                break
        if ok:
            selected.append(cand)
        if len(selected) == 4:
            break
    if len(selected) < 4:
        raise GeometryError("fewer than four admissible lines")

    if support_tol > 0:
        # refit each picked line to the corners it touches (total least
        # squares) so a noisy pick snaps onto the true support edge
        refit = []
        for l in selected:
            v = all_points @ l[:2] + l[2]
            inl = all_points[np.abs(v) <= support_tol + 1e-9]
            if len(inl) >= 3:
                c = inl.mean(axis=0)
                _, _, vt = np.linalg.svd(inl - c)
                n = vt[-1]
                nl = np.array([n[0], n[1], -n @ c])
                if nl[:2] @ centroid + nl[2] < 0:
                    nl = -nl
                # keep the refit only if it still encloses the corners
                if np.all(all_points @ nl[:2] + nl[2] >= -(support_tol + 1e-9)):
                    l = nl
            refit.append(l)
        selected = refit

    # intersect consecutive half-plane boundaries in normal-angle order
    angles = [np.arctan2(l[1], l[0]) for l in selected]
    selected = [selected[i] for i in np.argsort(angles)]
    corners = []
    for i in range(4):
        p = np.cross(selected[i], selected[(i + 1) % 4])
        if abs(p[2]) < _EPS:
            raise GeometryError("selected lines are parallel")
        corners.append(p[:2] / p[2])
    quad = order_quad(np.array(corners))

    if not is_convex_quad(quad):
        raise GeometryError("enclosing quad is not convex")
    edges = np.roll(quad, -1, axis=0) - quad
    lens = np.hypot(edges[:, 0], edges[:, 1])
    if lens.min() < _EPS or lens.max() / lens.min() > 10.0:
        raise GeometryError("degenerate aspect ratio")
    for i in range(4):
        a = quad[i] - quad[(i - 1) % 4]
        b = quad[(i + 1) % 4] - quad[i]
        na, nb = np.hypot(*a), np.hypot(*b)
        cosang = np.clip(np.dot(-a, b) / (na * nb), -1.0, 1.0)
        interior = 180.0 - np.degrees(np.arccos(cosang))
        if interior < 10.0:
            raise GeometryError("near-degenerate interior angle")
    for l in quad_edge_lines(quad):
        if np.any(all_points @ l[:2] + l[2] < -containment_tol):
            raise GeometryError("corners escape the enclosing quad")
    return quad


def _normalize_points(pts: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    c = pts.mean(axis=0)
    d = np.hypot(*(pts - c).T).mean()
    if d < _EPS:
        raise GeometryError("coincident points")
    s = np.sqrt(2.0) / d
    T = np.array([[s, 0.0, -s * c[0]], [0.0, s, -s * c[1]], [0.0, 0.0, 1.0]])
    n = (T @ np.column_stack([pts, np.ones(len(pts))]).T).T
    return n[:, :2], T


def estimate_homography(src: np.ndarray, dst: np.ndarray) -> np.ndarray:
    """Least-squares homography (normalized DLT) mapping src to dst."""
    src = np.asarray(src, dtype=float)
    dst = np.asarray(dst, dtype=float)
    if len(src) < 4 or len(src) != len(dst):
        raise GeometryError("need at least 4 correspondences")
    sn, Ts = _normalize_points(src)
    dn, Td = _normalize_points(dst)
    rows = []
    for (x, y), (u, v) in zip(sn, dn):
        rows.append([0, 0, 0, -x, -y, -1, v * x, v * y, v])
        rows.append([x, y, 1, 0, 0, 0, -u * x, -u * y, -u])
    A = np.array(rows, dtype=float)
    _, sv, vt = np.linalg.svd(A)
    if sv[-2] < 1e-9 * max(sv[0], 1.0):
        raise GeometryError("degenerate correspondence configuration")
    Hn = vt[-1].reshape(3, 3)
    H = np.linalg.inv(Td) @ Hn @ Ts
    if not np.all(np.isfinite(H)) or abs(np.linalg.det(H)) < _EPS:
        raise GeometryError("singular homography")
    if abs(H[2, 2]) > 1e-8:
        H = H / H[2, 2]
    else:
        H = H / np.linalg.norm(H)
    return H


def apply_homography(H: np.ndarray, pts: np.ndarray) -> np.ndarray:
    p = np.atleast_2d(np.asarray(pts, dtype=float))
    ph = np.column_stack([p, np.ones(len(p))])
    out = (H @ ph.T).T
    w = out[:, 2]
    if np.any(np.abs(w) < _EPS):
        raise GeometryError("point maps to infinity")
    res = out[:, :2] / w[:, None]
    return res[0] if np.asarray(pts).ndim == 1 else res


def iou_box(a, b) -> float:
    """Intersection over union of axis-aligned [x0, y0, x1, y1] boxes."""
    ax0, ay0, ax1, ay1 = a
    bx0, by0, bx1, by1 = b
    iw = min(ax1, bx1) - max(ax0, bx0)
    ih = min(ay1, by1) - max(ay0, by0)
    if iw <= 0 or ih <= 0:
        return 0.0
    inter = iw * ih
    union = (ax1 - ax0) * (ay1 - ay0) + (bx1 - bx0) * (by1 - by0) - inter
    return inter / union


def clip_polygon(subject: np.ndarray, clip: np.ndarray) -> np.ndarray:
    """Sutherland-Hodgman clipping of a polygon by a convex polygon."""
    clip = np.asarray(clip, dtype=float)
    if signed_area(clip) < 0:
        clip = clip[::-1]
    out = [np.asarray(p, dtype=float) for p in subject]
    for i in range(len(clip)):
        a, b = clip[i], clip[(i + 1) % len(clip)]
        edge = b - a
        inp, out = out, []
        if not inp:
            break
        def side(p):
            d = p - a
            return edge[0] * d[1] - edge[1] * d[0]

        prev = inp[-1]
        prev_in = side(prev) >= -_EPS
        for cur in inp:
            cur_in = side(cur) >= -_EPS
            if cur_in != prev_in:
                da = side(prev)
                db = side(cur)
                t = da / (da - db)
                out.append(prev + t * (cur - prev))
            if cur_in:
                out.append(cur)
            prev, prev_in = cur, cur_in
    return np.array(out) if out else np.zeros((0, 2))


def iou_polygon(a: np.ndarray, b: np.ndarray) -> float:
    """IOU of two convex polygons via exact clipping."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    area_a = polygon_area(a)
    area_b = polygon_area(b)
    if area_a <= 0 or area_b <= 0:
        return 0.0
    inter_poly = clip_polygon(a, b)
    inter = polygon_area(inter_poly) if len(inter_poly) >= 3 else 0.0
    union = area_a + area_b - inter
    if union <= 0:
        return 0.0
    return min(inter / union, 1.0)


def rasterize_convex_polygon(poly: np.ndarray, width: int, height: int
                             ) -> tuple[np.ndarray, np.ndarray]:
    """Pixel (row, col) indices whose centers fall inside a convex polygon."""
    p = np.asarray(poly, dtype=float)
    x0 = max(int(np.floor(p[:, 0].min())), 0)
    x1 = min(int(np.ceil(p[:, 0].max())) + 1, width)
    y0 = max(int(np.floor(p[:, 1].min())), 0)
    y1 = min(int(np.ceil(p[:, 1].max())) + 1, height)
    if x1 <= x0 or y1 <= y0:
        return np.zeros(0, dtype=int), np.zeros(0, dtype=int)
    xs = np.arange(x0, x1) + 0.0
    ys = np.arange(y0, y1) + 0.0
    gx, gy = np.meshgrid(xs, ys)
    inside = np.ones(gx.shape, dtype=bool)
    ccw = p if signed_area(p) > 0 else p[::-1]
    for i in range(len(ccw)):
        a, b = ccw[i], ccw[(i + 1) % len(ccw)]
        inside &= ((b[0] - a[0]) * (gy - a[1]) - (b[1] - a[1]) * (gx - a[0])) >= -1e-9
    ry, rx = np.nonzero(inside)
    return ry + y0, rx + x0


def shrink_polygon(poly: np.ndarray, factor: float) -> np.ndarray:
    """Scale a polygon toward its centroid by ``factor``."""
    p = np.asarray(poly, dtype=float)
    c = p.mean(axis=0)
    return c + factor * (p - c)


def bbox_of(points: np.ndarray) -> tuple[float, float, float, float]:
    p = np.asarray(points, dtype=float).reshape(-1, 2)
    return (float(p[:, 0].min()), float(p[:, 1].min()),
            float(p[:, 0].max()), float(p[:, 1].max()))
