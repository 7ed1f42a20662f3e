"""Stochastic synthetic scene generator with exact ground truth.

Charts are planar 3D models placed by a rigid transform and imaged by a
pinhole camera that looks down the -z axis.  Rasterization is done by
inverse-mapping 3x3 supersampled pixel positions through the plane
homography, so anti-aliased edges come for free and patch interiors stay
exactly flat.
"""
from __future__ import annotations

import json
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from PIL import Image

from . import geometry as geo
from .errors import ConfigError, InvalidInputError
from .model import COLS, N_PATCHES, ROWS, ColorCheckerModel

_LUMA = np.array([0.299, 0.587, 0.114])


@dataclass
class Camera:
    focal: float = 1000.0
    width: int = 1024
    height: int = 640
    cx: float | None = None
    cy: float | None = None

    def __post_init__(self):
        if self.focal <= 0:
            raise InvalidInputError("focal length must be positive")
        if self.cx is None:
            self.cx = self.width / 2.0
        if self.cy is None:
            self.cy = self.height / 2.0
        if not (0 <= self.cx <= self.width and 0 <= self.cy <= self.height):
            raise InvalidInputError("principal point outside the image")


@dataclass
class RigidTransform:
    rotation: np.ndarray     # (rx, ry, rz) radians
    translation: np.ndarray  # (tx, ty, tz) model units, tz < 0


@dataclass
class SceneSpec:
    checker_count: int
    transforms: list[RigidTransform]
    identities: list[int]
    background: str | None   # image path, or None for a procedural field
    seed: int


@dataclass
class CheckerGroundTruth:
    outline: np.ndarray       # (4, 2) clockwise from the patch-#1 corner
    patch_quads: np.ndarray   # (24, 4, 2)
    colors: np.ndarray        # (24, 3) luminance-adjusted render colors
    bbox: tuple
    truncated: np.ndarray     # (24,) bool


@dataclass
class GroundTruth:
    checkers: list[CheckerGroundTruth]
    width: int
    height: int


def rotation_matrix(rx: float, ry: float, rz: float) -> np.ndarray:
    cx, sx = np.cos(rx), np.sin(rx)
    cy, sy = np.cos(ry), np.sin(ry)
    cz, sz = np.cos(rz), np.sin(rz)
    Rx = np.array([[1, 0, 0], [0, cx, -sx], [0, sx, cx]])
    Ry = np.array([[cy, 0, sy], [0, 1, 0], [-sy, 0, cy]])
    Rz = np.array([[cz, -sz, 0], [sz, cz, 0], [0, 0, 1]])
    return Rz @ Ry @ Rx


def plane_homography(transform: RigidTransform, model: ColorCheckerModel,
                     camera: Camera) -> np.ndarray:
    """Homography taking model-plane (X, Y) to image pixels.

    The chart is centered on its own origin before the rigid transform so
    rotations pivot about the chart center.
    """
    R = rotation_matrix(*transform.rotation)
    t = np.asarray(transform.translation, dtype=float)
    center = np.array([model.width / 2.0, model.height / 2.0, 0.0])
    t_eff = t - R @ center
    P = np.array([[camera.focal, 0.0, -camera.cx],
                  [0.0, camera.focal, -camera.cy],
                  [0.0, 0.0, -1.0]])
    H = P @ np.column_stack([R[:, 0], R[:, 1], t_eff])
    return H


def project_points(transform: RigidTransform, camera: Camera,
                   model: ColorCheckerModel, pts: np.ndarray) -> np.ndarray:
    """Pointwise pinhole projection (independent of the homography path)."""
    R = rotation_matrix(*transform.rotation)
    t = np.asarray(transform.translation, dtype=float)
    center = np.array([model.width / 2.0, model.height / 2.0, 0.0])
    p3 = np.column_stack([pts, np.zeros(len(pts))]) - center
    cam = (R @ p3.T).T + t
    z = cam[:, 2]
    if np.any(z >= -1e-9):
        raise InvalidInputError("point at or behind the camera plane")
    return np.column_stack([camera.cx + camera.focal * cam[:, 0] / -z,
                            camera.cy + camera.focal * cam[:, 1] / -z])


def procedural_background(rng: np.random.Generator, width: int, height: int
                          ) -> np.ndarray:
    """Smooth random color field in roughly [0.2, 0.8] luma."""
    coarse = rng.uniform(0.15, 0.85, size=(5, 8, 3))
    img = Image.fromarray((coarse * 255).astype(np.uint8))
    img = img.resize((width, height), Image.BICUBIC)
    return np.asarray(img).astype(float) / 255.0


def _load_background(path: str, width: int, height: int) -> np.ndarray:
    img = Image.open(path).convert("RGB").resize((width, height), Image.BILINEAR)
    return np.asarray(img).astype(float) / 255.0


def _chart_mean_luma(model: ColorCheckerModel, substrate: float) -> float:
    patch_area = N_PATCHES * model.patch_size ** 2
    total = model.width * model.height
    patch_luma = float((model.reference_colors @ _LUMA).mean())
    return (patch_area * patch_luma + (total - patch_area) * substrate) / total


def _texture_lookup(model: ColorCheckerModel, adj_colors: np.ndarray,
                    substrate_color: np.ndarray, X: np.ndarray, Y: np.ndarray
                    ) -> tuple[np.ndarray, np.ndarray]:
    """Colors and coverage for model-plane sample points."""
    inside = (X >= 0) & (X <= model.width) & (Y >= 0) & (Y <= model.height)
    colors = np.zeros(X.shape + (3,))
    colors[inside] = substrate_color
    mx, my = model._margin_x, model._margin_y
    pitch = model.patch_size + model.gap
    relx = X - mx
    rely = Y - my
    col = np.floor(relx / pitch).astype(int)
    row = np.floor(rely / pitch).astype(int)
    in_patch = (inside
                & (col >= 0) & (col < COLS) & (row >= 0) & (row < ROWS)
                & (relx - col * pitch < model.patch_size) & (relx >= 0)
                & (rely - row * pitch < model.patch_size) & (rely >= 0))
    idx = np.clip(row * COLS + col, 0, N_PATCHES - 1)
    colors[in_patch] = adj_colors[idx[in_patch]]
    return colors, inside


def render_scene(spec: SceneSpec, model_pool: list[ColorCheckerModel],
                 camera: Camera,
                 substrate_level: float = 0.95,
                 luminance_adjust: bool = True,
                 noise_sigma: float = 2.0 / 255.0,
                 supersample: int = 3) -> tuple[np.ndarray, GroundTruth]:
    """Render a scene spec onto its background and emit exact ground truth."""
    rng = np.random.default_rng(spec.seed)
    if spec.background is None:
        bg = procedural_background(rng, camera.width, camera.height)
    else:
        bg = _load_background(spec.background, camera.width, camera.height)
    out = bg.copy()

    outlines = []
    gts: list[CheckerGroundTruth] = []
    offsets = (np.arange(supersample) + 0.5) / supersample - 0.5

    for transform, ident in zip(spec.transforms, spec.identities):
        model = model_pool[ident]
        H = plane_homography(transform, model, camera)
        outline_img = geo.apply_homography(H, model.outline)
        # reject charts at/behind the camera plane
        project_points(transform, camera, model, model.outline)

        quads_img = np.array([geo.apply_homography(H, model.patch_quad(r, c))
                              for r in range(ROWS) for c in range(COLS)])

        substrate = np.full(3, substrate_level)
        if luminance_adjust:
            ys, xs = geo.rasterize_convex_polygon(outline_img, camera.width,
                                                  camera.height)
            if len(ys) == 0:
                raise InvalidInputError("chart projects outside the image")
            i_region = float((bg[ys, xs] @ _LUMA).mean())
            i_chart = _chart_mean_luma(model, substrate_level)
            factor = i_region / i_chart if i_chart > 0 else 1.0
        else:
            factor = 1.0
        adj_colors = np.clip(model.reference_colors * factor, 0.0, 1.0)
        adj_substrate = np.clip(substrate * factor, 0.0, 1.0)

        # supersampled inverse-mapped rasterization over the outline bbox
        x0, y0, x1, y1 = geo.bbox_of(outline_img)
        px0 = max(int(np.floor(x0)), 0)
        py0 = max(int(np.floor(y0)), 0)
        px1 = min(int(np.ceil(x1)) + 1, camera.width)
        py1 = min(int(np.ceil(y1)) + 1, camera.height)
        if px1 > px0 and py1 > py0:
            Hinv = np.linalg.inv(H)
            xs_pix = np.arange(px0, px1, dtype=float)
            ys_pix = np.arange(py0, py1, dtype=float)
            acc_color = np.zeros((py1 - py0, px1 - px0, 3))
            acc_alpha = np.zeros((py1 - py0, px1 - px0))
            for dy in offsets:
                for dx in offsets:
                    gx, gy = np.meshgrid(xs_pix + dx, ys_pix + dy)
                    ones = np.ones_like(gx)
                    hpts = np.stack([gx, gy, ones], axis=-1) @ Hinv.T
                    w = hpts[..., 2]
                    safe = np.abs(w) > 1e-12
                    X = np.where(safe, hpts[..., 0] / np.where(safe, w, 1.0), 1e9)
                    Y = np.where(safe, hpts[..., 1] / np.where(safe, w, 1.0), 1e9)
                    colors, inside = _texture_lookup(model, adj_colors,
                                                    adj_substrate, X, Y)
                    acc_color += colors
                    acc_alpha += inside.astype(float)
            nsub = supersample * supersample
            alpha = acc_alpha / nsub
            chart_color = np.where(acc_alpha[..., None] > 0,
                                   acc_color / np.maximum(acc_alpha[..., None], 1e-12),
                                   0.0)
            region = out[py0:py1, px0:px1]
            out[py0:py1, px0:px1] = (alpha[..., None] * chart_color
                                     + (1 - alpha[..., None]) * region)

        outlines.append(outline_img)
        gts.append(CheckerGroundTruth(
            outline=outline_img,
            patch_quads=quads_img,
            colors=adj_colors,
            bbox=_clipped_bbox(outline_img, camera),
            truncated=np.zeros(N_PATCHES, dtype=bool),
        ))

    # occlusion / truncation flags: later charts paint over earlier ones
    for i, gt in enumerate(gts):
        for k in range(N_PATCHES):
            quad = gt.patch_quads[k]
            xs, ys_ = quad[:, 0], quad[:, 1]
            if xs.min() < 0 or ys_.min() < 0 or xs.max() > camera.width \
                    or ys_.max() > camera.height:
                gt.truncated[k] = True
                continue
            for later in outlines[i + 1:]:
                inter = geo.clip_polygon(quad, later)
                if len(inter) >= 3 and geo.polygon_area(inter) > 1e-9:
                    gt.truncated[k] = True
                    break

    if noise_sigma > 0:
        out = out + rng.normal(0.0, noise_sigma, size=out.shape)
    img8 = np.clip(np.round(out * 255.0), 0, 255).astype(np.uint8)
    return img8, GroundTruth(checkers=gts, width=camera.width, height=camera.height)


def _clipped_bbox(outline: np.ndarray, camera: Camera) -> tuple:
    x0, y0, x1, y1 = geo.bbox_of(outline)
    return (max(x0, 0.0), max(y0, 0.0),
            min(x1, float(camera.width)), min(y1, float(camera.height)))


def sample_scene(cfg, rng: np.random.Generator,
                 model_pool: list[ColorCheckerModel],
                 camera: Camera, seed: int = 0) -> SceneSpec:
    """Draw a scene spec from the configured uniform intervals.

    Per-chart transforms are rejection-sampled until the chart projects
    in front of the camera with the configured visibility constraints.
    """
    backgrounds = cfg.background_paths()
    if backgrounds is not None and len(backgrounds) == 0:
        raise ConfigError("background pool is empty")
    background = None
    if backgrounds:
        background = str(backgrounds[int(rng.integers(len(backgrounds)))])

    count = int(rng.integers(cfg.count_range[0], cfg.count_range[1] + 1))
    img_area = camera.width * camera.height
    transforms: list[RigidTransform] = []
    identities: list[int] = []
    # an early chart can block every later placement, so on failure the
    # whole arrangement is re-drawn rather than giving up outright
    for _restart in range(20):
        transforms = []
        identities = []
        accepted_boxes: list[tuple] = []
        for _ in range(count):
            ident = int(rng.integers(len(model_pool)))
            model = model_pool[ident]
            placed = False
            for _attempt in range(500):
                rot = rng.uniform(cfg.rot_range[0], cfg.rot_range[1], size=3)
                tx = rng.uniform(cfg.txy_range[0], cfg.txy_range[1])
                ty = rng.uniform(cfg.txy_range[0], cfg.txy_range[1])
                tz = rng.uniform(cfg.tz_range[0], cfg.tz_range[1])
                tr = RigidTransform(rotation=rot, translation=np.array([tx, ty, tz]))
                try:
                    outline = project_points(tr, camera, model, model.outline)
                except InvalidInputError:
                    continue
                bbox = geo.bbox_of(outline)
                x0, y0, x1, y1 = bbox
                if cfg.require_inside and (x0 < 0 or y0 < 0 or x1 > camera.width
                                           or y1 > camera.height):
                    continue
                cb = (max(x0, 0), max(y0, 0),
                      min(x1, camera.width), min(y1, camera.height))
                if (cb[2] - cb[0]) * (cb[3] - cb[1]) < cfg.min_bbox_frac * img_area:
                    continue
                if cfg.disjoint and any(geo.iou_box(cb, b) > 0
                                        for b in accepted_boxes):
                    continue
                transforms.append(tr)
                identities.append(ident)
                accepted_boxes.append(cb)
                placed = True
                break
            if not placed:
                break
        if len(transforms) == count:
            break
    else:
        raise ConfigError("could not place a chart under the configured "
                          "intervals and constraints")
    return SceneSpec(checker_count=count, transforms=transforms,
                     identities=identities, background=background, seed=seed)


def generate_dataset(cfg, count: int, out_dir, camera: Camera | None = None,
                     model_pool: list[ColorCheckerModel] | None = None) -> dict:
    """Write ``count`` rendered images with per-image ground truth and a
    manifest; fully reproducible from cfg.seed."""
    from .schemas import gt_to_json

    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    camera = camera or Camera(focal=cfg.focal, width=cfg.width, height=cfg.height)
    model_pool = model_pool or [ColorCheckerModel.synthetic()]

    entries = []
    t0 = time.perf_counter()
    for i in range(count):
        seed = [int(cfg.seed), i]
        rng = np.random.default_rng(seed)
        spec = sample_scene(cfg, rng, model_pool, camera, seed=cfg.seed * 1_000_003 + i)
        img, gt = render_scene(spec, model_pool, camera,
                               substrate_level=cfg.substrate_level,
                               luminance_adjust=cfg.luminance_adjust,
                               noise_sigma=cfg.noise_sigma)
        name = f"img_{i:05d}"
        img_path = out / f"{name}.png"
        gt_path = out / f"{name}.json"
        Image.fromarray(img).save(img_path)
        payload = gt_to_json(name + ".png", gt)
        gt_path.write_text(json.dumps(payload, indent=1))
        entries.append({"image": img_path.name, "gt": gt_path.name,
                        "checkers": spec.checker_count, "seed": seed})
    manifest = {
        "seed": int(cfg.seed),
        "count": count,
        "camera": {"focal": camera.focal, "width": camera.width,
                   "height": camera.height},
        "elapsed": time.perf_counter() - t0,
        "files": entries,
    }
    (out / "manifest.json").write_text(json.dumps(manifest, indent=1))
    return manifest
