"""Configuration for the detector, renderer and evaluator.

Every field carries the pipeline default; values coming from JSON are
range-checked and unknown keys are rejected.
"""
from __future__ import annotations

import dataclasses
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

from .errors import ConfigError


def _check(cond: bool, msg: str) -> None:
    if not cond:
        raise ConfigError(msg)


@dataclass
class DetectorConfig:
    canon_min_dim: int = 400
    wiener_window: int = 5
    normalize: bool = True
    thresh_window: int = 31          # px on the canonical image
    thresh_offset: float = 5.0       # gray levels
    fill_holes: bool = True
    rdp_epsilon_factor: float = 0.05  # of the contour perimeter
    convexity_min: float = 0.90
    axis_ratio_min: float = 0.4
    circularity_range: tuple = (0.65, 0.97)
    entropy_max: float = 4.9
    b0_factor: float = 1.65
    min_group_size: int = 4
    sample_shrink: float = 0.7
    nms_iou: float = 0.5
    cost_threshold: float = 1.5
    roi_pad: float = 0.1

    def validate(self) -> None:
        _check(self.canon_min_dim >= 24, "canon_min_dim must be >= 24")
        _check(self.wiener_window >= 3 and self.wiener_window % 2 == 1,
               "wiener_window must be odd and >= 3")
        _check(self.thresh_window >= 3 and self.thresh_window % 2 == 1,
               "thresh_window must be odd and >= 3")
        _check(self.thresh_offset >= 0, "thresh_offset must be >= 0")
        _check(0 < self.rdp_epsilon_factor < 1, "rdp_epsilon_factor in (0,1)")
        _check(0 <= self.convexity_min <= 1, "convexity_min in [0,1]")
        _check(0 <= self.axis_ratio_min <= 1, "axis_ratio_min in [0,1]")
        lo, hi = self.circularity_range
        _check(0 <= lo < hi, "circularity_range must be an increasing pair")
        _check(0 <= self.entropy_max <= 8, "entropy_max in [0,8]")
        _check(self.b0_factor > 0, "b0_factor must be positive")
        _check(self.min_group_size >= 1, "min_group_size must be >= 1")
        _check(0 < self.sample_shrink <= 1, "sample_shrink in (0,1]")
        _check(0 <= self.nms_iou <= 1, "nms_iou in [0,1]")
        _check(self.cost_threshold > 0, "cost_threshold must be positive")
        _check(0 <= self.roi_pad <= 1, "roi_pad in [0,1]")


@dataclass
class RenderConfig:
    width: int = 1024
    height: int = 640
    focal: float = 1000.0
    count_range: tuple = (1, 1)           # inclusive checker count interval
    rot_range: tuple = (-math.pi / 2, math.pi / 2)
    txy_range: tuple = (-4.0, 4.0)
    tz_range: tuple = (-30.0, -10.0)
    min_bbox_frac: float = 0.02
    require_inside: bool = False
    disjoint: bool = False
    substrate_level: float = 0.95
    luminance_adjust: bool = True
    noise_sigma: float = 2.0 / 255.0
    background_dir: str | None = None
    seed: int = 0

    def background_paths(self) -> list | None:
        if self.background_dir is None:
            return None
        root = Path(self.background_dir)
        if not root.is_dir():
            raise ConfigError(f"background_dir is not a directory: {root}")
        return sorted(p for p in root.iterdir()
                      if p.suffix.lower() in (".png", ".jpg", ".jpeg", ".ppm"))

    def validate(self) -> None:
        _check(self.width >= 24 and self.height >= 24, "resolution too small")
        _check(self.focal > 0, "focal must be positive")
        lo, hi = self.count_range
        _check(1 <= lo <= hi <= 5, "count_range within [1,5]")
        _check(self.rot_range[0] <= self.rot_range[1]
               and abs(self.rot_range[0]) <= math.pi / 2 + 1e-9
               and abs(self.rot_range[1]) <= math.pi / 2 + 1e-9,
               "rot_range within [-pi/2, pi/2]")
        _check(self.tz_range[0] <= self.tz_range[1] < 0,
               "tz_range must be negative (camera looks down -z)")
        _check(-30.0 - 1e-9 <= self.tz_range[0] and self.tz_range[1] <= -10.0 + 1e-9,
               "tz_range within [-30, -10]")
        _check(0 < self.min_bbox_frac < 1, "min_bbox_frac in (0,1)")
        _check(0 <= self.substrate_level <= 1, "substrate_level in [0,1]")
        _check(self.noise_sigma >= 0, "noise_sigma must be >= 0")


@dataclass
class EvalConfig:
    tp_threshold: float = 0.5

    def validate(self) -> None:
        _check(0 < self.tp_threshold <= 1, "tp_threshold in (0,1]")


@dataclass
class Config:
    detector: DetectorConfig = field(default_factory=DetectorConfig)
    render: RenderConfig = field(default_factory=RenderConfig)
    eval: EvalConfig = field(default_factory=EvalConfig)

    def validate(self) -> None:
        self.detector.validate()
        self.render.validate()
        self.eval.validate()

    @classmethod
    def from_json(cls, path) -> "Config":
        try:
            raw = json.loads(Path(path).read_text())
        except (OSError, json.JSONDecodeError) as e:
            raise ConfigError(f"cannot read config {path}: {e}") from e
        return cls.from_dict(raw)

    @classmethod
    def from_dict(cls, raw: dict) -> "Config":
        cfg = cls()
        sections = {"detector": cfg.detector, "render": cfg.render,
                    "eval": cfg.eval}
        unknown = set(raw) - set(sections)
        if unknown:
            raise ConfigError(f"unknown config section(s): {sorted(unknown)}")
        for name, section in sections.items():
            values = raw.get(name, {})
            if not isinstance(values, dict):
                raise ConfigError(f"section '{name}' must be an object")
            known = {f.name: f for f in dataclasses.fields(section)}
            for key, val in values.items():
                if key not in known:
                    raise ConfigError(f"unknown key '{name}.{key}'")
                current = getattr(section, key)
                if isinstance(current, tuple):
                    if not isinstance(val, (list, tuple)) or len(val) != len(current):
                        raise ConfigError(f"'{name}.{key}' must be a pair")
                    val = tuple(val)
                setattr(section, key, val)
        cfg.validate()
        return cfg

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)
