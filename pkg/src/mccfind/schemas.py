"""On-disk JSON schemas for ground truth, detections and ROI files."""
from __future__ import annotations

import numpy as np
import jsonschema

from .errors import InvalidInputError
from .evaluation import CheckerAnnotation
from .model import N_PATCHES
from .recognition import CheckerHypothesis, DetectionResult

_POINT = {"type": "array", "items": {"type": "number"},
          "minItems": 2, "maxItems": 2}
_QUAD = {"type": "array", "items": _POINT, "minItems": 4, "maxItems": 4}
_BOX = {"type": "array", "items": {"type": "number"},
        "minItems": 4, "maxItems": 4}
_TRIPLE = {"type": "array", "items": {"type": "number"},
           "minItems": 3, "maxItems": 3}
_QUADS24 = {"type": "array", "items": _QUAD,
            "minItems": N_PATCHES, "maxItems": N_PATCHES}
_TRIPLES24 = {"type": "array", "items": _TRIPLE,
              "minItems": N_PATCHES, "maxItems": N_PATCHES}

GT_SCHEMA = {
    "type": "object",
    "required": ["image", "width", "height", "checkers"],
    "additionalProperties": False,
    "properties": {
        "image": {"type": "string"},
        "width": {"type": "integer", "minimum": 1},
        "height": {"type": "integer", "minimum": 1},
        "checkers": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["outline", "bbox", "patch_quads", "colors",
                             "truncated"],
                "additionalProperties": False,
                "properties": {
                    "outline": _QUAD,
                    "bbox": _BOX,
                    "patch_quads": _QUADS24,
                    "colors": _TRIPLES24,
                    "truncated": {"type": "array",
                                  "items": {"type": "boolean"},
                                  "minItems": N_PATCHES,
                                  "maxItems": N_PATCHES},
                },
            },
        },
    },
}

DETECTION_SCHEMA = {
    "type": "object",
    "required": ["image", "elapsed", "hypotheses"],
    "additionalProperties": False,
    "properties": {
        "image": {"type": "string"},
        "elapsed": {"type": "number", "minimum": 0},
        "rois": {"type": ["array", "null"], "items": _BOX},
        "hypotheses": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["corners", "homography", "theta", "delta",
                             "patch_quads", "mu", "sigma", "cost"],
                "additionalProperties": False,
                "properties": {
                    "corners": _QUAD,
                    "homography": {"type": "array",
                                   "items": {"type": "number"},
                                   "minItems": 9, "maxItems": 9},
                    "theta": {"type": "integer", "enum": [0, 90, 180, 270]},
                    "delta": {"type": "integer", "minimum": 1},
                    "patch_quads": _QUADS24,
                    "mu": _TRIPLES24,
                    "sigma": _TRIPLES24,
                    "cost": {"type": "number", "minimum": 0},
                },
            },
        },
    },
}

ROI_SCHEMA = {
    "type": "object",
    "additionalProperties": {"type": "array", "items": _BOX},
}


def validate(payload: dict, schema: dict, what: str) -> None:
    try:
        jsonschema.validate(payload, schema)
    except jsonschema.ValidationError as e:
        raise InvalidInputError(f"invalid {what} file: {e.message}") from e


def gt_to_json(image_name: str, gt) -> dict:
    payload = {
        "image": image_name,
        "width": int(gt.width),
        "height": int(gt.height),
        "checkers": [{
            "outline": np.round(c.outline, 4).tolist(),
            "bbox": [round(float(v), 4) for v in c.bbox],
            "patch_quads": np.round(c.patch_quads, 4).tolist(),
            "colors": np.round(c.colors, 6).tolist(),
            "truncated": [bool(t) for t in c.truncated],
        } for c in gt.checkers],
    }
    validate(payload, GT_SCHEMA, "ground truth")
    return payload


def detection_to_json(image_name: str, result: DetectionResult) -> dict:
    payload = {
        "image": image_name,
        "elapsed": float(result.elapsed),
        "rois": ([[float(v) for v in r] for r in result.rois]
                 if result.rois is not None else None),
        "hypotheses": [{
            "corners": np.round(h.corners, 4).tolist(),
            "homography": np.round(h.homography, 9).flatten().tolist(),
            "theta": int(h.theta),
            "delta": int(h.delta),
            "patch_quads": np.round(h.patch_quads, 4).tolist(),
            "mu": np.round(h.mu, 6).tolist(),
            "sigma": np.round(h.sigma, 6).tolist(),
            "cost": max(float(h.cost), 0.0),
        } for h in result.hypotheses],
    }
    validate(payload, DETECTION_SCHEMA, "detection")
    return payload


def gt_annotations(payload: dict) -> list[CheckerAnnotation]:
    validate(payload, GT_SCHEMA, "ground truth")
    return [CheckerAnnotation(bbox=tuple(c["bbox"]),
                              patch_quads=np.array(c["patch_quads"]),
                              mean_colors=np.array(c["colors"]))
            for c in payload["checkers"]]


def detection_annotations(payload: dict) -> list[CheckerAnnotation]:
    validate(payload, DETECTION_SCHEMA, "detection")
    out = []
    for h in payload["hypotheses"]:
        quads = np.array(h["patch_quads"])
        corners = np.array(h["corners"])
        pts = np.vstack([corners, quads.reshape(-1, 2)])
        bbox = (float(pts[:, 0].min()), float(pts[:, 1].min()),
                float(pts[:, 0].max()), float(pts[:, 1].max()))
        out.append(CheckerAnnotation(bbox=bbox, patch_quads=quads,
                                     mean_colors=np.array(h["mu"])))
    return out


def hypothesis_annotation(h: CheckerHypothesis) -> CheckerAnnotation:
    return CheckerAnnotation(bbox=h.bbox, patch_quads=h.patch_quads,
                             mean_colors=h.mu)
