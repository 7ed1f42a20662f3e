"""Shared fixtures: chart model, camera, rendered scenes and the two
session-scoped benchmark suites used by the acceptance tests.
"""
from __future__ import annotations

import math

import numpy as np
import pytest

from mccfind import Camera, ColorCheckerModel, detect
from mccfind.config import RenderConfig
from mccfind.evaluation import CheckerAnnotation
from mccfind.render import RigidTransform, SceneSpec, render_scene, sample_scene
from mccfind.schemas import hypothesis_annotation


@pytest.fixture(scope="session")
def model():
    return ColorCheckerModel.synthetic()


@pytest.fixture(scope="session")
def camera():
    return Camera()


def frontal_spec(seed=0):
    return SceneSpec(
        checker_count=1,
        transforms=[RigidTransform(rotation=np.zeros(3),
                                   translation=np.array([0.0, 0.0, -20.0]))],
        identities=[0],
        background=None,
        seed=seed,
    )


@pytest.fixture(scope="session")
def frontal_scene(model, camera):
    """Frontal chart at t=(0,0,-20) with the default noise level."""
    return render_scene(frontal_spec(), [model], camera)


@pytest.fixture(scope="session")
def frontal_clean(model, camera):
    """Frontal chart, no noise and no luminance adjustment, so rendered
    patch interiors carry the exact reference colors."""
    return render_scene(frontal_spec(), [model], camera,
                        luminance_adjust=False, noise_sigma=0.0)


def render_suite(cfg, count, seed, model, camera):
    rng = np.random.default_rng(seed)
    scenes = []
    for i in range(count):
        spec = sample_scene(cfg, rng, [model], camera, seed=[seed, i])
        scenes.append(render_scene(spec, [model], camera,
                                   substrate_level=cfg.substrate_level,
                                   luminance_adjust=cfg.luminance_adjust,
                                   noise_sigma=cfg.noise_sigma))
    return scenes


def gt_annotations(gt):
    return [CheckerAnnotation(bbox=c.bbox, patch_quads=c.patch_quads,
                              mean_colors=c.colors) for c in gt.checkers]


def pred_annotations(result):
    return [hypothesis_annotation(h) for h in result.hypotheses]


@pytest.fixture(scope="session")
def single_suite(model, camera):
    """100 single-checker scenes, |r| <= pi/4, chart fully in frame."""
    cfg = RenderConfig(rot_range=(-math.pi / 4, math.pi / 4),
                       require_inside=True)
    return render_suite(cfg, 100, 7, model, camera)


@pytest.fixture(scope="session")
def single_detections(single_suite, model):
    """Full-image detections for every scene of the single suite."""
    return [detect(img, model) for img, _ in single_suite]


@pytest.fixture(scope="session")
def roi_detections(single_suite, model):
    """Detections on the single suite with ground-truth boxes as ROIs."""
    out = []
    for img, gt in single_suite:
        rois = [c.bbox for c in gt.checkers]
        out.append(detect(img, model, rois=rois))
    return out


@pytest.fixture(scope="session")
def multi_suite(model, camera):
    """50 scenes with 2-3 disjoint fully-visible charts each."""
    cfg = RenderConfig(rot_range=(-math.pi / 4, math.pi / 4),
                       require_inside=True, count_range=(2, 3), disjoint=True,
                       txy_range=(-10.0, 10.0), tz_range=(-30.0, -27.0))
    return render_suite(cfg, 50, 13, model, camera)


@pytest.fixture(scope="session")
def multi_detections(multi_suite, model):
    """Detections on the multi suite with the chart count given."""
    return [detect(img, model, n_expected=len(gt.checkers))
            for img, gt in multi_suite]
