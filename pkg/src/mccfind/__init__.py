"""Multiple ColorChecker Classic detection, rendering and scoring."""

from .config import Config, DetectorConfig, EvalConfig, RenderConfig
from .evaluation import (CheckerAnnotation, MatchReport, accuracy_curve,
                         match_and_score, summary_metrics)
from .model import ColorCheckerModel
from .recognition import (CheckerHypothesis, DetectionResult, PatchCandidate,
                          cluster_patches, complete_grid, detect,
                          extract_patches, filter_regions, fit_orientation,
                          score_hypothesis, select_hypotheses)
from .render import (Camera, GroundTruth, SceneSpec, generate_dataset,
                     render_scene, sample_scene)

__all__ = [
    "Camera", "CheckerAnnotation", "CheckerHypothesis", "ColorCheckerModel",
    "Config", "DetectionResult", "DetectorConfig", "EvalConfig",
    "GroundTruth", "MatchReport", "PatchCandidate", "RenderConfig",
    "SceneSpec", "accuracy_curve", "cluster_patches", "complete_grid",
    "detect", "extract_patches", "filter_regions", "fit_orientation",
    "generate_dataset", "match_and_score", "render_scene", "sample_scene",
    "score_hypothesis", "select_hypotheses", "summary_metrics",
]

__version__ = "0.1.0"
