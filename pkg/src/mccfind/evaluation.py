"""Detection scoring: confusion counts and the a0/a1/a2 quality metrics.

a0 is the bounding-box IOU of a prediction/ground-truth pair, a1 the mean
per-patch polygon IOU over the 24 cells (matched by cell index), and a2
the mean cosine similarity of the per-patch mean colors.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import geometry as geo
from .errors import ScoringError
from .model import N_PATCHES


@dataclass
class CheckerAnnotation:
    """The common shape of a predicted or ground-truth chart."""
    bbox: tuple
    patch_quads: np.ndarray   # (24, 4, 2)
    mean_colors: np.ndarray   # (24, 3)


@dataclass
class MatchedPair:
    pred_index: int
    gt_index: int
    a0: float
    a1: float
    a2: float


@dataclass
class ImageReport:
    image_id: str
    pairs: list[MatchedPair]
    fp_indices: list[int]
    fn_indices: list[int]
    detection_a: list[dict]   # a-values for every detection (TP and FP)


@dataclass
class MatchReport:
    images: list[ImageReport] = field(default_factory=list)
    tp: int = 0
    fp: int = 0
    fn: int = 0

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.fn

    @property
    def metrics(self) -> dict:
        return summary_metrics(self.tp, self.fp, self.fn)


def summary_metrics(tp: int, fp: int, fn: int) -> dict:
    """Acc/Prec/Rec/F from confusion counts; Total = TP + FP + FN."""
    total = tp + fp + fn
    acc = tp / total if total else 0.0
    prec = tp / (tp + fp) if tp + fp else 0.0
    rec = tp / (tp + fn) if tp + fn else 0.0
    f = 2 * prec * rec / (prec + rec) if prec + rec else 0.0
    return {"tp": tp, "fp": fp, "fn": fn, "total": total,
            "accuracy": acc, "precision": prec, "recall": rec, "f_measure": f}


def _cosine(a: np.ndarray, b: np.ndarray) -> float:
    na, nb = np.linalg.norm(a), np.linalg.norm(b)
    if na < 1e-12 or nb < 1e-12:
        return 0.0
    return float(np.clip(a @ b / (na * nb), -1.0, 1.0))


def pair_quality(pred: CheckerAnnotation, gt: CheckerAnnotation
                 ) -> tuple[float, float, float]:
    a0 = geo.iou_box(pred.bbox, gt.bbox)
    a1 = float(np.mean([geo.iou_polygon(pred.patch_quads[k], gt.patch_quads[k])
                        for k in range(N_PATCHES)]))
    a2 = float(np.mean([_cosine(pred.mean_colors[k], gt.mean_colors[k])
                        for k in range(N_PATCHES)]))
    return a0, a1, a2


def match_image(image_id: str, preds: list[CheckerAnnotation],
                gts: list[CheckerAnnotation], tp_threshold: float = 0.5
                ) -> ImageReport:
    """Greedy bipartite matching by descending box IOU."""
    candidates = []
    for i, p in enumerate(preds):
        for j, g in enumerate(gts):
            a0 = geo.iou_box(p.bbox, g.bbox)
            candidates.append((a0, i, j))
    candidates.sort(key=lambda t: (-t[0], t[1], t[2]))
    used_p: set[int] = set()
    used_g: set[int] = set()
    pairs: list[MatchedPair] = []
    for a0, i, j in candidates:
        if a0 < tp_threshold:
            break
        if i in used_p or j in used_g:
            continue
        _, a1, a2 = pair_quality(preds[i], gts[j])
        pairs.append(MatchedPair(i, j, a0, a1, a2))
        used_p.add(i)
        used_g.add(j)
    fp = [i for i in range(len(preds)) if i not in used_p]
    fn = [j for j in range(len(gts)) if j not in used_g]

    detection_a = []
    for i, p in enumerate(preds):
        match = next((m for m in pairs if m.pred_index == i), None)
        if match is not None:
            detection_a.append({"a0": match.a0, "a1": match.a1, "a2": match.a2})
        else:
            best = (0.0, 0.0, 0.0)
            for g in gts:
                q = pair_quality(p, g)
                if q[0] > best[0]:
                    best = q
            detection_a.append({"a0": best[0], "a1": best[1], "a2": best[2]})
    return ImageReport(image_id=image_id, pairs=pairs, fp_indices=fp,
                       fn_indices=fn, detection_a=detection_a)


def match_and_score(pred_map: dict[str, list[CheckerAnnotation]],
                    gt_map: dict[str, list[CheckerAnnotation]],
                    tp_threshold: float = 0.5) -> MatchReport:
    """Score predictions against ground truth across a set of images.

    The two maps must cover the same image ids.
    """
    if set(pred_map) != set(gt_map):
        missing = set(pred_map) ^ set(gt_map)
        raise ScoringError(f"image id mismatch: {sorted(missing)[:5]}")
    report = MatchReport()
    for image_id in sorted(gt_map):
        ir = match_image(image_id, pred_map[image_id], gt_map[image_id],
                         tp_threshold)
        report.images.append(ir)
        report.tp += len(ir.pairs)
        report.fp += len(ir.fp_indices)
        report.fn += len(ir.fn_indices)
    return report


def accuracy_curve(reports: MatchReport | list[ImageReport], metric: str,
                   taus: np.ndarray | None = None) -> np.ndarray:
    """Fraction of detections (TP + FP) with the metric >= tau.

    Returns an (n, 2) array of (tau, fraction) rows.
    """
    if metric not in ("a0", "a1", "a2"):
        raise ScoringError(f"unknown metric: {metric}")
    images = reports.images if isinstance(reports, MatchReport) else reports
    values = np.array([d[metric] for ir in images for d in ir.detection_a])
    if len(values) == 0:
        raise ScoringError("no detections to build a curve from")
    if taus is None:
        taus = np.linspace(0.0, 1.0, 101)
    frac = np.array([(values >= t).mean() for t in taus])
    return np.column_stack([taus, frac])
