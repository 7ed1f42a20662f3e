"""Command-line interface: subcommands, exit codes and the full
render -> detect -> eval round trip.
"""
import json
import math

import numpy as np
import pytest
from PIL import Image

from mccfind.cli import main
from mccfind.model import ColorCheckerModel
from mccfind.render import (RigidTransform, SceneSpec, render_scene)


@pytest.fixture
def frontal_png(frontal_scene, tmp_path):
    img, gt = frontal_scene
    path = tmp_path / "frontal.png"
    Image.fromarray(img).save(path)
    return path, gt


def detection_from_gt(gt_payload):
    """Perfect detection payload mirroring a ground-truth file."""
    hyps = []
    for c in gt_payload["checkers"]:
        hyps.append({
            "corners": c["outline"],
            "homography": list(np.eye(3).flatten()),
            "theta": 0, "delta": 1,
            "patch_quads": c["patch_quads"],
            "mu": c["colors"],
            "sigma": [[0.0, 0.0, 0.0]] * 24,
            "cost": 0.0,
        })
    return {"image": gt_payload["image"], "elapsed": 0.0, "rois": None,
            "hypotheses": hyps}


class TestModelCommand:
    def test_writes_loadable_csv(self, tmp_path):
        out = tmp_path / "palette.csv"
        assert main(["model", "--out", str(out)]) == 0
        loaded = ColorCheckerModel.from_csv(out)
        assert loaded.reference_colors.shape == (24, 3)


class TestDetectCommand:
    def test_single_image(self, frontal_png, tmp_path):
        path, _ = frontal_png
        out = tmp_path / "det.json"
        assert main(["detect", "--input", str(path), "--model", "synthetic",
                     "--out", str(out)]) == 0
        payload = json.loads(out.read_text())
        assert len(payload["hypotheses"]) == 1
        assert payload["hypotheses"][0]["cost"] < 0.3

    def test_overlay_written(self, frontal_png, tmp_path):
        path, _ = frontal_png
        out = tmp_path / "det.json"
        overlay = tmp_path / "overlay.png"
        assert main(["detect", "--input", str(path), "--model", "synthetic",
                     "--out", str(out), "--overlay", str(overlay)]) == 0
        assert overlay.exists()

    def test_n_expected_two_charts(self, model, camera, tmp_path):
        transforms = [
            RigidTransform(rotation=np.zeros(3),
                           translation=np.array([tx, 0.0, -30.0]))
            for tx in (-6.0, 6.0)]
        spec = SceneSpec(checker_count=2, transforms=transforms,
                         identities=[0, 0], background=None, seed=4)
        img, _ = render_scene(spec, [model], camera)
        path = tmp_path / "two.png"
        Image.fromarray(img).save(path)
        out = tmp_path / "det.json"
        assert main(["detect", "--input", str(path), "--model", "synthetic",
                     "--n", "2", "--out", str(out)]) == 0
        assert len(json.loads(out.read_text())["hypotheses"]) == 2

    def test_roi_file(self, frontal_png, tmp_path):
        path, gt = frontal_png
        rois = {path.stem: [list(gt.checkers[0].bbox)]}
        roi_path = tmp_path / "rois.json"
        roi_path.write_text(json.dumps(rois))
        out = tmp_path / "det.json"
        assert main(["detect", "--input", str(path), "--model", "synthetic",
                     "--rois", str(roi_path), "--out", str(out)]) == 0
        payload = json.loads(out.read_text())
        assert len(payload["hypotheses"]) == 1
        assert payload["rois"] == [list(gt.checkers[0].bbox)]

    def test_unreadable_input_fails(self, tmp_path):
        bad = tmp_path / "broken.png"
        bad.write_bytes(b"not a png")
        out = tmp_path / "det.json"
        assert main(["detect", "--input", str(bad), "--model", "synthetic",
                     "--out", str(out)]) == 1

    def test_env_config_fallback(self, frontal_png, tmp_path, monkeypatch):
        path, _ = frontal_png
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({"detector": {"cost_threshold": 1e-6}}))
        monkeypatch.setenv("MCC_CONFIG", str(cfg))
        out = tmp_path / "det.json"
        assert main(["detect", "--input", str(path), "--model", "synthetic",
                     "--out", str(out)]) == 0
        assert json.loads(out.read_text())["hypotheses"] == []

    def test_bad_config_fails(self, frontal_png, tmp_path):
        path, _ = frontal_png
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({"detector": {"mystery_knob": 1}}))
        out = tmp_path / "det.json"
        assert main(["detect", "--input", str(path), "--model", "synthetic",
                     "--config", str(cfg), "--out", str(out)]) == 1


class TestRenderCommand:
    def test_reproducible(self, tmp_path):
        for name in ("r1", "r2"):
            assert main(["render", "--count", "1", "--seed", "7",
                         "--out", str(tmp_path / name)]) == 0
        b1 = (tmp_path / "r1" / "img_00000.png").read_bytes()
        b2 = (tmp_path / "r2" / "img_00000.png").read_bytes()
        assert b1 == b2
        assert (tmp_path / "r1" / "manifest.json").exists()


class TestEvalCommand:
    def make_gt_dir(self, tmp_path, count=2):
        cfg = {"render": {"seed": 11, "count_range": [1, 2]}}
        cfg_path = tmp_path / "cfg.json"
        cfg_path.write_text(json.dumps(cfg))
        gt_dir = tmp_path / "gt"
        assert main(["render", "--config", str(cfg_path), "--count",
                     str(count), "--out", str(gt_dir)]) == 0
        return gt_dir

    def test_identity_predictions_score_one(self, tmp_path):
        gt_dir = self.make_gt_dir(tmp_path)
        pred_dir = tmp_path / "pred"
        pred_dir.mkdir()
        n_checkers = 0
        for gt_file in sorted(gt_dir.glob("img_*.json")):
            payload = json.loads(gt_file.read_text())
            n_checkers += len(payload["checkers"])
            (pred_dir / gt_file.name).write_text(
                json.dumps(detection_from_gt(payload)))
        out = tmp_path / "metrics.json"
        assert main(["eval", "--pred", str(pred_dir), "--gt", str(gt_dir),
                     "--out", str(out)]) == 0
        metrics = json.loads(out.read_text())
        assert metrics["tp"] == n_checkers
        assert metrics["precision"] == metrics["recall"] == 1.0

    def test_empty_pred_dir_scores_zero(self, tmp_path):
        gt_dir = self.make_gt_dir(tmp_path)
        pred_dir = tmp_path / "pred"
        pred_dir.mkdir()
        out = tmp_path / "metrics.json"
        assert main(["eval", "--pred", str(pred_dir), "--gt", str(gt_dir),
                     "--out", str(out)]) == 0
        metrics = json.loads(out.read_text())
        assert metrics["tp"] == 0 and metrics["recall"] == 0.0

    def test_total_mismatch_fails(self, tmp_path):
        gt_dir = self.make_gt_dir(tmp_path)
        pred_dir = tmp_path / "pred"
        pred_dir.mkdir()
        payload = json.loads((gt_dir / "img_00000.json").read_text())
        (pred_dir / "unrelated.json").write_text(
            json.dumps(detection_from_gt(payload)))
        out = tmp_path / "metrics.json"
        assert main(["eval", "--pred", str(pred_dir), "--gt", str(gt_dir),
                     "--out", str(out)]) == 1

    def test_rescoring_is_bit_identical(self, tmp_path):
        gt_dir = self.make_gt_dir(tmp_path)
        pred_dir = tmp_path / "pred"
        pred_dir.mkdir()
        for gt_file in sorted(gt_dir.glob("img_*.json")):
            payload = json.loads(gt_file.read_text())
            (pred_dir / gt_file.name).write_text(
                json.dumps(detection_from_gt(payload)))
        outs = []
        for name in ("m1.json", "m2.json"):
            out = tmp_path / name
            assert main(["eval", "--pred", str(pred_dir), "--gt", str(gt_dir),
                         "--out", str(out)]) == 0
            outs.append(out.read_bytes())
        assert outs[0] == outs[1]


class TestRoundTrip:
    def test_render_detect_eval(self, tmp_path):
        cfg = {"render": {"seed": 23,
                          "rot_range": [-math.pi / 8, math.pi / 8],
                          "require_inside": True}}
        cfg_path = tmp_path / "cfg.json"
        cfg_path.write_text(json.dumps(cfg))
        data = tmp_path / "data"
        pred = tmp_path / "pred"
        curves = tmp_path / "curves"
        assert main(["render", "--config", str(cfg_path), "--count", "3",
                     "--out", str(data)]) == 0
        assert main(["detect", "--input", str(data), "--model", "synthetic",
                     "--out", str(pred)]) == 0
        assert len(list(pred.glob("*.json"))) == 3
        out = tmp_path / "metrics.json"
        assert main(["eval", "--pred", str(pred), "--gt", str(data),
                     "--out", str(out), "--curves", str(curves)]) == 0
        metrics = json.loads(out.read_text())
        assert metrics["tp"] == 3
        assert metrics["fp"] == 0 and metrics["fn"] == 0
        for m in ("a0", "a1", "a2"):
            assert (curves / f"{m}.csv").exists()
