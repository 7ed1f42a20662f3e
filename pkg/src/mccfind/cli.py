"""Command-line front end: detect / render / eval subcommands.

Exit codes: 0 success, 1 I/O or schema error, 2 internal invariant
violation.
"""
from __future__ import annotations

import argparse
import concurrent.futures as cf
import json
import os
import sys
import tempfile
from pathlib import Path

import numpy as np
from PIL import Image, ImageDraw

from . import schemas
from .config import Config
from .errors import ConfigError, InvalidInputError, MccError, ScoringError
from .evaluation import accuracy_curve, match_and_score
from .model import ColorCheckerModel
from .recognition import detect
from .render import Camera, generate_dataset

IMAGE_SUFFIXES = (".png", ".ppm", ".jpg", ".jpeg")


def _atomic_write_text(path: Path, text: str) -> None:
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=path.name, suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _load_config(path: str | None) -> Config:
    path = path or os.environ.get("MCC_CONFIG")
    if path:
        return Config.from_json(path)
    return Config()


def _load_model(spec: str) -> ColorCheckerModel:
    if spec == "synthetic":
        return ColorCheckerModel.synthetic()
    return ColorCheckerModel.from_csv(spec)


def _load_image(path: Path) -> np.ndarray:
    try:
        return np.asarray(Image.open(path).convert("RGB"))
    except OSError as e:
        raise InvalidInputError(f"cannot read image {path}: {e}") from e


def _draw_overlay(img: np.ndarray, result, path: Path) -> None:
    im = Image.fromarray(img).convert("RGB")
    draw = ImageDraw.Draw(im)
    for h in result.hypotheses:
        pts = [tuple(p) for p in h.corners]
        draw.polygon(pts, outline=(255, 0, 0), width=3)
        for quad in h.patch_quads:
            draw.polygon([tuple(p) for p in quad], outline=(0, 255, 0))
        draw.text(tuple(h.corners[0]), f"E={h.cost:.2f}", fill=(255, 255, 0))
    im.save(path)


def _detect_one(args_tuple):
    (img_path, rois, n_expected, model, cfg) = args_tuple
    img = _load_image(img_path)
    result = detect(img, model, rois=rois, n_expected=n_expected,
                    config=cfg.detector)
    return img_path, schemas.detection_to_json(img_path.name, result), result


def cmd_detect(args) -> int:
    cfg = _load_config(args.config)
    if args.cost_threshold is not None:
        cfg.detector.cost_threshold = args.cost_threshold
        cfg.detector.validate()
    model = _load_model(args.model)

    inp = Path(args.input)
    if inp.is_dir():
        images = sorted(p for p in inp.iterdir()
                        if p.suffix.lower() in IMAGE_SUFFIXES)
    else:
        images = [inp]
    if not images:
        print(f"error: no images under {inp}", file=sys.stderr)
        return 1

    roi_map = {}
    if args.rois:
        payload = json.loads(Path(args.rois).read_text())
        schemas.validate(payload, schemas.ROI_SCHEMA, "roi")
        roi_map = payload

    out = Path(args.out)
    multi = len(images) > 1
    if multi:
        out.mkdir(parents=True, exist_ok=True)
    overlay_dir = Path(args.overlay) if args.overlay else None
    if overlay_dir and multi:
        overlay_dir.mkdir(parents=True, exist_ok=True)

    tasks = [(p, roi_map.get(p.stem), args.n, model, cfg) for p in images]
    failures = 0
    times = []
    if args.jobs > 1 and multi:
        with cf.ProcessPoolExecutor(max_workers=args.jobs) as pool:
            results = pool.map(_detect_one, tasks)
            results = list(results)
    else:
        results = []
        for t in tasks:
            try:
                results.append(_detect_one(t))
            except InvalidInputError as e:
                print(f"error: {t[0]}: {e}", file=sys.stderr)
                failures += 1
    for img_path, payload, result in results:
        target = out / f"{img_path.stem}.json" if multi else out
        _atomic_write_text(target, json.dumps(payload, indent=1))
        times.append(result.elapsed)
        if overlay_dir:
            opath = (overlay_dir / f"{img_path.stem}.png"
                     if multi else overlay_dir)
            _draw_overlay(_load_image(img_path), result, opath)
    if times:
        print(f"{len(times)} image(s): {np.mean(times):.3f} "
              f"+/- {np.std(times):.3f} s/image")
    return 1 if failures else 0


def cmd_render(args) -> int:
    cfg = _load_config(args.config)
    if args.seed is not None:
        cfg.render.seed = args.seed
    manifest = generate_dataset(cfg.render, args.count, args.out)
    print(json.dumps({k: manifest[k] for k in
                      ("seed", "count", "camera", "elapsed")}, indent=1))
    return 0


def cmd_eval(args) -> int:
    cfg = _load_config(args.config)
    tp_threshold = args.tp_threshold if args.tp_threshold is not None \
        else cfg.eval.tp_threshold

    pred_dir, gt_dir = Path(args.pred), Path(args.gt)
    preds, gts = {}, {}
    for path in sorted(gt_dir.glob("*.json")):
        if path.name == "manifest.json":
            continue
        gts[path.stem] = schemas.gt_annotations(json.loads(path.read_text()))
    for path in sorted(pred_dir.glob("*.json")):
        if path.name == "manifest.json":
            continue
        preds[path.stem] = schemas.detection_annotations(
            json.loads(path.read_text()))

    if not preds:
        # an empty prediction directory means zero detections everywhere,
        # not an id mismatch
        preds = {k: [] for k in gts}
    common = set(preds) & set(gts)
    skipped = sorted((set(preds) | set(gts)) - common)
    for s in skipped:
        print(f"warning: no prediction/GT counterpart for {s}, excluded",
              file=sys.stderr)
    if not common:
        print("error: no overlapping image ids", file=sys.stderr)
        return 1

    report = match_and_score({k: preds[k] for k in common},
                             {k: gts[k] for k in common},
                             tp_threshold=tp_threshold)
    payload = report.metrics
    payload["images"] = [{
        "image": ir.image_id,
        "pairs": [{"pred": m.pred_index, "gt": m.gt_index,
                   "a0": m.a0, "a1": m.a1, "a2": m.a2} for m in ir.pairs],
        "fp": ir.fp_indices,
        "fn": ir.fn_indices,
    } for ir in report.images]
    _atomic_write_text(Path(args.out), json.dumps(payload, indent=1))

    if args.curves:
        curves_dir = Path(args.curves)
        curves_dir.mkdir(parents=True, exist_ok=True)
        for metric in ("a0", "a1", "a2"):
            try:
                curve = accuracy_curve(report, metric)
            except ScoringError:
                continue
            lines = ["tau,fraction"]
            lines += [f"{t:.3f},{f:.6f}" for t, f in curve]
            _atomic_write_text(curves_dir / f"{metric}.csv",
                               "\n".join(lines) + "\n")
    print(json.dumps({k: payload[k] for k in
                      ("tp", "fp", "fn", "total", "accuracy", "precision",
                       "recall", "f_measure")}, indent=1))
    return 0


def cmd_model(args) -> int:
    ColorCheckerModel.synthetic().to_csv(args.out)
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="mccfind",
                                 description="ColorChecker Classic detection, "
                                             "rendering and scoring")
    sub = ap.add_subparsers(dest="command", required=True)

    d = sub.add_parser("detect", help="detect charts in images")
    d.add_argument("--input", required=True, help="image file or directory")
    d.add_argument("--model", required=True,
                   help="reference-color CSV, or 'synthetic'")
    d.add_argument("--rois", help="JSON file of per-image ROI boxes")
    d.add_argument("--n", type=int, help="expected chart count")
    d.add_argument("--cost-threshold", type=float, dest="cost_threshold")
    d.add_argument("--config", help="config JSON (or MCC_CONFIG env var)")
    d.add_argument("--out", required=True, help="output JSON file or directory")
    d.add_argument("--overlay", help="overlay PNG path or directory")
    d.add_argument("--jobs", type=int, default=1)
    d.set_defaults(func=cmd_detect)

    r = sub.add_parser("render", help="generate a synthetic dataset")
    r.add_argument("--config", help="config JSON (or MCC_CONFIG env var)")
    r.add_argument("--count", type=int, required=True)
    r.add_argument("--seed", type=int)
    r.add_argument("--out", required=True, help="output directory")
    r.set_defaults(func=cmd_render)

    e = sub.add_parser("eval", help="score detections against ground truth")
    e.add_argument("--pred", required=True, help="directory of detection JSON")
    e.add_argument("--gt", required=True, help="directory of ground-truth JSON")
    e.add_argument("--tp-threshold", type=float, dest="tp_threshold")
    e.add_argument("--config", help="config JSON (or MCC_CONFIG env var)")
    e.add_argument("--out", required=True, help="metrics JSON path")
    e.add_argument("--curves", help="directory for a0/a1/a2 curve CSVs")
    e.set_defaults(func=cmd_eval)

    m = sub.add_parser("model", help="write the synthetic reference palette")
    m.add_argument("--out", required=True, help="CSV path")
    m.set_defaults(func=cmd_model)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, InvalidInputError, ScoringError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    except MccError as e:
        print(f"internal error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
