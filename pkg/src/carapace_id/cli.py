"""Command-line driver: ``carapace-id {preprocess,describe,evaluate,synth}``.

Exit codes: 0 success, 1 data error, 2 configuration error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import sys
from pathlib import Path

import numpy as np

from .dataset import load_image, load_manifest, save_pgm
from .errors import ConfigError, DataError, UnknownSampleError
from .evaluation import DEFAULT_THRESHOLDS, OPERATING_THRESHOLD
from .hog import HogParams, compute_hog, descriptor_to_json, write_descriptor
from .imgproc import to_grayscale
from .keypoints import extract_keypoints
from .pipeline import RunConfig, preprocess_all, preprocess_record, run_evaluation

log = logging.getLogger("carapace_id")

EXIT_OK, EXIT_DATA, EXIT_CONFIG = 0, 1, 2


def _parse_grid(text):
    text = text.strip()
    try:
        if ":" in text:
            start, stop, step = (float(v) for v in text.split(":"))
            if step <= 0:
                raise ValueError
            n = int(round((stop - start) / step))
            grid = [round(start + i * step, 10) for i in range(n + 1)]
        else:
            grid = [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad threshold grid {text!r}; use 'a,b,c' or 'start:stop:step'") from None
    return tuple(grid)


def _parse_window(text):
    try:
        w, h = (int(v) for v in text.lower().split("x"))
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad window {text!r}; use WIDTHxHEIGHT") from None
    return w, h


def _parse_folds(text):
    if text == "loo":
        return "loo"
    try:
        k = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError("--folds takes 'loo' or an integer k") from None
    if k < 2:
        raise argparse.ArgumentTypeError("k must be >= 2")
    return k


def build_parser():
    parser = argparse.ArgumentParser(prog="carapace-id", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--manifest", required=True, type=Path)
    common.add_argument("--out", required=True, type=Path)
    common.add_argument("--descriptor", choices=("hog", "keypoint"), default="hog")
    common.add_argument("--window", type=_parse_window, default=(96, 128), help="HOG window, WIDTHxHEIGHT")
    common.add_argument("--cell", type=int, default=8)
    common.add_argument("--block", type=int, default=2)
    common.add_argument("--bins", type=int, default=9)
    common.add_argument("--smooth-size", type=int, default=4)
    common.add_argument("--smooth-sigma", type=float, default=1.0)
    common.add_argument("--acceptance-threshold", type=float, default=0.8)
    common.add_argument("--fast-threshold", type=float, default=20.0)
    common.add_argument("--max-keypoints", type=int, default=500)
    common.add_argument("--jobs", type=int, default=1)

    sub.add_parser("preprocess", parents=[common], help="write 96x128 smoothed ROI crops as PGM")

    p = sub.add_parser("describe", parents=[common], help="dump the descriptor of one sample")
    p.add_argument("--sample", required=True, help="sample id (derived from the image path)")

    p = sub.add_parser("evaluate", parents=[common], help="cross-validated NNDR evaluation")
    p.add_argument("--threshold-grid", type=_parse_grid, default=DEFAULT_THRESHOLDS)
    p.add_argument("--operating-threshold", type=float, default=OPERATING_THRESHOLD)
    p.add_argument("--folds", type=_parse_folds, default="loo", help="'loo' or k")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--use-cache", action="store_true", help="read ROIs written by 'preprocess'")

    p = sub.add_parser("synth", help="generate the synthetic surrogate dataset")
    p.add_argument("--out", required=True, type=Path)
    p.add_argument("--classes", type=int, default=16)
    p.add_argument("--per-class", type=int, default=4)
    p.add_argument("--seed", type=int, default=0)
    return parser


def config_from_args(args):
    cfg = RunConfig(
        manifest=str(args.manifest),
        out=str(args.out),
        descriptor=args.descriptor,
        hog=HogParams(window_w=args.window[0], window_h=args.window[1], cell=args.cell, block=args.block, bins=args.bins),
        smooth_size=args.smooth_size,
        smooth_sigma=args.smooth_sigma,
        acceptance_threshold=args.acceptance_threshold,
        fast_threshold=args.fast_threshold,
        max_keypoints=args.max_keypoints,
        jobs=args.jobs,
    )
    if args.command == "evaluate":
        cfg.thresholds = tuple(args.threshold_grid)
        cfg.operating_threshold = args.operating_threshold
        cfg.fold_mode = "loo" if args.folds == "loo" else "kfold"
        cfg.k = None if args.folds == "loo" else args.folds
        cfg.seed = args.seed
    return cfg.validate()


def cmd_preprocess(cfg):
    records = load_manifest(cfg.manifest)
    roi_dir = Path(cfg.out) / "roi"
    roi_dir.mkdir(parents=True, exist_ok=True)
    failures = []
    for line, rec in enumerate(records, start=1):
        try:
            roi = preprocess_record(rec, cfg)
        except DataError as exc:
            failures.append(f"row {line} ({rec.sample_id}): {exc}")
            continue
        save_pgm(roi, roi_dir / f"{rec.sample_id}.pgm")
    provenance = {
        "config": cfg.to_dict(),
        "pipeline": ["load", "grayscale", "rotate", "crop_roi", "gaussian_smooth", "resize"],
        "samples": [r.sample_id for r in records],
        "failures": failures,
    }
    (roi_dir / "provenance.json").write_text(json.dumps(provenance, indent=2, sort_keys=True) + "\n")
    for f in failures:
        print(f"error: {f}", file=sys.stderr)
    print(f"wrote {len(records) - len(failures)} ROI(s) to {roi_dir}")
    return EXIT_DATA if failures else EXIT_OK


def _load_rois(records, cfg, use_cache):
    if not use_cache:
        return preprocess_all(records, cfg)
    roi_dir = Path(cfg.out) / "roi"
    return [to_grayscale(load_image(roi_dir / f"{r.sample_id}.pgm")) for r in records]


def _roc_csv(report):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["threshold", "tp", "fp", "tn", "fn", "tpr", "fpr"])
    for r in report.sweep:
        c = r.counts
        w.writerow([repr(r.threshold), c.tp, c.fp, c.tn, c.fn, repr(r.roc.tpr), repr(r.roc.fpr)])
    return buf.getvalue()


def _confusion_csv(report):
    cm = report.confusion
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["class"] + cm.columns)
    for label, row in zip(cm.classes, cm.proportions):
        w.writerow([label] + [f"{v:.6f}" for v in row])
    return buf.getvalue()


def cmd_evaluate(cfg, use_cache=False):
    records = load_manifest(cfg.manifest)
    report = run_evaluation(records, cfg, _load_rois(records, cfg, use_cache))
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    outputs = {
        "report.json": json.dumps(report.to_dict(), indent=2, sort_keys=True, allow_nan=False) + "\n",
        "roc.csv": _roc_csv(report),
        "confusion.csv": _confusion_csv(report),
    }
    written = []
    try:
        for name, text in outputs.items():
            tmp = out / f".{name}.tmp"
            tmp.write_text(text, encoding="utf-8")
            written.append(tmp)
        for name in outputs:
            (out / f".{name}.tmp").replace(out / name)
        json.loads((out / "report.json").read_text(encoding="utf-8"))
    except Exception:
        for p in written + [out / n for n in outputs]:
            p.unlink(missing_ok=True)
        raise
    macro = report.macro_accuracy
    macro_txt = "n/a (class without samples)" if macro is None else f"{macro:.4f}"
    print(f"descriptor: {cfg.descriptor}")
    print(f"operating threshold: {cfg.operating_threshold}")
    print(f"average accuracy (macro): {macro_txt}")
    print(f"accuracy (micro): {report.micro_accuracy:.4f}")
    print(f"chance level: {report.chance_accuracy:.4f}")
    print(f"ROC AUC: {report.auc:.4f}")
    return EXIT_OK


def cmd_describe(cfg, sample_id):
    records = {r.sample_id: r for r in load_manifest(cfg.manifest)}
    if sample_id not in records:
        raise UnknownSampleError(f"no sample {sample_id!r} in {cfg.manifest}")
    roi = preprocess_record(records[sample_id], cfg)
    out = Path(cfg.out) / "descriptors"
    out.mkdir(parents=True, exist_ok=True)
    if cfg.descriptor == "hog":
        desc = compute_hog(roi, cfg.hog)
        write_descriptor(desc, out / f"{sample_id}.hogd")
        (out / f"{sample_id}.json").write_text(descriptor_to_json(desc) + "\n")
        norms = desc.block_norms()
        print(f"length: {len(desc)}")
        print(f"block norms: min {norms.min():.4f} mean {norms.mean():.4f} max {norms.max():.4f}")
        if not np.any(desc.values):
            print("notice: descriptor is all zeros (no gradient energy in the ROI)")
    else:
        kps = extract_keypoints(roi, cfg.fast_threshold, cfg.max_keypoints)
        payload = {
            "keypoints": [
                {"x": k.x, "y": k.y, "response": k.response, "orientation": k.orientation}
                for k in kps.keypoints
            ],
            "descriptors": [bytes(row).hex() for row in kps.descriptors],
        }
        (out / f"{sample_id}.keypoints.json").write_text(json.dumps(payload, indent=2) + "\n")
        print(f"keypoints: {len(kps)}")
        if len(kps) == 0:
            print("notice: 0 keypoints detected")
    return EXIT_OK


def cmd_synth(args):
    from .synthetic import make_surrogate

    records = make_surrogate(args.out, args.classes, args.per_class, args.seed)
    print(f"wrote {len(records)} images and {Path(args.out) / 'manifest.csv'}")
    return EXIT_OK


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        if args.command == "synth":
            return cmd_synth(args)
        cfg = config_from_args(args)
        if args.command == "preprocess":
            return cmd_preprocess(cfg)
        if args.command == "describe":
            return cmd_describe(cfg, args.sample)
        return cmd_evaluate(cfg, args.use_cache)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except DataError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
