"""End-to-end runs: preprocess every sample, build descriptors, evaluate."""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from . import _kernels
from .dataset import load_image
from .evaluation import (
    DEFAULT_THRESHOLDS,
    OPERATING_THRESHOLD,
    DistanceTable,
    average_accuracy,
    build_confusion,
    make_folds,
    micro_accuracy,
    random_guess_baseline,
    roc_auc,
    score_folds,
    sorted_classes,
    sweep_thresholds,
)
from .errors import ConfigError
from .hog import HogParams, compute_hog, pairwise_distances
from .imgproc import DEFAULT_SMOOTH_SIGMA, DEFAULT_SMOOTH_SIZE, gaussian_kernel, preprocess
from .keypoints import (
    DEFAULT_ACCEPTANCE,
    FAST_THRESHOLD,
    MAX_KEYPOINTS,
    extract_keypoints,
    match_count_distance,
    score_sets,
)
from .nndr import decide

DESCRIPTOR_KINDS = ("hog", "keypoint")


@dataclass
class RunConfig:
    manifest: str = ""
    out: str = ""
    descriptor: str = "hog"
    hog: HogParams = field(default_factory=HogParams)
    smooth_size: int = DEFAULT_SMOOTH_SIZE
    smooth_sigma: float = DEFAULT_SMOOTH_SIGMA
    fold_mode: str = "loo"
    k: int | None = None
    thresholds: tuple = DEFAULT_THRESHOLDS
    operating_threshold: float = OPERATING_THRESHOLD
    seed: int = 0
    jobs: int = 1
    acceptance_threshold: float = DEFAULT_ACCEPTANCE
    fast_threshold: float = FAST_THRESHOLD
    max_keypoints: int = MAX_KEYPOINTS

    def validate(self):
        if self.descriptor not in DESCRIPTOR_KINDS:
            raise ConfigError(f"descriptor must be one of {DESCRIPTOR_KINDS}")
        if not 0 <= self.operating_threshold <= 1:
            raise ConfigError("operating threshold must be in [0, 1]")
        if not self.thresholds or any(not 0 <= t <= 1 for t in self.thresholds):
            raise ConfigError("threshold grid must be non-empty and within [0, 1]")
        if list(self.thresholds) != sorted(self.thresholds):
            raise ConfigError("threshold grid must be ascending")
        if self.fold_mode not in ("loo", "kfold"):
            raise ConfigError("fold mode must be 'loo' or 'kfold'")
        if self.fold_mode == "kfold" and (self.k is None or self.k < 2):
            raise ConfigError("k-fold needs k >= 2")
        if self.smooth_size < 1 or not self.smooth_sigma > 0:
            raise ConfigError("smoothing kernel needs size >= 1 and sigma > 0")
        if not 0 < self.acceptance_threshold <= 1:
            raise ConfigError("acceptance threshold must be in (0, 1]")
        if self.jobs < 1:
            raise ConfigError("jobs must be >= 1")
        self.hog.validate()
        return self

    def to_dict(self):
        d = asdict(self)
        d["thresholds"] = [float(t) for t in self.thresholds]
        return d


def _map(fn, items, jobs):
    if jobs <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(fn, items))


def preprocess_record(record, config):
    kernel = gaussian_kernel(config.smooth_size, config.smooth_sigma)
    rgb = load_image(record.image_path)
    return preprocess(rgb, record.rotation_deg, record.roi, (config.hog.window_w, config.hog.window_h), kernel)


def preprocess_all(records, config):
    return _map(lambda r: preprocess_record(r, config), records, config.jobs)


def distance_table(records, rois, config):
    ids = [r.sample_id for r in records]
    classes = [r.individual_id for r in records]
    if config.descriptor == "hog":
        descs = _map(lambda roi: compute_hog(roi, config.hog).values, rois, config.jobs)
        if not descs:
            return DistanceTable(ids, classes, np.zeros((0, 0)))
        return DistanceTable(ids, classes, pairwise_distances(descs, descs))
    sets = _map(
        lambda roi: extract_keypoints(roi, config.fast_threshold, config.max_keypoints), rois, config.jobs
    )
    n = len(sets)

    def row(i):
        out = np.zeros(n)
        for j in range(n):
            if i != j:
                out[j] = match_count_distance(score_sets(sets[i], sets[j], config.acceptance_threshold))
        return out

    return DistanceTable(ids, classes, np.array(_map(row, range(n), config.jobs)).reshape(n, n))


@dataclass
class EvalReport:
    config: dict
    classes: list
    sweep: list
    auc: float
    confusion: object
    macro_accuracy: float
    micro_accuracy: float
    chance_accuracy: float
    decisions: list
    missing_class_queries: list
    fold_count: int

    def to_dict(self):
        cm = self.confusion
        return {
            "config": self.config,
            "backend": _kernels.BACKEND,
            "n_samples": len(self.decisions),
            "classes": self.classes,
            "fold_count": self.fold_count,
            "sweep": [
                {
                    "threshold": r.threshold,
                    **r.counts.as_dict(),
                    "tpr": r.roc.tpr,
                    "fpr": r.roc.fpr,
                    "tpr_undefined": r.tpr_undefined,
                    "fpr_undefined": r.fpr_undefined,
                }
                for r in self.sweep
            ],
            "roc_auc": self.auc,
            "operating_threshold": self.config["operating_threshold"],
            "confusion": {
                "columns": cm.columns,
                "counts": cm.counts.tolist(),
                "proportions": cm.proportions.tolist(),
                "empty_rows": cm.empty_rows,
            },
            "macro_accuracy": self.macro_accuracy,
            "micro_accuracy": self.micro_accuracy,
            "chance_accuracy": self.chance_accuracy,
            "missing_class_queries": self.missing_class_queries,
            "decisions": self.decisions,
        }


def _clean(x):
    return None if isinstance(x, float) and math.isnan(x) else x


def evaluate_table(table, records, config):
    plan = make_folds(records, config.fold_mode, config.k, config.seed)
    scores = score_folds(table, plan)
    sweep = sweep_thresholds(scores, config.thresholds)
    classes = sorted_classes(table.classes)
    op = config.operating_threshold
    decided = [(qs, decide(qs.score, op)) for qs in scores]
    cm = build_confusion([(qs.true_class, d) for qs, d in decided], classes)
    macro = average_accuracy(cm) if not cm.empty_rows else float("nan")
    return EvalReport(
        config=config.to_dict(),
        classes=classes,
        sweep=sweep,
        auc=roc_auc([r.roc for r in sweep]),
        confusion=cm,
        macro_accuracy=_clean(macro),
        micro_accuracy=micro_accuracy(cm),
        chance_accuracy=random_guess_baseline(len(classes)),
        decisions=[
            {
                "sample_id": qs.sample_id,
                "true_class": qs.true_class,
                "predicted": d.predicted,
                "beta": qs.score.beta,
                "best_id": qs.score.best_id,
                "second_id": qs.score.second_id,
                "omega_top": qs.score.omega_top,
                "omega_2nd": qs.score.omega_2nd,
                "tied": qs.score.tied,
            }
            for qs, d in decided
        ],
        missing_class_queries=[qs.sample_id for qs in scores if not qs.class_in_gallery],
        fold_count=len(plan),
    )


def run_evaluation(records, config, rois=None):
    config.validate()
    if rois is None:
        rois = preprocess_all(records, config)
    return evaluate_table(distance_table(records, rois, config), records, config)
