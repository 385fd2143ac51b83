"""Cross-validated NNDR evaluation: folds, threshold sweep, ROC, confusion matrix."""

from __future__ import annotations

import re
from dataclasses import dataclass, field

import numpy as np

from .errors import EmptyRowError, TooFewSamplesError, UnknownClassError
from .nndr import (
    MANY,
    GalleryEntry,
    MatchDecision,
    OutcomeCounts,
    decide,
    outcome,
    score_from_distances,
)

DEFAULT_THRESHOLDS = tuple(round(0.1 * i, 1) for i in range(11))
OPERATING_THRESHOLD = 0.9


def natural_key(label):
    return [int(t) if t.isdigit() else t for t in re.split(r"(\d+)", label)]


def sorted_classes(labels):
    return sorted(set(labels), key=natural_key)


@dataclass(frozen=True)
class FoldPlan:
    folds: tuple  # ((test ids...), (train ids...)) per fold
    mode: str  # "loo" or "kfold"
    k: int
    seed: int

    def __iter__(self):
        return iter(self.folds)

    def __len__(self):
        return len(self.folds)


@dataclass(frozen=True)
class RocPoint:
    threshold: float
    tpr: float
    fpr: float


@dataclass(frozen=True)
class ThresholdResult:
    threshold: float
    counts: OutcomeCounts
    roc: RocPoint
    tpr_undefined: bool
    fpr_undefined: bool


@dataclass(frozen=True)
class QueryScore:
    sample_id: str
    true_class: str
    score: object  # NndrScore
    class_in_gallery: bool


@dataclass
class ConfusionMatrix:
    classes: list
    proportions: np.ndarray  # (n, n + 1), last column MANY
    counts: np.ndarray | None = None
    empty_rows: list = field(default_factory=list)

    @property
    def columns(self):
        return list(self.classes) + [MANY]

    @classmethod
    def from_proportions(cls, classes, proportions):
        p = np.asarray(proportions, dtype=np.float64)
        if p.shape != (len(classes), len(classes) + 1):
            raise ValueError(f"expected a {len(classes)}x{len(classes) + 1} matrix, got {p.shape}")
        empty = [c for c, row in zip(classes, p) if not row.any()]
        return cls(list(classes), p, None, empty)


def make_folds(records, mode="loo", k=None, seed=0):
    """Leave-one-out (``mode="loo"``) or seeded k-fold partitions of the sample ids."""
    ids = [r.sample_id if hasattr(r, "sample_id") else str(r) for r in records]
    n = len(ids)
    if n < 2:
        raise TooFewSamplesError(f"cross-validation needs at least 2 samples, got {n}")
    if mode == "loo":
        parts = [[i] for i in range(n)]
        k = n
    elif mode == "kfold":
        if k is None or not 2 <= k <= n:
            raise TooFewSamplesError(f"k must be in [2, {n}], got {k}")
        perm = np.random.default_rng(seed).permutation(n)
        parts = [sorted(int(i) for i in chunk) for chunk in np.array_split(perm, k)]
    else:
        raise ValueError(f"unknown fold mode {mode!r}")
    folds = []
    for part in parts:
        test = set(part)
        folds.append(
            (tuple(ids[i] for i in part), tuple(ids[i] for i in range(n) if i not in test))
        )
    return FoldPlan(tuple(folds), mode, k, seed)


def compute_rates(counts):
    """(TPR, FPR); an empty denominator yields 0."""
    pos = counts.tp + counts.fn
    neg = counts.fp + counts.tn
    tpr = counts.tp / pos if pos else 0.0
    fpr = counts.fp / neg if neg else 0.0
    return tpr, fpr


class DistanceTable:
    """All query-to-gallery distances for a dataset, computed once.

    ``matrix[i, j]`` is the distance from sample ``ids[i]`` (as query) to
    sample ``ids[j]`` (as gallery entry); it need not be symmetric.
    """

    def __init__(self, ids, classes, matrix):
        self.ids = list(ids)
        self.classes = list(classes)
        self.matrix = np.asarray(matrix, dtype=np.float64)
        self.index = {s: i for i, s in enumerate(self.ids)}
        if self.matrix.shape != (len(self.ids), len(self.ids)):
            raise ValueError("distance matrix must be square over the sample ids")
        if len(self.index) != len(self.ids):
            raise ValueError("sample ids must be unique")

    @classmethod
    def from_function(cls, ids, classes, descriptors, distance):
        n = len(ids)
        m = np.zeros((n, n))
        for i in range(n):
            for j in range(n):
                if i != j:
                    m[i, j] = distance(descriptors[i], descriptors[j])
        return cls(ids, classes, m)

    def class_of(self, sample_id):
        return self.classes[self.index[sample_id]]


def score_folds(table, plan):
    """NNDR score of every test query against its fold's training gallery, in fold order."""
    out = []
    for test_ids, train_ids in plan:
        gallery = [GalleryEntry(None, table.class_of(s), s) for s in train_ids]
        cols = [table.index[s] for s in train_ids]
        gallery_classes = {e.class_label for e in gallery}
        for q in test_ids:
            row = table.matrix[table.index[q], cols]
            true_class = table.class_of(q)
            out.append(QueryScore(q, true_class, score_from_distances(row, gallery), true_class in gallery_classes))
    return out


def sweep_thresholds(scores, thresholds=DEFAULT_THRESHOLDS):
    """Outcome counts and ROC point per threshold, re-deciding from the fixed scores."""
    thresholds = list(thresholds)
    if thresholds != sorted(thresholds):
        raise ValueError("thresholds must be sorted ascending")
    results = []
    for t in thresholds:
        counts = OutcomeCounts()
        for qs in scores:
            counts.add(outcome(decide(qs.score, t), qs.true_class, t))
        tpr, fpr = compute_rates(counts)
        results.append(
            ThresholdResult(
                float(t), counts, RocPoint(float(t), tpr, fpr),
                counts.tp + counts.fn == 0, counts.fp + counts.tn == 0,
            )
        )
    return results


def roc_auc(points):
    """Trapezoidal area under the ROC polyline anchored at (0, 0) and (1, 1)."""
    pts = sorted({(0.0, 0.0), (1.0, 1.0), *((p.fpr, p.tpr) for p in points)})
    xs = np.array([p[0] for p in pts])
    ys = np.array([p[1] for p in pts])
    return float(np.sum((xs[1:] - xs[:-1]) * (ys[1:] + ys[:-1]) / 2.0))


def build_confusion(decisions, classes):
    """Rows are true classes, columns predicted classes plus MANY; rows normalized by their count."""
    classes = list(classes)
    col = {c: i for i, c in enumerate(classes)}
    col[MANY] = len(classes)
    counts = np.zeros((len(classes), len(classes) + 1), dtype=np.int64)
    for true_class, decision in decisions:
        predicted = decision.predicted if isinstance(decision, MatchDecision) else decision
        if true_class not in col or true_class == MANY:
            raise UnknownClassError(f"unknown true class {true_class!r}")
        if predicted not in col:
            raise UnknownClassError(f"unknown predicted class {predicted!r}")
        counts[col[true_class], col[predicted]] += 1
    totals = counts.sum(axis=1, keepdims=True)
    props = np.divide(counts, totals, out=np.zeros(counts.shape), where=totals > 0)
    empty = [c for c, t in zip(classes, totals[:, 0]) if t == 0]
    return ConfusionMatrix(classes, props, counts, empty)


def average_accuracy(cm):
    """Macro accuracy: mean of the diagonal of the row-normalized matrix."""
    if cm.empty_rows:
        raise EmptyRowError(f"classes without samples: {cm.empty_rows}")
    n = len(cm.classes)
    return float(np.mean(np.diag(cm.proportions[:, :n])))


def micro_accuracy(cm):
    if cm.counts is None:
        raise ValueError("micro accuracy needs raw counts")
    total = cm.counts.sum()
    if total == 0:
        raise EmptyRowError("confusion matrix holds no samples")
    n = len(cm.classes)
    return float(np.trace(cm.counts[:, :n]) / total)


def random_guess_baseline(n_classes):
    if n_classes < 1:
        raise ValueError("need at least one class")
    return 1.0 / n_classes
