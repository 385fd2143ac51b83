"""Nearest-neighbour distance ratio scoring and the accept / MANY decision rule."""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Any, Callable, Sequence

import numpy as np

from .errors import GalleryTooSmallError
from .hog import hog_distance

MANY = "MANY"
TIE_RTOL = 1e-9


@dataclass(frozen=True)
class GalleryEntry:
    descriptor: Any
    class_label: str
    sample_id: str


@dataclass(frozen=True)
class NndrScore:
    beta: float
    best_id: str
    best_class: str
    second_id: str
    second_class: str
    omega_top: float
    omega_2nd: float
    tied: bool  # another class sits at the top distance too


@dataclass(frozen=True)
class MatchDecision:
    predicted: str  # a class label or MANY
    score: NndrScore

    @property
    def accepted(self):
        return self.predicted != MANY


class Outcome(str, enum.Enum):
    TP = "TP"
    FP = "FP"
    TN = "TN"
    FN = "FN"


@dataclass
class OutcomeCounts:
    tp: int = 0
    fp: int = 0
    tn: int = 0
    fn: int = 0

    def add(self, outcome):
        attr = outcome.value.lower()
        setattr(self, attr, getattr(self, attr) + 1)

    @property
    def total(self):
        return self.tp + self.fp + self.tn + self.fn

    def as_dict(self):
        return {"tp": self.tp, "fp": self.fp, "tn": self.tn, "fn": self.fn}


def check_gallery(gallery):
    if len(gallery) < 2:
        raise GalleryTooSmallError(f"gallery needs at least 2 entries, has {len(gallery)}")
    ids = [e.sample_id for e in gallery]
    if len(set(ids)) != len(ids):
        raise ValueError("gallery sample ids must be unique")


def score_from_distances(distances, gallery: Sequence[GalleryEntry]):
    """NNDR score given precomputed query-to-gallery distances.

    Entries are ranked by (distance, sample_id), so the result does not
    depend on gallery order.
    """
    check_gallery(gallery)
    d = np.asarray(distances, dtype=np.float64)
    if d.shape != (len(gallery),):
        raise ValueError("need exactly one distance per gallery entry")
    if not np.all(np.isfinite(d)) or np.any(d < 0):
        raise ValueError("distances must be finite and non-negative")
    order = sorted(range(len(gallery)), key=lambda i: (d[i], gallery[i].sample_id))
    top, second = order[0], order[1]
    omega_top, omega_2nd = float(d[top]), float(d[second])
    beta = omega_top / omega_2nd if omega_2nd > 0 else 0.0
    best_class = gallery[top].class_label
    tol = TIE_RTOL * omega_top
    tied = any(
        d[i] - omega_top <= tol and gallery[i].class_label != best_class for i in order[1:]
    )
    return NndrScore(
        beta=beta,
        best_id=gallery[top].sample_id,
        best_class=best_class,
        second_id=gallery[second].sample_id,
        second_class=gallery[second].class_label,
        omega_top=omega_top,
        omega_2nd=omega_2nd,
        tied=tied,
    )


def nndr_score(query, gallery, distance: Callable = hog_distance):
    check_gallery(gallery)
    return score_from_distances([distance(query, e.descriptor) for e in gallery], gallery)


def decide(score, threshold):
    if score.tied or score.beta > threshold:
        return MatchDecision(MANY, score)
    return MatchDecision(score.best_class, score)


def classify(query, gallery, threshold, distance: Callable = hog_distance):
    """Accept the nearest class when its ratio is within ``threshold`` and unambiguous, else MANY."""
    if not 0 <= threshold <= 1:
        raise ValueError("threshold must be in [0, 1]")
    return decide(nndr_score(query, gallery, distance), threshold)


def outcome(decision, true_class, threshold):
    """TP/FN when the nearest neighbour has the true class, FP/TN otherwise; ties are FN."""
    s = decision.score
    if s.tied:
        return Outcome.FN
    hit = s.beta <= threshold
    if s.best_class == true_class:
        return Outcome.TP if hit else Outcome.FN
    return Outcome.FP if hit else Outcome.TN
