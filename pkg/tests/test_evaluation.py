import csv
from pathlib import Path

import numpy as np
import pytest

from carapace_id.errors import EmptyRowError, TooFewSamplesError, UnknownClassError
from carapace_id.evaluation import (
    DEFAULT_THRESHOLDS,
    ConfusionMatrix,
    DistanceTable,
    RocPoint,
    average_accuracy,
    build_confusion,
    compute_rates,
    make_folds,
    micro_accuracy,
    random_guess_baseline,
    roc_auc,
    score_folds,
    sorted_classes,
    sweep_thresholds,
)
from carapace_id.nndr import MANY, OutcomeCounts

FIXTURE = Path(__file__).parent / "fixtures" / "reference_confusion.csv"


def load_reference_matrix():
    with open(FIXTURE, newline="") as fh:
        rows = list(csv.reader(fh))
    classes = [r[0] for r in rows[1:]]
    return ConfusionMatrix.from_proportions(classes, [[float(v) for v in r[1:]] for r in rows[1:]])


def random_table(rng, n_classes=4, per_class=3, dim=5, spread=0.6):
    centres = rng.uniform(0, 1, (n_classes, dim))
    vecs, ids, classes = [], [], []
    for c in range(n_classes):
        for k in range(per_class):
            vecs.append(centres[c] + rng.normal(0, spread / 4, dim))
            ids.append(f"c{c}_{k}")
            classes.append(f"class_{c}")
    vecs = np.array(vecs)
    m = np.sqrt(((vecs[:, None] - vecs[None]) ** 2).sum(-1))
    return DistanceTable(ids, classes, m)


# -- folds ---------------------------------------------------------------------


def test_loo_70():
    plan = make_folds([f"s{i}" for i in range(70)])
    assert len(plan) == 70
    assert all(len(test) == 1 and len(train) == 69 for test, train in plan)


def test_kfold_small():
    plan = make_folds(["a", "b", "c", "d"], "kfold", 2, seed=3)
    assert len(plan) == 2 and all(len(t) == 2 for t, _ in plan)


@pytest.mark.parametrize("k", [2, 3, 7, 10])
def test_kfold_partitions(k):
    ids = [f"s{i}" for i in range(23)]
    plan = make_folds(ids, "kfold", k, seed=5)
    tests = [s for t, _ in plan for s in t]
    assert sorted(tests) == sorted(ids)
    for test, train in plan:
        assert not set(test) & set(train)
        assert set(test) | set(train) == set(ids)
    sizes = [len(t) for t, _ in plan]
    assert max(sizes) - min(sizes) <= 1
    assert make_folds(ids, "kfold", k, seed=5) == plan


def test_too_few_samples():
    with pytest.raises(TooFewSamplesError):
        make_folds(["only"])
    with pytest.raises(TooFewSamplesError):
        make_folds(["a", "b"], "kfold", 3)


# -- rates -----------------------------------------------------------------------


def test_rates():
    assert compute_rates(OutcomeCounts(tp=3, fn=1, fp=0, tn=4)) == (0.75, 0.0)
    assert compute_rates(OutcomeCounts()) == (0.0, 0.0)
    tpr, fpr = compute_rates(OutcomeCounts(tp=13, fn=7, fp=2, tn=48))
    assert tpr == pytest.approx(0.65) and fpr == pytest.approx(0.04)


# -- sweep -----------------------------------------------------------------------


def test_default_grid():
    assert DEFAULT_THRESHOLDS == (0.0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0)


def test_threshold_zero_without_duplicates(rng):
    table = random_table(rng)
    res = sweep_thresholds(score_folds(table, make_folds(table.ids)), [0.0])[0]
    assert res.roc.tpr == 0.0 and res.roc.fpr == 0.0
    assert res.counts.tp == res.counts.fp == 0


def test_threshold_one_matches_1nn_oracle(rng):
    table = random_table(rng, spread=1.5)
    n = len(table.ids)
    same = 0
    for i in range(n):
        j = min((k for k in range(n) if k != i), key=lambda k: (table.matrix[i, k], table.ids[k]))
        same += table.classes[j] == table.classes[i]
    res = sweep_thresholds(score_folds(table, make_folds(table.ids)), [1.0])[0]
    assert 0 < same < n
    assert res.counts.tp == same and res.counts.fp == n - same
    assert res.counts.fn == res.counts.tn == 0
    assert res.roc.tpr == 1.0 and res.roc.fpr == 1.0


def test_sweep_is_monotone_and_complete(rng):
    table = random_table(rng, n_classes=5, per_class=4, spread=1.0)
    grid = np.linspace(0, 1, 21)
    res = sweep_thresholds(score_folds(table, make_folds(table.ids)), grid)
    for a, b in zip(res, res[1:]):
        assert a.counts.tp + a.counts.fp <= b.counts.tp + b.counts.fp
        assert a.counts.fn + a.counts.tn >= b.counts.fn + b.counts.tn
    assert all(r.counts.total == 20 for r in res)
    assert all(0 <= r.roc.tpr <= 1 and 0 <= r.roc.fpr <= 1 for r in res)


def test_sweep_requires_sorted_grid(rng):
    table = random_table(rng)
    with pytest.raises(ValueError):
        sweep_thresholds(score_folds(table, make_folds(table.ids)), [0.5, 0.1])


def test_kfold_scores_cover_every_sample(rng):
    table = random_table(rng)
    scores = score_folds(table, make_folds(table.ids, "kfold", 3, seed=1))
    assert sorted(s.sample_id for s in scores) == sorted(table.ids)


def test_singleton_class_flagged(rng):
    table = DistanceTable(["a", "b", "c"], ["x", "x", "y"], np.array([[0, 1, 2], [1, 0, 3], [2, 3, 0.0]]))
    scores = score_folds(table, make_folds(table.ids))
    assert [s.sample_id for s in scores if not s.class_in_gallery] == ["c"]


def test_roc_auc():
    assert roc_auc([]) == pytest.approx(0.5)
    assert roc_auc([RocPoint(0.5, 1.0, 0.0)]) == pytest.approx(1.0)


# -- confusion -----------------------------------------------------------------------


def test_confusion_identity():
    classes = ["a", "b", "c"]
    cm = build_confusion([(c, c) for c in classes for _ in range(2)], classes)
    assert np.array_equal(cm.proportions[:, :3], np.eye(3))
    assert not cm.proportions[:, 3].any()
    assert average_accuracy(cm) == 1.0 and micro_accuracy(cm) == 1.0


def test_confusion_turtle3_row():
    classes = [f"turtle {i}" for i in range(1, 17)]
    decisions = [("turtle 3", "turtle 3")] * 2 + [("turtle 3", "turtle 11")] + [("turtle 3", MANY)] * 3
    cm = build_confusion(decisions, classes)
    row = cm.proportions[2]
    assert row[2] == pytest.approx(1 / 3) and round(row[2], 2) == 0.33
    assert row[10] == pytest.approx(1 / 6) and round(row[10], 2) == 0.17
    assert row[16] == 0.5
    assert row.sum() == pytest.approx(1.0, abs=1e-9)
    assert "turtle 1" in cm.empty_rows


def test_confusion_single_many():
    cm = build_confusion([("a", MANY)], ["a"])
    assert cm.proportions.tolist() == [[0.0, 1.0]]
    assert average_accuracy(cm) == 0.0


def test_confusion_unknown_class():
    with pytest.raises(UnknownClassError):
        build_confusion([("z", "a")], ["a"])
    with pytest.raises(UnknownClassError):
        build_confusion([("a", "z")], ["a"])


def test_average_accuracy_reference_matrix():
    cm = load_reference_matrix()
    assert cm.proportions.shape == (16, 17)
    np.testing.assert_allclose(cm.proportions.sum(axis=1), 1.0, atol=1e-9)
    assert average_accuracy(cm) == pytest.approx(0.655, abs=5e-4)


def test_average_accuracy_needs_all_rows():
    cm = build_confusion([("a", "a")], ["a", "b"])
    with pytest.raises(EmptyRowError):
        average_accuracy(cm)


def test_random_guess():
    assert random_guess_baseline(16) == 0.0625
    assert random_guess_baseline(1) == 1.0
    assert random_guess_baseline(4) == 0.25
    with pytest.raises(ValueError):
        random_guess_baseline(0)


def test_natural_class_order():
    assert sorted_classes(["turtle_10", "turtle_2", "turtle_1"]) == ["turtle_1", "turtle_2", "turtle_10"]
