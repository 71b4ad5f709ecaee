import itertools

import numpy as np
import pandas as pd
import pytest

from core.classifiers import ForestConfig, SvmConfig
from core.classifiers.base import ClassifierKind
from core.errors import EmptyMatrix, FoldLeakage, SingleClass, TooFewSamples
from core.evaluation import (
    ConfusionMatrix,
    check_leakage,
    compute_metrics,
    cross_validate,
    format_table,
    make_folds,
    report_frame,
    summary_frame,
    write_report_csv,
)
from core.representation import MotionVector
from core.skeleton import AgeGroup, MovementKind
from tests.helpers import blob_vectors


def test_perfect_classifier():
    metrics = compute_metrics(ConfusionMatrix(tp=10, tn=10, fp=0, fn=0))
    assert (metrics.accuracy, metrics.precision, metrics.recall, metrics.f1, metrics.mcc) == (1.0, 1.0, 1.0, 1.0, 1.0)
    assert metrics.undefined == ()


def test_perfectly_wrong_classifier():
    metrics = compute_metrics(ConfusionMatrix(tp=0, tn=0, fp=10, fn=10))
    assert metrics.accuracy == 0.0
    assert metrics.mcc == pytest.approx(-1.0)


def test_worked_confusion_matrix():
    metrics = compute_metrics(ConfusionMatrix(tp=45, fp=5, tn=40, fn=10))
    assert metrics.accuracy == pytest.approx(0.85)
    assert metrics.precision == pytest.approx(0.90)
    assert metrics.recall == pytest.approx(0.8182, abs=1e-4)
    assert metrics.f1 == pytest.approx(0.8571, abs=1e-4)
    assert metrics.mcc == pytest.approx(1750 / np.sqrt(50 * 55 * 45 * 50))
    assert metrics.mcc == pytest.approx(0.7035, abs=1e-4)


def test_metrics_match_enumeration_oracle():
    for y_true in itertools.product([0, 1], repeat=6):
        for y_pred in itertools.product([0, 1], repeat=6):
            t, p = np.array(y_true), np.array(y_pred)
            metrics = compute_metrics(ConfusionMatrix.from_predictions(t, p))
            assert metrics.accuracy == pytest.approx(np.mean(t == p))
            if t.std() > 0 and p.std() > 0:
                assert metrics.mcc == pytest.approx(np.corrcoef(t, p)[0, 1])
            else:
                assert metrics.mcc == 0.0


def test_undefined_ratios_become_zero():
    metrics = compute_metrics(ConfusionMatrix(tp=0, fp=0, tn=7, fn=3))
    assert metrics.precision == 0.0
    assert metrics.mcc == 0.0
    assert "precision" in metrics.undefined
    assert "mcc" in metrics.undefined


def test_empty_matrix_raises():
    with pytest.raises(EmptyMatrix):
        compute_metrics(ConfusionMatrix())


def test_transposed_swaps_precision_and_recall():
    cm = ConfusionMatrix(tp=45, fp=5, tn=40, fn=10)
    a, b = compute_metrics(cm), compute_metrics(cm.transposed())
    assert b.precision == pytest.approx(a.recall)
    assert b.recall == pytest.approx(a.precision)
    assert b.mcc == pytest.approx(a.mcc)


def test_swapped_classes_keep_mcc():
    cm = ConfusionMatrix(tp=12, fp=3, tn=20, fn=6)
    assert compute_metrics(cm.swapped()).mcc == pytest.approx(compute_metrics(cm).mcc)


def test_negative_counts_are_rejected():
    with pytest.raises(ValueError):
        ConfusionMatrix(tp=-1)


def test_folds_keep_recordings_together_and_cover_everything():
    vectors = blob_vectors(30, 3)
    folds = make_folds(vectors, k_folds=10, seed=4)
    assert sorted(np.concatenate(folds).tolist()) == list(range(len(vectors)))
    owners = {}
    for fold, rows in enumerate(folds):
        for row in rows:
            assert owners.setdefault(vectors[row].recording_id, fold) == fold


def test_folds_are_stratified():
    vectors = blob_vectors(40, 2)
    for fold in make_folds(vectors, k_folds=10, seed=1):
        labels = [int(vectors[i].label) for i in fold]
        assert labels.count(0) == labels.count(1) == 4


def test_folds_are_deterministic():
    vectors = blob_vectors(25, 2)
    a = make_folds(vectors, 5, seed=3)
    b = make_folds(vectors, 5, seed=3)
    assert all(np.array_equal(x, y) for x, y in zip(a, b))


def test_folds_need_enough_recordings():
    with pytest.raises(TooFewSamples):
        make_folds(blob_vectors(4, 5), k_folds=10)
    with pytest.raises(TooFewSamples):
        make_folds(blob_vectors(4, 1), k_folds=5)


def test_folds_need_both_classes():
    vectors = [v for v in blob_vectors(24, 1) if v.label is AgeGroup.YOUNG]
    with pytest.raises(SingleClass):
        make_folds(vectors, k_folds=10)


def test_leakage_is_detected():
    vectors = blob_vectors(4, 2)
    with pytest.raises(FoldLeakage):
        check_leakage(vectors, np.array([0, 2, 4]), np.array([1, 6]), fold=0)


@pytest.mark.parametrize("kind,cfg", [
    (ClassifierKind.SVM, SvmConfig()),
    (ClassifierKind.RANDOM_FOREST, ForestConfig(n_trees=10)),
])
def test_cross_validation_on_separable_blobs(kind, cfg):
    vectors = blob_vectors(30, 3, d=8)
    report = cross_validate(vectors, kind, cfg, seed=1, k_folds=5)
    assert len(report.folds) == 5
    assert report.pooled.total == len(vectors) == report.n_samples
    assert report.metrics.f1 == 1.0
    assert report.metrics.mcc == pytest.approx(1.0)


def test_cross_validation_threads_match_sequential():
    vectors = blob_vectors(30, 2, d=8, separation=0.3, noise=1.0)
    a = cross_validate(vectors, "random_forest", ForestConfig(n_trees=5), seed=2, k_folds=5, workers=1)
    b = cross_validate(vectors, "random_forest", ForestConfig(n_trees=5), seed=2, k_folds=5, workers=3)
    assert a.folds == b.folds


def test_shuffled_labels_give_chance_level_mcc():
    mccs = []
    for seed in range(10):
        rng = np.random.default_rng(seed)
        labels = rng.permutation(np.repeat([AgeGroup.YOUNG, AgeGroup.OLDER], 20))
        vectors = [MotionVector(rng.normal(size=8), AgeGroup(int(label)), MovementKind.CHAIR_RISE, f"R{n}")
                   for n, label in enumerate(labels)]
        report = cross_validate(vectors, "random_forest", ForestConfig(n_trees=15), seed=seed, k_folds=5)
        mccs.append(abs(report.metrics.mcc))
    assert np.mean(mccs) <= 0.25


def test_report_tables(tmp_path):
    vectors = blob_vectors(20, 2, d=8)
    report = cross_validate(vectors, "svm", seed=0, k_folds=4)
    frame = pd.read_csv(write_report_csv(report, tmp_path / "r.csv"))
    assert len(frame) == 5
    assert frame["fold"].astype(str).tolist()[-1] == "pooled"
    assert frame["n"].iloc[-1] == len(vectors)
    assert report_frame(report)["mcc"].iloc[-1] == report.metrics.mcc

    summary = summary_frame([report])
    assert summary.loc[0, "classifier"] == "svm"
    assert summary.loc[0, "movement"] == "stand_2_feet_eyes_open"

    table = format_table([report])
    header = table.splitlines()[0].split()
    assert header == ["Action", "Model", "Acc", "Prec", "Recall", "F1-score", "MCC"]
    assert "1.000" in table
    assert table.endswith("\n")
