"""
اعتبارسنجی متقابل k-fold و گزارش پنج معیار (Acc، Prec، Recall، F1، MCC)

کلاس مثبت Young (۱) است. معیارهای تجمیعی از ماتریس درهم‌ریختگی جمع‌شده
همه fold ها محاسبه می‌شوند، نه از میانگین معیارهای هر fold.
تقسیم fold ها بر اساس ضبط است: همه بردارهای یک ضبط در یک fold قرار می‌گیرند.
"""

import dataclasses
import logging
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd

from core.classifiers import ClassifierConfig, ClassifierKind, CONFIG_TYPES, TrainingSet, predict_many, train
from core.errors import EmptyMatrix, FoldLeakage, SingleClass, TooFewSamples
from core.representation import MotionVector
from core.seeding import derive_seed
from core.skeleton import MovementKind

logger = logging.getLogger(__name__)

DEFAULT_K_FOLDS = 10
METRIC_NAMES = ("accuracy", "precision", "recall", "f1", "mcc")
TABLE_COLUMNS = ["Action", "Model", "Acc", "Prec", "Recall", "F1-score", "MCC"]


@dataclass(frozen=True)
class ConfusionMatrix:
    tp: int = 0
    fp: int = 0
    tn: int = 0
    fn: int = 0

    def __post_init__(self):
        if min(self.tp, self.fp, self.tn, self.fn) < 0:
            raise ValueError("confusion matrix counts must be non-negative")

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.tn + self.fn

    def __add__(self, other: "ConfusionMatrix") -> "ConfusionMatrix":
        return ConfusionMatrix(self.tp + other.tp, self.fp + other.fp, self.tn + other.tn, self.fn + other.fn)

    def swapped(self) -> "ConfusionMatrix":
        """
        همان ماتریس با جابه‌جایی کلاس مثبت و منفی
        """
        return ConfusionMatrix(tp=self.tn, fp=self.fn, tn=self.tp, fn=self.fp)

    def transposed(self) -> "ConfusionMatrix":
        """
        جابه‌جایی نقش برچسب واقعی و پیش‌بینی (fp ↔ fn)
        """
        return ConfusionMatrix(tp=self.tp, fp=self.fn, tn=self.tn, fn=self.fp)

    @classmethod
    def from_predictions(cls, y_true, y_pred) -> "ConfusionMatrix":
        y_true = np.asarray(y_true).astype(int)
        y_pred = np.asarray(y_pred).astype(int)
        return cls(
            tp=int(np.sum((y_true == 1) & (y_pred == 1))),
            fp=int(np.sum((y_true == 0) & (y_pred == 1))),
            tn=int(np.sum((y_true == 0) & (y_pred == 0))),
            fn=int(np.sum((y_true == 1) & (y_pred == 0))),
        )


@dataclass(frozen=True)
class Metrics:
    accuracy: float
    precision: float
    recall: float
    f1: float
    mcc: float
    undefined: Tuple[str, ...] = ()

    def as_dict(self) -> Dict[str, float]:
        return {name: getattr(self, name) for name in METRIC_NAMES}


def _ratio(numerator: float, denominator: float, name: str, undefined: List[str]) -> float:
    if denominator == 0:
        undefined.append(name)
        return 0.0
    return numerator / denominator


def compute_metrics(cm: ConfusionMatrix) -> Metrics:
    """
    پنج معیار از یک ماتریس؛ هر 0/0 برابر صفر و در undefined ثبت می‌شود
    """
    if cm.total == 0:
        raise EmptyMatrix("cannot compute metrics of an empty confusion matrix")
    undefined: List[str] = []
    accuracy = (cm.tp + cm.tn) / cm.total
    precision = _ratio(cm.tp, cm.tp + cm.fp, "precision", undefined)
    recall = _ratio(cm.tp, cm.tp + cm.fn, "recall", undefined)
    f1 = _ratio(2 * precision * recall, precision + recall, "f1", undefined)
    denominator = math.sqrt(float(cm.tp + cm.fp) * (cm.tp + cm.fn) * (cm.tn + cm.fp) * (cm.tn + cm.fn))
    mcc = _ratio(float(cm.tp * cm.tn - cm.fp * cm.fn), denominator, "mcc", undefined)
    return Metrics(accuracy, precision, recall, f1, mcc, tuple(undefined))


def _groups(vectors: Sequence[MotionVector]) -> Tuple[List[str], Dict[str, List[int]]]:
    members: Dict[str, List[int]] = {}
    for index, vector in enumerate(vectors):
        members.setdefault(vector.recording_id, []).append(index)
    return list(members), members


def make_folds(vectors: Sequence[MotionVector], k_folds: int = DEFAULT_K_FOLDS, seed: int = 0) -> List[np.ndarray]:
    """
    تقسیم طبقه‌بندی‌شده (stratified) و گروه‌محور اندیس‌ها به k_folds بخش

    گروه‌ها (ضبط‌ها) پس از بر زدن تصادفی به ترتیب نزولی اندازه، هر کدام به
    fold ی می‌روند که کمترین تعداد از برچسب آن گروه را دارد (تساوی: کمترین
    تعداد کل، سپس کوچک‌ترین اندیس).
    """
    n = len(vectors)
    if n < k_folds:
        raise TooFewSamples(f"{n} motion vectors cannot fill {k_folds} folds")
    labels = np.array([int(v.label) for v in vectors])
    if len(np.unique(labels)) < 2:
        raise SingleClass("cross-validation needs both classes")
    names, members = _groups(vectors)
    if len(names) < k_folds:
        raise TooFewSamples(f"{len(names)} recordings cannot fill {k_folds} folds")

    rng = np.random.default_rng(seed)
    order = [names[i] for i in rng.permutation(len(names))]
    order.sort(key=lambda name: -len(members[name]))

    label_counts = np.zeros((k_folds, 2), dtype=int)
    totals = np.zeros(k_folds, dtype=int)
    assigned: List[List[int]] = [[] for _ in range(k_folds)]
    for name in order:
        rows = members[name]
        label = int(np.round(labels[rows].mean()))
        fold = min(range(k_folds), key=lambda f: (label_counts[f, label], totals[f], f))
        assigned[fold].extend(rows)
        label_counts[fold, label] += len(rows)
        totals[fold] += len(rows)
    return [np.array(sorted(rows), dtype=int) for rows in assigned]


@dataclass(frozen=True)
class EvaluationReport:
    movement: MovementKind
    classifier: ClassifierKind
    folds: Tuple[ConfusionMatrix, ...]
    metrics: Metrics
    n_samples: int

    @property
    def pooled(self) -> ConfusionMatrix:
        total = ConfusionMatrix()
        for cm in self.folds:
            total = total + cm
        return total


def check_leakage(vectors: Sequence[MotionVector], train_idx: np.ndarray, test_idx: np.ndarray, fold: int) -> None:
    train_ids = {vectors[i].recording_id for i in train_idx}
    leaked = sorted(train_ids.intersection(vectors[i].recording_id for i in test_idx))
    if leaked:
        raise FoldLeakage(f"fold {fold}: recordings {leaked[:3]} appear in both train and test")


def cross_validate(
    vectors: Sequence[MotionVector],
    classifier: Union[str, ClassifierKind],
    cfg: Optional[ClassifierConfig] = None,
    seed: int = 0,
    k_folds: int = DEFAULT_K_FOLDS,
    workers: int = 1,
) -> EvaluationReport:
    """
    آموزش روی k-1 بخش و آزمون روی بخش باقی‌مانده برای هر fold
    """
    kind = ClassifierKind.parse(classifier)
    if not vectors:
        raise TooFewSamples("no motion vectors to evaluate")
    movement = vectors[0].movement
    if cfg is None:
        cfg = CONFIG_TYPES[kind]()
    data = TrainingSet.from_vectors(vectors)
    folds = make_folds(vectors, k_folds, derive_seed(seed, "folds", movement.value))

    def run_fold(fold: int) -> ConfusionMatrix:
        test_idx = folds[fold]
        train_idx = np.concatenate([folds[f] for f in range(k_folds) if f != fold])
        check_leakage(vectors, train_idx, test_idx, fold)
        fold_cfg = dataclasses.replace(cfg, seed=derive_seed(seed, "cv", movement.value, kind.value, fold))
        model = train(kind, TrainingSet(data.x[train_idx], data.y[train_idx]), fold_cfg)
        predicted, _ = predict_many(model, data.x[test_idx])
        cm = ConfusionMatrix.from_predictions(data.y[test_idx], predicted)
        logger.debug(f"{movement.value}/{kind.value} fold {fold}: {cm}")
        return cm

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            matrices = list(pool.map(run_fold, range(k_folds)))
    else:
        matrices = [run_fold(fold) for fold in range(k_folds)]

    pooled = ConfusionMatrix()
    for cm in matrices:
        pooled = pooled + cm
    metrics = compute_metrics(pooled)
    if metrics.undefined:
        logger.warning(f"{movement.value}/{kind.value}: undefined metrics set to 0: {', '.join(metrics.undefined)}")
    logger.info(f"{movement.title} / {kind.title}: acc {metrics.accuracy:.3f}, f1 {metrics.f1:.3f}, "
                f"mcc {metrics.mcc:.3f} over {len(vectors)} vectors")
    return EvaluationReport(movement, kind, tuple(matrices), metrics, len(vectors))


def report_frame(report: EvaluationReport) -> pd.DataFrame:
    """
    جدول هر fold به اضافه ردیف pooled
    """
    rows = []
    for fold, cm in enumerate(report.folds):
        metrics = compute_metrics(cm) if cm.total else Metrics(0.0, 0.0, 0.0, 0.0, 0.0, METRIC_NAMES)
        rows.append({"fold": str(fold), **dataclasses.asdict(cm), "n": cm.total, **metrics.as_dict()})
    pooled = report.pooled
    rows.append({"fold": "pooled", **dataclasses.asdict(pooled), "n": pooled.total, **report.metrics.as_dict()})
    return pd.DataFrame(rows)


def write_report_csv(report: EvaluationReport, path: Union[str, os.PathLike]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    report_frame(report).to_csv(path, index=False)
    return path


def summary_frame(reports: Sequence[EvaluationReport]) -> pd.DataFrame:
    rows = []
    for report in reports:
        rows.append({
            "movement": report.movement.value,
            "classifier": report.classifier.value,
            "n_samples": report.n_samples,
            **dataclasses.asdict(report.pooled),
            **report.metrics.as_dict(),
            "undefined": ";".join(report.metrics.undefined),
        })
    return pd.DataFrame(rows)


def write_summary_csv(reports: Sequence[EvaluationReport], path: Union[str, os.PathLike]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    summary_frame(reports).to_csv(path, index=False)
    return path


def format_table(reports: Sequence[EvaluationReport]) -> str:
    """
    جدول متنی با ستون‌های Action، Model، Acc، Prec، Recall، F1-score، MCC
    """
    rows = [[r.movement.title, r.classifier.title, r.metrics.accuracy, r.metrics.precision,
             r.metrics.recall, r.metrics.f1, r.metrics.mcc] for r in reports]
    frame = pd.DataFrame(rows, columns=TABLE_COLUMNS)
    return frame.to_string(index=False, float_format=lambda v: f"{v:.3f}") + "\n"
