"""
انواع مشترک طبقه‌بندها: داده آموزشی، مدل آموزش‌دیده و پیش‌بینی
"""

import logging
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Dict, Sequence, Tuple, Union

import numpy as np

from core.errors import ConfigError, DataError, DimensionMismatch, SingleClass
from core.skeleton import AgeGroup

logger = logging.getLogger(__name__)

DECISION_THRESHOLD = 0.5


class ClassifierKind(Enum):
    """
    سه روش طبقه‌بندی مقایسه‌شده
    """
    SVM = "svm"
    RANDOM_FOREST = "random_forest"
    DEEP_NET = "deep_net"

    @property
    def title(self) -> str:
        return {
            ClassifierKind.SVM: "SVM",
            ClassifierKind.RANDOM_FOREST: "Random Forest",
            ClassifierKind.DEEP_NET: "Deep Learning",
        }[self]

    @classmethod
    def parse(cls, value: Union[str, "ClassifierKind"]) -> "ClassifierKind":
        if isinstance(value, cls):
            return value
        key = str(value).strip().lower().replace("-", "_").replace(" ", "_")
        aliases = {"svm": cls.SVM, "randomforest": cls.RANDOM_FOREST, "rf": cls.RANDOM_FOREST,
                   "deepnet": cls.DEEP_NET, "dnn": cls.DEEP_NET}
        for kind in cls:
            if key in (kind.value, kind.name.lower()):
                return kind
        if key.replace("_", "") in aliases:
            return aliases[key.replace("_", "")]
        raise ConfigError(f"Unknown classifier: {value!r}")


@dataclass(frozen=True, eq=False)
class TrainingSet:
    """
    ردیف‌های آموزشی: ماتریس n×d و برچسب‌های ۰/۱
    """
    x: np.ndarray
    y: np.ndarray

    def __post_init__(self):
        x = np.asarray(self.x, dtype=float)
        y = np.asarray(self.y).astype(int)
        if x.ndim != 2:
            raise DimensionMismatch(f"training rows must form a 2-D matrix, got shape {x.shape}")
        if len(x) != len(y):
            raise DimensionMismatch(f"{len(x)} rows but {len(y)} labels")
        if np.any((y != 0) & (y != 1)):
            raise ConfigError("labels must be 0 or 1")
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", y)

    @property
    def d(self) -> int:
        return self.x.shape[1]

    @property
    def n(self) -> int:
        return len(self.x)

    @classmethod
    def from_rows(cls, rows: Sequence[Tuple[Sequence[float], int]]) -> "TrainingSet":
        if not rows:
            return cls(np.empty((0, 0)), np.empty(0, dtype=int))
        d = len(rows[0][0])
        for n, (vector, _) in enumerate(rows):
            if len(vector) != d:
                raise DimensionMismatch(f"row {n} has {len(vector)} values, expected {d}")
        return cls(np.array([r[0] for r in rows], dtype=float), np.array([int(r[1]) for r in rows]))

    @classmethod
    def from_vectors(cls, vectors: Sequence) -> "TrainingSet":
        """
        ساخت از فهرست MotionVector ها
        """
        return cls.from_rows([(v.values, int(v.label)) for v in vectors])

    def require_trainable(self) -> None:
        if self.n < 2 or len(np.unique(self.y)) < 2:
            raise SingleClass(f"training needs at least 2 rows from both classes (got {self.n} rows, "
                              f"labels {sorted(set(self.y.tolist()))})")
        if not np.isfinite(self.x).all():
            raise DataError("training rows contain non-finite values")


@dataclass(frozen=True, eq=False)
class TrainedModel:
    """
    مدل آموزش‌دیده: نوع، ابعاد ورودی، پیکربندی و پارامترها
    """
    kind: ClassifierKind
    d: int
    config: Dict[str, Any]
    parameters: Dict[str, Any]
    metadata: Dict[str, Any] = field(default_factory=dict)


@dataclass(frozen=True)
class Prediction:
    label: AgeGroup
    score: float


def check_input(model: TrainedModel, x) -> np.ndarray:
    """
    تبدیل ورودی به ماتریس و رد ابعاد نادرست
    """
    x = np.asarray(x, dtype=float)
    if x.ndim == 1:
        x = x[np.newaxis, :]
    if x.ndim != 2 or x.shape[1] != model.d:
        raise DimensionMismatch(f"{model.kind.title} model expects {model.d} values, got {x.shape[-1]}")
    return x


def fit_scaler(x: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """
    میانگین و انحراف معیار ستون‌ها (انحراف صفر ← ۱)
    """
    mean = x.mean(axis=0)
    std = x.std(axis=0)
    return mean, np.where(std > 0, std, 1.0)


def apply_scaler(x: np.ndarray, parameters: Dict[str, Any]) -> np.ndarray:
    if "scale_mean" not in parameters:
        return x
    return (x - parameters["scale_mean"]) / parameters["scale_std"]


def labels_from_scores(scores: np.ndarray) -> np.ndarray:
    return (np.asarray(scores) >= DECISION_THRESHOLD).astype(int)
