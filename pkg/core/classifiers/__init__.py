"""
قرارداد مشترک آموزش و پیش‌بینی برای سه طبقه‌بند
"""

import dataclasses
from typing import Any, Mapping, Optional, Tuple, Union

import numpy as np

from core.classifiers.base import (
    ClassifierKind,
    Prediction,
    TrainedModel,
    TrainingSet,
    labels_from_scores,
)
from core.classifiers.deepnet import DeepNetConfig, deepnet_scores, train_deepnet
from core.classifiers.forest import ForestConfig, forest_scores, train_random_forest
from core.classifiers.persistence import load_model, save_model
from core.classifiers.svm import SvmConfig, svm_scores, train_svm
from core.errors import ConfigError
from core.skeleton import AgeGroup

ClassifierConfig = Union[SvmConfig, ForestConfig, DeepNetConfig]

CONFIG_TYPES = {
    ClassifierKind.SVM: SvmConfig,
    ClassifierKind.RANDOM_FOREST: ForestConfig,
    ClassifierKind.DEEP_NET: DeepNetConfig,
}
_TRAINERS = {
    ClassifierKind.SVM: train_svm,
    ClassifierKind.RANDOM_FOREST: train_random_forest,
    ClassifierKind.DEEP_NET: train_deepnet,
}
_SCORERS = {
    ClassifierKind.SVM: svm_scores,
    ClassifierKind.RANDOM_FOREST: forest_scores,
    ClassifierKind.DEEP_NET: deepnet_scores,
}


def config_from_dict(kind: Union[str, ClassifierKind], values: Optional[Mapping[str, Any]] = None,
                     seed: Optional[int] = None) -> ClassifierConfig:
    """
    ساخت پیکربندی طبقه‌بند از دیکشنری؛ کلید ناشناخته ConfigError می‌دهد
    """
    config_type = CONFIG_TYPES[ClassifierKind.parse(kind)]
    values = dict(values or {})
    known = {f.name for f in dataclasses.fields(config_type)}
    unknown = sorted(set(values) - known)
    if unknown:
        raise ConfigError(f"unknown {ClassifierKind.parse(kind).value} settings: {unknown}")
    if seed is not None:
        values["seed"] = int(seed)
    try:
        cfg = config_type(**values)
    except (TypeError, ValueError) as e:
        raise ConfigError(f"invalid {ClassifierKind.parse(kind).value} settings: {e}") from e
    cfg.validate()
    return cfg


def train(kind: Union[str, ClassifierKind], data: TrainingSet,
          cfg: Optional[ClassifierConfig] = None) -> TrainedModel:
    kind = ClassifierKind.parse(kind)
    if cfg is None:
        cfg = CONFIG_TYPES[kind]()
    if not isinstance(cfg, CONFIG_TYPES[kind]):
        raise ConfigError(f"{type(cfg).__name__} cannot configure {kind.title}")
    return _TRAINERS[kind](data, cfg)


def decision_scores(model: TrainedModel, x) -> np.ndarray:
    """
    امتیاز [0, 1] برای هر ردیف؛ ابعاد نادرست DimensionMismatch می‌دهد
    """
    return _SCORERS[model.kind](model, x)


def predict_many(model: TrainedModel, x) -> Tuple[np.ndarray, np.ndarray]:
    scores = decision_scores(model, x)
    return labels_from_scores(scores), scores


def predict(model: TrainedModel, x) -> Prediction:
    x = np.asarray(x, dtype=float)
    if x.ndim != 1:
        x = x.reshape(-1)
    labels, scores = predict_many(model, x)
    return Prediction(AgeGroup(int(labels[0])), float(scores[0]))


__all__ = [
    "ClassifierKind",
    "ClassifierConfig",
    "CONFIG_TYPES",
    "DeepNetConfig",
    "ForestConfig",
    "Prediction",
    "SvmConfig",
    "TrainedModel",
    "TrainingSet",
    "config_from_dict",
    "decision_scores",
    "load_model",
    "predict",
    "predict_many",
    "save_model",
    "train",
]
