"""
ذخیره و بازیابی مدل‌های آموزش‌دیده در قالب JSON

آرایه‌های numpy به شکل {"__ndarray__": [...], "dtype": ..., "shape": [...]}
نوشته می‌شوند؛ json اعداد اعشاری را با repr می‌نویسد، پس بازیابی بیت به بیت
دقیق است.
"""

import json
import logging
import os
from pathlib import Path
from typing import Any, Union

import numpy as np

from core.classifiers.base import ClassifierKind, TrainedModel
from core.errors import ConfigError

logger = logging.getLogger(__name__)

MODEL_FORMAT = "motionkit-model"
MODEL_VERSION = 1


def encode_value(value: Any) -> Any:
    if isinstance(value, np.ndarray):
        return {"__ndarray__": value.tolist(), "dtype": str(value.dtype), "shape": list(value.shape)}
    if isinstance(value, dict):
        return {str(k): encode_value(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [encode_value(v) for v in value]
    if isinstance(value, np.generic):
        return value.item()
    return value


def decode_value(value: Any) -> Any:
    if isinstance(value, dict):
        if "__ndarray__" in value:
            return np.array(value["__ndarray__"], dtype=value["dtype"]).reshape(value["shape"])
        return {k: decode_value(v) for k, v in value.items()}
    if isinstance(value, list):
        return [decode_value(v) for v in value]
    return value


def model_to_document(model: TrainedModel) -> dict:
    return {
        "format": MODEL_FORMAT,
        "version": MODEL_VERSION,
        "kind": model.kind.value,
        "d": model.d,
        "config": encode_value(model.config),
        "parameters": encode_value(model.parameters),
        "metadata": encode_value(model.metadata),
    }


def model_from_document(document: dict) -> TrainedModel:
    if document.get("format") != MODEL_FORMAT:
        raise ConfigError("not a motionkit model file")
    if document.get("version") != MODEL_VERSION:
        raise ConfigError(f"unsupported model version: {document.get('version')}")
    return TrainedModel(
        ClassifierKind.parse(document["kind"]),
        int(document["d"]),
        decode_value(document["config"]),
        decode_value(document["parameters"]),
        decode_value(document.get("metadata", {})),
    )


def save_model(model: TrainedModel, path: Union[str, os.PathLike]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as f:
        json.dump(model_to_document(model), f)
    logger.info(f"Saved {model.kind.title} model (d={model.d}) to {path}")
    return path


def load_model(path: Union[str, os.PathLike]) -> TrainedModel:
    path = Path(path)
    try:
        with open(path, "r", encoding="utf-8") as f:
            document = json.load(f)
    except (OSError, json.JSONDecodeError) as e:
        raise ConfigError(f"cannot read model file {path}: {e}") from e
    return model_from_document(document)
