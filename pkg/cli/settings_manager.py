import copy
import json
import logging
import os
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any, Dict, Optional, Tuple

from core.classifiers import CONFIG_TYPES, ClassifierConfig, ClassifierKind, config_from_dict
from core.errors import ConfigError, InvalidRecording
from core.representation import RepresentationOptions
from core.skeleton import MovementKind

logger = logging.getLogger(__name__)

DEFAULT_SETTINGS: Dict[str, Any] = {
    "data_dir": None,
    "output_dir": "motionkit_out",
    "seed": None,
    "movements": [m.value for m in MovementKind],
    "classifiers": [c.value for c in ClassifierKind],
    "standardize_features": False,
    "representation": {
        "include_centroid": False,
        "max_iters": 300,
        "smoothing_cutoff_hz": None,
        "max_family_size": None,
    },
    "evaluation": {
        "k_folds": 10,
        "workers": 1,
    },
    "svm": {
        "kernel": "rbf",
        "C": 1.0,
        "gamma": None,
        "tol": 1e-3,
        "max_passes": 5,
        "max_iter": 200,
        "scale_inputs": True,
    },
    "random_forest": {
        "n_trees": 100,
        "max_depth": None,
        "min_leaf": 1,
        "features_per_split": None,
        "bootstrap": True,
        "workers": 1,
    },
    "deep_net": {
        "hidden_layers": [64, 32],
        "lr": 0.05,
        "epochs": 50,
        "batch_size": 32,
        "scale_inputs": True,
    },
}


@dataclass(frozen=True)
class PipelineConfig:
    """
    پیکربندی اعتبارسنجی‌شده و تغییرناپذیر یک اجرای کامل
    """
    data_dir: Path
    output_dir: Path
    seed: int
    movements: Tuple[MovementKind, ...]
    classifiers: Tuple[ClassifierKind, ...]
    representation: RepresentationOptions
    k_folds: int = 10
    workers: int = 1
    classifier_configs: Dict[ClassifierKind, ClassifierConfig] = field(default_factory=dict)

    def to_dict(self) -> Dict[str, Any]:
        """
        همان شکل فایل تنظیمات، برای بازتولید اجرا
        """
        options = asdict(self.representation)
        document = {
            "data_dir": str(self.data_dir),
            "output_dir": str(self.output_dir),
            "seed": self.seed,
            "movements": [m.value for m in self.movements],
            "classifiers": [c.value for c in self.classifiers],
            "standardize_features": options.pop("standardize_features"),
            "representation": options,
            "evaluation": {"k_folds": self.k_folds, "workers": self.workers},
        }
        for kind, cfg in self.classifier_configs.items():
            block = asdict(cfg)
            block.pop("seed")
            if "hidden_layers" in block:
                block["hidden_layers"] = list(block["hidden_layers"])
            document[kind.value] = block
        return document


class SettingsManager:
    """مدیریت فایل تنظیمات JSON: ادغام با مقادیر پیش‌فرض و اعتبارسنجی"""

    def __init__(self, settings_file: Optional[str] = None):
        self.settings_file = settings_file
        self.default_settings = copy.deepcopy(DEFAULT_SETTINGS)
        self.settings = self.load_settings()

    def load_settings(self) -> Dict[str, Any]:
        """بارگذاری تنظیمات از فایل"""
        if self.settings_file is None:
            return copy.deepcopy(self.default_settings)
        if not os.path.exists(self.settings_file):
            raise ConfigError(f"config file not found: {self.settings_file}")
        try:
            with open(self.settings_file, 'r', encoding='utf-8') as f:
                loaded_settings = json.load(f)
        except (OSError, json.JSONDecodeError) as e:
            raise ConfigError(f"cannot parse config file {self.settings_file}: {e}") from e
        if not isinstance(loaded_settings, dict):
            raise ConfigError("config file must contain a JSON object")
        unknown = sorted(set(loaded_settings) - set(self.default_settings))
        if unknown:
            raise ConfigError(f"unknown config keys: {unknown}")
        logger.info(f"Loaded settings from {self.settings_file}")
        return self._merge_settings(self.default_settings, loaded_settings)

    def save_settings(self, path: Optional[str] = None, settings: Optional[Dict[str, Any]] = None) -> Path:
        """ذخیره تنظیمات در فایل"""
        path = Path(path or self.settings_file)
        if settings is None:
            settings = self.settings
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, 'w', encoding='utf-8') as f:
            json.dump(settings, f, ensure_ascii=False, indent=2)
        return path

    def _merge_settings(self, default: Dict[str, Any], loaded: Dict[str, Any]) -> Dict[str, Any]:
        """ادغام تنظیمات بارگذاری شده با تنظیمات پیش‌فرض"""
        merged = copy.deepcopy(default)
        for key, value in loaded.items():
            if key in merged and isinstance(merged[key], dict) and isinstance(value, dict):
                merged[key] = self._merge_settings(merged[key], value)
            else:
                merged[key] = value
        return merged

    def get_setting(self, category: str, key: Optional[str] = None, default: Any = None) -> Any:
        """دریافت یک تنظیم خاص"""
        value = self.settings.get(category, default)
        if key is None:
            return value
        return value.get(key, default) if isinstance(value, dict) else default

    def set_setting(self, category: str, key: Optional[str], value: Any) -> None:
        """تنظیم یک مقدار خاص (فقط در حافظه)"""
        if key is None:
            self.settings[category] = value
            return
        self.settings.setdefault(category, {})[key] = value

    def apply_overrides(self, seed: Optional[int] = None, data_dir: Optional[str] = None,
                        output_dir: Optional[str] = None, workers: Optional[int] = None) -> None:
        """اعمال آرگومان‌های خط فرمان روی تنظیمات فایل"""
        if seed is not None:
            self.set_setting("seed", None, seed)
        if data_dir is not None:
            self.set_setting("data_dir", None, data_dir)
        if output_dir is not None:
            self.set_setting("output_dir", None, output_dir)
        if workers is not None:
            self.set_setting("evaluation", "workers", workers)

    def pipeline_config(self) -> PipelineConfig:
        """ساخت PipelineConfig و رد مقادیر نامعتبر با ConfigError"""
        s = self.settings
        seed = s.get("seed")
        if seed is None or isinstance(seed, bool) or not isinstance(seed, int):
            raise ConfigError("config must set an integer 'seed'")
        if not s.get("data_dir"):
            raise ConfigError("config must set 'data_dir'")
        try:
            movements = tuple(MovementKind.parse(m) for m in _as_list(s["movements"], "movements"))
        except InvalidRecording as e:
            raise ConfigError(str(e)) from e
        classifiers = tuple(ClassifierKind.parse(c) for c in _as_list(s["classifiers"], "classifiers"))
        if not movements or not classifiers:
            raise ConfigError("'movements' and 'classifiers' must not be empty")

        representation = _block(s, "representation")
        max_iters = representation["max_iters"]
        cutoff = representation["smoothing_cutoff_hz"]
        family = representation["max_family_size"]
        if not isinstance(max_iters, int) or max_iters < 1:
            raise ConfigError("representation.max_iters must be a positive integer")
        if cutoff is not None and (not isinstance(cutoff, (int, float)) or cutoff <= 0):
            raise ConfigError("representation.smoothing_cutoff_hz must be positive or null")
        if family is not None and (not isinstance(family, int) or family < 1):
            raise ConfigError("representation.max_family_size must be a positive integer or null")
        options = RepresentationOptions(
            standardize_features=bool(s["standardize_features"]),
            include_centroid=bool(representation["include_centroid"]),
            max_iters=max_iters,
            smoothing_cutoff_hz=float(cutoff) if cutoff is not None else None,
            max_family_size=family,
        )

        evaluation = _block(s, "evaluation")
        k_folds, workers = evaluation["k_folds"], evaluation["workers"]
        if not isinstance(k_folds, int) or k_folds < 2:
            raise ConfigError("evaluation.k_folds must be an integer >= 2")
        if not isinstance(workers, int) or workers < 1:
            raise ConfigError("evaluation.workers must be a positive integer")

        classifier_configs = {
            kind: config_from_dict(kind, s.get(kind.value) or {}, seed=seed) for kind in CONFIG_TYPES
        }
        return PipelineConfig(
            data_dir=Path(s["data_dir"]),
            output_dir=Path(s["output_dir"] or DEFAULT_SETTINGS["output_dir"]),
            seed=seed,
            movements=movements,
            classifiers=classifiers,
            representation=options,
            k_folds=k_folds,
            workers=workers,
            classifier_configs=classifier_configs,
        )


def _as_list(value: Any, name: str) -> list:
    if not isinstance(value, (list, tuple)):
        raise ConfigError(f"'{name}' must be a list")
    return list(value)


def _block(settings: Dict[str, Any], name: str) -> Dict[str, Any]:
    block = settings.get(name)
    if not isinstance(block, dict):
        raise ConfigError(f"'{name}' must be an object")
    unknown = sorted(set(block) - set(DEFAULT_SETTINGS[name]))
    if unknown:
        raise ConfigError(f"unknown {name} settings: {unknown}")
    return block
