"""
شبکه عصبی کاملاً متصل: لایه‌های پنهان ReLU، یک خروجی sigmoid،
تابع هزینه cross-entropy دودویی و گرادیان کاهشی mini-batch

پارامترها در یک دیکشنری تخت نگه داشته می‌شوند: W0, b0, W1, b1, ...
"""

import logging
from dataclasses import asdict, dataclass
from typing import Dict, List, Sequence, Tuple

import numpy as np
from scipy.special import expit

from core.classifiers.base import (
    ClassifierKind,
    TrainedModel,
    TrainingSet,
    apply_scaler,
    check_input,
    fit_scaler,
)
from core.errors import ConfigError, NonFiniteLoss
from core.seeding import derive_seed

logger = logging.getLogger(__name__)

Params = Dict[str, np.ndarray]


@dataclass(frozen=True)
class DeepNetConfig:
    hidden_layers: Tuple[int, ...] = (64, 32)
    lr: float = 0.05
    epochs: int = 50
    batch_size: int = 32
    scale_inputs: bool = True
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "hidden_layers", tuple(int(w) for w in self.hidden_layers))

    def validate(self) -> None:
        if any(w < 1 for w in self.hidden_layers):
            raise ConfigError("deep_net.hidden_layers widths must be at least 1")
        if self.lr <= 0:
            raise ConfigError("deep_net.lr must be positive")
        if self.epochs < 0 or self.batch_size < 1:
            raise ConfigError("deep_net.epochs must be >= 0 and batch_size >= 1")


def n_layers(params: Params) -> int:
    return len(params) // 2


def init_params(d: int, hidden_layers: Sequence[int], seed: int) -> Params:
    """
    مقداردهی He: W ~ N(0, 2/fan_in)، بایاس صفر
    """
    rng = np.random.default_rng(seed)
    widths = [d] + list(hidden_layers) + [1]
    params = {}
    for layer, (fan_in, fan_out) in enumerate(zip(widths[:-1], widths[1:])):
        params[f"W{layer}"] = rng.normal(0.0, np.sqrt(2.0 / fan_in), size=(fan_in, fan_out))
        params[f"b{layer}"] = np.zeros(fan_out)
    return params


def forward(params: Params, x: np.ndarray) -> Tuple[np.ndarray, List[np.ndarray]]:
    """
    محاسبه logit خروجی؛ فعال‌سازی‌های میانی برای backprop برگردانده می‌شوند
    """
    activations = [x]
    a = x
    last = n_layers(params) - 1
    for layer in range(last):
        a = np.maximum(a @ params[f"W{layer}"] + params[f"b{layer}"], 0.0)
        activations.append(a)
    logits = (a @ params[f"W{last}"] + params[f"b{last}"])[:, 0]
    return logits, activations


def bce_loss(params: Params, x: np.ndarray, y: np.ndarray) -> float:
    logits, _ = forward(params, x)
    return float(np.mean(np.logaddexp(0.0, logits) - y * logits))


def loss_and_gradients(params: Params, x: np.ndarray, y: np.ndarray) -> Tuple[float, Params]:
    """
    مقدار هزینه و گرادیان تحلیلی همه پارامترها
    """
    logits, activations = forward(params, x)
    loss = float(np.mean(np.logaddexp(0.0, logits) - y * logits))
    grads = {}
    delta = ((expit(logits) - y) / len(y))[:, None]
    for layer in range(n_layers(params) - 1, -1, -1):
        a = activations[layer]
        grads[f"W{layer}"] = a.T @ delta
        grads[f"b{layer}"] = delta.sum(axis=0)
        if layer > 0:
            delta = (delta @ params[f"W{layer}"].T) * (a > 0)
    return loss, grads


def train_deepnet(data: TrainingSet, cfg: DeepNetConfig = DeepNetConfig()) -> TrainedModel:
    """
    آموزش شبکه؛ loss_history شامل هزینه اولیه و هزینه کل داده پس از هر epoch است
    """
    cfg.validate()
    data.require_trainable()
    x = data.x
    scaler = {}
    if cfg.scale_inputs:
        mean, std = fit_scaler(x)
        scaler = {"scale_mean": mean, "scale_std": std}
        x = apply_scaler(x, scaler)
    y = data.y.astype(float)

    params = init_params(data.d, cfg.hidden_layers, cfg.seed)
    rng = np.random.default_rng(derive_seed(cfg.seed, "shuffle"))
    history = [bce_loss(params, x, y)]
    for epoch in range(cfg.epochs):
        order = rng.permutation(data.n)
        for start in range(0, data.n, cfg.batch_size):
            batch = order[start:start + cfg.batch_size]
            _, grads = loss_and_gradients(params, x[batch], y[batch])
            for name, grad in grads.items():
                params[name] -= cfg.lr * grad
        loss = bce_loss(params, x, y)
        if not np.isfinite(loss):
            raise NonFiniteLoss(f"training loss diverged at epoch {epoch + 1} (lr={cfg.lr})")
        history.append(loss)
        logger.debug(f"epoch {epoch + 1}/{cfg.epochs}: loss {loss:.5f}")

    metadata = {
        "n_train": data.n,
        "final_loss": history[-1],
        "loss_history": history,
    }
    logger.debug(f"Deep net trained on {data.n} rows, final loss {history[-1]:.5f}")
    return TrainedModel(ClassifierKind.DEEP_NET, data.d, asdict(cfg), {**scaler, **params}, metadata)


def network_params(model: TrainedModel) -> Params:
    return {k: v for k, v in model.parameters.items() if not k.startswith("scale_")}


def deepnet_scores(model: TrainedModel, x) -> np.ndarray:
    x = apply_scaler(check_input(model, x), model.parameters)
    logits, _ = forward(network_params(model), x)
    return expit(logits)
