"""
ماشین بردار پشتیبان با حاشیه نرم، آموزش با SMO (بهینه‌سازی کمینه ترتیبی)

برچسب‌های ۰/۱ داخل حل‌کننده به ۱-/۱+ تبدیل می‌شوند. امتیاز خروجی
sigmoid(margin) است؛ بنابراین margin صفر دقیقاً امتیاز ۰.۵ می‌دهد.
"""

import logging
from dataclasses import asdict, dataclass
from typing import Optional

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
from core.errors import ConfigError

logger = logging.getLogger(__name__)

KERNELS = ("linear", "rbf")
FULL_KERNEL_LIMIT = 4000
ALPHA_EPS = 1e-12


@dataclass(frozen=True)
class SvmConfig:
    kernel: str = "rbf"
    C: float = 1.0
    gamma: Optional[float] = None
    tol: float = 1e-3
    max_passes: int = 5
    max_iter: int = 200
    scale_inputs: bool = True
    seed: int = 0

    def validate(self) -> None:
        if self.kernel not in KERNELS:
            raise ConfigError(f"svm.kernel must be one of {KERNELS}, got {self.kernel!r}")
        if self.C <= 0 or self.tol <= 0:
            raise ConfigError("svm.C and svm.tol must be positive")
        if self.gamma is not None and self.gamma <= 0:
            raise ConfigError("svm.gamma must be positive or null")
        if self.max_passes < 1 or self.max_iter < 1:
            raise ConfigError("svm.max_passes and svm.max_iter must be at least 1")


def kernel_matrix(a: np.ndarray, b: np.ndarray, kernel: str, gamma: float) -> np.ndarray:
    """
    ماتریس هسته بین ردیف‌های a و b
    """
    a = np.atleast_2d(a)
    b = np.atleast_2d(b)
    if kernel == "linear":
        return a @ b.T
    squared = (a * a).sum(axis=1)[:, None] + (b * b).sum(axis=1)[None, :] - 2.0 * (a @ b.T)
    return np.exp(-gamma * np.maximum(squared, 0.0))


class SmoSolver:
    """
    حل‌کننده SMO با کش خطا (E_i = f(x_i) - y_i)

    توقف پس از یک دور کامل بدون هیچ گام موفق؛ train_svm بیشینه تخطی KKT
    را با tol مقایسه می‌کند.
    """

    def __init__(self, x: np.ndarray, y: np.ndarray, kernel: str, gamma: float, C: float,
                 tol: float, rng: np.random.Generator):
        self.x = x
        self.y = y.astype(float)
        self.kernel = kernel
        self.gamma = gamma
        self.C = C
        self.tol = tol
        self.rng = rng
        self.n = len(x)
        self.alpha = np.zeros(self.n)
        self.b = 0.0
        self.errors = -self.y.copy()
        self._full = kernel_matrix(x, x, kernel, gamma) if self.n <= FULL_KERNEL_LIMIT else None

    def kernel_row(self, i: int) -> np.ndarray:
        if self._full is not None:
            return self._full[i]
        return kernel_matrix(self.x[i], self.x, self.kernel, self.gamma)[0]

    def violates_kkt(self, i: int) -> bool:
        r = self.y[i] * self.errors[i]
        return (r < -self.tol and self.alpha[i] < self.C) or (r > self.tol and self.alpha[i] > 0)

    def max_kkt_violation(self) -> float:
        r = self.y * self.errors
        at_lower = self.alpha <= ALPHA_EPS
        at_upper = self.alpha >= self.C - ALPHA_EPS
        violation = np.where(at_lower, np.maximum(0.0, -r),
                             np.where(at_upper, np.maximum(0.0, r), np.abs(r)))
        return float(violation.max()) if self.n else 0.0

    def take_step(self, i: int, j: int) -> bool:
        if i == j:
            return False
        alpha_i, alpha_j = self.alpha[i], self.alpha[j]
        y_i, y_j = self.y[i], self.y[j]
        e_i, e_j = self.errors[i], self.errors[j]
        if y_i != y_j:
            low, high = max(0.0, alpha_j - alpha_i), min(self.C, self.C + alpha_j - alpha_i)
        else:
            low, high = max(0.0, alpha_i + alpha_j - self.C), min(self.C, alpha_i + alpha_j)
        if high - low <= ALPHA_EPS:
            return False

        row_i = self.kernel_row(i)
        row_j = self.kernel_row(j)
        eta = row_i[i] + row_j[j] - 2.0 * row_i[j]
        if eta <= ALPHA_EPS:
            return False

        new_j = float(np.clip(alpha_j + y_j * (e_i - e_j) / eta, low, high))
        if abs(new_j - alpha_j) < ALPHA_EPS * (new_j + alpha_j + ALPHA_EPS):
            return False
        new_i = alpha_i + y_i * y_j * (alpha_j - new_j)
        new_i = float(np.clip(new_i, 0.0, self.C))

        delta_i = y_i * (new_i - alpha_i)
        delta_j = y_j * (new_j - alpha_j)
        b1 = self.b - e_i - delta_i * row_i[i] - delta_j * row_i[j]
        b2 = self.b - e_j - delta_i * row_i[j] - delta_j * row_j[j]
        if 0.0 < new_i < self.C:
            new_b = b1
        elif 0.0 < new_j < self.C:
            new_b = b2
        else:
            new_b = (b1 + b2) / 2.0

        self.errors += delta_i * row_i + delta_j * row_j + (new_b - self.b)
        self.alpha[i] = new_i
        self.alpha[j] = new_j
        self.b = new_b
        return True

    def non_bound(self) -> np.ndarray:
        return np.flatnonzero((self.alpha > ALPHA_EPS) & (self.alpha < self.C - ALPHA_EPS))

    def rotated(self, indices: np.ndarray) -> np.ndarray:
        if len(indices) == 0:
            return indices
        return np.roll(indices, -int(self.rng.integers(len(indices))))

    def second_choice(self, i: int, non_bound: np.ndarray) -> int:
        pool = non_bound if len(non_bound) else np.arange(self.n)
        return int(pool[np.argmax(np.abs(self.errors[pool] - self.errors[i]))])

    def examine(self, i: int) -> bool:
        """
        سلسله‌مراتب انتخاب j: بیشینه |E_i - E_j|، سپس همه ضرایب غیرمرزی،
        سپس همه ضرایب؛ هر دو حلقه از نقطه شروع تصادفی
        """
        if not self.violates_kkt(i):
            return False
        non_bound = self.non_bound()
        if self.take_step(i, self.second_choice(i, non_bound)):
            return True
        for j in self.rotated(non_bound):
            if self.take_step(i, int(j)):
                return True
        for j in self.rotated(np.arange(self.n)):
            if self.take_step(i, int(j)):
                return True
        return False

    def solve(self, max_passes: int, max_iter: int) -> int:
        """
        دور کامل روی همه ضرایب و دورهای غیرمرزی به تناوب؛ توقف وقتی یک
        دور کامل هیچ تغییری نداشته باشد یا max_iter دور کامل انجام شود.
        هر فاز غیرمرزی حداکثر max_passes دور دارد.

        تعداد دورهای کامل را برمی‌گرداند.
        """
        full_sweeps = 0
        examine_all = True
        inner = 0
        while full_sweeps < max_iter:
            if examine_all:
                changed = sum(1 for i in range(self.n) if self.examine(i))
                full_sweeps += 1
                if changed == 0:
                    break
                examine_all = False
                inner = 0
            else:
                changed = sum(1 for i in self.non_bound() if self.examine(int(i)))
                inner += 1
                if changed == 0 or inner >= max_passes:
                    examine_all = True
        return full_sweeps


def train_svm(data: TrainingSet, cfg: SvmConfig = SvmConfig()) -> TrainedModel:
    """
    آموزش SVM باینری؛ فقط بردارهای پشتیبان (α > 0) در مدل نگه داشته می‌شوند
    """
    cfg.validate()
    data.require_trainable()
    x = data.x
    parameters = {}
    if cfg.scale_inputs:
        mean, std = fit_scaler(x)
        parameters["scale_mean"] = mean
        parameters["scale_std"] = std
        x = apply_scaler(x, parameters)
    gamma = cfg.gamma if cfg.gamma is not None else 1.0 / data.d
    y = np.where(data.y == 1, 1.0, -1.0)

    solver = SmoSolver(x, y, cfg.kernel, gamma, cfg.C, cfg.tol, np.random.default_rng(cfg.seed))
    passes = solver.solve(cfg.max_passes, cfg.max_iter)
    violation = solver.max_kkt_violation()
    converged = violation <= cfg.tol
    if not converged:
        logger.warning(f"SMO stopped after {passes} passes with KKT violation {violation:.3g} (tol {cfg.tol})")

    support = np.flatnonzero(solver.alpha > 0)
    parameters.update({
        "support_vectors": x[support].copy(),
        "alpha": solver.alpha[support].copy(),
        "support_labels": y[support].copy(),
        "b": float(solver.b),
        "gamma": float(gamma),
        "kernel": cfg.kernel,
    })
    metadata = {
        "n_support": int(len(support)),
        "passes": int(passes),
        "converged": bool(converged),
        "max_kkt_violation": violation,
        "n_train": data.n,
    }
    logger.debug(f"SVM trained on {data.n} rows: {len(support)} support vectors, {passes} passes")
    return TrainedModel(ClassifierKind.SVM, data.d, asdict(cfg), parameters, metadata)


def svm_margin(model: TrainedModel, x) -> np.ndarray:
    """
    مقدار تابع تصمیم f(x) = Σ α_i y_i K(x_i, x) + b
    """
    p = model.parameters
    x = apply_scaler(check_input(model, x), p)
    if len(p["alpha"]) == 0:
        return np.full(len(x), p["b"])
    k = kernel_matrix(x, p["support_vectors"], p["kernel"], p["gamma"])
    return k @ (p["alpha"] * p["support_labels"]) + p["b"]


def svm_scores(model: TrainedModel, x) -> np.ndarray:
    return expit(svm_margin(model, x))
