"""
جنگل تصادفی: درخت‌های CART با ناخالصی Gini روی نمونه‌های bootstrap

هر درخت seed مخصوص خود را دارد تا آموزش موازی درخت‌ها همان نتیجه آموزش
ترتیبی را بدهد. درخت‌ها به صورت آرایه‌های تخت گره ذخیره می‌شوند:
    feature (‎-1 برای برگ)، threshold، left، right، value (سهم کلاس ۱)
"""

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass
from typing import Dict, List, Optional, Tuple

import numpy as np

from core.classifiers.base import ClassifierKind, TrainedModel, TrainingSet, check_input
from core.errors import ConfigError

logger = logging.getLogger(__name__)

Tree = Dict[str, np.ndarray]


@dataclass(frozen=True)
class ForestConfig:
    n_trees: int = 100
    max_depth: Optional[int] = None
    min_leaf: int = 1
    features_per_split: Optional[int] = None
    bootstrap: bool = True
    workers: int = 1
    seed: int = 0

    def validate(self) -> None:
        if self.n_trees < 1 or self.min_leaf < 1 or self.workers < 1:
            raise ConfigError("random_forest.n_trees, min_leaf and workers must be at least 1")
        if self.max_depth is not None and self.max_depth < 0:
            raise ConfigError("random_forest.max_depth must be non-negative or null")
        if self.features_per_split is not None and self.features_per_split < 1:
            raise ConfigError("random_forest.features_per_split must be at least 1 or null")


def gini(positives: np.ndarray, totals: np.ndarray) -> np.ndarray:
    """
    ناخالصی Gini دوکلاسه: 2p(1-p)
    """
    p = positives / totals
    return 2.0 * p * (1.0 - p)


def tree_seeds(seed: int, n_trees: int) -> np.ndarray:
    return np.random.default_rng(seed).integers(0, np.iinfo(np.int64).max, size=n_trees)


def draw_bootstrap(rng: np.random.Generator, n: int, bootstrap: bool = True) -> np.ndarray:
    """
    اندیس ردیف‌های آموزشی یک درخت (نمونه‌گیری با جایگذاری)
    """
    if not bootstrap:
        return np.arange(n)
    return rng.integers(0, n, size=n)


def best_split(x: np.ndarray, y: np.ndarray, features: np.ndarray, min_leaf: int) -> Optional[Tuple[int, float]]:
    """
    بهترین تقسیم (ویژگی، آستانه) بین ویژگی‌های داده‌شده؛ None اگر هیچ
    تقسیمی ناخالصی را کم نکند
    """
    n = len(y)
    total = y.sum()
    parent = gini(np.array([total]), np.array([n]))[0]
    best_impurity = parent
    best = None
    left_n = np.arange(1, n)
    right_n = n - left_n
    for feature in features:
        order = np.argsort(x[:, feature], kind="stable")
        values = x[order, feature]
        left_pos = np.cumsum(y[order])[:-1]
        right_pos = total - left_pos
        valid = (values[1:] > values[:-1]) & (left_n >= min_leaf) & (right_n >= min_leaf)
        if not valid.any():
            continue
        weighted = (left_n * gini(left_pos, left_n) + right_n * gini(right_pos, right_n)) / n
        weighted = np.where(valid, weighted, np.inf)
        position = int(np.argmin(weighted))
        if weighted[position] < best_impurity - 1e-12:
            best_impurity = weighted[position]
            threshold = (values[position] + values[position + 1]) / 2.0
            if not values[position] <= threshold < values[position + 1]:
                threshold = values[position]
            best = (int(feature), float(threshold))
    return best


def grow_tree(
    x: np.ndarray,
    y: np.ndarray,
    rng: np.random.Generator,
    max_depth: Optional[int] = None,
    min_leaf: int = 1,
    features_per_split: Optional[int] = None,
) -> Tree:
    """
    رشد یک درخت CART فقط روی ردیف‌های داده‌شده
    """
    d = x.shape[1]
    m = min(d, features_per_split or math.ceil(math.sqrt(d)))
    feature, threshold, left, right, value = [], [], [], [], []

    def new_node(rows: np.ndarray) -> int:
        feature.append(-1)
        threshold.append(0.0)
        left.append(-1)
        right.append(-1)
        value.append(float(y[rows].mean()))
        return len(feature) - 1

    stack = [(new_node(np.arange(len(y))), np.arange(len(y)), 0)]
    while stack:
        node, rows, depth = stack.pop()
        labels = y[rows]
        if labels.min() == labels.max() or len(rows) < 2 * min_leaf:
            continue
        if max_depth is not None and depth >= max_depth:
            continue
        split = best_split(x[rows], labels, rng.choice(d, size=m, replace=False), min_leaf)
        if split is None:
            continue
        f, t = split
        goes_left = x[rows, f] <= t
        left_rows, right_rows = rows[goes_left], rows[~goes_left]
        feature[node], threshold[node] = f, t
        left[node] = new_node(left_rows)
        right[node] = new_node(right_rows)
        stack.append((right[node], right_rows, depth + 1))
        stack.append((left[node], left_rows, depth + 1))

    return {
        "feature": np.array(feature, dtype=np.int64),
        "threshold": np.array(threshold, dtype=float),
        "left": np.array(left, dtype=np.int64),
        "right": np.array(right, dtype=np.int64),
        "value": np.array(value, dtype=float),
    }


def leaf_values(tree: Tree, x: np.ndarray) -> np.ndarray:
    """
    سهم کلاس ۱ در برگی که هر ردیف به آن می‌رسد
    """
    node = np.zeros(len(x), dtype=np.int64)
    while True:
        f = tree["feature"][node]
        internal = np.flatnonzero(f >= 0)
        if internal.size == 0:
            return tree["value"][node]
        current = node[internal]
        goes_left = x[internal, f[internal]] <= tree["threshold"][current]
        node[internal] = np.where(goes_left, tree["left"][current], tree["right"][current])


def tree_votes(tree: Tree, x: np.ndarray) -> np.ndarray:
    """
    رأی درخت: برچسب اکثریت برگ؛ تساوی به کلاس ۰
    """
    return (leaf_values(tree, x) > 0.5).astype(int)


def _fit_one(data: TrainingSet, cfg: ForestConfig, seed: int) -> Tuple[Tree, np.ndarray]:
    rng = np.random.default_rng(seed)
    rows = draw_bootstrap(rng, data.n, cfg.bootstrap)
    tree = grow_tree(data.x[rows], data.y[rows], rng, cfg.max_depth, cfg.min_leaf, cfg.features_per_split)
    return tree, rows


def _oob_accuracy(trees: List[Tree], samples: List[np.ndarray], data: TrainingSet) -> float:
    votes = np.zeros(data.n)
    counts = np.zeros(data.n)
    for tree, rows in zip(trees, samples):
        out = np.ones(data.n, dtype=bool)
        out[rows] = False
        if out.any():
            votes[out] += tree_votes(tree, data.x[out])
            counts[out] += 1
    seen = counts > 0
    if not seen.any():
        return float("nan")
    predicted = (votes[seen] / counts[seen] >= 0.5).astype(int)
    return float((predicted == data.y[seen]).mean())


def train_random_forest(data: TrainingSet, cfg: ForestConfig = ForestConfig()) -> TrainedModel:
    """
    آموزش n_trees درخت؛ اگر workers > 1 درخت‌ها در thread های جدا ساخته می‌شوند
    """
    cfg.validate()
    data.require_trainable()
    seeds = tree_seeds(cfg.seed, cfg.n_trees)
    if cfg.workers > 1:
        with ThreadPoolExecutor(max_workers=cfg.workers) as pool:
            fitted = list(pool.map(lambda s: _fit_one(data, cfg, int(s)), seeds))
    else:
        fitted = [_fit_one(data, cfg, int(s)) for s in seeds]
    trees = [tree for tree, _ in fitted]
    samples = [rows for _, rows in fitted]
    oob = _oob_accuracy(trees, samples, data) if cfg.bootstrap else float("nan")
    metadata = {
        "n_train": data.n,
        "oob_accuracy": oob,
        "mean_tree_nodes": float(np.mean([len(t["feature"]) for t in trees])),
        "tree_seeds": [int(s) for s in seeds],
    }
    logger.debug(f"Random forest: {cfg.n_trees} trees on {data.n} rows, OOB accuracy {oob:.3f}")
    return TrainedModel(ClassifierKind.RANDOM_FOREST, data.d, asdict(cfg), {"trees": trees}, metadata)


def forest_scores(model: TrainedModel, x) -> np.ndarray:
    """
    سهم درخت‌هایی که به کلاس ۱ رأی می‌دهند
    """
    x = check_input(model, x)
    trees = model.parameters["trees"]
    votes = np.zeros(len(x))
    for tree in trees:
        votes += tree_votes(tree, x)
    return votes / len(trees)
