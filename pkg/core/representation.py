"""
نمایش حرکت با طول ثابت: خوشه‌بندی k-means روی بردارهای ویژگی فریم‌ها و
ساخت MotionVector (مراکز خوشه یا اعضای نزدیک به مرکز، به ترتیب زمانی)
"""

import logging
import math
import os
from dataclasses import dataclass
from pathlib import Path
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd

from core.classifiers.base import apply_scaler, fit_scaler
from core.errors import ConfigError, EmptyCluster, InvalidRecording, TooFewFrames
from core.features import FEATURE_LENGTH, encode_recording, stack_features
from core.seeding import derive_seed
from core.skeleton import (
    AgeGroup,
    MotionRecording,
    MovementKind,
    clean_recording,
    normalize_recording,
    smooth_recording,
)

logger = logging.getLogger(__name__)

DEFAULT_MAX_ITERS = 300
WCSS_TOLERANCE = 1e-9


def k_for_movement(m: MovementKind) -> int:
    """
    تعداد خوشه‌ها برای هر حرکت: ۵ برای برخاستن از صندلی، ۲ برای بقیه
    """
    return 5 if MovementKind.parse(m) is MovementKind.CHAIR_RISE else 2


@dataclass(frozen=True, eq=False)
class ClusterModel:
    """
    نتیجه k-means روی یک ضبط

    assignments[n] خوشه فریم n است و frame_indices[n] شماره آن فریم.
    cluster_order شماره خوشه‌ها را بر اساس میانگین شماره فریم اعضا (ترتیب
    زمانی) مرتب می‌کند.
    """
    k: int
    centroids: np.ndarray
    assignments: np.ndarray
    frame_indices: np.ndarray
    cluster_order: Tuple[int, ...]
    wcss_history: Tuple[float, ...] = ()
    n_iter: int = 0
    converged: bool = True

    @property
    def wcss(self) -> float:
        return self.wcss_history[-1] if self.wcss_history else float("nan")

    def members(self, cluster: int) -> np.ndarray:
        return np.flatnonzero(self.assignments == cluster)

    def assignment_map(self) -> dict:
        return {int(i): int(c) for i, c in zip(self.frame_indices, self.assignments)}


@dataclass(frozen=True, eq=False)
class MotionVector:
    """
    بردار حرکت با طول k×16 همراه با برچسب و فراداده
    """
    values: np.ndarray
    label: AgeGroup
    movement: MovementKind
    subject_id: str
    recording_id: str = ""

    def __post_init__(self):
        object.__setattr__(self, "values", np.asarray(self.values, dtype=float))
        object.__setattr__(self, "label", AgeGroup.parse(self.label))
        object.__setattr__(self, "movement", MovementKind.parse(self.movement))
        if not self.recording_id:
            object.__setattr__(self, "recording_id", f"{self.subject_id}:{self.movement.value}")

    @property
    def dimension(self) -> int:
        return len(self.values)


def _squared_distances(x: np.ndarray, centroids: np.ndarray) -> np.ndarray:
    diff = x[:, np.newaxis, :] - centroids[np.newaxis, :, :]
    return np.einsum("nkd,nkd->nk", diff, diff)


def _wcss(x: np.ndarray, labels: np.ndarray, centroids: np.ndarray) -> float:
    diff = x - centroids[labels]
    return float(np.einsum("nd,nd->", diff, diff))


def _kmeans_plus_plus(x: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    """
    مقداردهی اولیه k-means++: هر مرکز جدید با احتمال متناسب با D² انتخاب می‌شود
    """
    n = len(x)
    centroids = np.empty((k, x.shape[1]))
    centroids[0] = x[rng.integers(n)]
    closest = _squared_distances(x, centroids[:1])[:, 0]
    for i in range(1, k):
        total = closest.sum()
        if total > 0:
            index = rng.choice(n, p=closest / total)
        else:
            # همه نقاط روی مراکز فعلی‌اند
            index = rng.integers(n)
        centroids[i] = x[index]
        closest = np.minimum(closest, _squared_distances(x, centroids[i:i + 1])[:, 0])
    return centroids


def _assign(x: np.ndarray, centroids: np.ndarray) -> np.ndarray:
    """
    انتساب هر نقطه به نزدیک‌ترین مرکز و ترمیم خوشه‌های خالی

    مرکز خوشه خالی به دورترین نقطه از مرکز فعلی‌اش (در میان خوشه‌هایی که
    بیش از یک عضو دارند) منتقل می‌شود.
    """
    k = len(centroids)
    distances = _squared_distances(x, centroids)
    labels = np.argmin(distances, axis=1)
    for cluster in range(k):
        if np.any(labels == cluster):
            continue
        counts = np.bincount(labels, minlength=k)
        own = distances[np.arange(len(x)), labels]
        own = np.where(counts[labels] > 1, own, -1.0)
        far = int(np.argmax(own))
        logger.debug(f"Reseeding empty cluster {cluster} at point {far}")
        labels[far] = cluster
        centroids[cluster] = x[far]
        distances[:, cluster] = _squared_distances(x, centroids[cluster:cluster + 1])[:, 0]
    return labels


def _update(x: np.ndarray, labels: np.ndarray, k: int) -> np.ndarray:
    centroids = np.empty((k, x.shape[1]))
    for cluster in range(k):
        centroids[cluster] = x[labels == cluster].mean(axis=0)
    return centroids


def _cluster_order(labels: np.ndarray, frame_indices: np.ndarray, k: int) -> Tuple[int, ...]:
    mean_index = np.array([frame_indices[labels == c].mean() for c in range(k)])
    return tuple(int(c) for c in np.argsort(mean_index, kind="stable"))


def kmeans(
    features: Union[np.ndarray, Sequence],
    k: int,
    seed: int,
    max_iters: int = DEFAULT_MAX_ITERS,
    frame_indices: Optional[Sequence[int]] = None,
) -> ClusterModel:
    """
    الگوریتم Lloyd با مقداردهی k-means++ و seed مشخص

    تکرار تا ثابت ماندن انتساب‌ها یا رسیدن به max_iters ادامه دارد.
    """
    x = np.asarray(features, dtype=float)
    if x.ndim == 1:
        x = x.reshape(-1, 1)
    if k < 1:
        raise TooFewFrames(f"k must be at least 1, got {k}")
    if max_iters < 1:
        raise ConfigError(f"max_iters must be at least 1, got {max_iters}")
    if len(x) < k:
        raise TooFewFrames(f"{len(x)} frames cannot form {k} clusters")
    if frame_indices is None:
        frame_indices = np.arange(len(x))
    frame_indices = np.asarray(frame_indices, dtype=float)

    rng = np.random.default_rng(seed)
    centroids = _kmeans_plus_plus(x, k, rng)
    labels: Optional[np.ndarray] = None
    history: List[float] = []
    converged = False
    n_iter = 0
    for n_iter in range(1, max_iters + 1):
        new_labels = _assign(x, centroids)
        if labels is not None and np.array_equal(new_labels, labels):
            converged = True
            break
        labels = new_labels
        centroids = _update(x, labels, k)
        history.append(_wcss(x, labels, centroids))
        if len(history) > 1 and history[-1] > history[-2] * (1 + WCSS_TOLERANCE) + WCSS_TOLERANCE:
            logger.warning(f"WCSS increased at iteration {n_iter}: {history[-2]:.6g} -> {history[-1]:.6g}")
    else:
        logger.warning(f"k-means stopped at max_iters={max_iters} before converging")

    return ClusterModel(
        k=k,
        centroids=centroids,
        assignments=labels,
        frame_indices=frame_indices.astype(int),
        cluster_order=_cluster_order(labels, frame_indices, k),
        wcss_history=tuple(history),
        n_iter=n_iter,
        converged=converged,
    )


def centroid_motion_vector(
    model: ClusterModel,
    label: AgeGroup,
    movement: MovementKind,
    subject_id: str,
    recording_id: str = "",
) -> MotionVector:
    """
    اتصال مراکز خوشه‌ها به ترتیب زمانی
    """
    values = np.concatenate([model.centroids[c] for c in model.cluster_order])
    return MotionVector(values, label, movement, subject_id, recording_id)


def kept_members(model: ClusterModel, features: np.ndarray) -> List[np.ndarray]:
    """
    اعضای هر خوشه (به ترتیب cluster_order) مرتب بر اساس فاصله از مرکز،
    فقط نیمه نزدیک‌تر (گرد به بالا)
    """
    kept = []
    for cluster in model.cluster_order:
        members = model.members(cluster)
        distances = np.linalg.norm(features[members] - model.centroids[cluster], axis=1)
        ranked = members[np.argsort(distances, kind="stable")]
        kept.append(ranked[:math.ceil(len(ranked) / 2)])
    return kept


def expand_family(
    model: ClusterModel,
    features: Union[np.ndarray, Sequence],
    label: AgeGroup,
    movement: MovementKind,
    subject_id: str,
    recording_id: str = "",
    max_size: Optional[int] = None,
) -> List[MotionVector]:
    """
    ساخت خانواده‌ای از بردارهای حرکت از اعضای نزدیک به مرکز هر خوشه

    بردار i-ام از اتصال i-امین عضو نزدیک هر خوشه ساخته می‌شود؛ تعداد بردارها
    برابر کوچک‌ترین تعداد اعضای نگه‌داشته‌شده است.
    """
    if not isinstance(features, np.ndarray) and len(features) and hasattr(features[0], "as_array"):
        x = stack_features(features)
    else:
        x = np.asarray(features, dtype=float)
    kept = kept_members(model, x)
    sizes = [len(members) for members in kept]
    if min(sizes) == 0:
        raise EmptyCluster(f"{recording_id or subject_id}: a cluster has no members to expand")
    n = min(sizes)
    if max_size is not None:
        n = min(n, max_size)
    return [
        MotionVector(np.concatenate([x[members[rank]] for members in kept]), label, movement, subject_id, recording_id)
        for rank in range(n)
    ]


def standardize(features: np.ndarray) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """
    استانداردسازی z-score ستون‌ها؛ انحراف معیار صفر با ۱ جایگزین می‌شود
    """
    x = np.asarray(features, dtype=float)
    mean, std = fit_scaler(x)
    return apply_scaler(x, {"scale_mean": mean, "scale_std": std}), mean, std


@dataclass(frozen=True)
class RepresentationOptions:
    standardize_features: bool = False
    include_centroid: bool = False
    max_iters: int = DEFAULT_MAX_ITERS
    smoothing_cutoff_hz: Optional[float] = None
    max_family_size: Optional[int] = None


def represent_features(
    features: np.ndarray,
    frame_indices: Sequence[int],
    label: AgeGroup,
    movement: MovementKind,
    subject_id: str,
    seed: int,
    options: RepresentationOptions = RepresentationOptions(),
) -> Tuple[ClusterModel, List[MotionVector]]:
    """
    از ماتریس ویژگی‌های یک ضبط تا فهرست MotionVector ها
    """
    movement = MovementKind.parse(movement)
    recording_id = f"{subject_id}:{movement.value}"
    x = np.asarray(features, dtype=float)
    if options.standardize_features:
        x, _, _ = standardize(x)
    k = k_for_movement(movement)
    model = kmeans(x, k, derive_seed(seed, "kmeans", recording_id), options.max_iters, frame_indices)
    vectors = []
    if options.include_centroid:
        vectors.append(centroid_motion_vector(model, label, movement, subject_id, recording_id))
    vectors.extend(expand_family(model, x, label, movement, subject_id, recording_id, options.max_family_size))
    logger.debug(f"{recording_id}: {len(vectors)} motion vectors from {len(x)} frames (k={k})")
    return model, vectors


def prepare_recording(rec: MotionRecording, options: RepresentationOptions = RepresentationOptions()) -> MotionRecording:
    """
    پاک‌سازی، هموارسازی اختیاری و نرمال‌سازی یک ضبط
    """
    rec = clean_recording(rec)
    if options.smoothing_cutoff_hz:
        rec = smooth_recording(rec, options.smoothing_cutoff_hz)
    return normalize_recording(rec)


def represent_recording(
    rec: MotionRecording,
    seed: int,
    options: RepresentationOptions = RepresentationOptions(),
) -> Tuple[ClusterModel, List[MotionVector]]:
    """
    خط لوله کامل یک ضبط: پاک‌سازی ← نرمال‌سازی ← ویژگی‌ها ← k-means ← خانواده
    """
    vectors = encode_recording(prepare_recording(rec, options))
    return represent_features(
        stack_features(vectors),
        [v.frame_index for v in vectors],
        rec.group,
        rec.movement,
        rec.subject_id,
        seed,
        options,
    )


def vector_columns(dimension: int) -> List[str]:
    return [f"v{i}" for i in range(dimension)]


def write_vector_csv(vectors: Sequence[MotionVector], path: Union[str, os.PathLike]) -> Path:
    """
    نوشتن مجموعه بردارهای حرکت: ستون‌های v0..v{d-1}، label، movement،
    subject_id، recording_id
    """
    path = Path(path)
    if not vectors:
        raise InvalidRecording("no motion vectors to write")
    dimension = vectors[0].dimension
    frame = pd.DataFrame(np.stack([v.values for v in vectors]), columns=vector_columns(dimension))
    frame["label"] = [int(v.label) for v in vectors]
    frame["movement"] = [v.movement.value for v in vectors]
    frame["subject_id"] = [v.subject_id for v in vectors]
    frame["recording_id"] = [v.recording_id for v in vectors]
    path.parent.mkdir(parents=True, exist_ok=True)
    frame.to_csv(path, index=False)
    return path


def read_vector_csv(path: Union[str, os.PathLike]) -> List[MotionVector]:
    path = Path(path)
    try:
        frame = pd.read_csv(path, dtype={"subject_id": str, "recording_id": str})
    except (OSError, pd.errors.ParserError, pd.errors.EmptyDataError) as e:
        raise InvalidRecording(f"{path}: cannot read motion vector CSV: {e}") from e
    value_columns = [c for c in frame.columns if c.startswith("v") and c[1:].isdigit()]
    if value_columns != vector_columns(len(value_columns)) or len(value_columns) % FEATURE_LENGTH:
        raise InvalidRecording(f"{path}: value columns must be v0..v(k*{FEATURE_LENGTH}-1)")
    values = frame[value_columns].to_numpy(dtype=float)
    return [
        MotionVector(row, int(label), movement, subject, recording)
        for row, label, movement, subject, recording in zip(
            values, frame["label"], frame["movement"], frame["subject_id"], frame["recording_id"]
        )
    ]
