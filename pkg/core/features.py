"""
استخراج ویژگی‌های بالینی ۱۶تایی از هر فریم نرمال‌شده

ترتیب ثابت بردار:
    [euclid_spine_head, euler_spine_neck, body_lean_ap,
     com_x, com_y, com_z, torso_ml (x, y) x 5]
زاویه‌ها در داخل برنامه رادیان هستند؛ درجه فقط در نمودارها نمایش داده می‌شود.
"""

import logging
import os
from dataclasses import dataclass
from pathlib import Path
from typing import List, Sequence, Union

import numpy as np
import pandas as pd

from core.errors import EmptyRecording, InvalidRecording, ZeroVector
from core.skeleton import (
    TORSO,
    AgeGroup,
    JointId,
    MotionRecording,
    MovementKind,
    SkeletonFrame,
    Vec3,
    validate_frame,
)

logger = logging.getLogger(__name__)

FEATURE_LENGTH = 16
VERTICAL = np.array([0.0, 1.0, 0.0])

FEATURE_NAMES: List[str] = (
    ["euclid_spine_head", "euler_spine_neck", "body_lean_ap", "com_x", "com_y", "com_z"]
    + [f"{joint.name.lower()}_{axis}" for joint in TORSO for axis in ("x", "y")]
)

_TORSO_INDEX = [int(j) for j in TORSO]
_COM_INDEX = [int(JointId.SPINE_MID), int(JointId.HIP_LEFT), int(JointId.HIP_RIGHT)]


@dataclass(frozen=True, eq=False)
class PoseFeatureVector:
    """
    بردار ۱۶تایی ویژگی‌های یک فریم
    """
    frame_index: int
    euclid_spine_head: float
    euler_spine_neck: float
    body_lean_ap: float
    com: np.ndarray
    torso_ml: np.ndarray

    def as_array(self) -> np.ndarray:
        return np.concatenate((
            [self.euclid_spine_head, self.euler_spine_neck, self.body_lean_ap],
            self.com,
            self.torso_ml,
        ))

    @classmethod
    def from_array(cls, frame_index: int, values: np.ndarray) -> "PoseFeatureVector":
        values = np.asarray(values, dtype=float)
        if values.shape != (FEATURE_LENGTH,):
            raise InvalidRecording(f"feature vector must have {FEATURE_LENGTH} values, got {values.shape}")
        return cls(int(frame_index), float(values[0]), float(values[1]), float(values[2]),
                   values[3:6].copy(), values[6:].copy())


def euclidean_distance(a: Vec3, b: Vec3) -> float:
    diff = np.asarray(a, dtype=float) - np.asarray(b, dtype=float)
    return float(np.sqrt(np.dot(diff, diff)))


def euler_angle(s: Vec3, q: Vec3) -> float:
    """
    زاویه بین دو بردار: arccos(s·q / (|s||q|)) در بازه [0, π]

    فرمول چاپ‌شده در منبع arctan نسبت کسینوسی است که زاویه هندسی نمی‌دهد؛
    شکل استاندارد arccos به کار رفته است.
    """
    s = np.asarray(s, dtype=float)
    q = np.asarray(q, dtype=float)
    ns = np.linalg.norm(s)
    nq = np.linalg.norm(q)
    if ns == 0 or nq == 0:
        raise ZeroVector("euler_angle is undefined for a zero-length vector")
    cosine = np.dot(s, q) / (ns * nq)
    return float(np.arccos(np.clip(cosine, -1.0, 1.0)))


def body_lean_angle(frame: SkeletonFrame) -> float:
    """
    زاویه خم شدن تنه در صفحه ساژیتال: atan2(v.z, v.y) با v = SpineMid - SpineBase

    صفر یعنی ستون فقرات عمودی؛ مثبت یعنی خم شدن به سمت +Z. مؤلفه x نادیده
    گرفته می‌شود.
    """
    v = frame.joint(JointId.SPINE_MID) - frame.joint(JointId.SPINE_BASE)
    if not np.any(v):
        raise ZeroVector(f"frame {frame.frame_index}: SpineBase and SpineMid coincide")
    return float(np.arctan2(v[2], v[1]))


def center_of_mass(frame: SkeletonFrame) -> Vec3:
    """
    میانگین SpineMid، HipLeft و HipRight
    """
    return frame.positions[_COM_INDEX].sum(axis=0) / 3.0


def torso_ml_positions(frame: SkeletonFrame) -> np.ndarray:
    """
    موقعیت (x, y) پنج مفصل تنه؛ محور AP (z) حذف می‌شود
    """
    return frame.positions[_TORSO_INDEX, :2].reshape(-1).copy()


def _encode_positions(positions: np.ndarray, frame_indices: Sequence[int]) -> np.ndarray:
    """
    محاسبه برداری ویژگی‌ها برای آرایه N×25×3
    """
    spine_base = positions[:, JointId.SPINE_BASE]
    head_offset = positions[:, JointId.HEAD] - spine_base
    euclid = np.sqrt(np.einsum("ij,ij->i", head_offset, head_offset))

    s = positions[:, JointId.NECK] - spine_base
    s_norm = np.linalg.norm(s, axis=1)
    zero = np.flatnonzero(s_norm == 0)
    if zero.size:
        raise ZeroVector(f"frame {frame_indices[zero[0]]}: SpineBase and Neck coincide")
    euler = np.arccos(np.clip((s @ VERTICAL) / s_norm, -1.0, 1.0))

    v = positions[:, JointId.SPINE_MID] - spine_base
    zero = np.flatnonzero(~v.any(axis=1))
    if zero.size:
        raise ZeroVector(f"frame {frame_indices[zero[0]]}: SpineBase and SpineMid coincide")
    lean = np.arctan2(v[:, 2], v[:, 1])

    com = positions[:, _COM_INDEX].sum(axis=1) / 3.0
    torso = positions[:, _TORSO_INDEX, :2].reshape(len(positions), -1)
    return np.column_stack((euclid, euler, lean, com, torso))


def encode_frame(frame: SkeletonFrame) -> PoseFeatureVector:
    """
    ساخت بردار ۱۶تایی یک فریم معتبر
    """
    values = _encode_positions(frame.positions[np.newaxis], [frame.frame_index])[0]
    return PoseFeatureVector.from_array(frame.frame_index, values)


def encode_recording(rec: MotionRecording) -> List[PoseFeatureVector]:
    """
    ویژگی‌های همه فریم‌های معتبر یک ضبط نرمال‌شده، به همان ترتیب زمانی
    """
    frames = []
    for frame in rec.frames:
        violations = validate_frame(frame)
        if violations:
            logger.warning(f"{rec.recording_id}: frame {frame.frame_index} dropped before encoding "
                           f"({len(violations)} joint problems)")
            continue
        frames.append(frame)
    if not frames:
        raise EmptyRecording(f"{rec.recording_id}: no frame survived validation")
    indices = [f.frame_index for f in frames]
    matrix = _encode_positions(np.stack([f.positions for f in frames]), indices)
    logger.debug(f"{rec.recording_id}: encoded {len(frames)} frames")
    return [PoseFeatureVector.from_array(index, row) for index, row in zip(indices, matrix)]


def stack_features(vectors: Sequence[PoseFeatureVector]) -> np.ndarray:
    """
    تبدیل دنباله بردارها به ماتریس N×16
    """
    if not vectors:
        return np.empty((0, FEATURE_LENGTH))
    return np.stack([v.as_array() for v in vectors])


@dataclass(frozen=True, eq=False)
class FeatureTable:
    """
    ویژگی‌های یک ضبط همراه با فراداده، همان چیزی که در CSV ویژگی‌ها ذخیره می‌شود
    """
    subject_id: str
    movement: MovementKind
    group: AgeGroup
    frame_indices: np.ndarray
    values: np.ndarray

    @property
    def recording_id(self) -> str:
        return f"{self.subject_id}:{self.movement.value}"

    def vectors(self) -> List[PoseFeatureVector]:
        return [PoseFeatureVector.from_array(i, row) for i, row in zip(self.frame_indices, self.values)]


def feature_table(rec: MotionRecording, vectors: Sequence[PoseFeatureVector]) -> FeatureTable:
    return FeatureTable(
        rec.subject_id,
        rec.movement,
        rec.group,
        np.array([v.frame_index for v in vectors], dtype=int),
        stack_features(vectors),
    )


def write_feature_csv(table: FeatureTable, path: Union[str, os.PathLike]) -> Path:
    """
    نوشتن CSV ویژگی‌ها: یک ردیف برای هر فریم
    """
    path = Path(path)
    frame = pd.DataFrame(table.values, columns=FEATURE_NAMES)
    frame.insert(0, "frame_index", table.frame_indices)
    frame.insert(0, "group", table.group.title.lower())
    frame.insert(0, "movement", table.movement.value)
    frame.insert(0, "subject_id", table.subject_id)
    path.parent.mkdir(parents=True, exist_ok=True)
    frame.to_csv(path, index=False)
    return path


def read_feature_csv(path: Union[str, os.PathLike]) -> FeatureTable:
    path = Path(path)
    try:
        frame = pd.read_csv(path, dtype={"subject_id": str})
    except (OSError, pd.errors.ParserError, pd.errors.EmptyDataError) as e:
        raise InvalidRecording(f"{path}: cannot read feature CSV: {e}") from e
    expected = ["subject_id", "movement", "group", "frame_index"] + FEATURE_NAMES
    if list(frame.columns) != expected:
        raise InvalidRecording(f"{path}: unexpected feature CSV columns")
    if frame.empty:
        raise EmptyRecording(f"{path}: feature CSV has no rows")
    return FeatureTable(
        str(frame["subject_id"].iloc[0]),
        MovementKind.parse(frame["movement"].iloc[0]),
        AgeGroup.parse(frame["group"].iloc[0]),
        frame["frame_index"].to_numpy(dtype=int),
        frame[FEATURE_NAMES].to_numpy(dtype=float),
    )
