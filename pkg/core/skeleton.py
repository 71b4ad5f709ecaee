"""
مدل اسکلت Kinect v2: مفاصل، فریم‌ها، ضبط‌ها و نرمال‌سازی وضعیت بدن

قرارداد محورها (فضای دوربین Kinect v2):
    X = محور medio-lateral (ML، جانبی)
    Y = محور عمودی
    Z = محور anterior-posterior (AP، عمق)
واحد همه مختصات متر است.
"""

import logging
from dataclasses import dataclass, replace
from enum import Enum, IntEnum
from typing import Dict, FrozenSet, List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np
from scipy import signal

from core.errors import ConfigError, EmptyRecording, InvalidRecording

logger = logging.getLogger(__name__)


class JointId(IntEnum):
    """
    ۲۵ مفصل Kinect v2 به ترتیب SDK

    مقدار هر عضو، ستون آن مفصل در فایل‌های ضبط است؛ این ترتیب تنها مرجع
    ترتیب مفاصل در کل پروژه است.
    """
    SPINE_BASE = 0
    SPINE_MID = 1
    NECK = 2
    HEAD = 3
    SHOULDER_LEFT = 4
    ELBOW_LEFT = 5
    WRIST_LEFT = 6
    HAND_LEFT = 7
    SHOULDER_RIGHT = 8
    ELBOW_RIGHT = 9
    WRIST_RIGHT = 10
    HAND_RIGHT = 11
    HIP_LEFT = 12
    KNEE_LEFT = 13
    ANKLE_LEFT = 14
    FOOT_LEFT = 15
    HIP_RIGHT = 16
    KNEE_RIGHT = 17
    ANKLE_RIGHT = 18
    FOOT_RIGHT = 19
    SPINE_SHOULDER = 20
    HAND_TIP_LEFT = 21
    THUMB_LEFT = 22
    HAND_TIP_RIGHT = 23
    THUMB_RIGHT = 24


NUM_JOINTS = len(JointId)

# مفاصل تنه، به ترتیب JointId
TORSO: Tuple[JointId, ...] = (
    JointId.SPINE_BASE,
    JointId.SPINE_MID,
    JointId.SHOULDER_LEFT,
    JointId.SHOULDER_RIGHT,
    JointId.SPINE_SHOULDER,
)

Vec3 = np.ndarray


def vec3(x: float, y: float, z: float) -> Vec3:
    return np.array([x, y, z], dtype=float)


class MovementKind(Enum):
    """
    پنج حرکت SPPB که در این پروژه بررسی می‌شوند
    """
    CHAIR_RISE = "chair_rise"
    STAND_2_FEET_EYES_OPEN = "stand_2_feet_eyes_open"
    STAND_2_FEET_EYES_CLOSED = "stand_2_feet_eyes_closed"
    BALANCE_1_LEG_EYES_OPEN = "balance_1_leg_eyes_open"
    BALANCE_1_LEG_EYES_CLOSED = "balance_1_leg_eyes_closed"

    @property
    def title(self) -> str:
        return _MOVEMENT_TITLES[self]

    @property
    def eyes_closed(self) -> bool:
        return self in (MovementKind.STAND_2_FEET_EYES_CLOSED, MovementKind.BALANCE_1_LEG_EYES_CLOSED)

    @property
    def one_leg(self) -> bool:
        return self in (MovementKind.BALANCE_1_LEG_EYES_OPEN, MovementKind.BALANCE_1_LEG_EYES_CLOSED)

    @classmethod
    def parse(cls, value: Union[str, "MovementKind"]) -> "MovementKind":
        """
        تبدیل رشته (مقدار، نام عضو یا نام CamelCase) به MovementKind
        """
        if isinstance(value, cls):
            return value
        text = str(value).strip()
        key = text.replace("-", "_").replace(" ", "_").lower()
        for kind in cls:
            camel = "".join(part.capitalize() for part in kind.value.split("_"))
            if key in (kind.value, kind.name.lower()) or text == camel:
                return kind
        raise InvalidRecording(f"Unknown movement: {value!r}")


_MOVEMENT_TITLES = {
    MovementKind.CHAIR_RISE: "Chair Rise",
    MovementKind.STAND_2_FEET_EYES_OPEN: "Stand 2 feet, eyes open",
    MovementKind.STAND_2_FEET_EYES_CLOSED: "Stand 2 feet, eyes closed",
    MovementKind.BALANCE_1_LEG_EYES_OPEN: "Balance 1 leg, eyes open",
    MovementKind.BALANCE_1_LEG_EYES_CLOSED: "Balance 1 leg, eyes closed",
}


class AgeGroup(IntEnum):
    """
    گروه سنی و برچسب دودویی آن (جوان = ۱، مسن = ۰)
    """
    OLDER = 0
    YOUNG = 1

    @property
    def title(self) -> str:
        return "Young" if self is AgeGroup.YOUNG else "Older"

    @classmethod
    def parse(cls, value: Union[str, int, "AgeGroup"]) -> "AgeGroup":
        if isinstance(value, cls):
            return value
        text = str(value).strip().lower()
        if text in ("1", "young", "1.0"):
            return cls.YOUNG
        if text in ("0", "older", "old", "0.0"):
            return cls.OLDER
        raise InvalidRecording(f"Unknown age group: {value!r}")


@dataclass(frozen=True)
class MissingJoint:
    joint: JointId


@dataclass(frozen=True)
class NonFinite:
    joint: JointId


Violation = Union[MissingJoint, NonFinite]


@dataclass(frozen=True, eq=False)
class SkeletonFrame:
    """
    یک وضعیت بدن در یک لحظه: موقعیت ۲۵ مفصل (آرایه 25×3)

    ردیف مفاصل غایب NaN است و نام آن‌ها در missing نگه داشته می‌شود.
    """
    frame_index: int
    positions: np.ndarray
    missing: FrozenSet[JointId] = frozenset()

    def __post_init__(self):
        positions = np.array(self.positions, dtype=float)
        if positions.shape != (NUM_JOINTS, 3):
            raise InvalidRecording(
                f"Frame {self.frame_index}: expected {NUM_JOINTS}x3 positions, got {positions.shape}"
            )
        positions.setflags(write=False)
        object.__setattr__(self, "positions", positions)
        object.__setattr__(self, "missing", frozenset(JointId(j) for j in self.missing))

    @classmethod
    def from_joints(cls, frame_index: int, joints: Mapping[JointId, Sequence[float]]) -> "SkeletonFrame":
        """
        ساخت فریم از نگاشت مفصل ← موقعیت؛ مفاصل ناموجود غایب علامت می‌خورند
        """
        positions = np.full((NUM_JOINTS, 3), np.nan)
        missing = set()
        for joint in JointId:
            if joint in joints and joints[joint] is not None:
                positions[joint] = np.asarray(joints[joint], dtype=float)
            else:
                missing.add(joint)
        return cls(frame_index, positions, frozenset(missing))

    def joint(self, joint: JointId) -> Vec3:
        return self.positions[joint]

    @property
    def joints(self) -> Dict[JointId, Vec3]:
        return {joint: self.positions[joint] for joint in JointId if joint not in self.missing}

    def translated(self, offset: Vec3) -> "SkeletonFrame":
        return SkeletonFrame(self.frame_index, self.positions + np.asarray(offset, dtype=float), self.missing)


@dataclass(frozen=True, eq=False)
class MotionRecording:
    """
    یک ضبط کامل از یک حرکت همراه با فراداده‌های آزمودنی
    """
    subject_id: str
    movement: MovementKind
    group: AgeGroup
    frames: Tuple[SkeletonFrame, ...]
    frame_rate: float = 30.0

    def __post_init__(self):
        frames = tuple(self.frames)
        object.__setattr__(self, "frames", frames)
        object.__setattr__(self, "movement", MovementKind.parse(self.movement))
        object.__setattr__(self, "group", AgeGroup.parse(self.group))
        if not frames:
            raise EmptyRecording(f"{self.subject_id}:{self.movement.value}: recording has no frames")
        if not self.frame_rate > 0:
            raise InvalidRecording(f"{self.subject_id}: frame_rate must be positive, got {self.frame_rate}")
        indices = [f.frame_index for f in frames]
        if any(b <= a for a, b in zip(indices, indices[1:])):
            raise InvalidRecording(f"{self.subject_id}: frame_index must be strictly increasing")

    @property
    def recording_id(self) -> str:
        return f"{self.subject_id}:{self.movement.value}"

    @property
    def n_frames(self) -> int:
        return len(self.frames)

    @property
    def duration_s(self) -> float:
        return self.n_frames / self.frame_rate

    def positions(self) -> np.ndarray:
        """
        آرایه N×25×3 از موقعیت تمام فریم‌ها
        """
        return np.stack([f.positions for f in self.frames])

    def frame_indices(self) -> np.ndarray:
        return np.array([f.frame_index for f in self.frames], dtype=int)

    def with_frames(self, frames: Sequence[SkeletonFrame]) -> "MotionRecording":
        return replace(self, frames=tuple(frames))


def validate_frame(f: SkeletonFrame) -> List[Violation]:
    """
    بررسی کامل بودن و متناهی بودن ۲۵ مفصل؛ خطاها داده‌اند نه استثنا
    """
    violations: List[Violation] = []
    finite = np.isfinite(f.positions).all(axis=1)
    for joint in JointId:
        if joint in f.missing:
            violations.append(MissingJoint(joint))
        elif not finite[joint]:
            violations.append(NonFinite(joint))
    return violations


def clean_recording(rec: MotionRecording) -> MotionRecording:
    """
    حذف فریم‌های نامعتبر با ثبت هشدار برای هر فریم
    """
    kept = []
    for frame in rec.frames:
        violations = validate_frame(frame)
        if violations:
            names = ", ".join(f"{type(v).__name__}({v.joint.name})" for v in violations)
            logger.warning(f"{rec.recording_id}: dropping frame {frame.frame_index}: {names}")
            continue
        kept.append(frame)
    if not kept:
        raise EmptyRecording(f"{rec.recording_id}: no valid frames")
    if len(kept) == rec.n_frames:
        return rec
    return rec.with_frames(kept)


def _reference_spine_base(rec: MotionRecording) -> Vec3:
    for position, frame in enumerate(rec.frames):
        if JointId.SPINE_BASE in frame.missing:
            continue
        ref = frame.joint(JointId.SPINE_BASE)
        if np.isfinite(ref).all():
            if position > 0:
                logger.warning(
                    f"{rec.recording_id}: first frame has no usable SpineBase, "
                    f"normalising to frame {frame.frame_index}"
                )
            return ref.copy()
    raise EmptyRecording(f"{rec.recording_id}: no frame with a tracked SpineBase")


def normalize_recording(rec: MotionRecording) -> MotionRecording:
    """
    هم‌ترازی همه فریم‌ها با SpineBase فریم اول

    p*[n, i] = P[n, i] - P[SpineBase, 1] ؛ فقط انتقال صلب، پس فاصله‌های
    بین مفاصل تغییر نمی‌کند و اعمال دوباره آن اثری ندارد.
    """
    ref = _reference_spine_base(rec)
    frames = [SkeletonFrame(f.frame_index, f.positions - ref, f.missing) for f in rec.frames]
    return rec.with_frames(frames)


def smooth_recording(rec: MotionRecording, cutoff_hz: float, order: int = 2) -> MotionRecording:
    """
    فیلتر پایین‌گذر Butterworth بدون اعوجاج فاز روی مسیر هر مختصات
    """
    nyquist = rec.frame_rate / 2.0
    if not 0 < cutoff_hz < nyquist:
        raise ConfigError(f"smoothing cutoff {cutoff_hz} Hz must lie in (0, {nyquist}) Hz")
    b, a = signal.butter(order, cutoff_hz / nyquist)
    padlen = 3 * max(len(a), len(b))
    if rec.n_frames <= padlen:
        logger.warning(f"{rec.recording_id}: {rec.n_frames} frames too short to smooth, left unchanged")
        return rec
    positions = rec.positions()
    if not np.isfinite(positions).all():
        raise InvalidRecording(f"{rec.recording_id}: clean the recording before smoothing")
    smoothed = signal.filtfilt(b, a, positions, axis=0)
    frames = [SkeletonFrame(f.frame_index, smoothed[n], f.missing) for n, f in enumerate(rec.frames)]
    return rec.with_frames(frames)


def recording_from_array(
    positions: np.ndarray,
    subject_id: str,
    movement: MovementKind,
    group: AgeGroup,
    frame_rate: float = 30.0,
    frame_indices: Optional[Sequence[int]] = None,
) -> MotionRecording:
    """
    ساخت ضبط از آرایه N×25×3؛ ردیف‌های تماماً NaN غایب حساب می‌شوند
    """
    positions = np.asarray(positions, dtype=float)
    if positions.ndim != 3 or positions.shape[1:] != (NUM_JOINTS, 3):
        raise InvalidRecording(f"{subject_id}: expected Nx{NUM_JOINTS}x3 positions, got {positions.shape}")
    if frame_indices is None:
        frame_indices = range(len(positions))
    frames = []
    for index, pose in zip(frame_indices, positions):
        absent = frozenset(JointId(j) for j in np.flatnonzero(np.isnan(pose).all(axis=1)))
        frames.append(SkeletonFrame(int(index), pose, absent))
    return MotionRecording(subject_id, movement, group, tuple(frames), frame_rate)
