"""
تولید ضبط‌های مصنوعی اسکلت برای افراد جوان و مسن

مدل ساده است: یک قالب ایستاده (یا چرخه نشستن و برخاستن برای Chair Rise)
که با دو سینوسی روی هم در راستای ML و AP نوسان می‌کند، یک زاویه خم شدن
به سمت +Z دارد و نویز گاوسی مستقل روی هر مفصل می‌گیرد. این یک شبیه‌ساز
بیومکانیکی نیست؛ فقط ترتیب دامنه‌ها بین دو گروه اهمیت دارد.
"""

import logging
import os
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Dict, Iterable, List, Optional, Sequence, Union

import numpy as np

from core.errors import ConfigError
from core.recording_io import save_recording
from core.seeding import derive_seed, make_rng
from core.skeleton import NUM_JOINTS, AgeGroup, JointId, MotionRecording, MovementKind, recording_from_array

logger = logging.getLogger(__name__)

FRAME_RATE = 30.0
STAND_DURATION_S = 10.0
CHAIR_RISE_CYCLES = 5
EYES_CLOSED_FACTOR = 1.3
ONE_LEG_ML_FACTOR = 1.5
FOOT_LIFT_M = 0.15
CHAIR_RISE_LEAN = 0.35
COHORT_YOUNG = 26
COHORT_OLDER = 28

# محل بدن در فضای دوربین
BODY_ORIGIN = np.array([0.1, -1.0, 2.6])


@dataclass(frozen=True)
class SwayProfile:
    """
    پارامترهای نوسان وضعیت بدن یک فرد (متر، هرتز، رادیان، ثانیه)
    """
    ml_amplitude: float
    ap_amplitude: float
    sway_frequency: float
    lean_bias: float
    chair_rise_duration: float
    noise_sigma: float
    body_scale: float = 1.0

    def validate(self, frame_rate: float = FRAME_RATE) -> None:
        values = (self.ml_amplitude, self.ap_amplitude, self.sway_frequency, self.lean_bias,
                  self.chair_rise_duration, self.noise_sigma)
        if min(values) < 0:
            raise ConfigError("sway profile values must be non-negative")
        if self.body_scale <= 0:
            raise ConfigError("sway profile body_scale must be positive")
        if self.sway_frequency >= frame_rate / 2:
            raise ConfigError(f"sway frequency {self.sway_frequency} Hz must stay below {frame_rate / 2} Hz")


def default_profiles() -> Dict[str, SwayProfile]:
    return {
        "young": SwayProfile(ml_amplitude=0.004, ap_amplitude=0.006, sway_frequency=0.4,
                             lean_bias=0.03, chair_rise_duration=12.0, noise_sigma=0.003),
        "older": SwayProfile(ml_amplitude=0.02, ap_amplitude=0.03, sway_frequency=0.3,
                             lean_bias=0.15, chair_rise_duration=16.0, noise_sigma=0.003),
    }


def jitter_profile(profile: SwayProfile, rng: np.random.Generator) -> SwayProfile:
    """
    تغییر تصادفی پارامترهای یک فرد تا افراد یک گروه کپی هم نباشند
    """
    return replace(
        profile,
        ml_amplitude=profile.ml_amplitude * rng.lognormal(0.0, 0.25),
        ap_amplitude=profile.ap_amplitude * rng.lognormal(0.0, 0.25),
        sway_frequency=profile.sway_frequency * rng.lognormal(0.0, 0.1),
        lean_bias=profile.lean_bias * rng.lognormal(0.0, 0.25),
        chair_rise_duration=profile.chair_rise_duration * rng.lognormal(0.0, 0.1),
        body_scale=float(np.clip(rng.normal(1.0, 0.05), 0.85, 1.15)),
    )


def _template(points: Dict[JointId, Sequence[float]]) -> np.ndarray:
    pose = np.zeros((NUM_JOINTS, 3))
    for joint, xyz in points.items():
        pose[joint] = xyz
    return pose


def _mirror(points: Dict[JointId, Sequence[float]], pairs) -> Dict[JointId, Sequence[float]]:
    mirrored = dict(points)
    for left, right in pairs:
        x, y, z = points[left]
        mirrored[right] = (-x, y, z)
    return mirrored


_LEFT_RIGHT = [
    (JointId.SHOULDER_LEFT, JointId.SHOULDER_RIGHT),
    (JointId.ELBOW_LEFT, JointId.ELBOW_RIGHT),
    (JointId.WRIST_LEFT, JointId.WRIST_RIGHT),
    (JointId.HAND_LEFT, JointId.HAND_RIGHT),
    (JointId.HAND_TIP_LEFT, JointId.HAND_TIP_RIGHT),
    (JointId.THUMB_LEFT, JointId.THUMB_RIGHT),
    (JointId.HIP_LEFT, JointId.HIP_RIGHT),
    (JointId.KNEE_LEFT, JointId.KNEE_RIGHT),
    (JointId.ANKLE_LEFT, JointId.ANKLE_RIGHT),
    (JointId.FOOT_LEFT, JointId.FOOT_RIGHT),
]

_AXIAL = {
    JointId.SPINE_BASE: (0.0, 1.00, 0.0),
    JointId.SPINE_MID: (0.0, 1.25, 0.0),
    JointId.SPINE_SHOULDER: (0.0, 1.45, 0.0),
    JointId.NECK: (0.0, 1.52, 0.0),
    JointId.HEAD: (0.0, 1.65, 0.0),
}

_LEGS_STANDING = {
    JointId.HIP_LEFT: (-0.09, 0.98, 0.0),
    JointId.KNEE_LEFT: (-0.10, 0.53, 0.0),
    JointId.ANKLE_LEFT: (-0.10, 0.09, 0.0),
    JointId.FOOT_LEFT: (-0.10, 0.03, -0.10),
}

_LEGS_SEATED = {
    JointId.HIP_LEFT: (-0.09, 0.50, 0.0),
    JointId.KNEE_LEFT: (-0.10, 0.52, -0.45),
    JointId.ANKLE_LEFT: (-0.10, 0.09, -0.45),
    JointId.FOOT_LEFT: (-0.10, 0.03, -0.55),
}

# بازوها رو به جلو (به سمت دوربین) در ارتفاع شانه
_ARMS_FORWARD = {
    JointId.SHOULDER_LEFT: (-0.18, 1.42, 0.0),
    JointId.ELBOW_LEFT: (-0.18, 1.42, -0.28),
    JointId.WRIST_LEFT: (-0.18, 1.42, -0.52),
    JointId.HAND_LEFT: (-0.18, 1.42, -0.60),
    JointId.HAND_TIP_LEFT: (-0.18, 1.42, -0.68),
    JointId.THUMB_LEFT: (-0.14, 1.44, -0.62),
}

# دست‌ها ضربدری روی سینه
_ARMS_CROSSED = {
    JointId.SHOULDER_LEFT: (-0.18, 1.42, 0.0),
    JointId.ELBOW_LEFT: (-0.16, 1.22, -0.12),
    JointId.WRIST_LEFT: (0.08, 1.32, -0.15),
    JointId.HAND_LEFT: (0.14, 1.34, -0.14),
    JointId.HAND_TIP_LEFT: (0.19, 1.36, -0.13),
    JointId.THUMB_LEFT: (0.13, 1.38, -0.16),
}

# سهم هر مفصل از نوسان تنه
_SWAY_WEIGHT = np.ones(NUM_JOINTS)
for _joint, _weight in ((JointId.HIP_LEFT, 0.6), (JointId.HIP_RIGHT, 0.6), (JointId.KNEE_LEFT, 0.3),
                        (JointId.KNEE_RIGHT, 0.3), (JointId.ANKLE_LEFT, 0.0), (JointId.ANKLE_RIGHT, 0.0),
                        (JointId.FOOT_LEFT, 0.0), (JointId.FOOT_RIGHT, 0.0)):
    _SWAY_WEIGHT[_joint] = _weight

_LOWER_BODY = [JointId.HIP_LEFT, JointId.HIP_RIGHT, JointId.KNEE_LEFT, JointId.KNEE_RIGHT,
               JointId.ANKLE_LEFT, JointId.ANKLE_RIGHT, JointId.FOOT_LEFT, JointId.FOOT_RIGHT]
_UPPER_BODY = np.array([j not in _LOWER_BODY for j in JointId])


def standing_template(movement: MovementKind) -> np.ndarray:
    arms = _ARMS_CROSSED if movement is MovementKind.CHAIR_RISE else _ARMS_FORWARD
    pose = _template(_mirror({**_AXIAL, **_LEGS_STANDING, **arms}, _LEFT_RIGHT))
    if movement.one_leg:
        pose[[JointId.ANKLE_RIGHT, JointId.FOOT_RIGHT], 1] += FOOT_LIFT_M
        pose[JointId.KNEE_RIGHT] += (0.0, FOOT_LIFT_M / 2, -0.10)
    return pose


def seated_template() -> np.ndarray:
    pose = _template(_mirror({**_AXIAL, **_LEGS_SEATED, **_ARMS_CROSSED}, _LEFT_RIGHT))
    drop = _LEGS_STANDING[JointId.HIP_LEFT][1] - _LEGS_SEATED[JointId.HIP_LEFT][1]
    pose[_UPPER_BODY, 1] -= drop
    return pose


def _lean(poses: np.ndarray, angles: np.ndarray) -> np.ndarray:
    """
    چرخش بالاتنه حول SpineBase در صفحه ساژیتال؛ زاویه مثبت به سمت +Z
    """
    pivot = poses[:, JointId.SPINE_BASE][:, np.newaxis, :]
    relative = poses[:, _UPPER_BODY] - pivot
    cos = np.cos(angles)[:, np.newaxis]
    sin = np.sin(angles)[:, np.newaxis]
    rotated = relative.copy()
    rotated[..., 1] = relative[..., 1] * cos - relative[..., 2] * sin
    rotated[..., 2] = relative[..., 1] * sin + relative[..., 2] * cos
    out = poses.copy()
    out[:, _UPPER_BODY] = rotated + pivot
    return out


def _sway(t: np.ndarray, amplitude: float, frequency: float, phases: np.ndarray) -> np.ndarray:
    """
    دو سینوسی روی هم با دامنه بیشینه حدود amplitude
    """
    wave = np.sin(2 * np.pi * frequency * t + phases[0]) + 0.5 * np.sin(2 * np.pi * 1.7 * frequency * t + phases[1])
    return amplitude * wave / 1.5


def generate_recording(
    movement: Union[str, MovementKind],
    profile: SwayProfile,
    duration_s: Optional[float] = None,
    seed: int = 0,
    subject_id: str = "S00",
    group: AgeGroup = AgeGroup.YOUNG,
    frame_rate: float = FRAME_RATE,
) -> MotionRecording:
    """
    یک ضبط مصنوعی ۲۵ مفصلی؛ برای یک seed ثابت همیشه یکسان است

    مدت پیش‌فرض: chair_rise_duration پروفایل برای Chair Rise و ۱۰ ثانیه برای بقیه.
    """
    movement = MovementKind.parse(movement)
    profile.validate(frame_rate)
    if duration_s is None:
        duration_s = profile.chair_rise_duration if movement is MovementKind.CHAIR_RISE else STAND_DURATION_S
    if duration_s <= 0:
        raise ConfigError(f"duration must be positive, got {duration_s}")
    rng = np.random.default_rng(seed)
    n_frames = max(1, int(round(duration_s * frame_rate)))
    t = np.arange(n_frames) / frame_rate

    ml_amplitude = profile.ml_amplitude
    ap_amplitude = profile.ap_amplitude
    if movement.eyes_closed:
        ml_amplitude *= EYES_CLOSED_FACTOR
        ap_amplitude *= EYES_CLOSED_FACTOR
    if movement.one_leg:
        ml_amplitude *= ONE_LEG_ML_FACTOR

    phases = rng.uniform(0.0, 2 * np.pi, size=4)
    ml = _sway(t, ml_amplitude, profile.sway_frequency, phases[:2])
    ap = _sway(t, ap_amplitude, profile.sway_frequency, phases[2:])
    angles = profile.lean_bias + 0.5 * ap

    standing = standing_template(movement)
    if movement is MovementKind.CHAIR_RISE:
        p = 0.5 - 0.5 * np.cos(2 * np.pi * CHAIR_RISE_CYCLES * t / duration_s)
        seated = seated_template()
        poses = seated[np.newaxis] + p[:, np.newaxis, np.newaxis] * (standing - seated)[np.newaxis]
        angles = angles + CHAIR_RISE_LEAN * np.sin(np.pi * p)
    else:
        poses = np.repeat(standing[np.newaxis], n_frames, axis=0)

    poses = _lean(poses * profile.body_scale, angles)
    poses[..., 0] += ml[:, np.newaxis] * _SWAY_WEIGHT
    poses[..., 2] += ap[:, np.newaxis] * _SWAY_WEIGHT
    if profile.noise_sigma > 0:
        poses = poses + rng.normal(0.0, profile.noise_sigma, size=poses.shape)
    poses += BODY_ORIGIN
    return recording_from_array(poses, subject_id, movement, AgeGroup.parse(group), frame_rate)


def cohort_subject_ids(n_young: int, n_older: int) -> List[str]:
    return [f"Y{n + 1:02d}" for n in range(n_young)] + [f"O{n + 1:02d}" for n in range(n_older)]


def generate_cohort(
    n_young: int = COHORT_YOUNG,
    n_older: int = COHORT_OLDER,
    movements: Optional[Iterable[Union[str, MovementKind]]] = None,
    seed: int = 0,
    profiles: Optional[Dict[str, SwayProfile]] = None,
    frame_rate: float = FRAME_RATE,
) -> List[MotionRecording]:
    """
    ساخت ضبط‌های یک گروه کامل: هر فرد یک پروفایل تصادفی و یک ضبط برای هر حرکت
    """
    if n_young < 0 or n_older < 0:
        raise ConfigError("cohort sizes must be non-negative")
    movements = [MovementKind.parse(m) for m in (movements or list(MovementKind))]
    profiles = profiles or default_profiles()
    recordings = []
    for subject_id in cohort_subject_ids(n_young, n_older):
        group = AgeGroup.YOUNG if subject_id.startswith("Y") else AgeGroup.OLDER
        base = profiles["young" if group is AgeGroup.YOUNG else "older"]
        profile = jitter_profile(base, make_rng(seed, "synth", subject_id))
        for movement in movements:
            recordings.append(generate_recording(
                movement, profile, seed=derive_seed(seed, "synth", subject_id, movement.value),
                subject_id=subject_id, group=group, frame_rate=frame_rate,
            ))
    logger.info(f"Generated {len(recordings)} synthetic recordings ({n_young} young, {n_older} older)")
    return recordings


def write_cohort(recordings: Sequence[MotionRecording], out_dir: Union[str, os.PathLike]) -> List[Path]:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    paths = [save_recording(rec, out_dir / f"{rec.subject_id}_{rec.movement.value}.json") for rec in recordings]
    logger.info(f"Wrote {len(paths)} recordings to {out_dir}")
    return paths
