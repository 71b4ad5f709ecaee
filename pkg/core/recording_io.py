"""
خواندن و نوشتن فایل‌های ضبط اسکلت

فرمت اصلی JSON (یک سند برای هر ضبط):
    {"subject_id": "...", "movement": "chair_rise", "group": "young",
     "frame_rate": 30.0, "frames": [[[x, y, z] x 25], ...]}
ترتیب ۲۵ مفصل همان ترتیب core.skeleton.JointId است؛ مفصل غایب null است.

فرمت متنی (خروجی‌های شبیه K3Da): هر خط یک فریم با ۷۵ عدد اعشاری جدا شده
با فاصله، به همان ترتیب مفاصل. فراداده از نام فایل خوانده می‌شود:
    <subject_id>__<movement>__<group>.txt
این چیدمان ستون‌ها قرارداد همین پروژه است، نه فرمت رسمی K3Da.
"""

import hashlib
import json
import logging
import os
from pathlib import Path
from typing import List, Optional, Union

import numpy as np

from core.errors import DataError, InvalidRecording
from core.skeleton import (
    NUM_JOINTS,
    AgeGroup,
    MotionRecording,
    MovementKind,
    recording_from_array,
)

logger = logging.getLogger(__name__)

PathLike = Union[str, os.PathLike]

RECORDING_SUFFIXES = (".json", ".txt")
JSON_DECIMALS = 5


def load_recording(path: PathLike) -> MotionRecording:
    """
    خواندن یک ضبط از فایل (JSON یا متنی، بر اساس پسوند)
    """
    path = Path(path)
    if path.suffix.lower() == ".txt":
        return load_text_recording(path)
    try:
        with open(path, "r", encoding="utf-8") as f:
            document = json.load(f)
    except (OSError, json.JSONDecodeError) as e:
        raise InvalidRecording(f"{path}: cannot read recording: {e}") from e
    return _recording_from_document(document, path)


def _recording_from_document(document: dict, path: Path) -> MotionRecording:
    missing = [key for key in ("subject_id", "movement", "group", "frames") if key not in document]
    if missing:
        raise InvalidRecording(f"{path}: missing fields {missing}")
    frames = document["frames"]
    positions = np.full((len(frames), NUM_JOINTS, 3), np.nan)
    for n, frame in enumerate(frames):
        if len(frame) != NUM_JOINTS:
            raise InvalidRecording(f"{path}: frame {n} has {len(frame)} joints, expected {NUM_JOINTS}")
        for j, joint in enumerate(frame):
            if joint is None:
                continue
            if len(joint) != 3:
                raise InvalidRecording(f"{path}: frame {n} joint {j} is not an [x, y, z] triple")
            positions[n, j] = [np.nan if v is None else float(v) for v in joint]
    return recording_from_array(
        positions,
        subject_id=str(document["subject_id"]),
        movement=MovementKind.parse(document["movement"]),
        group=AgeGroup.parse(document["group"]),
        frame_rate=float(document.get("frame_rate", 30.0)),
    )


def save_recording(rec: MotionRecording, path: PathLike, decimals: int = JSON_DECIMALS) -> Path:
    """
    نوشتن ضبط در فرمت JSON اصلی (مختصات تا ۵ رقم اعشار، یعنی ۱۰ میکرومتر)
    """
    path = Path(path)
    frames = []
    for frame in rec.frames:
        rounded = np.round(frame.positions, decimals)
        frames.append([
            None if joint in frame.missing else [float(v) for v in rounded[joint]]
            for joint in range(NUM_JOINTS)
        ])
    document = {
        "subject_id": rec.subject_id,
        "movement": rec.movement.value,
        "group": rec.group.title.lower(),
        "frame_rate": rec.frame_rate,
        "frames": frames,
    }
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as f:
        json.dump(document, f, separators=(",", ":"))
    return path


def parse_recording_filename(path: PathLike):
    """
    استخراج (subject_id، حرکت، گروه) از نام فایل متنی
    """
    parts = Path(path).stem.split("__")
    if len(parts) != 3:
        raise InvalidRecording(f"{path}: text recordings must be named <subject>__<movement>__<group>.txt")
    return parts[0], MovementKind.parse(parts[1]), AgeGroup.parse(parts[2])


def load_text_recording(
    path: PathLike,
    subject_id: Optional[str] = None,
    movement: Optional[MovementKind] = None,
    group: Optional[AgeGroup] = None,
    frame_rate: float = 30.0,
) -> MotionRecording:
    """
    خواندن فایل متنی با ۷۵ عدد در هر خط
    """
    path = Path(path)
    if subject_id is None or movement is None or group is None:
        name_subject, name_movement, name_group = parse_recording_filename(path)
        subject_id = subject_id or name_subject
        movement = movement or name_movement
        group = group if group is not None else name_group
    try:
        values = np.loadtxt(path, ndmin=2)
    except (OSError, ValueError) as e:
        raise InvalidRecording(f"{path}: cannot parse text recording: {e}") from e
    if values.size == 0:
        values = values.reshape(0, NUM_JOINTS * 3)
    if values.shape[1] != NUM_JOINTS * 3:
        raise InvalidRecording(f"{path}: expected {NUM_JOINTS * 3} values per line, got {values.shape[1]}")
    return recording_from_array(values.reshape(-1, NUM_JOINTS, 3), subject_id, movement, group, frame_rate)


def save_text_recording(rec: MotionRecording, path: PathLike) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    np.savetxt(path, rec.positions().reshape(rec.n_frames, NUM_JOINTS * 3), fmt="%.6f")
    return path


def discover_recordings(data_dir: PathLike) -> List[Path]:
    """
    فهرست مرتب فایل‌های ضبط در یک پوشه (بدون زیرپوشه‌ها)
    """
    data_dir = Path(data_dir)
    if not data_dir.is_dir():
        raise DataError(f"data directory does not exist: {data_dir}")
    paths = sorted(p for p in data_dir.iterdir() if p.is_file() and p.suffix.lower() in RECORDING_SUFFIXES)
    logger.info(f"Found {len(paths)} recording files in {data_dir}")
    return paths


def file_sha256(path: PathLike) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as f:
        for chunk in iter(lambda: f.read(1 << 20), b""):
            digest.update(chunk)
    return digest.hexdigest()
