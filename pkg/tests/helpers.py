import numpy as np

from core.representation import MotionVector
from core.skeleton import NUM_JOINTS, AgeGroup, JointId, MovementKind, recording_from_array


def random_poses(rng: np.random.Generator, n_frames: int, dyadic: bool = False) -> np.ndarray:
    """
    وضعیت‌های تصادفی N×25×3 با ستون فقرات رو به بالا (بدون بردار صفر)
    """
    if dyadic:
        poses = rng.integers(-2048, 2048, size=(n_frames, NUM_JOINTS, 3)) / 1024.0
    else:
        poses = rng.uniform(-1.0, 1.0, size=(n_frames, NUM_JOINTS, 3))
    poses[:, JointId.SPINE_MID, 1] = poses[:, JointId.SPINE_BASE, 1] + 0.25
    poses[:, JointId.NECK, 1] = poses[:, JointId.SPINE_BASE, 1] + 0.5
    return poses


def make_recording(poses, subject_id="S01", movement=MovementKind.STAND_2_FEET_EYES_OPEN, group=AgeGroup.YOUNG):
    return recording_from_array(poses, subject_id, movement, group)


def blob_vectors(n_recordings: int, per_recording: int, d: int = 32, separation: float = 2.0,
                 noise: float = 0.1, seed: int = 0, movement=MovementKind.STAND_2_FEET_EYES_OPEN):
    """
    بردارهای حرکت دو خوشه جدا از هم؛ ضبط‌های زوج جوان و فرد مسن
    """
    rng = np.random.default_rng(seed)
    vectors = []
    for r in range(n_recordings):
        label = AgeGroup.YOUNG if r % 2 == 0 else AgeGroup.OLDER
        centre = separation if label is AgeGroup.YOUNG else -separation
        for _ in range(per_recording):
            vectors.append(MotionVector(centre + noise * rng.normal(size=d), label, movement, f"R{r:03d}"))
    return vectors
