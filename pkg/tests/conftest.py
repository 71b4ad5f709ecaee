import numpy as np
import pytest

from core.representation import RepresentationOptions, represent_recording
from core.skeleton import AgeGroup, MovementKind
from core.synth import SwayProfile, default_profiles, generate_recording


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def still_profile():
    return SwayProfile(ml_amplitude=0.0, ap_amplitude=0.0, sway_frequency=0.3, lean_bias=0.0,
                       chair_rise_duration=12.0, noise_sigma=0.0)


@pytest.fixture(scope="session")
def synthetic_stand_vectors():
    """
    بردارهای حرکت یک گروه کوچک مصنوعی (۶ جوان، ۶ مسن)
    """
    profiles = default_profiles()
    options = RepresentationOptions(max_family_size=4)
    vectors = []
    for n in range(12):
        group = AgeGroup.YOUNG if n < 6 else AgeGroup.OLDER
        profile = profiles["young" if group is AgeGroup.YOUNG else "older"]
        rec = generate_recording(MovementKind.STAND_2_FEET_EYES_OPEN, profile, seed=n,
                                 subject_id=f"S{n:02d}", group=group)
        vectors.extend(represent_recording(rec, 7, options)[1])
    return vectors
