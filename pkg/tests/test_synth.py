import time
from dataclasses import replace

import numpy as np
import pytest

from core.classifiers import ForestConfig
from core.errors import ConfigError
from core.evaluation import cross_validate
from core.features import encode_recording
from core.recording_io import load_recording
from core.skeleton import AgeGroup, JointId, MovementKind, validate_frame
from core.synth import (
    FOOT_LIFT_M,
    SwayProfile,
    default_profiles,
    generate_cohort,
    generate_recording,
    jitter_profile,
    write_cohort,
)


def x_deviation(rec, joint=JointId.SPINE_SHOULDER):
    x = rec.positions()[:, joint, 0]
    return np.mean(np.abs(x - x.mean()))


def test_default_durations(still_profile):
    assert len(generate_recording(MovementKind.STAND_2_FEET_EYES_OPEN, still_profile).frames) == 300
    assert len(generate_recording(MovementKind.CHAIR_RISE, still_profile).frames) == 360
    assert len(generate_recording(MovementKind.CHAIR_RISE, still_profile, duration_s=2.0).frames) == 60


def test_frames_are_complete():
    rec = generate_recording(MovementKind.BALANCE_1_LEG_EYES_CLOSED, default_profiles()["older"], seed=3)
    assert all(validate_frame(frame) == [] for frame in rec.frames)
    assert rec.frame_rate == 30.0


def test_same_seed_same_recording():
    profile = default_profiles()["young"]
    a = generate_recording(MovementKind.CHAIR_RISE, profile, seed=5)
    b = generate_recording(MovementKind.CHAIR_RISE, profile, seed=5)
    c = generate_recording(MovementKind.CHAIR_RISE, profile, seed=6)
    assert np.array_equal(a.positions(), b.positions())
    assert not np.array_equal(a.positions(), c.positions())


def test_medio_lateral_sway_scales_with_amplitude(still_profile):
    small = replace(still_profile, ml_amplitude=0.005)
    large = replace(still_profile, ml_amplitude=0.05)
    movement = MovementKind.STAND_2_FEET_EYES_OPEN
    ratio = x_deviation(generate_recording(movement, large, seed=2)) / \
        x_deviation(generate_recording(movement, small, seed=2))
    assert ratio == pytest.approx(10.0, rel=1e-9)


def test_closing_the_eyes_increases_sway(still_profile):
    profile = replace(still_profile, ml_amplitude=0.01)
    open_eyes = generate_recording(MovementKind.STAND_2_FEET_EYES_OPEN, profile, seed=4)
    closed_eyes = generate_recording(MovementKind.STAND_2_FEET_EYES_CLOSED, profile, seed=4)
    assert x_deviation(closed_eyes) / x_deviation(open_eyes) == pytest.approx(1.3, rel=1e-9)


def test_one_leg_stance_lifts_the_right_foot(still_profile):
    rec = generate_recording(MovementKind.BALANCE_1_LEG_EYES_OPEN, still_profile)
    pose = rec.frames[0].positions
    lift = pose[JointId.ANKLE_RIGHT, 1] - pose[JointId.ANKLE_LEFT, 1]
    assert lift == pytest.approx(FOOT_LIFT_M, abs=0.02)


def test_chair_rise_repeats_five_times():
    rec = generate_recording(MovementKind.CHAIR_RISE, default_profiles()["young"], seed=1)
    com_y = np.array([v.as_array()[4] for v in encode_recording(rec)])
    midline = (com_y.min() + com_y.max()) / 2
    crossings = np.count_nonzero(np.diff(np.sign(com_y - midline)) != 0)
    assert crossings >= 10


def test_older_profile_leans_further_forward(still_profile):
    young = generate_recording(MovementKind.STAND_2_FEET_EYES_OPEN, replace(still_profile, lean_bias=0.03))
    older = generate_recording(MovementKind.STAND_2_FEET_EYES_OPEN, replace(still_profile, lean_bias=0.15))
    lean = [np.mean([v.as_array()[2] for v in encode_recording(rec)]) for rec in (young, older)]
    assert lean[0] < lean[1]


def test_static_profile_gives_identical_frames(still_profile):
    rec = generate_recording(MovementKind.STAND_2_FEET_EYES_OPEN, still_profile, seed=8)
    features = np.stack([v.as_array() for v in encode_recording(rec)])
    np.testing.assert_allclose(features, np.tile(features[0], (len(features), 1)), rtol=0, atol=1e-12)


def test_default_young_profile_sways_less():
    young, older = default_profiles()["young"], default_profiles()["older"]
    assert young.ml_amplitude < older.ml_amplitude
    assert young.ap_amplitude < older.ap_amplitude
    for seed in range(5):
        for movement in (MovementKind.STAND_2_FEET_EYES_OPEN, MovementKind.BALANCE_1_LEG_EYES_CLOSED):
            assert x_deviation(generate_recording(movement, young, seed=seed)) < \
                x_deviation(generate_recording(movement, older, seed=seed))


def test_jitter_keeps_profiles_valid(rng):
    for _ in range(50):
        profile = jitter_profile(default_profiles()["older"], rng)
        profile.validate()
        assert 0.85 <= profile.body_scale <= 1.15


@pytest.mark.parametrize("profile", [
    SwayProfile(-0.1, 0.0, 0.3, 0.0, 12.0, 0.0),
    SwayProfile(0.01, 0.01, 15.0, 0.0, 12.0, 0.0),
    SwayProfile(0.01, 0.01, 0.3, 0.0, 12.0, 0.0, body_scale=0.0),
])
def test_bad_profiles_are_rejected(profile):
    with pytest.raises(ConfigError):
        generate_recording(MovementKind.STAND_2_FEET_EYES_OPEN, profile)


def test_zero_duration_is_rejected(still_profile):
    with pytest.raises(ConfigError):
        generate_recording(MovementKind.STAND_2_FEET_EYES_OPEN, still_profile, duration_s=0.0)


def test_cohort_layout_and_files(tmp_path):
    recordings = generate_cohort(2, 3, movements=["stand_2_feet_eyes_open"], seed=9)
    assert [r.subject_id for r in recordings] == ["Y01", "Y02", "O01", "O02", "O03"]
    assert [r.group for r in recordings] == [AgeGroup.YOUNG] * 2 + [AgeGroup.OLDER] * 3

    paths = write_cohort(recordings, tmp_path)
    assert paths[0].name == "Y01_stand_2_feet_eyes_open.json"
    loaded = load_recording(paths[2])
    assert loaded.subject_id == "O01"
    assert loaded.group is AgeGroup.OLDER


def test_cohort_is_deterministic():
    a = generate_cohort(1, 1, movements=["chair_rise"], seed=3)
    b = generate_cohort(1, 1, movements=["chair_rise"], seed=3)
    assert all(np.array_equal(x.positions(), y.positions()) for x, y in zip(a, b))


def test_synthetic_groups_are_separable(synthetic_stand_vectors):
    report = cross_validate(synthetic_stand_vectors, "random_forest", ForestConfig(n_trees=20), seed=0, k_folds=4)
    assert report.metrics.accuracy >= 0.9


def test_full_cohort_is_generated_quickly():
    started = time.perf_counter()
    recordings = generate_cohort(seed=1)
    assert time.perf_counter() - started < 10.0
    assert len(recordings) == 54 * 5
    assert sum(r.group is AgeGroup.YOUNG for r in recordings) == 26 * 5
