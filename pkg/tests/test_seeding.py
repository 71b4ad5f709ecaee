import numpy as np

from core.seeding import derive_seed, make_rng


def test_derived_seed_is_stable_and_label_specific():
    assert derive_seed(2024, "kmeans", "Y01:chair_rise") == derive_seed(2024, "kmeans", "Y01:chair_rise")
    assert derive_seed(2024, "kmeans", "Y01:chair_rise") != derive_seed(2024, "kmeans", "Y02:chair_rise")
    assert derive_seed(2024, "folds", "chair_rise") != derive_seed(2025, "folds", "chair_rise")


def test_derived_seed_fits_in_63_bits():
    for seed in range(50):
        assert 0 <= derive_seed(seed, "cv", "chair_rise", "svm", seed % 10) < 2 ** 63


def test_make_rng_without_labels_uses_the_seed():
    assert np.array_equal(make_rng(5).integers(0, 100, 10), np.random.default_rng(5).integers(0, 100, 10))
    assert np.array_equal(make_rng(5, "synth").random(3), np.random.default_rng(derive_seed(5, "synth")).random(3))
