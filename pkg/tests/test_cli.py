import json
import logging
import sys

import numpy as np
import pandas as pd
import pytest

from cli.cli import main
from cli.logging_setup import setup_logging
from cli.settings_manager import SettingsManager
from core.representation import read_vector_csv
from core.skeleton import AgeGroup

STAND = "stand_2_feet_eyes_open"


@pytest.fixture(autouse=True)
def restore_logging(monkeypatch):
    monkeypatch.setattr(sys, "excepthook", sys.excepthook)
    yield
    logging.getLogger().handlers.clear()


def synth(tmp_path, subjects=10, movements=(STAND,), seed=3):
    out = tmp_path / "data"
    assert main(["synth", "--out", str(out), "--seed", str(seed), "--subjects", str(subjects),
                 "--movements", *movements]) == 0
    return out


def small_config(tmp_path, data_dir, **overrides):
    document = {
        "data_dir": str(data_dir),
        "output_dir": str(tmp_path / "out"),
        "seed": 11,
        "movements": [STAND],
        "classifiers": ["svm", "random_forest", "deep_net"],
        "representation": {"max_family_size": 3},
        "evaluation": {"k_folds": 5},
        "random_forest": {"n_trees": 10},
        "deep_net": {"hidden_layers": [8], "epochs": 10},
    }
    document.update(overrides)
    path = tmp_path / "config.json"
    path.write_text(json.dumps(document), encoding="utf-8")
    return path


def test_synth_then_encode(tmp_path, capsys):
    data = synth(tmp_path, subjects=2)
    assert sorted(p.name for p in data.iterdir()) == [f"O01_{STAND}.json", f"Y01_{STAND}.json"]
    out = tmp_path / "features.csv"
    assert main(["encode", str(data / f"Y01_{STAND}.json"), "--out", str(out)]) == 0
    assert len(out.read_text(encoding="utf-8").splitlines()) == 301
    assert "300 frames" in capsys.readouterr().out


def test_synth_text_format(tmp_path):
    out = tmp_path / "txt"
    assert main(["synth", "--out", str(out), "--seed", "1", "--subjects", "2", "--movements", "chair_rise",
                 "--format", "txt"]) == 0
    assert (out / "Y01__chair_rise__young.txt").exists()
    assert (out / "O01__chair_rise__older.txt").exists()


def test_represent_train_predict(tmp_path, capsys):
    data = synth(tmp_path, subjects=6)
    vectors = tmp_path / "vectors.csv"
    model = tmp_path / "model.json"
    assert main(["represent", str(data), "--seed", "5", "--out", str(vectors), "--max-family-size", "4"]) == 0
    assert main(["train", "--vectors", str(vectors), "--classifier", "random_forest", "--seed", "5",
                 "--out", str(model)]) == 0
    capsys.readouterr()

    assert main(["predict", "--model", str(model), str(data / f"O02_{STAND}.json"), "--seed", "5"]) == 0
    label, score = capsys.readouterr().out.split()
    assert label == "Older"
    assert 0.0 <= float(score) < 0.5


def test_represent_consumes_encoded_features(tmp_path):
    data = synth(tmp_path, subjects=2)
    recording = data / f"O01_{STAND}.json"
    features = tmp_path / "features.csv"
    assert main(["encode", str(recording), "--out", str(features)]) == 0
    from_features = tmp_path / "from_features.csv"
    from_recording = tmp_path / "from_recording.csv"
    assert main(["represent", str(features), "--seed", "2", "--out", str(from_features)]) == 0
    assert main(["represent", str(recording), "--seed", "2", "--out", str(from_recording)]) == 0

    a = read_vector_csv(from_features)
    b = read_vector_csv(from_recording)
    assert len(a) == len(b) > 0
    assert [v.recording_id for v in a] == [v.recording_id for v in b] == [f"O01:{STAND}"] * len(a)
    assert all(v.label is AgeGroup.OLDER for v in a)
    np.testing.assert_allclose(np.stack([v.values for v in a]), np.stack([v.values for v in b]), rtol=1e-9, atol=1e-12)


def test_represent_rejects_unknown_inputs(tmp_path, capsys):
    stray = tmp_path / "notes.md"
    stray.write_text("x", encoding="utf-8")
    assert main(["represent", str(stray), "--seed", "1", "--out", str(tmp_path / "v.csv")]) == 2
    assert "DataError" in capsys.readouterr().err


def test_predict_with_wrong_dimension_is_a_train_error(tmp_path, capsys):
    data = synth(tmp_path, subjects=4, movements=(STAND, "chair_rise"))
    vectors = tmp_path / "vectors.csv"
    model = tmp_path / "model.json"
    assert main(["represent", str(data / f"Y01_{STAND}.json"), str(data / f"O01_{STAND}.json"),
                 "--seed", "1", "--out", str(vectors)]) == 0
    assert main(["train", "--vectors", str(vectors), "--classifier", "svm", "--seed", "1",
                 "--out", str(model)]) == 0
    capsys.readouterr()
    code = main(["predict", "--model", str(model), str(data / "Y01_chair_rise.json"), "--seed", "1"])
    assert code == 3
    assert "TrainError" in capsys.readouterr().err


def test_train_on_one_class_is_a_train_error(tmp_path, capsys):
    data = synth(tmp_path, subjects=2)
    vectors = tmp_path / "vectors.csv"
    assert main(["represent", str(data / f"Y01_{STAND}.json"), "--seed", "1", "--out", str(vectors)]) == 0
    code = main(["train", "--vectors", str(vectors), "--classifier", "svm", "--seed", "1",
                 "--out", str(tmp_path / "m.json")])
    assert code == 3
    assert not (tmp_path / "m.json").exists()


def test_run_writes_reports_and_manifest(tmp_path, capsys):
    data = synth(tmp_path)
    capsys.readouterr()
    assert main(["run", "--config", str(small_config(tmp_path, data))]) == 0
    out = tmp_path / "out"
    printed = capsys.readouterr().out
    assert printed == (out / "table.txt").read_text(encoding="utf-8")
    assert "Stand 2 feet, eyes open" in printed

    for kind in ("svm", "random_forest", "deep_net"):
        frame = pd.read_csv(out / "reports" / f"{STAND}__{kind}.csv")
        assert len(frame) == 6
    assert len(pd.read_csv(out / "summary.csv")) == 3
    assert (out / "summary.png").exists()

    manifest = json.loads((out / "manifest.json").read_text(encoding="utf-8"))
    assert manifest["seed"] == 11
    assert len(manifest["inputs"]) == 10
    assert all(len(item["sha256"]) == 64 for item in manifest["inputs"])
    assert manifest["counts"][STAND]["recordings"] == {"young": 5, "older": 5}
    assert manifest["config"]["evaluation"]["k_folds"] == 5

    resolved = SettingsManager(str(out / "config.resolved.json")).pipeline_config()
    assert resolved.to_dict() == manifest["config"]


def test_run_is_reproducible(tmp_path):
    data = synth(tmp_path)
    config = small_config(tmp_path, data, classifiers=["svm", "random_forest"])
    assert main(["run", "--config", str(config), "--output-dir", str(tmp_path / "a")]) == 0
    assert main(["run", "--config", str(config), "--output-dir", str(tmp_path / "b")]) == 0
    for name in (f"reports/{STAND}__svm.csv", f"reports/{STAND}__random_forest.csv", "summary.csv"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_run_with_workers_matches_sequential(tmp_path):
    data = synth(tmp_path)
    config = small_config(tmp_path, data, classifiers=["random_forest"])
    assert main(["run", "--config", str(config), "--output-dir", str(tmp_path / "a")]) == 0
    assert main(["run", "--config", str(config), "--output-dir", str(tmp_path / "b"), "--workers", "3"]) == 0
    name = "summary.csv"
    assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_run_on_empty_data_dir_is_a_data_error(tmp_path, capsys):
    empty = tmp_path / "empty"
    empty.mkdir()
    assert main(["run", "--config", str(small_config(tmp_path, empty))]) == 2
    assert "DataError" in capsys.readouterr().err
    assert not (tmp_path / "out").exists()


def test_run_on_missing_data_dir_is_a_data_error(tmp_path):
    assert main(["run", "--config", str(small_config(tmp_path, tmp_path / "nope"))]) == 2


def test_run_without_seed_is_a_config_error(tmp_path, capsys):
    config = small_config(tmp_path, tmp_path)
    document = json.loads(config.read_text(encoding="utf-8"))
    del document["seed"]
    config.write_text(json.dumps(document), encoding="utf-8")
    assert main(["run", "--config", str(config)]) == 1
    assert "ConfigError" in capsys.readouterr().err


def test_run_with_unknown_key_is_a_config_error(tmp_path):
    config = small_config(tmp_path, tmp_path, verbose=True)
    assert main(["run", "--config", str(config)]) == 1


def test_plot_writes_a_figure(tmp_path):
    data = synth(tmp_path, subjects=2, movements=("chair_rise",))
    out = tmp_path / "traces.png"
    assert main(["plot", str(data / "O01_chair_rise.json"), "--out", str(out), "--clusters"]) == 0
    assert out.stat().st_size > 0


def test_unknown_log_level_falls_back_to_info(capsys):
    assert setup_logging("LOUD") == logging.INFO
    assert "Unknown log level" in capsys.readouterr().err


def test_log_file_receives_messages(tmp_path):
    log_file = tmp_path / "run.log"
    synth_dir = tmp_path / "data"
    assert main(["--log-file", str(log_file), "synth", "--out", str(synth_dir), "--seed", "1",
                 "--subjects", "2", "--movements", STAND]) == 0
    logging.getLogger().handlers[-1].flush()
    assert "Generated 2 synthetic recordings" in log_file.read_text(encoding="utf-8")


@pytest.mark.slow
def test_full_synthetic_cohort_is_classified_well(tmp_path):
    data = synth(tmp_path, subjects=54, movements=(), seed=2024)
    config = small_config(
        tmp_path, data,
        movements=["chair_rise", STAND, "stand_2_feet_eyes_closed", "balance_1_leg_eyes_open",
                   "balance_1_leg_eyes_closed"],
        representation={"max_family_size": 10},
        evaluation={"k_folds": 10},
        random_forest={},
        deep_net={},
    )
    assert main(["run", "--config", str(config)]) == 0
    summary = pd.read_csv(tmp_path / "out" / "summary.csv")
    assert len(summary) == 15
    assert (summary["f1"] >= 0.9).all()
    assert (summary["mcc"] >= 0.8).all()
