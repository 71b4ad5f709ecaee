import argparse
import logging
import sys
from pathlib import Path
from typing import List, Optional

from cli.logging_setup import (
    UNCAUGHT_EXIT_CODE,
    global_exception_handler,
    install_exception_hook,
    safe_operation,
    setup_logging,
)
from cli.pipeline import run_pipeline
from cli.settings_manager import SettingsManager
from core.classifiers import ClassifierKind, TrainingSet, config_from_dict, load_model, predict, save_model, train
from core.errors import ConfigError, DataError, MotionKitError
from core.features import encode_recording, feature_table, read_feature_csv, stack_features, write_feature_csv
from core.plotting import plot_feature_traces
from core.recording_io import RECORDING_SUFFIXES, discover_recordings, load_recording, save_text_recording
from core.representation import (
    MotionVector,
    RepresentationOptions,
    centroid_motion_vector,
    prepare_recording,
    read_vector_csv,
    represent_features,
    represent_recording,
    write_vector_csv,
)
from core.skeleton import MovementKind
from core.synth import COHORT_OLDER, COHORT_YOUNG, generate_cohort, write_cohort

logger = logging.getLogger(__name__)

FEATURE_CSV_SUFFIX = ".csv"
RESOLVED_CONFIG_NAME = "config.resolved.json"

__all__ = ["build_parser", "global_exception_handler", "main", "safe_operation", "setup_logging"]


def _add_representation_options(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--standardize", action="store_true", help="z-score features before k-means")
    parser.add_argument("--smoothing-cutoff", type=float, default=None, help="low-pass cutoff in Hz")
    parser.add_argument("--max-iters", type=int, default=300)


def _representation_options(args, **extra) -> RepresentationOptions:
    return RepresentationOptions(
        standardize_features=args.standardize,
        smoothing_cutoff_hz=args.smoothing_cutoff,
        max_iters=args.max_iters,
        **extra,
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="motionkit",
        description="Young/older classification from Kinect skeleton recordings",
    )
    parser.add_argument("--log-file", default=None, help="also write the log to this file")
    parser.add_argument("--log-level", default=None, help="DEBUG, INFO, WARNING or ERROR")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="full cross-validation pipeline from a config file")
    run.add_argument("--config", required=True)
    run.add_argument("--seed", type=int, default=None)
    run.add_argument("--data-dir", default=None)
    run.add_argument("--output-dir", default=None)
    run.add_argument("--workers", type=int, default=None)

    synth = sub.add_parser("synth", help="write a synthetic cohort")
    synth.add_argument("--out", required=True)
    synth.add_argument("--seed", type=int, required=True)
    synth.add_argument("--subjects", type=int, default=COHORT_YOUNG + COHORT_OLDER)
    synth.add_argument("--young", type=int, default=None, help="overrides the young/older split of --subjects")
    synth.add_argument("--movements", nargs="*", default=None)
    synth.add_argument("--format", choices=("json", "txt"), default="json")

    encode = sub.add_parser("encode", help="dump per-frame features of one recording")
    encode.add_argument("recording")
    encode.add_argument("--out", required=True)
    encode.add_argument("--smoothing-cutoff", type=float, default=None)

    represent = sub.add_parser("represent", help="dump motion vectors of recordings")
    represent.add_argument("inputs", nargs="+", help="recording files, feature CSVs from encode, or directories")
    represent.add_argument("--seed", type=int, required=True)
    represent.add_argument("--out", required=True)
    represent.add_argument("--include-centroid", action="store_true")
    represent.add_argument("--max-family-size", type=int, default=None)
    _add_representation_options(represent)

    train_cmd = sub.add_parser("train", help="train and save one model from a motion vector CSV")
    train_cmd.add_argument("--vectors", required=True)
    train_cmd.add_argument("--classifier", required=True, choices=[c.value for c in ClassifierKind])
    train_cmd.add_argument("--seed", type=int, required=True)
    train_cmd.add_argument("--out", required=True)
    train_cmd.add_argument("--config", default=None, help="take hyperparameters from this config file")
    train_cmd.add_argument("--movement", default=None, help="use only vectors of this movement")

    predict_cmd = sub.add_parser("predict", help="classify one recording with a saved model")
    predict_cmd.add_argument("--model", required=True)
    predict_cmd.add_argument("recording")
    predict_cmd.add_argument("--seed", type=int, required=True)
    _add_representation_options(predict_cmd)

    plot = sub.add_parser("plot", help="feature trace figure of one recording")
    plot.add_argument("recording")
    plot.add_argument("--out", required=True)
    plot.add_argument("--seed", type=int, default=0)
    plot.add_argument("--clusters", action="store_true", help="shade k-means clusters")
    return parser


def cmd_run(args) -> int:
    settings = SettingsManager(args.config)
    settings.apply_overrides(seed=args.seed, data_dir=args.data_dir, output_dir=args.output_dir,
                             workers=args.workers)
    cfg = settings.pipeline_config()
    if not cfg.data_dir.is_dir():
        raise DataError(f"data directory does not exist: {cfg.data_dir}")
    result = run_pipeline(cfg)
    settings.save_settings(result.output_dir / RESOLVED_CONFIG_NAME, cfg.to_dict())
    print((result.output_dir / "table.txt").read_text(encoding="utf-8"), end="")
    return 0


def cmd_synth(args) -> int:
    if args.subjects < 2:
        raise ConfigError("--subjects must be at least 2")
    n_young = args.young if args.young is not None else round(args.subjects * COHORT_YOUNG / (COHORT_YOUNG + COHORT_OLDER))
    n_older = args.subjects - n_young
    if n_young < 0 or n_older < 0:
        raise ConfigError("--young cannot exceed --subjects")
    recordings = generate_cohort(n_young, n_older, args.movements, args.seed)
    if args.format == "json":
        write_cohort(recordings, args.out)
    else:
        for rec in recordings:
            group = rec.group.title.lower()
            save_text_recording(rec, Path(args.out) / f"{rec.subject_id}__{rec.movement.value}__{group}.txt")
    print(f"{len(recordings)} recordings written to {args.out}")
    return 0


def cmd_encode(args) -> int:
    rec = load_recording(args.recording)
    vectors = encode_recording(prepare_recording(rec, RepresentationOptions(smoothing_cutoff_hz=args.smoothing_cutoff)))
    path = write_feature_csv(feature_table(rec, vectors), args.out)
    print(f"{len(vectors)} frames encoded to {path}")
    return 0


def _collect_inputs(inputs: List[str]) -> List[Path]:
    paths = []
    for item in inputs:
        item = Path(item)
        if item.is_dir():
            paths.extend(discover_recordings(item))
        elif item.suffix.lower() in RECORDING_SUFFIXES + (FEATURE_CSV_SUFFIX,):
            paths.append(item)
        else:
            raise DataError(f"not a recording, feature CSV or directory: {item}")
    return paths


def _represent_input(path: Path, seed: int, options: RepresentationOptions) -> List[MotionVector]:
    """
    ورودی represent: CSV ویژگی‌های خروجی encode یا فایل ضبط خام
    """
    if path.suffix.lower() != FEATURE_CSV_SUFFIX:
        return represent_recording(load_recording(path), seed, options)[1]
    if options.smoothing_cutoff_hz:
        logger.warning(f"{path}: --smoothing-cutoff is ignored for feature CSV input")
    table = read_feature_csv(path)
    _, vectors = represent_features(table.values, table.frame_indices, table.group, table.movement,
                                    table.subject_id, seed, options)
    return vectors


def cmd_represent(args) -> int:
    options = _representation_options(args, include_centroid=args.include_centroid,
                                      max_family_size=args.max_family_size)
    vectors = []
    for path in _collect_inputs(args.inputs):
        vectors.extend(_represent_input(path, args.seed, options))
    path = write_vector_csv(vectors, args.out)
    print(f"{len(vectors)} motion vectors written to {path}")
    return 0


def cmd_train(args) -> int:
    vectors = read_vector_csv(args.vectors)
    if args.movement:
        movement = MovementKind.parse(args.movement)
        vectors = [v for v in vectors if v.movement is movement]
    kind = ClassifierKind.parse(args.classifier)
    values = SettingsManager(args.config).get_setting(kind.value) if args.config else {}
    cfg = config_from_dict(kind, values, seed=args.seed)
    model = train(kind, TrainingSet.from_vectors(vectors), cfg)
    save_model(model, args.out)
    print(f"{kind.title} model trained on {len(vectors)} vectors saved to {args.out}")
    return 0


def cmd_predict(args) -> int:
    model = load_model(args.model)
    rec = load_recording(args.recording)
    options = _representation_options(args)
    encoded = encode_recording(prepare_recording(rec, options))
    cluster_model, _ = represent_features(
        stack_features(encoded), [v.frame_index for v in encoded], rec.group, rec.movement,
        rec.subject_id, args.seed, options,
    )
    vector = centroid_motion_vector(cluster_model, rec.group, rec.movement, rec.subject_id, rec.recording_id)
    result = predict(model, vector.values)
    print(f"{result.label.title} {result.score:.4f}")
    return 0


def cmd_plot(args) -> int:
    rec = load_recording(args.recording)
    prepared = prepare_recording(rec)
    encoded = encode_recording(prepared)
    cluster_model = None
    if args.clusters:
        cluster_model, _ = represent_features(
            stack_features(encoded), [v.frame_index for v in encoded], rec.group, rec.movement,
            rec.subject_id, args.seed,
        )
    path = plot_feature_traces(feature_table(rec, encoded), args.out, cluster_model, rec.frame_rate)
    print(f"Feature traces saved to {path}")
    return 0


COMMANDS = {
    "run": cmd_run,
    "synth": cmd_synth,
    "encode": cmd_encode,
    "represent": cmd_represent,
    "train": cmd_train,
    "predict": cmd_predict,
    "plot": cmd_plot,
}


def main(argv: Optional[List[str]] = None) -> int:
    """
    نقطه ورود خط فرمان؛ کد خروج: ۰ موفق، ۱ پیکربندی، ۲ داده، ۳ آموزش، ۴ خطای داخلی
    """
    args = build_parser().parse_args(argv)
    setup_logging(args.log_level, args.log_file)
    install_exception_hook()
    try:
        return COMMANDS[args.command](args)
    except MotionKitError as e:
        logger.error(f"{e.category}: {e}")
        print(f"{e.category}: {e}", file=sys.stderr)
        return e.exit_code
    except Exception:
        global_exception_handler(*sys.exc_info())
        return UNCAUGHT_EXIT_CODE
