"""
خط لوله کامل: خواندن ضبط‌ها ← نمایش حرکت ← اعتبارسنجی متقابل ← گزارش

همه فایل‌های خروجی فقط پس از پایان همه خانه‌های (حرکت، طبقه‌بند) نوشته
می‌شوند؛ اجرای ناموفق هیچ خروجی ناقصی باقی نمی‌گذارد.
"""

import json
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Tuple

from cli.logging_setup import safe_operation
from cli.settings_manager import PipelineConfig
from core.errors import DataError
from core.evaluation import EvaluationReport, cross_validate, format_table, write_report_csv, write_summary_csv
from core.plotting import plot_report_summary
from core.recording_io import discover_recordings, file_sha256, load_recording
from core.representation import MotionVector, represent_recording
from core.skeleton import AgeGroup, MotionRecording, MovementKind

logger = logging.getLogger(__name__)

MANIFEST_VERSION = 1


@dataclass
class PipelineResult:
    reports: List[EvaluationReport]
    output_dir: Path
    manifest: Dict
    written: List[Path] = field(default_factory=list)


def _load_all(cfg: PipelineConfig) -> Tuple[List[MotionRecording], List[Dict[str, str]]]:
    paths = discover_recordings(cfg.data_dir)
    if not paths:
        raise DataError(f"no recordings (*.json, *.txt) in {cfg.data_dir}")
    recordings = [load_recording(path) for path in paths]
    inputs = [{"file": path.name, "sha256": file_sha256(path)} for path in paths]
    return recordings, inputs


def _represent(rec: MotionRecording, cfg: PipelineConfig) -> Tuple[MotionRecording, Optional[List[MotionVector]], str]:
    try:
        _, vectors = represent_recording(rec, cfg.seed, cfg.representation)
        return rec, vectors, ""
    except DataError as e:
        logger.warning(f"Skipping {rec.recording_id}: {type(e).__name__}: {e}")
        return rec, None, f"{type(e).__name__}: {e}"


def represent_movement(recordings: List[MotionRecording], cfg: PipelineConfig):
    """
    بردارهای حرکت همه ضبط‌های یک حرکت، به ترتیب فایل‌ها
    """
    if cfg.workers > 1:
        with ThreadPoolExecutor(max_workers=cfg.workers) as pool:
            return list(pool.map(lambda rec: _represent(rec, cfg), recordings))
    return [_represent(rec, cfg) for rec in recordings]


def run_pipeline(cfg: PipelineConfig) -> PipelineResult:
    """
    اجرای کامل و نوشتن گزارش‌ها، جدول، نمودار و manifest در output_dir
    """
    recordings, inputs = _load_all(cfg)
    logger.info(f"Loaded {len(recordings)} recordings from {cfg.data_dir}")

    reports: List[EvaluationReport] = []
    counts: Dict[str, Dict] = {}
    skipped: List[Dict[str, str]] = []
    for movement in cfg.movements:
        selected = [rec for rec in recordings if rec.movement is movement]
        if not selected:
            logger.warning(f"No recordings for {movement.title}, skipping")
            continue
        vectors: List[MotionVector] = []
        used = {AgeGroup.YOUNG.title.lower(): 0, AgeGroup.OLDER.title.lower(): 0}
        for rec, rec_vectors, reason in represent_movement(selected, cfg):
            if rec_vectors is None:
                skipped.append({"recording": rec.recording_id, "reason": reason})
                continue
            vectors.extend(rec_vectors)
            used[rec.group.title.lower()] += 1
        counts[movement.value] = {
            "recordings": used,
            "vectors": {
                group.title.lower(): sum(1 for v in vectors if v.label is group)
                for group in (AgeGroup.YOUNG, AgeGroup.OLDER)
            },
        }
        logger.info(f"{movement.title}: {len(vectors)} motion vectors from {sum(used.values())} recordings")
        for kind in cfg.classifiers:
            reports.append(cross_validate(
                vectors, kind, cfg.classifier_configs[kind], cfg.seed, cfg.k_folds, cfg.workers,
            ))
    if not reports:
        raise DataError(f"none of the configured movements has recordings in {cfg.data_dir}")

    manifest = {
        "manifest_version": MANIFEST_VERSION,
        "seed": cfg.seed,
        "config": cfg.to_dict(),
        "inputs": inputs,
        "counts": counts,
        "skipped_recordings": skipped,
        "reports": [f"reports/{r.movement.value}__{r.classifier.value}.csv" for r in reports],
    }
    written = write_outputs(reports, manifest, cfg.output_dir)
    return PipelineResult(reports, cfg.output_dir, manifest, written)


def write_outputs(reports: List[EvaluationReport], manifest: Dict, output_dir: Path) -> List[Path]:
    output_dir = Path(output_dir)
    output_dir.mkdir(parents=True, exist_ok=True)
    written = []
    for report in reports:
        name = f"{report.movement.value}__{report.classifier.value}.csv"
        written.append(write_report_csv(report, output_dir / "reports" / name))
    written.append(write_summary_csv(reports, output_dir / "summary.csv"))
    table = output_dir / "table.txt"
    table.write_text(format_table(reports), encoding="utf-8")
    written.append(table)
    with safe_operation("summary plot"):
        written.append(plot_report_summary(reports, output_dir / "summary.png"))
    manifest_path = output_dir / "manifest.json"
    with open(manifest_path, "w", encoding="utf-8") as f:
        json.dump(manifest, f, indent=2, sort_keys=True)
    written.append(manifest_path)
    logger.info(f"Wrote {len(written)} output files to {output_dir}")
    return written
