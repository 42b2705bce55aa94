"""
Script: harness.py
Created: 2026-10-02
Purpose: Experiment orchestration: manifest -> features -> nested LOSO SVM -> reports
Keywords: harness, loso, cross-validation, experiment, report, comparison, sffkit
Status: active
Prerequisites:
  - numpy, pandas
Changelog:
  - 2026-10-02: Initial version (extract_all, run_loso)
  - 2026-10-06: compare_features, relative improvements rounded half-up
  - 2026-10-09: Threaded extraction with ordered results
  - 2026-10-18: compare_tasks: one comparison per speaking task, stacked tables
See-Also: classifier.py, metrics.py, cli.py
"""

import json
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd

from .audio import load_wav
from .classifier import Dataset, grid_search_c, train_ovo
from .errors import (
    ExtractionError,
    LeakageError,
    MixedSampleRateError,
    ProtocolError,
    SffKitError,
)
from .features import extract, mean_pool
from .metrics import (
    aggregate_folds,
    confusion,
    format_classwise_table,
    format_table,
    round_half_up,
    write_confusion_csv,
)
from .models import (
    ComparisonReport,
    ComparisonRow,
    CorpusManifest,
    ExperimentConfig,
    ExperimentReport,
    FeatureKind,
    FoldReport,
    ManifestEntry,
    SpeakingTask,
    TaskProtocolReport,
    UtterancePrediction,
)

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]

ID_COLUMNS = ["utterance_id", "speaker_id", "class_label", "task", "feature_kind"]


# =============================================================================
# Feature table
# =============================================================================

@dataclass(frozen=True)
class FeatureTable:
    """One mean-pooled feature vector per utterance."""
    utterance_ids: Tuple[str, ...]
    speaker_ids: Tuple[str, ...]
    labels: np.ndarray
    tasks: Tuple[str, ...]
    feature_kind: FeatureKind
    X: np.ndarray
    sample_rate_hz: Optional[int] = None

    def __len__(self) -> int:
        return len(self.utterance_ids)

    def to_dataset(self) -> Dataset:
        return Dataset(X=self.X, labels=self.labels, speakers=self.speaker_ids)

    def to_frame(self) -> pd.DataFrame:
        df = pd.DataFrame({
            "utterance_id": list(self.utterance_ids),
            "speaker_id": list(self.speaker_ids),
            "class_label": self.labels.astype(int),
            "task": list(self.tasks),
            "feature_kind": self.feature_kind.value,
        })
        values = pd.DataFrame(self.X, columns=[f"f{i}" for i in range(self.X.shape[1])])
        return pd.concat([df, values], axis=1)


def write_feature_table(table: FeatureTable, path: PathLike, config: ExperimentConfig) -> Path:
    """CSV rows per utterance plus a JSON sidecar of the resolved configuration."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    table.to_frame().to_csv(path, index=False, float_format="%.12e")
    sidecar = {
        "feature_kind": table.feature_kind.value,
        "sample_rate_hz": table.sample_rate_hz,
        "resolved_mel_filters": config.features.resolved_mel_filters(table.feature_kind),
        "config": config.model_dump(mode="json"),
    }
    path.with_suffix(".json").write_text(json.dumps(sidecar, indent=2, sort_keys=True))
    return path


def read_feature_table(path: PathLike) -> Tuple[FeatureTable, Optional[ExperimentConfig]]:
    path = Path(path)
    df = pd.read_csv(
        path, dtype={"utterance_id": str, "speaker_id": str, "task": str, "feature_kind": str}
    )
    missing = [c for c in ID_COLUMNS if c not in df.columns]
    if missing:
        raise SffKitError(f"{path}: missing column(s) {missing}")
    kinds = df["feature_kind"].unique()
    if len(kinds) != 1:
        raise SffKitError(f"{path}: expected a single feature kind, got {list(kinds)}")
    value_cols = [c for c in df.columns if c not in ID_COLUMNS]

    config = None
    sample_rate = None
    sidecar = path.with_suffix(".json")
    if sidecar.is_file():
        meta = json.loads(sidecar.read_text())
        config = ExperimentConfig.model_validate(meta["config"])
        sample_rate = meta.get("sample_rate_hz")

    table = FeatureTable(
        utterance_ids=tuple(df["utterance_id"]),
        speaker_ids=tuple(df["speaker_id"]),
        labels=df["class_label"].to_numpy(dtype=int),
        tasks=tuple(df["task"]),
        feature_kind=FeatureKind.parse(kinds[0]),
        X=df[value_cols].to_numpy(dtype=np.float64),
        sample_rate_hz=sample_rate,
    )
    return table, config


# =============================================================================
# Extraction
# =============================================================================

def _extract_one(entry: ManifestEntry, config: ExperimentConfig) -> Tuple[np.ndarray, int]:
    sig = load_wav(entry.audio_path)
    fm = extract(config.feature_kind, sig, config.sff, config.features)
    return mean_pool(fm, entry.utterance_id).values, sig.sample_rate_hz


def extract_vectors(manifest: CorpusManifest, config: ExperimentConfig) -> FeatureTable:
    """Pooled features for every manifest entry of the configured task.

    Failures abort unless config.skip_errors, in which case they are logged and dropped.
    """
    entries = manifest.filter_task(config.task).entries
    if not entries:
        raise ProtocolError("no manifest entries match the task filter")

    def run(entry: ManifestEntry):
        try:
            return _extract_one(entry, config)
        except (SffKitError, ValueError, OSError) as exc:
            return exc

    if config.workers > 1:
        with ThreadPoolExecutor(max_workers=config.workers) as pool:
            results = list(pool.map(run, entries))
    else:
        results = [run(e) for e in entries]

    failures = [(e.utterance_id, str(r)) for e, r in zip(entries, results) if isinstance(r, Exception)]
    if failures:
        if not config.skip_errors:
            raise ExtractionError(failures)
        for uid, msg in failures:
            logger.warning("skipping %s: %s", uid, msg)

    kept = [(e, r) for e, r in zip(entries, results) if not isinstance(r, Exception)]
    if not kept:
        raise ExtractionError(failures)
    rates = sorted({rate for _, (_, rate) in kept})
    if len(rates) > 1:
        raise MixedSampleRateError(f"corpus mixes sample rates {rates}; resample beforehand")

    logger.info(
        "extracted %d %s vectors (%d skipped)", len(kept), config.feature_kind.value, len(failures)
    )
    return FeatureTable(
        utterance_ids=tuple(e.utterance_id for e, _ in kept),
        speaker_ids=tuple(e.speaker_id for e, _ in kept),
        labels=np.array([int(e.class_label) for e, _ in kept], dtype=int),
        tasks=tuple(e.task.value for e, _ in kept),
        feature_kind=config.feature_kind,
        X=np.vstack([vec for _, (vec, _) in kept]),
        sample_rate_hz=rates[0],
    )


def feature_file_name(config: ExperimentConfig) -> str:
    task = config.task.value if config.task else "all"
    return f"features_{config.feature_kind.value}_{task}.csv"


def extract_all(manifest: CorpusManifest, config: ExperimentConfig) -> Path:
    """Write the feature CSV (+ sidecar) into config.output_dir; re-runs overwrite identically."""
    table = extract_vectors(manifest, config)
    return write_feature_table(table, Path(config.output_dir) / feature_file_name(config), config)


# =============================================================================
# Cross-validation
# =============================================================================

def _check_protocol(data: Dataset) -> List[int]:
    classes = data.classes()
    if len(classes) < 2:
        raise ProtocolError(f"need at least two classes, got {classes}")
    for c in classes:
        n_speakers = len({s for s, lab in zip(data.speakers, data.labels) if lab == c})
        if n_speakers < 2:
            raise ProtocolError(f"class {c} has {n_speakers} speaker(s); LOSO needs at least 2")
    return classes


def run_fold(data: Dataset, speaker: str, classes: List[int], config: ExperimentConfig,
             utterance_ids: Sequence[str]) -> FoldReport:
    test_mask = data.speaker_mask(speaker)
    train = data.subset(~test_mask)
    if speaker in set(train.speakers):
        raise LeakageError(f"held-out speaker {speaker} present in training data")
    if train.classes() != classes:
        raise ProtocolError(f"fold {speaker}: a class vanished from the training set")

    search = grid_search_c(train, config.c_grid, config.svm_tol, config.svm_max_iter)
    model = train_ovo(train, search.best_c, config.svm_tol, config.svm_max_iter)

    predictions = []
    for idx in np.flatnonzero(test_mask):
        label, margins = model.predict_one(data.X[idx])
        predictions.append(UtterancePrediction(
            utterance_id=utterance_ids[idx],
            actual=int(data.labels[idx]),
            predicted=int(label),
            margins={f"{a}-{b}": v for (a, b), v in margins.items()},
        ))
    actual = [p.actual for p in predictions]
    predicted = [p.predicted for p in predictions]
    return FoldReport(
        speaker_id=speaker,
        predictions=predictions,
        chosen_c=search.best_c,
        grid_scores={f"{c:g}": s for c, s in search.scores.items()},
        skipped_inner_folds=search.skipped_folds,
        accuracy=float(np.mean(np.array(actual) == np.array(predicted))),
        confusion=confusion(actual, predicted),
    )


def cross_validate(table: FeatureTable, config: ExperimentConfig) -> ExperimentReport:
    """Leave-one-speaker-out with C chosen by an inner LOSO on each training split."""
    data = table.to_dataset()
    classes = _check_protocol(data)
    speakers = sorted(set(data.speakers))

    def run(speaker: str) -> FoldReport:
        fold = run_fold(data, speaker, classes, config, table.utterance_ids)
        logger.info("fold %s: C=%g accuracy=%.3f", speaker, fold.chosen_c, fold.accuracy)
        return fold

    # folds only read the shared dataset; results come back in speaker order
    if config.workers > 1:
        with ThreadPoolExecutor(max_workers=config.workers) as pool:
            folds = list(pool.map(run, speakers))
    else:
        folds = [run(s) for s in speakers]

    report = aggregate_folds(folds, table.feature_kind, config.task)
    report.baseline_mel_filters = config.features.resolved_mel_filters(FeatureKind.mfcc)
    report.config = config.model_copy(update={"feature_kind": table.feature_kind})
    return report


def run_loso(manifest: CorpusManifest, config: ExperimentConfig) -> ExperimentReport:
    return cross_validate(extract_vectors(manifest, config), config)


# =============================================================================
# Comparison
# =============================================================================

def improvement(accuracy: float, baseline: float) -> Tuple[float, float]:
    """(absolute delta in percentage points, relative delta (acc - base) / base)."""
    absolute = (accuracy - baseline) * 100.0
    if baseline:
        relative = (accuracy - baseline) / baseline
    else:
        relative = 0.0 if accuracy == baseline else float("nan")
    return absolute, relative


def compare_features(
    manifest: CorpusManifest,
    kinds: Sequence[FeatureKind],
    config: ExperimentConfig,
) -> Tuple[ComparisonReport, Dict[FeatureKind, ExperimentReport]]:
    """run_loso per kind; deltas are relative to the first (baseline) kind."""
    if len(kinds) < 2:
        raise ValueError("compare_features needs at least two feature kinds")
    reports: Dict[FeatureKind, ExperimentReport] = {}
    for kind in kinds:
        if kind not in reports:
            reports[kind] = run_loso(manifest, config.model_copy(update={"feature_kind": kind}))

    base = reports[kinds[0]].accuracy_mean
    rows = []
    for kind in kinds:
        rep = reports[kind]
        absolute, relative = improvement(rep.accuracy_mean, base)
        rows.append(ComparisonRow(
            feature_kind=kind,
            accuracy_mean=rep.accuracy_mean,
            accuracy_std=rep.accuracy_std,
            absolute_delta=absolute,
            relative_delta=relative,
            pooled=rep.pooled,
        ))
    return ComparisonReport(task=config.task, baseline=kinds[0], rows=rows), reports


DISPLAY_NAMES = {FeatureKind.mfcc: "MFCC", FeatureKind.sffcc: "SFFCC", FeatureKind.mfcc_sff: "MFCC-SFF"}


def relative_percent(relative: float) -> str:
    """Relative delta in percent with two-step half-up rounding; n/a for a zero baseline."""
    return round_half_up(relative * 100.0) if np.isfinite(relative) else "n/a"


def format_comparison(report: ComparisonReport) -> str:
    rows = [
        (DISPLAY_NAMES[r.feature_kind], r.accuracy_mean, r.accuracy_std, r.pooled)
        for r in report.rows
    ]
    extra = [[f"{r.absolute_delta:+.1f}", relative_percent(r.relative_delta)] for r in report.rows]
    return format_table(rows, extra_columns=["Abs. Δ (pp)", "Rel. Δ (%)"], extra_cells=extra)


# =============================================================================
# Task protocol
# =============================================================================

TASK_DISPLAY_NAMES = {
    SpeakingTask.vowel: "Vowels",
    SpeakingTask.sentence: "Sentences",
    SpeakingTask.read_text: "Read text",
}


def compare_tasks(
    manifest: CorpusManifest,
    tasks: Sequence[SpeakingTask],
    kinds: Sequence[FeatureKind],
    config: ExperimentConfig,
) -> Tuple[TaskProtocolReport, Dict[SpeakingTask, Dict[FeatureKind, ExperimentReport]]]:
    """compare_features once per speaking task, in the order given."""
    tasks = list(dict.fromkeys(tasks))
    if not tasks:
        raise ValueError("compare_tasks needs at least one task")
    comparisons = []
    reports: Dict[SpeakingTask, Dict[FeatureKind, ExperimentReport]] = {}
    for task in tasks:
        logger.info("task %s: comparing %s", task.value, ", ".join(k.value for k in kinds))
        comparison, per_kind = compare_features(
            manifest, kinds, config.model_copy(update={"task": task})
        )
        comparisons.append(comparison)
        reports[task] = per_kind
    return TaskProtocolReport(baseline=kinds[0], comparisons=comparisons), reports


def format_task_tables(protocol: TaskProtocolReport) -> str:
    blocks = []
    for comparison in protocol.comparisons:
        label = TASK_DISPLAY_NAMES[comparison.task] if comparison.task else "All tasks"
        blocks.append(f"### {label}\n\n{format_comparison(comparison).rstrip()}\n")
    return "\n".join(blocks)


def write_task_comparisons(
    protocol: TaskProtocolReport,
    reports: Dict[SpeakingTask, Dict[FeatureKind, ExperimentReport]],
    out_dir: PathLike,
) -> Path:
    """tasks.json, tasks.md (one table block per task) and a comparison directory per task."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / "tasks.json").write_text(protocol.model_dump_json(indent=2))
    (out_dir / "tasks.md").write_text(format_task_tables(protocol))
    for comparison in protocol.comparisons:
        write_comparison(comparison, reports[comparison.task], out_dir / comparison.task.value)
    return out_dir


# =============================================================================
# Output
# =============================================================================

def write_report(report: ExperimentReport, out_dir: PathLike) -> Path:
    """report.json, table.md (published column layout), classwise.md and confusion.csv."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / "report.json").write_text(report.model_dump_json(indent=2))
    row = [(DISPLAY_NAMES[report.feature_kind], report.accuracy_mean, report.accuracy_std, report.pooled)]
    notes = (
        f"\nAccuracy: mean ± {report.std_kind} over {report.fold_count} LOSO folds; "
        f"class-wise metrics from pooled predictions. C selection: {report.selection_protocol}; "
        f"unit: {report.pooling_unit}; baseline mel filters: {report.baseline_mel_filters}.\n"
    )
    (out_dir / "table.md").write_text(format_table(row) + notes)
    (out_dir / "classwise.md").write_text(format_classwise_table(row))
    write_confusion_csv(report.pooled.confusion, out_dir / "confusion.csv")
    return out_dir


def write_comparison(
    comparison: ComparisonReport,
    reports: Dict[FeatureKind, ExperimentReport],
    out_dir: PathLike,
) -> Path:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / "comparison.json").write_text(comparison.model_dump_json(indent=2))
    (out_dir / "comparison.md").write_text(format_comparison(comparison))
    for kind, rep in reports.items():
        write_report(rep, out_dir / kind.value)
    return out_dir


def parse_grid(text: str) -> List[float]:
    """'1e-4..1e4' -> decade steps inclusive; otherwise a comma-separated list."""
    text = text.strip()
    if ".." in text:
        lo, hi = (float(t) for t in text.split("..", 1))
        if lo <= 0 or hi < lo:
            raise ValueError(f"invalid grid range {text!r}")
        e_lo, e_hi = int(round(np.log10(lo))), int(round(np.log10(hi)))
        return [10.0 ** e for e in range(e_lo, e_hi + 1)]
    return [float(t) for t in text.split(",") if t.strip()]


def task_from_token(token: Optional[str]) -> Optional[SpeakingTask]:
    if token is None or token == "all":
        return None
    return SpeakingTask(token)
