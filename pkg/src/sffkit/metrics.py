"""
Script: metrics.py
Created: 2026-09-20
Purpose: Confusion matrices, UAR, class-wise precision/recall/F1, fold aggregation and report tables
Keywords: metrics, confusion-matrix, uar, balanced-accuracy, precision, recall, f1, sffkit
Status: active
Prerequisites:
  - numpy, pandas, scikit-learn (confusion_matrix)
Changelog:
  - 2026-09-20: Initial version
  - 2026-10-04: Table rendering (published column layout) and confusion CSV
See-Also: harness.py
"""

from decimal import ROUND_HALF_UP, Decimal
from pathlib import Path
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd
from sklearn.metrics import confusion_matrix

from .models import (
    CLASS_ORDER,
    ConfusionMatrix,
    ExperimentReport,
    FeatureKind,
    FoldReport,
    MetricReport,
    SeverityClass,
    SpeakingTask,
)

TABLE_COLUMNS = ["Feature", "Accuracy"] + [
    f"{metric}-{c}" for c in CLASS_ORDER for metric in ("Precision", "Recall", "F1")
]


# =============================================================================
# Confusion / metrics
# =============================================================================

def confusion(
    actual: Sequence[int], predicted: Sequence[int], classes: Sequence[int] = CLASS_ORDER
) -> ConfusionMatrix:
    """counts[a][p] over the fixed class order (rows actual, columns predicted)."""
    if len(actual) != len(predicted):
        raise ValueError(f"length mismatch: {len(actual)} actual vs {len(predicted)} predicted")
    known = set(classes)
    unknown = {int(v) for v in list(actual) + list(predicted)} - known
    if unknown:
        raise ValueError(f"unknown label(s) {sorted(unknown)}")
    if len(actual) == 0:
        return ConfusionMatrix(counts=[[0] * len(classes) for _ in classes])
    cm = confusion_matrix(
        np.asarray(actual, dtype=int), np.asarray(predicted, dtype=int), labels=list(classes)
    )
    return ConfusionMatrix(counts=cm.astype(int).tolist())


def compute_metrics(cm: ConfusionMatrix) -> MetricReport:
    """Per-class P/R/F1 and UAR; 0/0 ratios become 0 and are flagged.

    UAR is the mean recall over all classes; a class absent from the ground truth
    contributes recall 0 and is listed in undefined_recall.
    """
    counts = np.asarray(cm.counts, dtype=np.float64)
    total = counts.sum()
    if total <= 0:
        raise ValueError("confusion matrix is empty")
    diag = np.diag(counts)
    row = counts.sum(axis=1)
    col = counts.sum(axis=0)

    recall = np.divide(diag, row, out=np.zeros_like(diag), where=row > 0)
    precision = np.divide(diag, col, out=np.zeros_like(diag), where=col > 0)
    pr = precision + recall
    f1 = np.divide(2 * precision * recall, pr, out=np.zeros_like(diag), where=pr > 0)

    return MetricReport(
        uar=float(recall.mean()),
        accuracy=float(diag.sum() / total),
        precision=precision.tolist(),
        recall=recall.tolist(),
        f1=f1.tolist(),
        support=row.astype(int).tolist(),
        undefined_precision=[int(i) for i in np.flatnonzero(col == 0)],
        undefined_recall=[int(i) for i in np.flatnonzero(row == 0)],
        confusion=cm,
    )


def mean_and_std(values: Sequence[float]) -> Tuple[float, float]:
    """Mean and population standard deviation."""
    arr = np.asarray(values, dtype=np.float64)
    if arr.size == 0:
        raise ValueError("no values to aggregate")
    return float(arr.mean()), float(arr.std(ddof=0))


def aggregate_folds(
    folds: Sequence[FoldReport],
    feature_kind: FeatureKind,
    task: Optional[SpeakingTask] = None,
) -> ExperimentReport:
    """Per-fold accuracy mean +- std plus metrics on the pooled fold predictions."""
    if not folds:
        raise ValueError("no folds to aggregate")
    acc_mean, acc_std = mean_and_std([f.accuracy for f in folds])
    actual = [p.actual for f in folds for p in f.predictions]
    predicted = [p.predicted for f in folds for p in f.predictions]
    pooled = compute_metrics(confusion(actual, predicted))
    return ExperimentReport(
        feature_kind=feature_kind,
        task=task,
        fold_count=len(folds),
        accuracy_mean=acc_mean,
        accuracy_std=acc_std,
        pooled=pooled,
        folds=list(folds),
    )


# =============================================================================
# Presentation
# =============================================================================

def round_half_up(percent: float) -> str:
    """Round to hundredths, then tenths, half-up: 5.7495 -> 5.75 -> '5.8'."""
    value = Decimal(repr(float(percent)))
    value = value.quantize(Decimal("0.01"), rounding=ROUND_HALF_UP)
    return str(value.quantize(Decimal("0.1"), rounding=ROUND_HALF_UP))


def _metric_cells(m: MetricReport) -> List[str]:
    cells = []
    for c in CLASS_ORDER:
        cells += [f"{m.precision[c]:.2f}", f"{m.recall[c]:.2f}", f"{m.f1[c]:.2f}"]
    return cells


def format_table(
    rows: Sequence[Tuple[str, float, float, MetricReport]],
    extra_columns: Optional[List[str]] = None,
    extra_cells: Optional[List[List[str]]] = None,
) -> str:
    """Pipe table with the Feature / Accuracy / Precision-i / Recall-i / F1-i layout."""
    header = TABLE_COLUMNS + (extra_columns or [])
    lines = ["| " + " | ".join(header) + " |", "|" + "|".join("---" for _ in header) + "|"]
    for i, (name, acc_mean, acc_std, metrics) in enumerate(rows):
        cells = [name, f"{acc_mean * 100:.1f} ± {acc_std * 100:.1f}"] + _metric_cells(metrics)
        if extra_cells:
            cells += extra_cells[i]
        lines.append("| " + " | ".join(cells) + " |")
    return "\n".join(lines) + "\n"


def format_classwise_table(rows: Sequence[Tuple[str, float, float, MetricReport]]) -> str:
    """Accuracy plus class-wise accuracies (per-class recall) in percent."""
    names = [SeverityClass(c).name.capitalize() for c in CLASS_ORDER]
    header = ["Feature", "Accuracy"] + names
    lines = ["| " + " | ".join(header) + " |", "|" + "|".join("---" for _ in header) + "|"]
    for name, acc_mean, acc_std, metrics in rows:
        cells = [name, f"{acc_mean * 100:.1f} ± {acc_std * 100:.1f}"]
        cells += [f"{metrics.recall[c] * 100:.1f}" for c in CLASS_ORDER]
        lines.append("| " + " | ".join(cells) + " |")
    return "\n".join(lines) + "\n"


def write_confusion_csv(cm: ConfusionMatrix, path: Union[str, Path]) -> Path:
    """Rows = actual class, columns = predicted class."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    names = [SeverityClass(c).name for c in CLASS_ORDER]
    df = pd.DataFrame(cm.counts, index=names, columns=names)
    df.index.name = "actual\\predicted"
    df.to_csv(path)
    return path
