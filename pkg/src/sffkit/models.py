"""
Script: models.py
Created: 2026-09-14
Purpose: Pydantic models for configuration, corpus manifests and experiment reports
Keywords: models, pydantic, config, manifest, report, sffkit
Status: active
Prerequisites:
  - pydantic>=2
Changelog:
  - 2026-09-14: Initial version (SffConfig, FeatureConfig, manifest models)
  - 2026-10-02: Report models (FoldReport, ExperimentReport, ComparisonReport)
  - 2026-10-18: TaskProtocolReport; workers excluded from the dumped config
See-Also: config.py (environment settings)
"""

import math
from enum import Enum, IntEnum
from typing import Dict, List, Optional

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from .errors import ConfigError


# =============================================================================
# Enumerations
# =============================================================================

class SeverityClass(IntEnum):
    healthy = 0
    mild = 1
    severe = 2


CLASS_ORDER: List[int] = [c.value for c in SeverityClass]


class SpeakingTask(str, Enum):
    vowel = "vowel"
    sentence = "sentence"
    read_text = "read_text"


class FeatureKind(str, Enum):
    mfcc = "mfcc"
    sffcc = "sffcc"
    mfcc_sff = "mfcc_sff"

    @classmethod
    def parse(cls, token: str) -> "FeatureKind":
        """Accept CLI spellings such as 'mfcc-sff'."""
        return cls(token.strip().lower().replace("-", "_"))


# =============================================================================
# Analysis configuration
# =============================================================================

class SffConfig(BaseModel):
    """Single frequency filtering parameters."""
    model_config = ConfigDict(frozen=True)

    r: float = Field(0.99, description="Pole magnitude of the single-pole filter, 0 < r < 1")
    delta_f_hz: float = Field(31.25, gt=0, description="Spacing between analysed frequencies (Hz)")
    explicit_k: Optional[int] = Field(None, gt=0, description="Override for the channel count K")

    @field_validator("r")
    @classmethod
    def _stable_pole(cls, v: float) -> float:
        if not 0.0 < v < 1.0:
            raise ValueError("r must lie strictly between 0 and 1")
        return v

    def num_channels(self, sample_rate_hz: int) -> int:
        """K = floor((fs/2)/delta_f) unless explicit_k is set."""
        nyquist = sample_rate_hz / 2.0
        if self.delta_f_hz > nyquist:
            raise ConfigError(
                f"delta_f_hz={self.delta_f_hz} exceeds Nyquist ({nyquist} Hz)"
            )
        if self.explicit_k is not None:
            return self.explicit_k
        k = int(math.floor(nyquist / self.delta_f_hz + 1e-9))
        if k < 1:
            raise ConfigError("SFF channel count computes to 0")
        return k


class FeatureConfig(BaseModel):
    """Frame-wise cepstral feature parameters."""
    model_config = ConfigDict(frozen=True)

    n_cepstra: int = Field(13, gt=0, description="Static coefficients, 0th included")
    n_mel_filters: Optional[int] = Field(
        None, gt=0, description="Mel filters; None = 80 for mfcc_sff, 40 for mfcc"
    )
    hop_s: float = Field(0.010, gt=0)
    window_s: float = Field(0.030, gt=0, description="STFT window (baseline MFCC only)")
    delta_window: int = Field(2, gt=0)
    log_floor: float = Field(1e-10, gt=0)
    mel_f_min: Optional[float] = Field(None, ge=0)
    mel_f_max: Optional[float] = Field(None, gt=0)

    def resolved_mel_filters(self, kind: FeatureKind) -> int:
        if self.n_mel_filters is not None:
            return self.n_mel_filters
        return 80 if kind == FeatureKind.mfcc_sff else 40

    @property
    def n_features(self) -> int:
        return 3 * self.n_cepstra


DEFAULT_C_GRID: List[float] = [10.0 ** e for e in range(-4, 5)]


class ExperimentConfig(BaseModel):
    """Everything needed to reproduce one experiment; embedded in every report."""

    feature_kind: FeatureKind = FeatureKind.sffcc
    task: Optional[SpeakingTask] = Field(None, description="None = all tasks")
    sff: SffConfig = Field(default_factory=SffConfig)
    features: FeatureConfig = Field(default_factory=FeatureConfig)
    c_grid: List[float] = Field(default_factory=lambda: list(DEFAULT_C_GRID))
    svm_tol: float = Field(1e-4, gt=0)
    svm_max_iter: int = Field(100_000, gt=0)
    seed: int = Field(0, description="Reserved; the pipeline is deterministic")
    output_dir: str = "results"
    skip_errors: bool = Field(False, description="Skip failing recordings instead of aborting")
    workers: int = Field(1, gt=0, exclude=True, description="Thread count; not part of the experiment identity")

    @field_validator("c_grid")
    @classmethod
    def _positive_grid(cls, v: List[float]) -> List[float]:
        if not v:
            raise ValueError("c_grid must not be empty")
        if any(c <= 0 for c in v):
            raise ValueError("every C must be positive")
        return v


# =============================================================================
# Corpus manifest
# =============================================================================

class ManifestEntry(BaseModel):
    model_config = ConfigDict(frozen=True)

    audio_path: str
    speaker_id: str
    class_label: SeverityClass
    task: SpeakingTask
    utterance_id: str


class CorpusManifest(BaseModel):
    entries: List[ManifestEntry] = Field(default_factory=list)

    def speakers(self) -> List[str]:
        return sorted({e.speaker_id for e in self.entries})

    def speaker_classes(self) -> Dict[str, SeverityClass]:
        return {e.speaker_id: e.class_label for e in self.entries}

    def filter_task(self, task: Optional[SpeakingTask]) -> "CorpusManifest":
        if task is None:
            return self
        return CorpusManifest(entries=[e for e in self.entries if e.task == task])


class BalanceReport(BaseModel):
    counts: Dict[str, int]
    balanced: bool


# =============================================================================
# Metrics and reports
# =============================================================================

class ConfusionMatrix(BaseModel):
    """Rows = actual class, columns = predicted class, order healthy/mild/severe."""
    counts: List[List[int]]

    @model_validator(mode="after")
    def _square_non_negative(self) -> "ConfusionMatrix":
        n = len(self.counts)
        if any(len(row) != n for row in self.counts):
            raise ValueError("confusion matrix must be square")
        if any(v < 0 for row in self.counts for v in row):
            raise ValueError("confusion counts must be non-negative")
        return self

    @property
    def total(self) -> int:
        return sum(sum(row) for row in self.counts)

    def __add__(self, other: "ConfusionMatrix") -> "ConfusionMatrix":
        return ConfusionMatrix(counts=[
            [a + b for a, b in zip(ra, rb)] for ra, rb in zip(self.counts, other.counts)
        ])


class MetricReport(BaseModel):
    uar: float
    accuracy: float
    precision: List[float]
    recall: List[float]
    f1: List[float]
    support: List[int]
    undefined_precision: List[int] = Field(
        default_factory=list, description="Classes never predicted (precision set to 0)"
    )
    undefined_recall: List[int] = Field(
        default_factory=list, description="Classes absent from ground truth (recall set to 0)"
    )
    confusion: ConfusionMatrix


class UtterancePrediction(BaseModel):
    utterance_id: str
    actual: int
    predicted: int
    margins: Dict[str, float] = Field(
        default_factory=dict, description="Pairwise decision values keyed 'a-b'"
    )


class FoldReport(BaseModel):
    speaker_id: str
    predictions: List[UtterancePrediction]
    chosen_c: float
    grid_scores: Dict[str, float] = Field(default_factory=dict)
    skipped_inner_folds: List[str] = Field(default_factory=list)
    accuracy: float
    confusion: ConfusionMatrix


class ExperimentReport(BaseModel):
    feature_kind: FeatureKind
    task: Optional[SpeakingTask] = None
    fold_count: int
    accuracy_mean: float = Field(..., description="Mean of per-fold accuracy")
    accuracy_std: float = Field(..., description="Population std of per-fold accuracy")
    pooled: MetricReport = Field(..., description="Metrics on the union of fold predictions")
    folds: List[FoldReport] = Field(default_factory=list)
    selection_protocol: str = "nested-loso"
    pooling_unit: str = "per-recording"
    std_kind: str = "per-fold population std"
    baseline_mel_filters: int = 40
    config: Optional[ExperimentConfig] = None


class ComparisonRow(BaseModel):
    feature_kind: FeatureKind
    accuracy_mean: float
    accuracy_std: float
    absolute_delta: float = Field(..., description="Percentage points vs. the baseline row")
    relative_delta: float = Field(..., description="(acc - acc_base) / acc_base")
    pooled: MetricReport


class ComparisonReport(BaseModel):
    task: Optional[SpeakingTask] = None
    baseline: FeatureKind
    rows: List[ComparisonRow]


class TaskProtocolReport(BaseModel):
    """One feature comparison per speaking task, stacked in task order."""

    baseline: FeatureKind
    comparisons: List[ComparisonReport] = Field(default_factory=list)
