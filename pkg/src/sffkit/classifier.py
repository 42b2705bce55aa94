"""
Script: classifier.py
Created: 2026-09-21
Purpose: Linear soft-margin SVM (SMO dual solver), one-vs-one voting, speaker-grouped C search
Keywords: svm, smo, dual, one-vs-one, grid-search, standardizer, sffkit
Status: active
Prerequisites:
  - numpy
Changelog:
  - 2026-09-21: Initial version (max-violating-pair SMO)
  - 2026-10-01: Nested speaker-grouped grid search, JSON persistence
See-Also: metrics.py (UAR used as the selection score)
"""

import hashlib
import json
import logging
from dataclasses import dataclass, field
from itertools import combinations
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .errors import DimensionMismatchError, ProtocolError, SolverConvergenceError
from .metrics import compute_metrics, confusion

logger = logging.getLogger(__name__)

STD_FLOOR = 1e-8
SMO_TOL = 1e-4
SMO_MAX_ITER = 100_000


# =============================================================================
# Data
# =============================================================================

@dataclass(frozen=True)
class Dataset:
    """Utterance vectors with their class labels and speaker ids."""
    X: np.ndarray
    labels: np.ndarray
    speakers: Tuple[str, ...] = ()

    def __post_init__(self):
        X = np.atleast_2d(np.asarray(self.X, dtype=np.float64))
        labels = np.asarray(self.labels, dtype=int).reshape(-1)
        speakers = tuple(self.speakers) or tuple(str(i) for i in range(labels.size))
        if X.shape[0] != labels.size or len(speakers) != labels.size:
            raise DimensionMismatchError("X, labels and speakers must have equal length")
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "speakers", speakers)

    def __len__(self) -> int:
        return self.labels.size

    @property
    def dim(self) -> int:
        return self.X.shape[1]

    def classes(self) -> List[int]:
        return sorted(int(c) for c in np.unique(self.labels))

    def subset(self, mask: np.ndarray) -> "Dataset":
        mask = np.asarray(mask, dtype=bool)
        return Dataset(
            X=self.X[mask],
            labels=self.labels[mask],
            speakers=tuple(s for s, keep in zip(self.speakers, mask) if keep),
        )

    def speaker_mask(self, speaker_id: str) -> np.ndarray:
        return np.array([s == speaker_id for s in self.speakers], dtype=bool)


@dataclass(frozen=True)
class Standardizer:
    mean: np.ndarray
    std: np.ndarray

    def apply(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=np.float64)
        if x.shape[-1] != self.mean.size:
            raise DimensionMismatchError(f"expected {self.mean.size} features, got {x.shape[-1]}")
        z = (x - self.mean) / self.std
        # zero-variance coordinates carry no information
        z[..., self.std <= STD_FLOOR] = 0.0
        return z


def fit_standardizer(train: Dataset) -> Standardizer:
    if len(train) == 0:
        raise ValueError("cannot fit a standardizer on an empty training set")
    return Standardizer(
        mean=train.X.mean(axis=0),
        std=np.maximum(train.X.std(axis=0), STD_FLOOR),
    )


# =============================================================================
# Binary SVM
# =============================================================================

@dataclass(frozen=True)
class BinarySvmModel:
    """Decision value w.x + b; positive votes for class_pair[1]."""
    weights: np.ndarray
    bias: float
    c_value: float
    class_pair: Tuple[int, int]
    alphas: Optional[np.ndarray] = field(default=None, repr=False)
    kkt_violation: float = 0.0
    iterations: int = 0

    def decision(self, X: np.ndarray) -> np.ndarray:
        return np.asarray(X, dtype=np.float64) @ self.weights + self.bias

    def vote(self, decision_value: float) -> int:
        return self.class_pair[1] if decision_value > 0 else self.class_pair[0]


def _snap(a: float, c: float) -> float:
    """Clip to [0, C], landing exactly on a bound when within round-off of it."""
    eps = 1e-12 * max(c, 1.0)
    if a <= eps:
        return 0.0
    if a >= c - eps:
        return c
    return a


def _smo(
    K: np.ndarray, y: np.ndarray, c: float, tol: float, max_iter: int
) -> Tuple[np.ndarray, np.ndarray, float, int]:
    """Pairwise coordinate ascent on the dual, max-violating pair working set.

    g[k] = 1 - y_k sum_l alpha_l y_l K[l, k]; y_k alpha_k lives in [lower_k, upper_k].
    """
    n = y.size
    alpha = np.zeros(n)
    g = np.ones(n)
    upper = np.where(y > 0, c, 0.0)
    lower = np.where(y > 0, 0.0, -c)
    violation = np.inf

    for it in range(max_iter):
        ya = y * alpha
        yg = y * g
        up = ya < upper
        low = ya > lower
        if not up.any() or not low.any():
            return alpha, g, 0.0, it
        i = int(np.argmax(np.where(up, yg, -np.inf)))
        j = int(np.argmin(np.where(low, yg, np.inf)))
        violation = float(yg[i] - yg[j])
        if violation <= tol:
            return alpha, g, max(violation, 0.0), it
        quad = K[i, i] + K[j, j] - 2.0 * K[i, j]
        step = min(upper[i] - ya[i], ya[j] - lower[j], violation / max(quad, 1e-12))
        alpha[i] = _snap(alpha[i] + y[i] * step, c)
        alpha[j] = _snap(alpha[j] - y[j] * step, c)
        g += step * y * (K[j] - K[i])

    raise SolverConvergenceError(violation, max_iter)


def _bias(alpha: np.ndarray, g: np.ndarray, y: np.ndarray, c: float) -> float:
    yg = y * g
    free = (alpha > 0.0) & (alpha < c)
    if free.any():
        return float(yg[free].mean())
    ya = y * alpha
    up = ya < np.where(y > 0, c, 0.0)
    low = ya > np.where(y > 0, 0.0, -c)
    bounds = []
    if up.any():
        bounds.append(yg[up].max())
    if low.any():
        bounds.append(yg[low].min())
    return float(np.mean(bounds)) if bounds else 0.0


def train_binary_svm(
    train: Dataset,
    c: float,
    tol: float = SMO_TOL,
    max_iter: int = SMO_MAX_ITER,
) -> BinarySvmModel:
    """Soft-margin linear SVM on a two-class dataset (higher label is the +1 side)."""
    classes = train.classes()
    if len(classes) != 2:
        raise ProtocolError(f"binary SVM needs exactly two classes, got {classes}")
    if c <= 0:
        raise ValueError("C must be positive")
    y = np.where(train.labels == classes[1], 1.0, -1.0)
    K = train.X @ train.X.T
    alpha, g, violation, iterations = _smo(K, y, c, tol, max_iter)
    return BinarySvmModel(
        weights=(alpha * y) @ train.X,
        bias=_bias(alpha, g, y, c),
        c_value=c,
        class_pair=(classes[0], classes[1]),
        alphas=alpha,
        kkt_violation=violation,
        iterations=iterations,
    )


def kkt_residual(model: BinarySvmModel, train: Dataset) -> float:
    """Largest violation of the soft-margin KKT conditions over the training points."""
    if model.alphas is None:
        raise ValueError("model was not trained in this process (no dual variables)")
    y = np.where(train.labels == model.class_pair[1], 1.0, -1.0)
    margin = y * model.decision(train.X) - 1.0
    a, c = model.alphas, model.c_value
    at_zero = a <= 0.0
    at_c = a >= c
    free = ~(at_zero | at_c)
    res = np.zeros_like(margin)
    res[at_zero] = np.maximum(0.0, -margin[at_zero])
    res[at_c] = np.maximum(0.0, margin[at_c])
    res[free] = np.abs(margin[free])
    return float(res.max()) if res.size else 0.0


# =============================================================================
# One-vs-one
# =============================================================================

@dataclass(frozen=True)
class OvoModel:
    classes: Tuple[int, ...]
    standardizer: Standardizer
    models: Dict[Tuple[int, int], BinarySvmModel]
    c_value: float

    def decisions(self, x: np.ndarray) -> Dict[Tuple[int, int], float]:
        z = self.standardizer.apply(np.asarray(x, dtype=np.float64).reshape(1, -1))
        return {pair: float(m.decision(z)[0]) for pair, m in self.models.items()}

    def predict_one(self, x: np.ndarray) -> Tuple[int, Dict[Tuple[int, int], float]]:
        """Majority vote over the pairwise models.

        Ties go to the largest summed |decision| over the duels each tied class won;
        duels a class lost add nothing to its strength. Remaining ties go to the lowest
        class index.
        """
        values = self.decisions(x)
        votes = {c: 0 for c in self.classes}
        strength = {c: 0.0 for c in self.classes}
        for pair, d in values.items():
            winner = self.models[pair].vote(d)
            votes[winner] += 1
            strength[winner] += abs(d)
        top = max(votes.values())
        tied = [c for c in self.classes if votes[c] == top]
        best = max(tied, key=lambda c: (strength[c], -c))
        return best, values

    def predict(self, X: np.ndarray) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=np.float64))
        return np.array([self.predict_one(x)[0] for x in X], dtype=int)

    def to_json(self, config_fingerprint: str = "") -> str:
        doc = {
            "classes": list(self.classes),
            "c_value": self.c_value,
            "standardizer": {
                "mean": self.standardizer.mean.tolist(),
                "std": self.standardizer.std.tolist(),
            },
            "pairs": [
                {"pair": list(pair), "weights": m.weights.tolist(), "bias": m.bias}
                for pair, m in sorted(self.models.items())
            ],
            "config_fingerprint": config_fingerprint,
        }
        return json.dumps(doc, indent=2)

    @classmethod
    def from_json(cls, text: str) -> "OvoModel":
        doc = json.loads(text)
        c_value = float(doc["c_value"])
        models = {}
        for p in doc["pairs"]:
            pair = (int(p["pair"][0]), int(p["pair"][1]))
            models[pair] = BinarySvmModel(
                weights=np.asarray(p["weights"], dtype=np.float64),
                bias=float(p["bias"]),
                c_value=c_value,
                class_pair=pair,
            )
        return cls(
            classes=tuple(int(c) for c in doc["classes"]),
            standardizer=Standardizer(
                mean=np.asarray(doc["standardizer"]["mean"], dtype=np.float64),
                std=np.asarray(doc["standardizer"]["std"], dtype=np.float64),
            ),
            models=models,
            c_value=c_value,
        )


def config_fingerprint(payload: str) -> str:
    return hashlib.sha256(payload.encode("utf-8")).hexdigest()


def train_ovo(
    train: Dataset,
    c: float,
    tol: float = SMO_TOL,
    max_iter: int = SMO_MAX_ITER,
    classes: Optional[Sequence[int]] = None,
) -> OvoModel:
    """One binary SVM per class pair on standardized data."""
    present = train.classes()
    if classes is not None:
        missing = sorted(set(classes) - set(present))
        if missing:
            raise ProtocolError(f"class(es) {missing} have no training samples")
    if len(present) < 2:
        raise ProtocolError(f"need at least two classes to train, got {present}")

    standardizer = fit_standardizer(train)
    Z = standardizer.apply(train.X)
    models = {}
    for a, b in combinations(present, 2):
        mask = (train.labels == a) | (train.labels == b)
        pair_data = Dataset(X=Z[mask], labels=train.labels[mask])
        models[(a, b)] = train_binary_svm(pair_data, c, tol, max_iter)
    return OvoModel(classes=tuple(present), standardizer=standardizer, models=models, c_value=c)


# =============================================================================
# Grid search
# =============================================================================

@dataclass(frozen=True)
class GridSearchResult:
    best_c: float
    scores: Dict[float, float]
    skipped_folds: List[str]


def grid_search_c(
    train: Dataset,
    grid: Sequence[float],
    tol: float = SMO_TOL,
    max_iter: int = SMO_MAX_ITER,
) -> GridSearchResult:
    """Inner leave-one-speaker-out over the training speakers, scored by pooled UAR.

    Ties go to the smallest C. Inner folds that would remove a whole class are skipped.
    """
    if not grid:
        raise ValueError("grid must not be empty")
    if len(grid) == 1:
        return GridSearchResult(best_c=float(grid[0]), scores={}, skipped_folds=[])

    classes = train.classes()
    speakers = sorted(set(train.speakers))
    folds = []
    skipped = []
    for speaker in speakers:
        test_mask = train.speaker_mask(speaker)
        inner = train.subset(~test_mask)
        if inner.classes() != classes:
            logger.warning("inner fold %s removes a class from training, skipped", speaker)
            skipped.append(speaker)
            continue
        folds.append((inner, train.subset(test_mask)))
    if not folds:
        raise ProtocolError("every inner fold is degenerate; need >= 2 speakers per class")

    scores: Dict[float, float] = {}
    for c in grid:
        actual: List[int] = []
        predicted: List[int] = []
        for inner, held_out in folds:
            model = train_ovo(inner, c, tol, max_iter)
            actual.extend(held_out.labels.tolist())
            predicted.extend(model.predict(held_out.X).tolist())
        scores[float(c)] = compute_metrics(confusion(actual, predicted)).uar

    best_c = min(scores, key=lambda c: (-scores[c], c))
    logger.debug("grid search: best C=%g (UAR %.4f)", best_c, scores[best_c])
    return GridSearchResult(best_c=best_c, scores=scores, skipped_folds=skipped)
