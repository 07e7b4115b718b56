"""Prediction-bias and accuracy metrics.

Prediction bias is the L1 distance between the average softmax output over
a set of samples and the empirical label distribution of the same samples.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass
from typing import Any, Sequence

import numpy as np

from panda_tta.core import DimensionMismatch, EmptyInput, LabelOutOfRange, NotUnitVector

from .features.softmax import entropy_rows, softmax

SUM_TOL = 1e-9


def _check_probs(probs: np.ndarray, what: str) -> np.ndarray:
    arr = np.asarray(probs, dtype=float).reshape(-1)
    if np.any(arr < 0) or abs(float(arr.sum()) - 1.0) > SUM_TOL:
        raise NotUnitVector(f"{what} must be non-negative and sum to 1, got sum {arr.sum():.12f}")
    return arr


@dataclass(frozen=True)
class LabelDistribution:
    probs: np.ndarray

    def __post_init__(self) -> None:
        object.__setattr__(self, "probs", _check_probs(self.probs, "A label distribution"))

    @property
    def num_classes(self) -> int:
        return int(self.probs.size)


@dataclass(frozen=True)
class SoftPredictionDistribution:
    probs: np.ndarray

    def __post_init__(self) -> None:
        object.__setattr__(self, "probs", _check_probs(self.probs, "A soft prediction distribution"))

    @property
    def num_classes(self) -> int:
        return int(self.probs.size)


def _labels(labels: Any, num_classes: int) -> np.ndarray:
    arr = np.asarray(labels).reshape(-1)
    if arr.size == 0:
        return arr.astype(int)
    if arr.dtype == bool or not np.issubdtype(arr.dtype, np.number):
        raise LabelOutOfRange(f"Labels must be integer class indices, got dtype {arr.dtype}")
    if not np.issubdtype(arr.dtype, np.integer) and np.any(arr != np.round(arr)):
        bad = arr[arr != np.round(arr)][0]
        raise LabelOutOfRange(f"Label {bad} is not an integer class index")
    if np.any(arr < 0) or np.any(arr >= num_classes):
        bad = arr[(arr < 0) | (arr >= num_classes)][0]
        raise LabelOutOfRange(f"Label {bad} is outside [0, {num_classes})")
    return arr.astype(int)


def prediction_histogram(predictions: Any, num_classes: int) -> np.ndarray:
    """Count of each class index among ``predictions``."""
    return np.bincount(_labels(predictions, num_classes), minlength=num_classes)


def ground_truth_dist(labels: Any, num_classes: int) -> LabelDistribution:
    arr = _labels(labels, num_classes)
    if arr.size == 0:
        raise EmptyInput("The label distribution needs at least one label")
    return LabelDistribution(np.bincount(arr, minlength=num_classes) / arr.size)


def soft_pred_dist(all_logits: Any) -> SoftPredictionDistribution:
    """Mean of the row softmaxes of an ``N x C`` logit matrix."""
    arr = np.atleast_2d(np.asarray(all_logits, dtype=float))
    if arr.shape[0] == 0:
        raise EmptyInput("The soft prediction distribution needs at least one logit row")
    return SoftPredictionDistribution(softmax(arr).mean(axis=0))


def l1_distance(p: SoftPredictionDistribution | LabelDistribution, q: SoftPredictionDistribution | LabelDistribution) -> float:
    """``sum_c |p_c - q_c|``, in ``[0, 2]``."""
    if p.num_classes != q.num_classes:
        raise DimensionMismatch(f"Distributions have {p.num_classes} and {q.num_classes} classes")
    return float(np.abs(p.probs - q.probs).sum())


def accuracy(predictions: Any, labels: Any) -> float:
    pred = np.asarray(predictions).reshape(-1)
    lab = np.asarray(labels).reshape(-1)
    if pred.shape != lab.shape:
        raise DimensionMismatch(f"{pred.size} predictions but {lab.size} labels")
    if pred.size == 0:
        raise EmptyInput("Accuracy needs at least one prediction")
    return float(np.mean(pred == lab))


def l1_bias(logits: Any, labels: Any, num_classes: int) -> float:
    return l1_distance(soft_pred_dist(logits), ground_truth_dist(labels, num_classes))


@dataclass(frozen=True)
class ChunkSummary:
    chunk_index: int
    n: int
    accuracy: float
    l1_bias: float
    mean_entropy: float

    def to_dict(self) -> dict[str, Any]:
        return asdict(self)


CHUNK_COLUMNS = ("chunk_index", "n", "accuracy", "l1_bias", "mean_entropy")
HISTOGRAM_COLUMNS = ("class_index", "count")


def chunk_summary(
    predictions: Any,
    labels: Any,
    logits: Any,
    num_classes: int,
    *,
    chunk_index: int = 0,
    entropies: Any = None,
) -> ChunkSummary:
    """Accuracy, L1 bias and mean entropy of one contiguous slice of a stream."""
    logit_arr = np.atleast_2d(np.asarray(logits, dtype=float))
    ent = entropy_rows(logit_arr) if entropies is None else np.asarray(entropies, dtype=float)
    return ChunkSummary(
        chunk_index=int(chunk_index),
        n=int(np.asarray(labels).size),
        accuracy=accuracy(predictions, labels),
        l1_bias=l1_bias(logit_arr, labels, num_classes),
        mean_entropy=float(np.mean(ent)),
    )


def chunk_summaries(
    predictions: Any,
    labels: Any,
    logits: Any,
    num_classes: int,
    chunk_size: int,
    *,
    entropies: Any = None,
) -> list[ChunkSummary]:
    """Split a stream into consecutive chunks (the last may be short) and summarize each."""
    pred = np.asarray(predictions).reshape(-1)
    lab = np.asarray(labels).reshape(-1)
    logit_arr = np.atleast_2d(np.asarray(logits, dtype=float))
    ent = None if entropies is None else np.asarray(entropies, dtype=float)
    if chunk_size < 1:
        raise DimensionMismatch(f"chunk_size must be >= 1, got {chunk_size}")
    out = []
    for index, start in enumerate(range(0, lab.size, chunk_size)):
        stop = start + chunk_size
        out.append(
            chunk_summary(
                pred[start:stop],
                lab[start:stop],
                logit_arr[start:stop],
                num_classes,
                chunk_index=index,
                entropies=None if ent is None else ent[start:stop],
            )
        )
    return out


def histogram_rows(predictions: Sequence[int] | np.ndarray, num_classes: int) -> list[dict[str, int]]:
    counts = prediction_histogram(predictions, num_classes)
    return [{"class_index": c, "count": int(n)} for c, n in enumerate(counts)]
