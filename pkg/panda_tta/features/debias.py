"""Corruption prototype, offset debiasing, logits and predictions."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any, Sequence

import numpy as np

from panda_tta.config import DEFAULT_LOGIT_SCALE
from panda_tta.core import DimensionMismatch, EmptyNegatives, PandaError

from .embeddings import EmbeddingBatch, TextBank, normalize


@dataclass(frozen=True)
class NegativePrototype:
    """Mean embedding ``n_bar`` of the ``m_used`` negative augmentations."""

    n_bar: np.ndarray
    m_used: int

    @property
    def dim(self) -> int:
        return int(self.n_bar.shape[0])


@dataclass(frozen=True)
class DebiasedBatch:
    """Features ``d_i = v_i - beta * n_bar`` (optionally renormalized)."""

    vectors: np.ndarray
    beta: float
    source: EmbeddingBatch
    prototype: NegativePrototype
    renormalized: bool = False

    def reconstruct(self) -> np.ndarray:
        """Recompute ``d`` from the stored ``(v, beta, n_bar)``."""
        d = self.source.vectors - self.beta * self.prototype.n_bar
        return normalize(d) if self.renormalized else d

    def __len__(self) -> int:
        return int(self.vectors.shape[0])


def mean_prototype(negatives: Sequence[Any] | np.ndarray) -> NegativePrototype:
    """Componentwise mean of the negative embeddings."""
    arr = np.asarray(negatives, dtype=float)
    if arr.size == 0 or arr.shape[0] == 0:
        raise EmptyNegatives("The corruption prototype needs at least one negative embedding")
    arr = np.atleast_2d(arr)
    return NegativePrototype(n_bar=arr.mean(axis=0), m_used=int(arr.shape[0]))


def offset(
    batch: EmbeddingBatch,
    proto: NegativePrototype,
    beta: float,
    *,
    renormalize: bool = False,
) -> DebiasedBatch:
    """Subtract ``beta * n_bar`` from every embedding; no renormalization by default."""
    if proto.dim != batch.dim:
        raise DimensionMismatch(f"Prototype has dimension {proto.dim} but embeddings have {batch.dim}")
    beta = float(beta)
    if not np.isfinite(beta):
        raise PandaError(f"Offset ratio beta must be finite, got {beta}")
    d = batch.vectors - beta * proto.n_bar
    if renormalize:
        d = normalize(d)
    return DebiasedBatch(vectors=d, beta=beta, source=batch, prototype=proto, renormalized=renormalize)


def _check_dims(d: np.ndarray, bank: TextBank) -> None:
    if d.shape[-1] != bank.dim:
        raise DimensionMismatch(f"Feature dimension {d.shape[-1]} does not match text bank dimension {bank.dim}")


def logits(d: Any, bank: TextBank, *, scale: float = DEFAULT_LOGIT_SCALE) -> np.ndarray:
    """``scale * <d, t_c>`` for every class."""
    vec = np.asarray(d, dtype=float)
    _check_dims(vec, bank)
    return scale * (bank.vectors @ vec)


def predict(d: Any, bank: TextBank, *, scale: float = DEFAULT_LOGIT_SCALE) -> int:
    """Index of the largest logit; ties go to the lowest class index."""
    return int(np.argmax(logits(d, bank, scale=scale)))


def batch_logits(d: Any, bank: TextBank, *, scale: float = DEFAULT_LOGIT_SCALE) -> np.ndarray:
    """Row-wise :func:`logits` for a ``(B, D)`` feature matrix."""
    mat = np.atleast_2d(np.asarray(d, dtype=float))
    _check_dims(mat, bank)
    return scale * (mat @ bank.vectors.T)


def batch_predict(d: Any, bank: TextBank, *, scale: float = DEFAULT_LOGIT_SCALE) -> np.ndarray:
    return np.argmax(batch_logits(d, bank, scale=scale), axis=1)
