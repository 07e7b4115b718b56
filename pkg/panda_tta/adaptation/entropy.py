"""Entropy loss of Tent-style adaptation and its gradient."""

from __future__ import annotations

from typing import Any

import numpy as np

from panda_tta.core import DimensionMismatch
from panda_tta.features.softmax import entropy_rows, log_softmax


def softmax_entropy(logits: Any) -> float:
    """Entropy of one logit vector in nats."""
    arr = np.asarray(logits, dtype=float)
    if arr.ndim != 1:
        raise DimensionMismatch(f"softmax_entropy expects a single logit vector, got shape {arr.shape}")
    return float(entropy_rows(arr))


def entropy_grad(logits: Any) -> tuple[np.ndarray, np.ndarray]:
    """Per-row entropies and ``dH/dl_k = -p_k (l_k - sum_j p_j l_j)``."""
    logp = log_softmax(logits)
    p = np.exp(logp)
    ent = -(p * logp).sum(axis=-1)
    # logp differs from l by a per-row constant, which the centring removes
    centred = logp - (p * logp).sum(axis=-1, keepdims=True)
    return ent, -p * centred
