"""Numerically stable softmax over logit rows."""

from __future__ import annotations

from typing import Any

import numpy as np

from panda_tta.core import NonFiniteLogits


def check_finite(logits: np.ndarray) -> None:
    if not np.all(np.isfinite(logits)):
        raise NonFiniteLogits("Logits contain NaN or infinite values; check the encoder output and logit scale")


def log_softmax(logits: Any) -> np.ndarray:
    """Row-wise ``log softmax`` with max subtraction."""
    arr = np.asarray(logits, dtype=float)
    check_finite(arr)
    shifted = arr - arr.max(axis=-1, keepdims=True)
    return shifted - np.log(np.exp(shifted).sum(axis=-1, keepdims=True))


def softmax(logits: Any) -> np.ndarray:
    return np.exp(log_softmax(logits))


def entropy_rows(logits: Any) -> np.ndarray:
    """``H(softmax(l))`` for every row of ``logits`` (nats)."""
    logp = log_softmax(logits)
    return -(np.exp(logp) * logp).sum(axis=-1)
