"""Feature-space debiasing: normalization, prototype, offset, zero-shot logits."""

from .debias import (
    DebiasedBatch,
    NegativePrototype,
    batch_logits,
    batch_predict,
    logits,
    mean_prototype,
    offset,
    predict,
)
from .embeddings import EmbeddingBatch, TextBank, normalize
from .softmax import entropy_rows, log_softmax, softmax

__all__ = [
    "DebiasedBatch",
    "EmbeddingBatch",
    "NegativePrototype",
    "TextBank",
    "batch_logits",
    "batch_predict",
    "entropy_rows",
    "log_softmax",
    "logits",
    "mean_prototype",
    "normalize",
    "offset",
    "predict",
    "softmax",
]
