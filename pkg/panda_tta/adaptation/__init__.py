"""Tent-style entropy minimization with negative-augmentation offsetting.

``adapt_step`` runs one batch: build negatives, encode everything with the
current affine head, offset by the negative prototype, score against the
text bank, take one SGD step on the mean entropy. ``run_stream`` chains
steps over a stream and aggregates metrics per chunk.
"""

from .entropy import entropy_grad, softmax_entropy
from .gradcheck import GradientCheck, finite_difference_gradient, gradient_check
from .gradients import (
    BatchFeatures,
    LossAndGrad,
    evaluate,
    loss_and_grad,
    make_negatives,
    mixing_weights,
    prepare_batch,
)
from .optimizer import SGD
from .state import METHODS, AdaptState, BatchReport
from .stream import StreamResult, run_stream
from .tent import adapt_step

__all__ = [
    "METHODS",
    "SGD",
    "AdaptState",
    "BatchFeatures",
    "BatchReport",
    "GradientCheck",
    "LossAndGrad",
    "StreamResult",
    "adapt_step",
    "entropy_grad",
    "evaluate",
    "finite_difference_gradient",
    "gradient_check",
    "loss_and_grad",
    "make_negatives",
    "mixing_weights",
    "prepare_batch",
    "run_stream",
    "softmax_entropy",
]
