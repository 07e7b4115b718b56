"""One step of entropy-minimizing adaptation with negative-augmentation offsetting."""

from __future__ import annotations

import logging
from typing import Any, Sequence

import numpy as np

from panda_tta.features import TextBank
from panda_tta.metrics import accuracy, l1_bias
from panda_tta.nda import ImageTensor
from panda_tta.world import World

from .gradients import evaluate, prepare_batch
from .optimizer import SGD
from .state import AdaptState, BatchReport

logger = logging.getLogger(__name__)


def adapt_step(
    state: AdaptState,
    batch: Sequence[ImageTensor],
    world: World,
    bank: TextBank | None = None,
    *,
    nda_seed: int = 0,
    labels: Any = None,
) -> tuple[AdaptState, BatchReport]:
    """Negatives, encode, offset, entropy loss, one SGD update.

    Predictions come from the offset features computed before the update.
    With ``labels`` the report also carries accuracy and L1 bias.
    """
    bank = world.bank if bank is None else bank
    feats = prepare_batch(state, batch, world, nda_seed=nda_seed)
    result = evaluate(state, feats, bank)
    predictions = np.argmax(result.logits, axis=1)

    new_state = state
    if state.lr > 0:
        opt = SGD(state.lr)
        new_state = state.with_params(opt.step(state.gamma, result.grad_gamma), opt.step(state.delta, result.grad_delta))

    acc = bias = None
    if labels is not None:
        acc = accuracy(predictions, labels)
        bias = l1_bias(result.logits, labels, bank.num_classes)
    logger.debug(
        "step %d loss=%.6f grad_norm=%.3e forwards=%d",
        state.step_count,
        result.loss,
        float(np.linalg.norm(np.concatenate([result.grad_gamma, result.grad_delta]))),
        result.forward_passes,
    )
    report = BatchReport(
        predictions=predictions,
        logits=result.logits,
        entropies=result.entropies,
        loss=result.loss,
        forward_passes=result.forward_passes,
        accuracy=acc,
        l1_bias=bias,
    )
    return new_state, report
