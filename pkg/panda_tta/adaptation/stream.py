"""Sequential adaptation over a labelled stream with per-chunk metrics."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from panda_tta.config import DEFAULT_BATCH_SIZE, DEFAULT_CHUNK_SIZE, substream_seed
from panda_tta.core import EmptyStream, InvalidSpec
from panda_tta.features import TextBank
from panda_tta.metrics import ChunkSummary, chunk_summaries, chunk_summary, prediction_histogram
from panda_tta.world import LabeledImage, World, split_stream

from .state import AdaptState, BatchReport
from .tent import adapt_step

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class StreamResult:
    chunks: list[ChunkSummary]
    overall: ChunkSummary
    batches: list[BatchReport] = field(repr=False)
    final_state: AdaptState = field(repr=False)
    forward_passes: int = 0
    predictions: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=int), repr=False)
    labels: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=int), repr=False)
    logits: np.ndarray = field(default_factory=lambda: np.zeros((0, 0)), repr=False)

    @property
    def final_chunk(self) -> ChunkSummary:
        return self.chunks[-1]

    def histogram(self) -> np.ndarray:
        return prediction_histogram(self.predictions, self.logits.shape[1])

    def forward_ratio(self, baseline: "StreamResult") -> float:
        return self.forward_passes / baseline.forward_passes


def run_stream(
    state: AdaptState,
    stream: Sequence[LabeledImage],
    world: World,
    bank: TextBank | None = None,
    *,
    batch_size: int = DEFAULT_BATCH_SIZE,
    chunk_size: int = DEFAULT_CHUNK_SIZE,
    seed: int = 0,
) -> StreamResult:
    """Adapt batch after batch in stream order; batch ``k`` draws negatives from ``(seed, "nda", k)``."""
    if len(stream) == 0:
        raise EmptyStream("The stream is empty.\n  Try: --stream-len 1 or more")
    if batch_size < 1 or chunk_size < 1:
        raise InvalidSpec(f"batch_size and chunk_size must be >= 1, got {batch_size} and {chunk_size}")
    bank = world.bank if bank is None else bank
    start_count = world.encoder.forward_count

    reports: list[BatchReport] = []
    for index, start in enumerate(range(0, len(stream), batch_size)):
        images, labels = split_stream(stream[start : start + batch_size])
        state, report = adapt_step(
            state,
            images,
            world,
            bank,
            nda_seed=substream_seed(seed, "nda", index),
            labels=labels,
        )
        reports.append(report)

    predictions = np.concatenate([r.predictions for r in reports])
    logits = np.concatenate([r.logits for r in reports])
    entropies = np.concatenate([r.entropies for r in reports])
    _, labels = split_stream(stream)

    chunks = chunk_summaries(predictions, labels, logits, bank.num_classes, chunk_size, entropies=entropies)
    for chunk in chunks:
        logger.info(
            "chunk %d n=%d accuracy=%.4f l1_bias=%.4f entropy=%.4f",
            chunk.chunk_index,
            chunk.n,
            chunk.accuracy,
            chunk.l1_bias,
            chunk.mean_entropy,
        )
    overall = chunk_summary(predictions, labels, logits, bank.num_classes, chunk_index=-1, entropies=entropies)
    return StreamResult(
        chunks=chunks,
        overall=overall,
        batches=reports,
        final_state=state,
        forward_passes=world.encoder.forward_count - start_count,
        predictions=predictions,
        labels=labels,
        logits=logits,
    )
