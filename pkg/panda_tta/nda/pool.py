"""Batch-shared patch pools and negative-augmentation recomposition.

A batch of ``B`` images is cut into patches, every patch goes into one pool,
and the pool is shuffled once. Negative images are filled from the front of
the shuffled pool, so no patch is used twice within a batch.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from panda_tta.config import PDA_VIEWS, default_m
from panda_tta.core import EmptyBatch, HeterogeneousBatch, PoolExhausted

from .patches import ImageTensor, PatchGrid, depatchify, patchify

ABLATIONS = ("full", "no_panda", "per_image_shuffle", "no_averaging")


@dataclass(frozen=True)
class PatchPool:
    """The shuffled multiset of every patch cut from one batch.

    ``source_index[k]`` is the position of pool entry ``k`` in the unshuffled
    concatenation ``image 0 patches, image 1 patches, ...``.
    """

    patches: np.ndarray
    source_batch_size: int
    permutation_seed: int
    source_index: np.ndarray = field(repr=False)

    def __len__(self) -> int:
        return int(self.patches.shape[0])

    @property
    def patch_shape(self) -> tuple[int, int, int]:
        return tuple(int(v) for v in self.patches.shape[1:])  # type: ignore[return-value]


def _check_batch(batch: Sequence[ImageTensor], grid: PatchGrid) -> None:
    if len(batch) == 0:
        raise EmptyBatch("Negative augmentation needs at least one image in the batch")
    first = batch[0].shape
    for idx, image in enumerate(batch):
        if image.shape != first:
            raise HeterogeneousBatch(
                f"Image {idx} has shape {image.shape} but image 0 has shape {first}; "
                "every image in a batch must share H, W and C"
            )
    grid.check(batch[0])


def build_pool(batch: Sequence[ImageTensor], grid: PatchGrid, seed: int) -> PatchPool:
    """Cut every image of ``batch`` and shuffle all patches into one pool."""
    _check_batch(batch, grid)
    cut = np.concatenate([patchify(image, grid) for image in batch], axis=0)
    rng = np.random.default_rng(seed)
    order = rng.permutation(cut.shape[0])
    return PatchPool(
        patches=cut[order],
        source_batch_size=len(batch),
        permutation_seed=int(seed),
        source_index=order,
    )


def pool_capacity(pool: PatchPool, grid: PatchGrid) -> int:
    """How many whole images the pool can still fill."""
    return len(pool) // grid.patches_per_image


def recompose(pool: PatchPool, grid: PatchGrid, m: int) -> list[ImageTensor]:
    """Build ``m`` images from the first ``m * rows * cols`` pool entries."""
    if m < 0:
        raise PoolExhausted(f"Cannot recompose a negative number of images ({m})")
    if m == 0:
        return []
    capacity = pool_capacity(pool, grid)
    if m > capacity:
        raise PoolExhausted(
            f"Requested {m} negative images but the pool of {len(pool)} patches fills only {capacity}"
        )
    k = grid.patches_per_image
    return [depatchify(pool.patches[j * k : (j + 1) * k], grid) for j in range(m)]


def build_image_pools(batch: Sequence[ImageTensor], grid: PatchGrid, seed: int) -> list[PatchPool]:
    """One pool per image, each shuffled with its own child seed."""
    _check_batch(batch, grid)
    children = np.random.SeedSequence(int(seed) & 0xFFFFFFFFFFFFFFFF).spawn(len(batch))
    pools = []
    for image, child in zip(batch, children):
        child_seed = int(child.generate_state(1, dtype=np.uint64)[0] & np.uint64((1 << 63) - 1))
        pools.append(build_pool([image], grid, child_seed))
    return pools


def negative_augment(batch: Sequence[ImageTensor], grid: PatchGrid, m: int | None, seed: int) -> list[ImageTensor]:
    """Shared negatives for a batch: ``build_pool`` then ``recompose``."""
    m = default_m(len(batch)) if m is None else m
    if m == 0:
        return []
    return recompose(build_pool(batch, grid, seed), grid, m)


def per_image_negatives(batch: Sequence[ImageTensor], grid: PatchGrid, seed: int) -> list[ImageTensor]:
    """One negative per image built only from that image's own patches."""
    return [recompose(pool, grid, 1)[0] for pool in build_image_pools(batch, grid, seed)]


def forward_count(batch_size: int, m: int, ablation: str = "full") -> int:
    """Encoder forwards spent on one batch: ``B`` originals plus the negatives."""
    if ablation == "no_panda":
        return batch_size
    if ablation == "per_image_shuffle":
        return 2 * batch_size
    return batch_size + m


def pda_forward_count(batch_size: int, k: int = PDA_VIEWS) -> int:
    """Forwards a K-view positive augmentation scheme would need: ``B * (K + 1)``."""
    return batch_size * (k + 1)
