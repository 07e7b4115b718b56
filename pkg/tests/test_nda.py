"""
Negative data augmentation tests.

Coverage:
    1. Patch grids: exact partitions only, patchify/depatchify inverse.
    2. Pools: one shuffled multiset of every batch patch, seeded.
    3. Recomposition: no patch reused, capacity limits, default M.
    4. Ablation helpers: per-image negatives and forward counts.
    5. Randomized properties: conservation, no reuse, shape closure, round trips.
"""

from __future__ import annotations

from collections import Counter

import numpy as np
import pytest

from panda_tta.core import DimensionMismatch, EmptyBatch, HeterogeneousBatch, PoolExhausted
from panda_tta.nda import (
    ImageTensor,
    PatchGrid,
    build_pool,
    default_m,
    depatchify,
    forward_count,
    negative_augment,
    patchify,
    pda_forward_count,
    per_image_negatives,
    pool_capacity,
    recompose,
)

from conftest import labelled_patch_batch, patch_ids


# ─── 1. Patch grids ───────────────────────────────────────────────────────────
class TestPatchGrid:
    def test_default_vit_grid(self):
        grid = PatchGrid.for_shape(224, 224, 32)
        assert (grid.rows, grid.cols) == (7, 7)
        assert grid.patches_per_image == 49

    def test_inexact_partition_is_rejected_with_hint(self):
        with pytest.raises(DimensionMismatch) as info:
            PatchGrid.for_shape(224, 224, 30)
        assert "Try:" in str(info.value)

    def test_rectangular_patches(self):
        grid = PatchGrid.for_shape(6, 8, 3, 4)
        assert (grid.rows, grid.cols) == (2, 2)

    def test_patchify_is_row_major(self):
        image = labelled_patch_batch(1, size=6, patch=2)[0]
        grid = PatchGrid.for_image(image, 2)
        patches = patchify(image, grid)
        assert patches.shape == (9, 2, 2, 1)
        assert [int(p[0, 0, 0]) for p in patches] == list(range(9))

    def test_depatchify_inverts_patchify(self):
        rng = np.random.default_rng(0)
        image = ImageTensor(rng.standard_normal((8, 12, 3)))
        grid = PatchGrid.for_shape(8, 12, 4)
        assert depatchify(patchify(image, grid), grid) == image

    def test_wrong_image_size_for_grid(self):
        grid = PatchGrid.for_shape(8, 8, 4)
        with pytest.raises(DimensionMismatch):
            patchify(ImageTensor(np.zeros((12, 12, 1))), grid)

    def test_from_flat_checks_length(self):
        with pytest.raises(DimensionMismatch):
            ImageTensor.from_flat(2, 2, 3, np.zeros(11))


# ─── 2. Pools ─────────────────────────────────────────────────────────────────
class TestPool:
    def test_pool_is_permutation_of_batch_patches(self):
        batch = labelled_patch_batch(5)
        grid = PatchGrid.for_image(batch[0], 2)
        pool = build_pool(batch, grid, seed=11)
        ids = sorted(int(p[0, 0, 0]) for p in pool.patches)
        assert ids == list(range(5 * 4))
        assert len(pool) == 20
        assert sorted(pool.source_index.tolist()) == list(range(20))

    def test_same_seed_same_order(self):
        batch = labelled_patch_batch(4)
        grid = PatchGrid.for_image(batch[0], 2)
        a = build_pool(batch, grid, seed=3)
        b = build_pool(batch, grid, seed=3)
        c = build_pool(batch, grid, seed=4)
        assert np.array_equal(a.patches, b.patches)
        assert not np.array_equal(a.source_index, c.source_index)

    def test_empty_batch(self):
        with pytest.raises(EmptyBatch):
            build_pool([], PatchGrid.for_shape(4, 4, 2), seed=0)

    def test_mixed_shapes_rejected(self):
        batch = [ImageTensor(np.zeros((4, 4, 1))), ImageTensor(np.zeros((4, 4, 3)))]
        with pytest.raises(HeterogeneousBatch):
            build_pool(batch, PatchGrid.for_shape(4, 4, 2), seed=0)


# ─── 3. Recomposition ─────────────────────────────────────────────────────────
class TestRecompose:
    def test_no_patch_is_used_twice(self):
        batch = labelled_patch_batch(20)
        grid = PatchGrid.for_image(batch[0], 2)
        negatives = negative_augment(batch, grid, 7, seed=2)
        used = [pid for image in negatives for pid in patch_ids(image)]
        assert len(negatives) == 7
        assert len(used) == len(set(used)) == 7 * 4

    def test_full_pool_uses_every_patch_once(self):
        batch = labelled_patch_batch(6)
        grid = PatchGrid.for_image(batch[0], 2)
        negatives = negative_augment(batch, grid, 6, seed=9)
        used = Counter(pid for image in negatives for pid in patch_ids(image))
        assert set(used) == set(range(24))
        assert set(used.values()) == {1}

    def test_too_many_negatives(self):
        batch = labelled_patch_batch(3)
        grid = PatchGrid.for_image(batch[0], 2)
        pool = build_pool(batch, grid, seed=0)
        assert pool_capacity(pool, grid) == 3
        with pytest.raises(PoolExhausted):
            recompose(pool, grid, 4)

    def test_default_m_is_a_tenth_of_the_batch(self):
        batch = labelled_patch_batch(100)
        grid = PatchGrid.for_image(batch[0], 2)
        assert len(negative_augment(batch, grid, None, seed=0)) == 10
        assert default_m(64) == 7
        assert default_m(1) == 1

    def test_zero_negatives(self):
        batch = labelled_patch_batch(2)
        grid = PatchGrid.for_image(batch[0], 2)
        assert negative_augment(batch, grid, 0, seed=0) == []

    def test_single_patch_grid_returns_whole_images(self):
        batch = labelled_patch_batch(3, size=2, patch=2)
        grid = PatchGrid.for_image(batch[0], 2)
        negatives = negative_augment(batch, grid, 3, seed=1)
        assert sorted(patch_ids(n)[0] for n in negatives) == [0, 1, 2]

    def test_negatives_are_deterministic(self):
        batch = labelled_patch_batch(10)
        grid = PatchGrid.for_image(batch[0], 2)
        assert negative_augment(batch, grid, 3, seed=5) == negative_augment(batch, grid, 3, seed=5)


# ─── 4. Ablations and forward accounting ──────────────────────────────────────
class TestAblationHelpers:
    def test_per_image_negatives_keep_their_own_patches(self):
        batch = labelled_patch_batch(4, size=6, patch=2)
        grid = PatchGrid.for_image(batch[0], 2)
        negatives = per_image_negatives(batch, grid, seed=1)
        assert len(negatives) == 4
        for image, negative in zip(batch, negatives):
            assert sorted(patch_ids(negative)) == sorted(patch_ids(image))

    def test_forward_counts(self):
        assert forward_count(100, 10) == 110
        assert forward_count(100, 10, "no_panda") == 100
        assert forward_count(100, 10, "per_image_shuffle") == 200
        assert pda_forward_count(100) == 6400


# ─── 5. Randomized properties ─────────────────────────────────────────────────
def unique_pixel_batch(rng: np.random.Generator, batch_size: int, shape: tuple[int, int, int]) -> list[ImageTensor]:
    """Images whose pixels are all distinct across the batch, so a patch is named by its first value."""
    size = int(np.prod(shape))
    offsets = rng.permutation(batch_size * size).astype(float)
    return [ImageTensor(offsets[b * size : (b + 1) * size].reshape(shape)) for b in range(batch_size)]


class TestRandomizedProperties:
    CASES = 10_000

    def test_pool_conservation_no_reuse_and_closure(self):
        rng = np.random.default_rng(2024)
        for _ in range(self.CASES):
            batch_size = int(rng.integers(1, 9))
            rows, cols = (int(v) for v in rng.integers(1, 5, size=2))
            ph, pw = (int(v) for v in rng.integers(1, 4, size=2))
            channels = int(rng.integers(1, 4))
            shape = (rows * ph, cols * pw, channels)
            batch = unique_pixel_batch(rng, batch_size, shape)
            grid = PatchGrid.for_shape(shape[0], shape[1], ph, pw)
            pool = build_pool(batch, grid, seed=int(rng.integers(0, 2**31)))

            cut = np.concatenate([patchify(image, grid) for image in batch], axis=0)
            assert len(pool) == batch_size * rows * cols
            assert np.array_equal(np.sort(pool.source_index), np.arange(len(pool)))
            assert np.array_equal(pool.patches, cut[pool.source_index])
            assert pool_capacity(pool, grid) == batch_size

            m = int(rng.integers(0, batch_size + 1))
            negatives = recompose(pool, grid, m)
            assert len(negatives) == m
            assert all(image.shape == shape for image in negatives)
            used = [float(p[0, 0, 0]) for image in negatives for p in patchify(image, grid)]
            assert len(used) == len(set(used)) == m * rows * cols
            assert set(used) <= {float(p[0, 0, 0]) for p in cut}

            for image in batch:
                assert depatchify(patchify(image, grid), grid) == image

    @pytest.mark.parametrize("ph,pw", [(1, 1), (2, 2), (4, 4), (8, 8), (16, 16), (32, 32), (64, 64), (8, 16), (64, 4)])
    def test_random_image_round_trip(self, ph, pw):
        image = ImageTensor(np.random.default_rng(64).standard_normal((64, 64, 3)))
        grid = PatchGrid.for_image(image, ph, pw)
        patches = patchify(image, grid)
        assert patches.shape == ((64 // ph) * (64 // pw), ph, pw, 3)
        assert depatchify(patches, grid) == image

    def test_hundred_image_batch_fills_a_4900_patch_pool(self):
        rng = np.random.default_rng(100)
        batch = unique_pixel_batch(rng, 100, (28, 28, 3))
        grid = PatchGrid.for_image(batch[0], 4)
        pool = build_pool(batch, grid, seed=5)
        assert (grid.rows, grid.cols) == (7, 7)
        assert len(pool) == 4900
        negatives = recompose(pool, grid, 100)
        used = Counter(float(p[0, 0, 0]) for image in negatives for p in patchify(image, grid))
        assert len(used) == 4900 and set(used.values()) == {1}
        assert len(negative_augment(batch, grid, None, seed=5)) == default_m(100) == 10
