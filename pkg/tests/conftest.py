"""
panda_tta - shared pytest fixtures.

Provides:
    - Small synthetic worlds (the CLI default and a 3-class one for
      gradient checks).
    - Helpers that build batches of images with recognizable patches.

Usage::

    def test_something(biased_world):
        stream = sample_stream(biased_world, 100, "corruption_0", seed=1)
"""
from __future__ import annotations

import numpy as np
import pytest

from panda_tta.nda import ImageTensor
from panda_tta.world import WorldSpec, make_world, preset_spec, sample_stream, split_stream


@pytest.fixture()
def biased_world():
    return make_world(preset_spec("biased", 0))


@pytest.fixture()
def small_world():
    """Three classes on 12x12 images, cheap enough for finite differences."""
    spec = WorldSpec(num_classes=3, image_size=12, channels=3, feature_dim=6, patch_size=4, spurious_align=0.6, seed=3)
    return make_world(spec)


@pytest.fixture()
def corrupted_batch(small_world):
    images, labels = split_stream(sample_stream(small_world, 12, "corruption_0", seed=5))
    return images, labels


def labelled_patch_batch(batch_size: int, size: int = 4, patch: int = 2, channels: int = 1) -> list[ImageTensor]:
    """Images whose every patch is constant and carries a batch-unique id."""
    rows = size // patch
    images = []
    for b in range(batch_size):
        ids = b * rows * rows + np.arange(rows * rows, dtype=float).reshape(rows, rows)
        plane = np.kron(ids, np.ones((patch, patch)))
        images.append(ImageTensor(np.repeat(plane[:, :, None], channels, axis=2)))
    return images


def patch_ids(image: ImageTensor, patch: int = 2) -> list[int]:
    return [int(v) for v in image.data[::patch, ::patch, 0].reshape(-1)]
