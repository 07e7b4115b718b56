"""Negative data augmentation: patch grids, shared pools, recomposition.

The operations are pure given their inputs; the seed fully determines the
pool order and hence the recomposed images.
"""

from panda_tta.config import default_m

from .patches import ImageTensor, PatchGrid, depatchify, patchify
from .pool import (
    ABLATIONS,
    PatchPool,
    build_image_pools,
    build_pool,
    forward_count,
    negative_augment,
    pda_forward_count,
    per_image_negatives,
    pool_capacity,
    recompose,
)

__all__ = [
    "ABLATIONS",
    "ImageTensor",
    "PatchGrid",
    "PatchPool",
    "build_image_pools",
    "build_pool",
    "default_m",
    "depatchify",
    "forward_count",
    "negative_augment",
    "patchify",
    "pda_forward_count",
    "per_image_negatives",
    "pool_capacity",
    "recompose",
]
