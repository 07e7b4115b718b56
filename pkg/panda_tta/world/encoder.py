"""Frozen linear image encoder with a trainable affine head."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Sequence

import numpy as np

from panda_tta.core import DimensionMismatch
from panda_tta.features import normalize
from panda_tta.nda import ImageTensor


@dataclass
class ForwardCounter:
    """Running count of images pushed through an encoder."""

    count: int = 0

    def add(self, n: int) -> None:
        self.count += int(n)

    def reset(self) -> int:
        seen, self.count = self.count, 0
        return seen


@dataclass(frozen=True)
class FrozenEncoder:
    """``encode(x) = normalize(gamma * (P @ flatten(x)) + delta)``.

    ``P`` never changes; ``gamma`` and ``delta`` play the role of the
    normalization-layer affine parameters that test-time adaptation updates.
    """

    projection: np.ndarray
    gamma: np.ndarray
    delta: np.ndarray
    image_shape: tuple[int, int, int]
    counter: ForwardCounter = field(default_factory=ForwardCounter, compare=False, repr=False)

    def __post_init__(self) -> None:
        proj = np.asarray(self.projection, dtype=float)
        gamma = np.asarray(self.gamma, dtype=float).reshape(-1)
        delta = np.asarray(self.delta, dtype=float).reshape(-1)
        shape = tuple(int(v) for v in self.image_shape)
        if proj.ndim != 2 or proj.shape[1] != int(np.prod(shape)):
            raise DimensionMismatch(f"Projection must be (D, {int(np.prod(shape))}) for images {shape}, got {proj.shape}")
        if gamma.shape != (proj.shape[0],) or delta.shape != (proj.shape[0],):
            raise DimensionMismatch(
                f"gamma and delta must have {proj.shape[0]} entries, got {gamma.shape} and {delta.shape}"
            )
        object.__setattr__(self, "projection", proj)
        object.__setattr__(self, "gamma", gamma)
        object.__setattr__(self, "delta", delta)
        object.__setattr__(self, "image_shape", shape)

    @classmethod
    def identity_affine(cls, projection: Any, image_shape: Sequence[int]) -> "FrozenEncoder":
        proj = np.asarray(projection, dtype=float)
        dim = proj.shape[0]
        return cls(proj, np.ones(dim), np.zeros(dim), tuple(image_shape))  # type: ignore[arg-type]

    @property
    def dim(self) -> int:
        return int(self.projection.shape[0])

    @property
    def forward_count(self) -> int:
        return self.counter.count

    def _flatten(self, images: Sequence[ImageTensor] | ImageTensor) -> np.ndarray:
        batch = [images] if isinstance(images, ImageTensor) else list(images)
        for idx, image in enumerate(batch):
            if image.shape != self.image_shape:
                raise DimensionMismatch(f"Image {idx} has shape {image.shape}; this encoder expects {self.image_shape}")
        if not batch:
            return np.zeros((0, self.projection.shape[1]))
        return np.stack([image.flat() for image in batch]).astype(float, copy=False)

    def project(self, images: Sequence[ImageTensor] | ImageTensor) -> np.ndarray:
        """Raw projections ``P @ flatten(x)``, one row per image; counts one forward each."""
        flat = self._flatten(images)
        self.counter.add(flat.shape[0])
        return flat @ self.projection.T

    def affine(self, projected: np.ndarray, gamma: np.ndarray | None = None, delta: np.ndarray | None = None) -> np.ndarray:
        gamma = self.gamma if gamma is None else gamma
        delta = self.delta if delta is None else delta
        return projected * gamma + delta

    def encode(self, image: ImageTensor) -> np.ndarray:
        """Unit embedding of one image."""
        return normalize(self.affine(self.project(image)[0]))

    def encode_batch(self, images: Sequence[ImageTensor]) -> np.ndarray:
        """Unit embeddings of ``images`` as a ``(B, D)`` matrix."""
        return normalize(self.affine(self.project(images)))

    def with_params(self, gamma: Any, delta: Any) -> "FrozenEncoder":
        """Same projection and counter, new affine parameters."""
        return FrozenEncoder(self.projection, gamma, delta, self.image_shape, counter=self.counter)
