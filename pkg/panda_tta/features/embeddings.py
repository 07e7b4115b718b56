"""Unit-norm image embeddings and class text banks."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any, Sequence

import numpy as np

from panda_tta.core import DimensionMismatch, InvalidSpec, NotUnitVector, ZeroVector

UNIT_TOL = 1e-6


def normalize(raw: Any) -> np.ndarray:
    """Return ``raw / ||raw||_2``; rows are normalized independently for 2-D input."""
    arr = np.asarray(raw, dtype=float)
    norms = np.linalg.norm(arr, axis=-1, keepdims=True)
    if np.any(norms == 0.0):
        raise ZeroVector("Cannot normalize a zero vector; the encoder produced an all-zero feature")
    return arr / norms


def _check_unit_rows(matrix: np.ndarray, what: str) -> None:
    norms = np.linalg.norm(matrix, axis=1)
    bad = np.flatnonzero(np.abs(norms - 1.0) > UNIT_TOL)
    if bad.size:
        raise NotUnitVector(f"{what} {int(bad[0])} has norm {norms[bad[0]]:.8f}, expected 1 within {UNIT_TOL}")


@dataclass(frozen=True)
class EmbeddingBatch:
    """L2-normalized ``D``-dimensional image features, one row per image."""

    vectors: np.ndarray

    def __post_init__(self) -> None:
        arr = np.asarray(self.vectors, dtype=float)
        if arr.ndim != 2:
            raise DimensionMismatch(f"EmbeddingBatch expects a (B, D) matrix, got shape {arr.shape}")
        _check_unit_rows(arr, "Embedding")
        object.__setattr__(self, "vectors", arr)

    @classmethod
    def from_raw(cls, raw: Any) -> "EmbeddingBatch":
        return cls(normalize(np.atleast_2d(np.asarray(raw, dtype=float))))

    @classmethod
    def stack(cls, vectors: Sequence[Any]) -> "EmbeddingBatch":
        return cls(np.stack([np.asarray(v, dtype=float) for v in vectors]))

    @property
    def dim(self) -> int:
        return int(self.vectors.shape[1])

    def __len__(self) -> int:
        return int(self.vectors.shape[0])


@dataclass(frozen=True)
class TextBank:
    """Unit text embeddings ``t_1..t_C`` with their class names."""

    vectors: np.ndarray
    class_names: tuple[str, ...]

    def __post_init__(self) -> None:
        arr = np.asarray(self.vectors, dtype=float)
        if arr.ndim != 2:
            raise DimensionMismatch(f"TextBank expects a (C, D) matrix, got shape {arr.shape}")
        if arr.shape[0] < 2:
            raise InvalidSpec("A text bank needs at least two classes")
        if len(self.class_names) != arr.shape[0]:
            raise DimensionMismatch(f"{arr.shape[0]} text vectors but {len(self.class_names)} class names")
        _check_unit_rows(arr, "Text embedding")
        object.__setattr__(self, "vectors", arr)
        object.__setattr__(self, "class_names", tuple(str(n) for n in self.class_names))

    @classmethod
    def from_matrix(cls, matrix: Any, class_names: Sequence[str] | None = None, *, normalize_rows: bool = False) -> "TextBank":
        arr = np.asarray(matrix, dtype=float)
        if normalize_rows:
            arr = normalize(arr)
        names = tuple(class_names) if class_names is not None else tuple(f"class_{c}" for c in range(arr.shape[0]))
        return cls(arr, names)

    @property
    def num_classes(self) -> int:
        return int(self.vectors.shape[0])

    @property
    def dim(self) -> int:
        return int(self.vectors.shape[1])

    def binary_direction(self, first: int, second: int) -> np.ndarray:
        """Unit direction ``(t_first - t_second) / ||t_first - t_second||`` of a two-class decision."""
        return normalize(self.vectors[first] - self.vectors[second])

    def scaled(self, factor: float) -> "TextBank":
        """Return a bank whose rows are multiplied by ``factor`` (no unit check)."""
        clone = object.__new__(TextBank)
        object.__setattr__(clone, "vectors", self.vectors * float(factor))
        object.__setattr__(clone, "class_names", self.class_names)
        return clone
