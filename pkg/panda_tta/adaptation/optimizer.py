"""Plain SGD over the encoder's affine parameters."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from panda_tta.config import DEFAULT_LR
from panda_tta.core import InvalidSpec


@dataclass(frozen=True)
class SGD:
    """``params - lr * grad``; ``lr = 0`` leaves parameters untouched."""

    lr: float = DEFAULT_LR

    def __post_init__(self) -> None:
        if not np.isfinite(self.lr) or self.lr < 0:
            raise InvalidSpec(f"Learning rate must be finite and >= 0, got {self.lr}")

    def step(self, params: np.ndarray, grad: np.ndarray) -> np.ndarray:
        return params - self.lr * grad
