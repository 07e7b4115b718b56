"""Adaptation state, method presets and per-batch reports."""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Any

import numpy as np

from panda_tta.config import DEFAULT_BETA, DEFAULT_LOGIT_SCALE, DEFAULT_LR, default_m
from panda_tta.core import DimensionMismatch, InvalidSpec
from panda_tta.nda import ABLATIONS

METHODS = ("zero_shot", "panda_only", "tent", "tent_panda")


@dataclass(frozen=True)
class AdaptState:
    """Trainable ``(gamma, delta)`` plus the knobs of one adaptation run.

    Under ``no_panda`` no negatives are generated and ``beta`` is ignored, so
    the run is plain entropy minimization. ``step_count`` counts applied
    updates; a zero learning rate never changes the state.
    """

    gamma: np.ndarray
    delta: np.ndarray
    lr: float = DEFAULT_LR
    beta: float = DEFAULT_BETA
    m: int = 1
    ablation: str = "full"
    step_count: int = 0
    stop_prototype_grad: bool = False
    renormalize: bool = False
    logit_scale: float = DEFAULT_LOGIT_SCALE

    def __post_init__(self) -> None:
        gamma = np.asarray(self.gamma, dtype=float).reshape(-1)
        delta = np.asarray(self.delta, dtype=float).reshape(-1)
        if gamma.shape != delta.shape:
            raise DimensionMismatch(f"gamma has {gamma.size} entries but delta has {delta.size}")
        if self.ablation not in ABLATIONS:
            raise InvalidSpec(f"Unknown ablation {self.ablation!r}.\n  Try: one of {', '.join(ABLATIONS)}")
        if not np.isfinite(self.lr) or self.lr < 0:
            raise InvalidSpec(f"Learning rate must be finite and >= 0, got {self.lr}")
        if not np.isfinite(self.beta) or self.beta < 0:
            raise InvalidSpec(f"Offset ratio beta must be finite and >= 0, got {self.beta}")
        if self.m < 0:
            raise InvalidSpec(f"Number of negatives m must be >= 0, got {self.m}")
        if self.m == 0 and self.ablation in ("full", "no_averaging"):
            raise InvalidSpec(f"m = 0 leaves nothing to offset with; use ablation 'no_panda' instead of {self.ablation!r}")
        if not np.isfinite(self.logit_scale) or self.logit_scale <= 0:
            raise InvalidSpec(f"Logit scale must be > 0, got {self.logit_scale}")
        object.__setattr__(self, "gamma", gamma)
        object.__setattr__(self, "delta", delta)

    @classmethod
    def initial(cls, dim: int, **options: Any) -> "AdaptState":
        """Identity affine head (``gamma = 1``, ``delta = 0``)."""
        return cls(gamma=np.ones(dim), delta=np.zeros(dim), **options)

    @classmethod
    def for_method(
        cls,
        method: str,
        dim: int,
        *,
        batch_size: int,
        beta: float = DEFAULT_BETA,
        m: int | None = None,
        lr: float = DEFAULT_LR,
        ablation: str = "full",
        **options: Any,
    ) -> "AdaptState":
        """State for ``zero_shot``, ``panda_only``, ``tent`` or ``tent_panda``.

        ``ablation`` applies to the PANDA methods only.
        """
        if method not in METHODS:
            raise InvalidSpec(f"Unknown method {method!r}.\n  Try: one of {', '.join(METHODS)}")
        uses_offset = method in ("panda_only", "tent_panda") and ablation != "no_panda"
        adapts = method in ("tent", "tent_panda")
        return cls.initial(
            dim,
            lr=lr if adapts else 0.0,
            beta=beta if uses_offset else 0.0,
            m=(default_m(batch_size) if m is None else m) if uses_offset else 0,
            ablation=ablation if uses_offset else "no_panda",
            **options,
        )

    @property
    def dim(self) -> int:
        return int(self.gamma.size)

    @property
    def uses_offset(self) -> bool:
        return self.ablation != "no_panda"

    def with_params(self, gamma: np.ndarray, delta: np.ndarray) -> "AdaptState":
        return replace(self, gamma=gamma, delta=delta, step_count=self.step_count + 1)


@dataclass(frozen=True)
class BatchReport:
    """What one adaptation step saw and predicted (before its update)."""

    predictions: np.ndarray
    logits: np.ndarray = field(repr=False)
    entropies: np.ndarray = field(repr=False)
    loss: float
    forward_passes: int
    accuracy: float | None = None
    l1_bias: float | None = None

    @property
    def mean_entropy(self) -> float:
        return float(np.mean(self.entropies))

    def __len__(self) -> int:
        return int(self.predictions.size)
