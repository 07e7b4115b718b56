"""Central-difference reference gradients for the adaptation loss."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from panda_tta.features import TextBank
from panda_tta.nda import ImageTensor
from panda_tta.world import World

from .gradients import BatchFeatures, evaluate, forward, prepare_batch
from .state import AdaptState

FD_STEP = 1e-4


def batch_loss(state: AdaptState, feats: BatchFeatures, text: np.ndarray, gamma: np.ndarray, delta: np.ndarray) -> float:
    beta = state.beta if state.uses_offset else 0.0
    fp = forward(gamma, delta, feats, text, beta=beta, logit_scale=state.logit_scale, renormalize=state.renormalize)
    return fp.loss


def finite_difference_gradient(
    state: AdaptState,
    feats: BatchFeatures,
    bank: TextBank,
    *,
    h: float = FD_STEP,
) -> tuple[np.ndarray, np.ndarray]:
    """Return central-difference gradients for ``gamma`` and ``delta``.

    The negatives are held fixed, so the reference differentiates through the
    prototype as well; ``stop_prototype_grad`` has no counterpart here.
    """
    grads = []
    for which in ("gamma", "delta"):
        params = getattr(state, which)
        grad = np.zeros_like(params)
        for k in range(params.size):
            plus = params.copy()
            minus = params.copy()
            plus[k] += h
            minus[k] -= h
            if which == "gamma":
                f_plus = batch_loss(state, feats, bank.vectors, plus, state.delta)
                f_minus = batch_loss(state, feats, bank.vectors, minus, state.delta)
            else:
                f_plus = batch_loss(state, feats, bank.vectors, state.gamma, plus)
                f_minus = batch_loss(state, feats, bank.vectors, state.gamma, minus)
            grad[k] = (f_plus - f_minus) / (2 * h)
        grads.append(grad)
    return grads[0], grads[1]


@dataclass(frozen=True)
class GradientCheck:
    analytic_gamma: np.ndarray
    analytic_delta: np.ndarray
    numeric_gamma: np.ndarray
    numeric_delta: np.ndarray
    floor: float

    def relative_errors(self) -> np.ndarray:
        """``|a - n| / max(|a|, |n|, floor)`` for every coordinate of both vectors."""
        analytic = np.concatenate([self.analytic_gamma, self.analytic_delta])
        numeric = np.concatenate([self.numeric_gamma, self.numeric_delta])
        scale = np.maximum(np.maximum(np.abs(analytic), np.abs(numeric)), self.floor)
        return np.abs(analytic - numeric) / scale

    @property
    def max_relative_error(self) -> float:
        return float(np.max(self.relative_errors()))

    def passed(self, tol: float = 1e-4) -> bool:
        return self.max_relative_error < tol


def gradient_check(
    state: AdaptState,
    batch: Sequence[ImageTensor],
    world: World,
    bank: TextBank | None = None,
    *,
    nda_seed: int = 0,
    h: float = FD_STEP,
    abs_floor: float = 1e-8,
    rel_floor: float = 1e-3,
) -> GradientCheck:
    """Compare analytic gradients with central differences on one batch.

    Coordinates whose gradient is tiny are compared against
    ``max(abs_floor, rel_floor * max|numeric|)`` instead of their own size.
    """
    bank = world.bank if bank is None else bank
    feats = prepare_batch(state, batch, world, nda_seed=nda_seed)
    analytic = evaluate(state, feats, bank)
    num_gamma, num_delta = finite_difference_gradient(state, feats, bank, h=h)
    peak = float(np.max(np.abs(np.concatenate([num_gamma, num_delta]))))
    return GradientCheck(
        analytic_gamma=analytic.grad_gamma,
        analytic_delta=analytic.grad_delta,
        numeric_gamma=num_gamma,
        numeric_delta=num_delta,
        floor=max(abs_floor, rel_floor * peak),
    )
