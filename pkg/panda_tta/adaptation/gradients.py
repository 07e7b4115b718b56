"""Forward pass of one adaptation step and its analytic gradient.

For originals ``u_i = P x_i`` and negatives ``w_j = P x^-_j``::

    e_i = normalize(gamma * u_i + delta)
    n_j = normalize(gamma * w_j + delta)
    d_i = e_i - beta * sum_j W_ij n_j           (optionally renormalized)
    l_i = scale * T d_i
    loss = mean_i H(softmax(l_i))

``W`` encodes the ablation: uniform ``1/M`` rows share the batch prototype,
a one-hot column picks a single negative, and the identity pairs every image
with its own shuffled copy. The backward pass is written out by hand and
checked against central differences in ``gradcheck``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from panda_tta.config import rng_for
from panda_tta.core import DimensionMismatch, EmptyBatch
from panda_tta.features import TextBank
from panda_tta.nda import ImageTensor, negative_augment, per_image_negatives
from panda_tta.world import World

from .entropy import entropy_grad
from .state import AdaptState


@dataclass(frozen=True)
class BatchFeatures:
    """Projected originals, projected negatives and the mixing weights ``W``."""

    originals: np.ndarray
    negatives: np.ndarray
    weights: np.ndarray = field(repr=False)

    @property
    def batch_size(self) -> int:
        return int(self.originals.shape[0])

    @property
    def num_negatives(self) -> int:
        return int(self.negatives.shape[0])


def mixing_weights(ablation: str, batch_size: int, num_negatives: int, pick_seed: int) -> np.ndarray:
    if ablation == "no_panda" or num_negatives == 0:
        return np.zeros((batch_size, 0))
    if ablation == "per_image_shuffle":
        return np.eye(batch_size)
    if ablation == "no_averaging":
        weights = np.zeros((batch_size, num_negatives))
        weights[:, int(rng_for(pick_seed, "pick").integers(num_negatives))] = 1.0
        return weights
    return np.full((batch_size, num_negatives), 1.0 / num_negatives)


def make_negatives(state: AdaptState, batch: Sequence[ImageTensor], world: World, nda_seed: int) -> list[ImageTensor]:
    """Negative images for ``batch`` under the state's ablation."""
    if state.ablation == "no_panda":
        return []
    if state.ablation == "per_image_shuffle":
        return per_image_negatives(batch, world.grid, nda_seed)
    # a short final batch can fill at most len(batch) negatives
    return negative_augment(batch, world.grid, min(state.m, len(batch)), nda_seed)


def prepare_batch(
    state: AdaptState,
    batch: Sequence[ImageTensor],
    world: World,
    *,
    nda_seed: int = 0,
    negatives: Sequence[ImageTensor] | None = None,
) -> BatchFeatures:
    """Run the frozen projection over originals and negatives (``B + M`` forwards)."""
    if len(batch) == 0:
        raise EmptyBatch("An adaptation step needs at least one image")
    if negatives is None:
        negatives = make_negatives(state, batch, world, nda_seed)
    elif state.ablation == "per_image_shuffle" and len(negatives) != len(batch):
        raise DimensionMismatch(f"per_image_shuffle pairs every image with one negative; got {len(negatives)} for {len(batch)} images")
    encoder = world.encoder
    originals = encoder.project(batch)
    projected = encoder.project(negatives) if len(negatives) else np.zeros((0, originals.shape[1]))
    weights = mixing_weights(state.ablation, len(batch), projected.shape[0], nda_seed)
    return BatchFeatures(originals=originals, negatives=projected, weights=weights)


@dataclass(frozen=True)
class ForwardPass:
    """Intermediates kept for the backward pass."""

    z_norm: np.ndarray
    e: np.ndarray
    neg_norm: np.ndarray
    neg_e: np.ndarray
    d_norm: np.ndarray | None
    d: np.ndarray
    logits: np.ndarray
    entropies: np.ndarray
    grad_logits: np.ndarray

    @property
    def loss(self) -> float:
        return float(np.mean(self.entropies))


def _normalize_rows(z: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    norm = np.linalg.norm(z, axis=1, keepdims=True)
    return z / norm, norm


def _normalize_backward(grad_out: np.ndarray, unit: np.ndarray, norm: np.ndarray) -> np.ndarray:
    """Gradient through ``z -> z / ||z||`` given the output gradient."""
    return (grad_out - unit * np.sum(unit * grad_out, axis=1, keepdims=True)) / norm


def forward(
    gamma: np.ndarray,
    delta: np.ndarray,
    feats: BatchFeatures,
    text: np.ndarray,
    *,
    beta: float,
    logit_scale: float,
    renormalize: bool = False,
) -> ForwardPass:
    e, z_norm = _normalize_rows(feats.originals * gamma + delta)
    if feats.num_negatives:
        neg_e, neg_norm = _normalize_rows(feats.negatives * gamma + delta)
        d = e - beta * (feats.weights @ neg_e)
    else:
        neg_e, neg_norm = np.zeros((0, e.shape[1])), np.zeros((0, 1))
        d = e
    d_norm = None
    if renormalize:
        d, d_norm = _normalize_rows(d)
    logits = logit_scale * (d @ text.T)
    entropies, grad_logits = entropy_grad(logits)
    return ForwardPass(
        z_norm=z_norm,
        e=e,
        neg_norm=neg_norm,
        neg_e=neg_e,
        d_norm=d_norm,
        d=d,
        logits=logits,
        entropies=entropies,
        grad_logits=grad_logits,
    )


def backward(
    fp: ForwardPass,
    feats: BatchFeatures,
    text: np.ndarray,
    *,
    beta: float,
    logit_scale: float,
    stop_prototype_grad: bool = False,
) -> tuple[np.ndarray, np.ndarray]:
    """Gradients of the mean entropy with respect to ``gamma`` and ``delta``."""
    g_d = (logit_scale / feats.batch_size) * (fp.grad_logits @ text)
    if fp.d_norm is not None:
        g_d = _normalize_backward(g_d, fp.d, fp.d_norm)
    g_z = _normalize_backward(g_d, fp.e, fp.z_norm)
    grad_gamma = np.sum(g_z * feats.originals, axis=0)
    grad_delta = np.sum(g_z, axis=0)
    if feats.num_negatives and not stop_prototype_grad and beta != 0.0:
        g_neg_e = -beta * (feats.weights.T @ g_d)
        g_neg_z = _normalize_backward(g_neg_e, fp.neg_e, fp.neg_norm)
        grad_gamma = grad_gamma + np.sum(g_neg_z * feats.negatives, axis=0)
        grad_delta = grad_delta + np.sum(g_neg_z, axis=0)
    return grad_gamma, grad_delta


@dataclass(frozen=True)
class LossAndGrad:
    loss: float
    grad_gamma: np.ndarray
    grad_delta: np.ndarray
    logits: np.ndarray = field(repr=False)
    entropies: np.ndarray = field(repr=False)
    forward_passes: int = 0


def evaluate(state: AdaptState, feats: BatchFeatures, bank: TextBank) -> LossAndGrad:
    """Loss and gradients for already projected features."""
    beta = state.beta if state.uses_offset else 0.0
    fp = forward(
        state.gamma,
        state.delta,
        feats,
        bank.vectors,
        beta=beta,
        logit_scale=state.logit_scale,
        renormalize=state.renormalize,
    )
    grad_gamma, grad_delta = backward(
        fp,
        feats,
        bank.vectors,
        beta=beta,
        logit_scale=state.logit_scale,
        stop_prototype_grad=state.stop_prototype_grad,
    )
    return LossAndGrad(
        loss=fp.loss,
        grad_gamma=grad_gamma,
        grad_delta=grad_delta,
        logits=fp.logits,
        entropies=fp.entropies,
        forward_passes=feats.batch_size + feats.num_negatives,
    )


def loss_and_grad(
    state: AdaptState,
    batch: Sequence[ImageTensor],
    world: World,
    bank: TextBank | None = None,
    *,
    nda_seed: int = 0,
    negatives: Sequence[ImageTensor] | None = None,
) -> LossAndGrad:
    """Mean batch entropy and its analytic ``(gamma, delta)`` gradients.

    ``world`` supplies the frozen encoder and the patch grid; ``bank``
    defaults to the world's text bank. Pass ``negatives`` to pin the negative
    images instead of drawing them from ``nda_seed``.
    """
    feats = prepare_batch(state, batch, world, nda_seed=nda_seed, negatives=negatives)
    return evaluate(state, feats, world.bank if bank is None else bank)
