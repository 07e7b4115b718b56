"""Autograd cross-check of the hand-written gradients (needs the ``torch`` extra)."""

from __future__ import annotations

import numpy as np

from panda_tta._optional import optional_import
from panda_tta.features import TextBank

from .gradients import BatchFeatures
from .state import AdaptState


def torch_loss_and_grad(state: AdaptState, feats: BatchFeatures, bank: TextBank) -> tuple[float, np.ndarray, np.ndarray]:
    """Same loss as :func:`panda_tta.adaptation.gradients.evaluate`, differentiated by torch in float64."""
    torch = optional_import("torch", "torch", "The torch gradient reference")
    gamma = torch.tensor(state.gamma, dtype=torch.float64, requires_grad=True)
    delta = torch.tensor(state.delta, dtype=torch.float64, requires_grad=True)
    originals = torch.tensor(feats.originals, dtype=torch.float64)
    text = torch.tensor(bank.vectors, dtype=torch.float64)

    z = originals * gamma + delta
    d = z / z.norm(dim=1, keepdim=True)
    beta = state.beta if state.uses_offset else 0.0
    if feats.num_negatives:
        negatives = torch.tensor(feats.negatives, dtype=torch.float64)
        weights = torch.tensor(feats.weights, dtype=torch.float64)
        zn = negatives * gamma + delta
        en = zn / zn.norm(dim=1, keepdim=True)
        if state.stop_prototype_grad:
            en = en.detach()
        d = d - beta * (weights @ en)
    if state.renormalize:
        d = d / d.norm(dim=1, keepdim=True)
    logits = state.logit_scale * (d @ text.T)
    logp = torch.log_softmax(logits, dim=1)
    loss = -(logp.exp() * logp).sum(dim=1).mean()
    loss.backward()
    return float(loss.item()), gamma.grad.numpy().copy(), delta.grad.numpy().copy()
