"""Monte Carlo oracle for the Gaussian offset model.

Samples follow the reparametrization used to derive the closed form:
``v_cls = z1``, ``v_corr = s * z2`` and ``n = s * r * z2 + s * sqrt(1 - r^2) * z3``
with independent standard normals. In ``D`` dimensions the same construction
reads ``n = s * (R z2 + (I - R^2)^{1/2} z3)``, which is exactly the scalar
recipe applied per coordinate when ``R = r * I``.

Work is split into fixed-size shards, each with its own generator keyed by
``(seed, key, shard)``; counts are merged in shard order, so the estimate does
not depend on how many worker threads ran the shards.
"""

from __future__ import annotations

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from panda_tta.config import MC_SHARD_SIZE, MIN_MC_SAMPLES, RuntimeConfig, rng_for
from panda_tta.core import TooFewSamples

from .gaussian import GaussianWorld

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class MonteCarloEstimate:
    estimate: float
    std_err: float
    n_samples: int
    correct: int

    def within(self, target: float, sigmas: float = 3.0) -> bool:
        return abs(self.estimate - target) <= sigmas * self.std_err

    def z_score(self, target: float) -> float:
        if self.std_err == 0.0:
            return 0.0 if self.estimate == target else math.inf
        return (self.estimate - target) / self.std_err


def _sign(x: np.ndarray) -> np.ndarray:
    # zero counts as +1
    return np.where(x >= 0.0, 1, -1)


def _noise_root(R: np.ndarray) -> np.ndarray:
    """Symmetric square root of ``I - R^2`` via the eigendecomposition of ``R``."""
    eig, vecs = np.linalg.eigh(R)
    return (vecs * np.sqrt(np.clip(1.0 - eig**2, 0.0, None))) @ vecs.T


def _shard_correct(world: GaussianWorld, n: int, rng: np.random.Generator, noise_root: np.ndarray | None) -> int:
    s, r, beta = world.s, world.r, world.beta
    if world.dim == 1:
        z1 = rng.standard_normal(n)
        z2 = rng.standard_normal(n)
        z3 = rng.standard_normal(n)
        v = z1 + s * z2
        neg = s * r * z2 + s * math.sqrt(1.0 - r * r) * z3
        y = _sign(z1)
        pred = _sign(v - beta * neg)
        return int(np.count_nonzero(pred == y))

    d = world.dim
    z1 = rng.standard_normal((n, d))
    z2 = rng.standard_normal((n, d))
    z3 = rng.standard_normal((n, d))
    v = z1 + s * z2
    neg = s * (z2 @ world.R + z3 @ noise_root)
    y = _sign(z1 @ world.t)
    pred = _sign((v - beta * neg) @ world.t)
    return int(np.count_nonzero(pred == y))


def mc_accuracy(
    world: GaussianWorld,
    n_samples: int,
    seed: int,
    *,
    key: int = 0,
    workers: int | None = None,
    shard_size: int = MC_SHARD_SIZE,
) -> MonteCarloEstimate:
    """Estimate ``Pr(sign((v - beta n)^T t) = sign(v_cls^T t))`` with its binomial standard error."""
    n_samples = int(n_samples)
    if n_samples < MIN_MC_SAMPLES:
        raise TooFewSamples(
            f"Monte Carlo needs at least {MIN_MC_SAMPLES} samples, got {n_samples}.\n"
            f"  Try: --samples {MIN_MC_SAMPLES} or more."
        )
    workers = RuntimeConfig.from_env().threads if workers is None else max(1, int(workers))
    noise_root = _noise_root(world.R) if world.dim > 1 else None

    sizes = [shard_size] * (n_samples // shard_size)
    if n_samples % shard_size:
        sizes.append(n_samples % shard_size)

    def run(index: int) -> int:
        return _shard_correct(world, sizes[index], rng_for(seed, "mc", key, index), noise_root)

    if workers == 1 or len(sizes) == 1:
        counts = [run(i) for i in range(len(sizes))]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            counts = list(pool.map(run, range(len(sizes))))

    correct = sum(counts)
    p = correct / n_samples
    std_err = math.sqrt(p * (1.0 - p) / n_samples)
    logger.debug("mc_accuracy s=%g r=%g beta=%g dim=%d -> %.6f +- %.6f", world.s, world.r, world.beta, world.dim, p, std_err)
    return MonteCarloEstimate(estimate=p, std_err=std_err, n_samples=n_samples, correct=correct)
