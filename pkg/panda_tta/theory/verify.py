"""Grid verification of the closed-form accuracy against Monte Carlo."""

from __future__ import annotations

import logging
from dataclasses import asdict, dataclass
from typing import Iterable, Sequence

import numpy as np

from panda_tta.config import rng_for
from panda_tta.core import InvalidSpec

from .gaussian import GaussianWorld, acc_with_offset
from .montecarlo import mc_accuracy

logger = logging.getLogger(__name__)

DEFAULT_S_GRID = (0.5, 1.0, 2.0, 4.0)
DEFAULT_R_GRID = (0.0, 0.3, 0.6, 0.9)
CSV_COLUMNS = ("s", "r", "beta", "analytic", "mc_estimate", "mc_stderr", "pass")


@dataclass(frozen=True)
class VerificationRow:
    s: float
    r: float
    beta: float
    analytic: float
    mc_estimate: float
    mc_stderr: float
    z_score: float
    passed: bool

    def csv_row(self) -> dict[str, object]:
        return {
            "s": self.s,
            "r": self.r,
            "beta": self.beta,
            "analytic": self.analytic,
            "mc_estimate": self.mc_estimate,
            "mc_stderr": self.mc_stderr,
            "pass": int(self.passed),
        }

    def to_dict(self) -> dict[str, object]:
        return asdict(self)


@dataclass(frozen=True)
class VerificationSummary:
    rows: list[VerificationRow]
    sigmas: float

    @property
    def pass_fraction(self) -> float:
        return sum(row.passed for row in self.rows) / max(len(self.rows), 1)

    @property
    def max_abs_z(self) -> float:
        return max((abs(row.z_score) for row in self.rows), default=0.0)

    def accepted(self, *, relaxed: bool = False, min_fraction: float = 0.95, hard_sigmas: float = 4.0) -> bool:
        """Every cell inside the band; with ``relaxed``, most cells inside and none beyond ``hard_sigmas``."""
        if not relaxed:
            return bool(self.rows) and all(row.passed for row in self.rows)
        return self.pass_fraction >= min_fraction and self.max_abs_z <= hard_sigmas


def theorem_betas(r: float) -> list[float]:
    """The offsets checked for each ``r``: ``0, r/2, r, r + 0.2, 1`` (deduplicated, ascending)."""
    return sorted({round(v, 12) for v in (0.0, r / 2.0, r, r + 0.2, 1.0)})


def random_unit_vector(dim: int, seed: int) -> np.ndarray:
    vec = rng_for(seed, "mc", 1 << 20, dim).standard_normal(dim)
    return vec / np.linalg.norm(vec)


def iter_cells(
    s_values: Sequence[float],
    r_values: Sequence[float],
    beta_values: Sequence[float] | None = None,
) -> Iterable[tuple[float, float, float]]:
    for s in s_values:
        for r in r_values:
            betas = theorem_betas(r) if beta_values is None else list(beta_values)
            for beta in betas:
                yield float(s), float(r), float(beta)


def verify_grid(
    s_values: Sequence[float] = DEFAULT_S_GRID,
    r_values: Sequence[float] = DEFAULT_R_GRID,
    beta_values: Sequence[float] | None = None,
    *,
    samples: int = 1_000_000,
    seed: int = 0,
    dim: int = 1,
    sigmas: float = 3.0,
    workers: int | None = None,
) -> VerificationSummary:
    """Compare Monte Carlo and closed-form accuracy on every grid cell.

    With ``dim > 1`` each cell uses ``R = r * I`` and a seeded random unit
    classifier direction, and the analytic value uses ``r = t^T R t``.
    """
    if len(s_values) == 0 or len(r_values) == 0 or (beta_values is not None and len(beta_values) == 0):
        raise InvalidSpec("The s, r and beta grids must be non-empty.\n  Try: --s-grid 1.0 --r-grid 0.3")
    t = random_unit_vector(dim, seed) if dim > 1 else None
    rows = []
    for index, (s, r, beta) in enumerate(iter_cells(s_values, r_values, beta_values)):
        world = GaussianWorld.isotropic(s, r, beta, t) if t is not None else GaussianWorld.scalar(s, r, beta)
        analytic = float(acc_with_offset(world.s, world.r, world.beta))
        est = mc_accuracy(world, samples, seed, key=index, workers=workers)
        z = est.z_score(analytic)
        rows.append(
            VerificationRow(
                s=s,
                r=r,
                beta=beta,
                analytic=analytic,
                mc_estimate=est.estimate,
                mc_stderr=est.std_err,
                z_score=float(z),
                passed=bool(abs(z) <= sigmas),
            )
        )
        logger.info("cell s=%g r=%g beta=%g analytic=%.6f mc=%.6f z=%+.2f", s, r, beta, analytic, est.estimate, z)
    return VerificationSummary(rows=rows, sigmas=sigmas)


def grid_argmax_beta(
    s: float,
    r: float,
    betas: Sequence[float],
    *,
    samples: int | None = None,
    seed: int = 0,
) -> float:
    """Grid ``beta`` with the highest accuracy: analytic, or Monte Carlo when ``samples`` is given.

    Monte Carlo cells share one seed (common random numbers), so neighbouring
    offsets are compared on the same draws.
    """
    if samples is None:
        values = np.asarray(acc_with_offset(s, r, np.asarray(betas, dtype=float)))
    else:
        values = np.array(
            [mc_accuracy(GaussianWorld.scalar(s, r, b), samples, seed).estimate for b in betas]
        )
    return float(betas[int(np.argmax(values))])
