"""Closed-form accuracy of sign classifiers under Gaussian corruption.

The model: a class component ``v_cls ~ N(0, 1)``, an independent corruption
component ``v_corr ~ N(0, s^2)``, and a negative feature ``n ~ N(0, s^2)``
with ``corr(n, v_cls) = 0`` and ``corr(n, v_corr) = r``. Classifying with
``sign(v - beta * n)`` leaves a residual corruption of scale
``s * sqrt(1 - r^2 + (beta - r)^2)``, which is smallest at ``beta = r``.

In ``D`` dimensions with classifier direction ``t`` and cross-correlation
matrix ``R`` everything reduces to the scalar case with ``r = t^T R t``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Sequence

import numpy as np

from panda_tta.core import (
    AsymmetricMatrix,
    CorrelationOutOfRange,
    DimensionMismatch,
    InvalidSpec,
    NonPositiveSeverity,
    NotUnitVector,
)

UNIT_TOL = 1e-6
SYMMETRY_TOL = 1e-12
DEFAULT_BETA_GRID = tuple(round(0.1 * k, 1) for k in range(11))


def _check_severity(s: Any) -> np.ndarray:
    arr = np.asarray(s, dtype=float)
    if np.any(~np.isfinite(arr)) or np.any(arr <= 0.0):
        raise NonPositiveSeverity(f"Corruption severity s must be > 0, got {s}")
    return arr


def _check_correlation(r: Any) -> np.ndarray:
    arr = np.asarray(r, dtype=float)
    if np.any(~np.isfinite(arr)) or np.any(arr < 0.0) or np.any(arr >= 1.0):
        raise CorrelationOutOfRange(f"Correlation r must lie in [0, 1), got {r}")
    return arr


def _scalar_or_array(value: np.ndarray) -> float | np.ndarray:
    return float(value) if np.ndim(value) == 0 else value


def acc_no_offset(s: Any) -> float | np.ndarray:
    """``1/2 + arctan(1/s) / pi``: accuracy of ``sign(v)`` at severity ``s``."""
    s_arr = _check_severity(s)
    return _scalar_or_array(0.5 + np.arctan(1.0 / s_arr) / np.pi)


def residual_corruption_scale(r: Any, beta: Any) -> float | np.ndarray:
    """``sqrt(1 - r^2 + (beta - r)^2)``; equals 1 at ``beta = 0`` and ``sqrt(1 - r^2)`` at ``beta = r``."""
    r_arr = np.asarray(r, dtype=float)
    b_arr = np.asarray(beta, dtype=float)
    return _scalar_or_array(np.sqrt(1.0 - r_arr**2 + (b_arr - r_arr) ** 2))


def acc_with_offset(s: Any, r: Any, beta: Any) -> float | np.ndarray:
    """Accuracy of ``sign(v - beta * n)``; vectorized over broadcastable inputs."""
    s_arr = _check_severity(s)
    r_arr = _check_correlation(r)
    b_arr = np.asarray(beta, dtype=float)
    # beta = 0 is pinned to scale 1 so the no-offset formula is reproduced exactly
    scale = np.where(b_arr == 0.0, 1.0, np.sqrt(1.0 - r_arr**2 + (b_arr - r_arr) ** 2))
    return _scalar_or_array(0.5 + np.arctan(1.0 / (s_arr * scale)) / np.pi)


def acc_gain(s: Any, r: Any, beta: Any) -> float | np.ndarray:
    """Accuracy change from offsetting, ``acc_with_offset - acc_no_offset``."""
    return _scalar_or_array(np.asarray(acc_with_offset(s, r, beta)) - np.asarray(acc_no_offset(s)))


def beta_sweep(s: float, r: float, betas: Sequence[float] = DEFAULT_BETA_GRID) -> np.ndarray:
    """Analytic accuracy for each ``beta`` in ``betas``."""
    return np.asarray(acc_with_offset(s, r, np.asarray(betas, dtype=float)), dtype=float)


def reduce_high_d(t: Any, R: Any) -> float:
    """Scalar correlation ``t^T R t`` seen along the classifier direction ``t``."""
    t_arr = np.asarray(t, dtype=float).reshape(-1)
    R_arr = np.asarray(R, dtype=float)
    if R_arr.shape != (t_arr.size, t_arr.size):
        raise DimensionMismatch(f"R must be {t_arr.size}x{t_arr.size}, got {R_arr.shape}")
    if abs(float(np.linalg.norm(t_arr)) - 1.0) > UNIT_TOL:
        raise NotUnitVector(f"Classifier direction t must have unit norm, got {np.linalg.norm(t_arr):.8f}")
    if not np.allclose(R_arr, R_arr.T, rtol=0.0, atol=SYMMETRY_TOL):
        raise AsymmetricMatrix("Correlation matrix R must be symmetric")
    if np.any(np.abs(R_arr) > 1.0):
        raise AsymmetricMatrix("Correlation matrix entries must lie in [-1, 1]")
    return float(t_arr @ R_arr @ t_arr)


@dataclass(frozen=True)
class GaussianWorld:
    """Parameters of the scalar (``dim == 1``) or high-dimensional Gaussian model."""

    s: float
    r: float
    beta: float
    dim: int = 1
    t: np.ndarray | None = field(default=None, repr=False)
    R: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self) -> None:
        _check_severity(self.s)
        if self.dim < 1:
            raise DimensionMismatch(f"dim must be >= 1, got {self.dim}")
        if self.dim > 1:
            if self.t is None or self.R is None:
                raise DimensionMismatch("A high-dimensional world needs both t and R")
            reduced = reduce_high_d(self.t, self.R)
            if np.asarray(self.t).size != self.dim:
                raise DimensionMismatch(f"t has {np.asarray(self.t).size} entries but dim is {self.dim}")
            if abs(reduced - float(self.r)) > 1e-9:
                raise CorrelationOutOfRange(f"r = {self.r} does not equal t^T R t = {reduced}")
            eig = np.linalg.eigvalsh(np.asarray(self.R, dtype=float))
            if np.any(np.abs(eig) >= 1.0):
                raise CorrelationOutOfRange("R must have spectral norm < 1 for a valid joint Gaussian")
            object.__setattr__(self, "t", np.asarray(self.t, dtype=float).reshape(-1))
            object.__setattr__(self, "R", np.asarray(self.R, dtype=float))
        _check_correlation(self.r)

    @classmethod
    def scalar(cls, s: float, r: float, beta: float) -> "GaussianWorld":
        return cls(s=float(s), r=float(r), beta=float(beta))

    @classmethod
    def high_dimensional(cls, s: float, t: Any, R: Any, beta: float) -> "GaussianWorld":
        t_arr = np.asarray(t, dtype=float).reshape(-1)
        return cls(s=float(s), r=reduce_high_d(t_arr, R), beta=float(beta), dim=int(t_arr.size), t=t_arr, R=R)

    @classmethod
    def isotropic(cls, s: float, r: float, beta: float, t: Any) -> "GaussianWorld":
        """High-dimensional world with ``R = r * I``."""
        t_arr = np.asarray(t, dtype=float).reshape(-1)
        return cls.high_dimensional(s, t_arr, r * np.eye(t_arr.size), beta)

    def with_beta(self, beta: float) -> "GaussianWorld":
        return GaussianWorld(s=self.s, r=self.r, beta=float(beta), dim=self.dim, t=self.t, R=self.R)

    def analytic_accuracy(self) -> float:
        return float(acc_with_offset(self.s, self.r, self.beta))


def optimal_beta(world: GaussianWorld, grid: Sequence[float] = DEFAULT_BETA_GRID) -> float:
    """Return the maximizer ``beta = r`` after checking no grid point beats it."""
    best = float(world.r)
    peak = float(acc_with_offset(world.s, best, best))
    values = beta_sweep(world.s, best, grid)
    if not np.all(values <= peak + 1e-15):
        raise InvalidSpec(f"A grid beta beats beta = r = {best:g} at s = {world.s:g}; the accuracy formula is broken")
    return best
