"""
Gaussian offset theory tests.

Coverage:
    1. Closed forms: no-offset accuracy, the beta = 0 reduction, beta = r optimum.
    2. High-dimensional reduction to the scalar correlation.
    3. Monte Carlo oracle: agreement, seeding, thread independence, anisotropic R.
    4. Grid verification, the 5x5x5 grid, and the argmax of the beta grid.
"""

from __future__ import annotations

import math

import numpy as np
import pytest

from panda_tta.core import (
    AsymmetricMatrix,
    CorrelationOutOfRange,
    InvalidSpec,
    NonPositiveSeverity,
    NotUnitVector,
    TooFewSamples,
)
from panda_tta.theory import (
    CSV_COLUMNS,
    DEFAULT_BETA_GRID,
    GaussianWorld,
    acc_gain,
    acc_no_offset,
    acc_with_offset,
    beta_sweep,
    grid_argmax_beta,
    mc_accuracy,
    optimal_beta,
    reduce_high_d,
    residual_corruption_scale,
    theorem_betas,
    verify_grid,
)


# ─── 1. Closed forms ──────────────────────────────────────────────────────────
class TestClosedForm:
    def test_no_offset_known_values(self):
        assert acc_no_offset(1.0) == pytest.approx(0.75)
        assert acc_no_offset(1e-9) == pytest.approx(1.0)
        assert acc_no_offset(1e9) == pytest.approx(0.5)

    def test_zero_beta_matches_no_offset_exactly(self):
        for s in (0.5, 1.0, 2.0, 4.0):
            for r in (0.0, 0.3, 0.9):
                assert acc_with_offset(s, r, 0.0) == acc_no_offset(s)

    def test_best_beta_is_r(self):
        for s in (0.5, 2.0):
            for r in (0.2, 0.6, 0.9):
                peak = acc_with_offset(s, r, r)
                assert np.all(beta_sweep(s, r) <= peak + 1e-15)
                assert optimal_beta(GaussianWorld.scalar(s, r, 0.0)) == r

    def test_broken_formula_is_reported(self, monkeypatch):
        monkeypatch.setattr("panda_tta.theory.gaussian.beta_sweep", lambda s, r, grid: np.array([0.5, 2.0]))
        with pytest.raises(InvalidSpec, match="beats beta = r"):
            optimal_beta(GaussianWorld.scalar(1.0, 0.4, 0.0))

    def test_no_offset_strictly_decreasing_in_severity(self):
        values = acc_no_offset(np.linspace(0.05, 20.0, 400))
        assert np.all(np.diff(values) < 0)

    def test_gain_sign(self):
        # offsetting helps for 0 < beta < 2r and hurts beyond
        assert acc_gain(1.0, 0.6, 0.6) > 0
        assert acc_gain(1.0, 0.6, 1.1) > 0
        assert acc_gain(1.0, 0.6, 1.3) < 0
        assert acc_gain(1.0, 0.0, 0.5) < 0

    def test_residual_scale(self):
        assert residual_corruption_scale(0.6, 0.0) == pytest.approx(1.0)
        assert residual_corruption_scale(0.6, 0.6) == pytest.approx(0.8)

    def test_vectorized(self):
        out = acc_with_offset(1.0, 0.5, np.array(DEFAULT_BETA_GRID))
        assert out.shape == (11,)

    def test_bad_inputs(self):
        with pytest.raises(NonPositiveSeverity):
            acc_no_offset(0.0)
        with pytest.raises(CorrelationOutOfRange):
            acc_with_offset(1.0, 1.0, 0.5)
        with pytest.raises(CorrelationOutOfRange):
            GaussianWorld.scalar(1.0, -0.1, 0.0)


# ─── 2. High-dimensional reduction ────────────────────────────────────────────
class TestReduction:
    def test_isotropic(self):
        t = np.ones(4) / 2.0
        assert reduce_high_d(t, 0.4 * np.eye(4)) == pytest.approx(0.4)

    def test_anisotropic(self):
        t = np.array([1.0, 0.0])
        R = np.array([[0.5, 0.1], [0.1, 0.2]])
        assert reduce_high_d(t, R) == pytest.approx(0.5)

    def test_invariant_under_rotation(self):
        rng = np.random.default_rng(11)
        for dim in (2, 5, 8, 16):
            basis, _ = np.linalg.qr(rng.standard_normal((dim, dim)))
            R = basis @ np.diag(rng.uniform(-0.9, 0.9, dim)) @ basis.T
            R = (R + R.T) / 2.0
            t = rng.standard_normal(dim)
            t /= np.linalg.norm(t)
            Q, _ = np.linalg.qr(rng.standard_normal((dim, dim)))
            rotated_R = Q @ R @ Q.T
            rotated_R = (rotated_R + rotated_R.T) / 2.0
            assert abs(reduce_high_d(Q @ t, rotated_R) - reduce_high_d(t, R)) < 1e-10
            if reduce_high_d(t, R) >= 0.0:
                before = GaussianWorld.high_dimensional(1.5, t, R, 0.4).analytic_accuracy()
                after = GaussianWorld.high_dimensional(1.5, Q @ t, rotated_R, 0.4).analytic_accuracy()
                assert after == pytest.approx(before, abs=1e-10)

    def test_checks(self):
        with pytest.raises(NotUnitVector):
            reduce_high_d([1.0, 1.0], np.eye(2) * 0.1)
        with pytest.raises(AsymmetricMatrix):
            reduce_high_d([1.0, 0.0], np.array([[0.1, 0.2], [0.0, 0.1]]))


# ─── 3. Monte Carlo ───────────────────────────────────────────────────────────
class TestMonteCarlo:
    @pytest.mark.parametrize("s,r,beta", [(1.0, 0.3, 0.0), (2.0, 0.6, 0.6), (0.5, 0.9, 1.0)])
    def test_matches_closed_form(self, s, r, beta):
        est = mc_accuracy(GaussianWorld.scalar(s, r, beta), 200_000, seed=7)
        assert est.within(acc_with_offset(s, r, beta), sigmas=4.5)

    def test_high_dimensional_matches_scalar_formula(self):
        t = np.ones(8) / math.sqrt(8)
        world = GaussianWorld.isotropic(1.0, 0.5, 0.5, t)
        est = mc_accuracy(world, 100_000, seed=2)
        assert est.within(world.analytic_accuracy(), sigmas=4.5)

    def test_isotropic_grid_matches_scalar_formula(self):
        summary = verify_grid([0.5, 1.0, 2.0], [0.3, 0.6], samples=40_000, seed=5, dim=8)
        assert len(summary.rows) == 30
        assert summary.accepted(relaxed=True)

    def test_anisotropic_correlation_reduces_to_its_projection(self):
        rng = np.random.default_rng(8)
        basis, _ = np.linalg.qr(rng.standard_normal((8, 8)))
        R = basis @ np.diag(rng.uniform(0.0, 0.8, 8)) @ basis.T
        R = (R + R.T) / 2.0
        t = rng.standard_normal(8)
        t /= np.linalg.norm(t)
        r = reduce_high_d(t, R)
        for key, beta in enumerate((0.0, r, 1.0)):
            world = GaussianWorld.high_dimensional(1.0, t, R, beta)
            est = mc_accuracy(world, 100_000, seed=9, key=key)
            assert est.within(acc_with_offset(1.0, r, beta), sigmas=4.5)

    def test_independent_of_worker_count(self):
        world = GaussianWorld.scalar(1.0, 0.5, 0.5)
        one = mc_accuracy(world, 300_000, seed=1, workers=1)
        four = mc_accuracy(world, 300_000, seed=1, workers=4)
        assert one.correct == four.correct

    def test_seeded(self):
        world = GaussianWorld.scalar(1.0, 0.5, 0.5)
        assert mc_accuracy(world, 20_000, seed=3).correct == mc_accuracy(world, 20_000, seed=3).correct

    def test_too_few_samples(self):
        with pytest.raises(TooFewSamples):
            mc_accuracy(GaussianWorld.scalar(1.0, 0.5, 0.5), 100, seed=0)


# ─── 4. Grid verification ─────────────────────────────────────────────────────
class TestVerification:
    def test_theorem_betas(self):
        assert theorem_betas(0.3) == [0.0, 0.15, 0.3, 0.5, 1.0]
        assert theorem_betas(0.0) == [0.0, 0.2, 1.0]

    def test_small_grid(self):
        summary = verify_grid([1.0], [0.3], samples=50_000, seed=0)
        assert len(summary.rows) == 5
        assert summary.max_abs_z < 5.0
        assert tuple(summary.rows[0].csv_row()) == CSV_COLUMNS

    def test_five_by_five_by_five_grid(self):
        summary = verify_grid(
            [0.5, 1.0, 2.0, 3.0, 4.0],
            [0.0, 0.2, 0.4, 0.6, 0.8],
            [0.0, 0.25, 0.5, 0.75, 1.0],
            samples=20_000,
            seed=0,
        )
        assert len(summary.rows) == 125
        assert {(row.s, row.r, row.beta) for row in summary.rows} == {
            (s, r, b)
            for s in (0.5, 1.0, 2.0, 3.0, 4.0)
            for r in (0.0, 0.2, 0.4, 0.6, 0.8)
            for b in (0.0, 0.25, 0.5, 0.75, 1.0)
        }
        assert summary.accepted(relaxed=True)

    def test_analytic_argmax(self):
        assert grid_argmax_beta(1.0, 0.3, DEFAULT_BETA_GRID) == 0.3

    def test_monte_carlo_argmax_is_near_r(self):
        best = grid_argmax_beta(1.0, 0.6, DEFAULT_BETA_GRID, samples=300_000, seed=4)
        assert abs(best - 0.6) <= 0.1 + 1e-12

    def test_argmax_is_grid_point_nearest_r(self):
        rng = np.random.default_rng(20)
        for s, r in zip(rng.uniform(0.5, 4.0, 20), rng.uniform(0.0, 0.95, 20)):
            assert grid_argmax_beta(s, r, DEFAULT_BETA_GRID) == pytest.approx(round(r, 1))

    def test_monte_carlo_argmax_over_random_worlds(self):
        # coarse grid so neighbouring offsets differ by more than the paired noise
        betas = (0.0, 0.2, 0.4, 0.6, 0.8, 1.0)
        rng = np.random.default_rng(21)
        for seed, (s, r) in enumerate(zip(rng.uniform(0.5, 2.0, 20), rng.choice([0.2, 0.4, 0.6, 0.8], 20))):
            assert grid_argmax_beta(s, float(r), betas) == pytest.approx(r)
            assert grid_argmax_beta(s, float(r), betas, samples=400_000, seed=seed) == pytest.approx(r)
