import numpy as np
import pytest

from mzkit.core.errors import InputError, SearchNotConvergedError
from mzkit.models.measure import Measure
from mzkit.services.generators import gauss_level
from mzkit.services.polyspace import orthonormal_basis
from mzkit.services.scaling import (
    bessel_profile,
    bessel_zero_distance_test,
    bessel_zeros,
    from_ball,
    jstar,
    jstar_at_zero,
    orthogonality_residual,
    orthogonality_residual_search,
    scaling_error,
    scaling_is_monotone,
    to_ball,
)

SQRT_2_OVER_PI = np.sqrt(2 / np.pi)


class TestBessel:
    """J*_ν and the zeros of J_ν."""

    def test_value_at_zero(self):
        """J*_{1/2}(0) = sqrt(2/π)."""
        assert jstar_at_zero(0.5) == pytest.approx(SQRT_2_OVER_PI, rel=1e-14)
        assert jstar(0.5, 0.0) == pytest.approx(SQRT_2_OVER_PI, rel=1e-14)

    @pytest.mark.parametrize("t", [0.3, 1.0, 3.0])
    def test_half_order_closed_form(self, t):
        """J*_{1/2}(t) = sqrt(2/π) sin t / t on both sides of the series cutoff."""
        assert jstar(0.5, t) == pytest.approx(SQRT_2_OVER_PI * np.sin(t) / t, rel=1e-12)

    def test_order_one_series(self):
        """J*_1(t) = J_1(t) / t ≈ 1/2 - t^2/16 near zero."""
        assert jstar(1.0, 1e-3) == pytest.approx(0.5 - 1e-6 / 16, rel=1e-12)

    def test_array_input(self):
        """Arrays keep their shape."""
        values = jstar(1.5, np.array([[0.5, 2.0], [4.0, 8.0]]))
        assert values.shape == (2, 2)

    def test_zeros_half_order(self):
        """The zeros of J_{1/2} are the multiples of π."""
        np.testing.assert_allclose(bessel_zeros(0.5, 10.0), [np.pi, 2 * np.pi, 3 * np.pi], rtol=1e-12)

    def test_profile(self):
        """The profile bundles J*(0) with the zeros."""
        profile = bessel_profile(1.0, 20.0)
        assert profile.jstar_at_zero == pytest.approx(0.5)
        assert profile.zeros[0] == pytest.approx(3.8317059702075125, rel=1e-12)

    def test_order_below_half(self):
        """Orders below 1/2 are rejected."""
        with pytest.raises(InputError):
            jstar(0.0, 1.0)

    @pytest.mark.parametrize("nu", [1.5, 2.0, 3.5])
    def test_recurrence(self, nu):
        """J*_{ν-1}(t) + t^2 J*_{ν+1}(t) = 2ν J*_ν(t) on [0.1, 50]."""
        t = np.linspace(0.1, 50.0, 500)
        lower, upper, middle = jstar(nu - 1, t), t**2 * jstar(nu + 1, t), 2 * nu * jstar(nu, t)
        scale = np.abs(lower) + np.abs(upper) + np.abs(middle)
        assert np.all(np.abs(lower + upper - middle) <= 1e-10 * scale)

    def test_zero_distance_compatible(self):
        """Points π apart match the first zero of J_{1/2}."""
        report = bessel_zero_distance_test([[0.0], [np.pi], [2 * np.pi]], 0.5, 1e-8)
        assert report.compatible
        assert len(report.pairs) == 3

    def test_zero_distance_incompatible(self):
        """Distance 1 is far from every zero."""
        report = bessel_zero_distance_test([0.0, 1.0], 0.5, 1e-3)
        assert not report.compatible
        assert report.pairs[0].nearest_zero == pytest.approx(np.pi)

    def test_zero_distance_needs_two_points(self):
        """A single point has no distances."""
        with pytest.raises(InputError):
            bessel_zero_distance_test([[0.0]], 0.5, 1e-3)


class TestScalingLimit:
    """K_k(u/k, v/k) / K_k(0, 0) against J*(|u - v|) / J*(0)."""

    @pytest.mark.slow
    def test_converges_on_interval(self, ball_1d):
        """At R = 5 the error falls along k = 20, 40, 80 and ends below 0.05."""
        rows = scaling_error(ball_1d, [20, 40, 80], 5.0)
        assert scaling_is_monotone(rows)
        assert rows[-1].sup_error <= 0.05

    def test_small_grid(self, ball_1d):
        """One row per degree, with the grid recorded."""
        rows = scaling_error(ball_1d, [8, 16], 1.0, grid_count=11)
        assert [row.k for row in rows] == [8, 16]
        assert all(row.grid_count == 11 and row.sup_error >= 0 for row in rows)

    def test_non_ball(self, box_2d):
        """The limit is taken at the center of a ball."""
        with pytest.raises(InputError):
            scaling_error(box_2d, [10], 1.0)

    def test_grid_outside_bulk(self, ball_1d):
        """[-R, R] / k must stay near the center."""
        with pytest.raises(InputError):
            scaling_error(ball_1d, [4], 5.0)


class TestOrthogonalitySearch:
    """Multi-start search for orthogonal normalized kernels."""

    def test_ball_map_round_trip(self, rng):
        """from_ball inverts to_ball."""
        z = rng.normal(size=(20, 2))
        np.testing.assert_allclose(from_ball(to_ball(z)), z, rtol=1e-9, atol=1e-12)
        assert np.all(np.linalg.norm(to_ball(z), axis=1) < 1)

    def test_gauss_nodes_are_orthogonal(self):
        """Gauss nodes give a vanishing residual."""
        space = orthonormal_basis(Measure.ball(1, 0.5), 6)
        assert orthogonality_residual(space, gauss_level(6, 0.5)) < 1e-20

    def test_search_from_gauss_start(self):
        """m = k + 1 in 1D starts from the Gauss nodes and stays there."""
        ledger = orthogonality_residual_search(1, 0.5, 4, 5, seed=3, restarts=2)
        assert ledger.best_residual <= 1e-12
        assert ledger.converged
        assert len(ledger.residuals) == 2

    def test_search_is_reproducible(self):
        """Same seed, same ledger."""
        first = orthogonality_residual_search(2, 0.5, 2, 3, seed=11, restarts=2, max_iter=50)
        second = orthogonality_residual_search(2, 0.5, 2, 3, seed=11, restarts=2, max_iter=50, threads=2)
        assert first.residuals == second.residuals
        np.testing.assert_array_equal(first.configuration, second.configuration)

    def test_single_point(self):
        """One point is trivially orthogonal."""
        ledger = orthogonality_residual_search(2, 0.5, 3, 1)
        assert ledger.best_residual == 0.0

    def test_too_many_points(self):
        """m cannot exceed dim P_k."""
        with pytest.raises(InputError):
            orthogonality_residual_search(1, 0.5, 3, 5)

    def test_strict_failure(self):
        """A one-iteration budget fails under strict mode."""
        with pytest.raises(SearchNotConvergedError):
            orthogonality_residual_search(1, 0.5, 4, 3, seed=5, restarts=1, max_iter=1, strict=True)

    @pytest.mark.slow
    def test_full_disc_ledger(self):
        """n = 2, k = 2, m = 6 over twenty restarts: the ledger records every restart and the best one."""
        ledger = orthogonality_residual_search(2, 0.5, 2, 6, seed=7, restarts=20)
        assert ledger.restarts == 20 and ledger.seed == 7
        assert len(ledger.residuals) == len(ledger.iterations) == 20
        assert ledger.best_residual == min(ledger.residuals)
        assert ledger.best_restart == ledger.residuals.index(ledger.best_residual)
        assert ledger.configuration.shape == (6, 2)
        assert np.all(np.linalg.norm(ledger.configuration, axis=1) < 1.0)
        assert len(ledger.csv_rows()) == 20
