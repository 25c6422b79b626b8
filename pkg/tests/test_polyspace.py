import numpy as np
import pytest

from mzkit.core.errors import DegreeTooLargeError, DomainError, InputError, OrthonormalityError
from mzkit.models.measure import Measure
from mzkit.services.measures import interior_grid, quadrature_rule
from mzkit.services.polyspace import (
    christoffel,
    diagonal_estimate_ratio,
    export_coefficients,
    kernel_eval,
    kernel_matrix,
    monomial_labels,
    orthonormal_basis,
    reproduction_residual,
    slice_kernel,
)


def gram_deviation(space) -> float:
    rule = quadrature_rule(space.measure, 2 * space.k)
    phi = space.basis_matrix(rule.nodes)
    gram = phi.T @ (rule.weights[:, None] * phi)
    return float(np.max(np.abs(gram - np.eye(space.dim))))


class TestAssembly:
    """Orthonormal bases along every assembly path."""

    @pytest.mark.parametrize(
        "measure,k,method",
        [
            (Measure.ball(1, 0.5), 8, "cholesky"),
            (Measure.ball(1, 0.0), 60, "recurrence"),
            (Measure.ball(2, 0.5), 12, "arnoldi"),
            (Measure.box(((-1.0, 1.0), (0.0, 2.0))), 10, "arnoldi"),
            (Measure.ellipsoid((2.0, 0.5)), 10, "arnoldi"),
            (Measure.ball(3, 1.0), 4, "cholesky"),
        ],
    )
    def test_orthonormal(self, measure, k, method):
        """The quadrature Gram of the basis is the identity."""
        space = orthonormal_basis(measure, k, method=method)
        assert space.method == method
        assert gram_deviation(space) < 1e-9

    def test_auto_picks_stable_path(self, ball_2d):
        """auto uses Cholesky within the cap and Arnoldi above it, in one dimension too."""
        assert orthonormal_basis(ball_2d, 4).method == "cholesky"
        assert orthonormal_basis(ball_2d, 10).method == "arnoldi"
        assert orthonormal_basis(Measure.ball(1, 0.5), 30).method == "arnoldi"

    def test_recurrence_checks_arnoldi(self, ball_1d):
        """Above the Cholesky cap the recurrence reproduces the default kernel."""
        default = orthonormal_basis(ball_1d, 60)
        oracle = orthonormal_basis(ball_1d, 60, method="recurrence")
        x = np.linspace(-0.95, 0.95, 9).reshape(-1, 1)
        np.testing.assert_allclose(kernel_matrix(default, x), kernel_matrix(oracle, x), rtol=1e-9, atol=1e-9)

    def test_extended_gram_tolerance(self, override_settings):
        """The extended Cholesky path checks its Gram at the extended tolerance."""
        override_settings(onb_tolerance_extended=1e-300)
        with pytest.raises(OrthonormalityError):
            orthonormal_basis(Measure.ball(1, 0.25), 11, precision="extended", method="cholesky")

    def test_extended_cholesky(self):
        """The extended path reaches beyond the double-precision Cholesky cap."""
        m = Measure.ball(1, 1.0)
        extended = orthonormal_basis(m, 14, precision="extended", method="cholesky")
        reference = orthonormal_basis(m, 14, method="recurrence")
        x = np.linspace(-0.9, 0.9, 7).reshape(-1, 1)
        np.testing.assert_allclose(kernel_matrix(extended, x), kernel_matrix(reference, x), rtol=1e-8, atol=1e-8)

    def test_paths_agree(self, ball_1d):
        """Cholesky and recurrence give the same basis (positive leading coefficients)."""
        a = orthonormal_basis(ball_1d, 6, method="cholesky")
        b = orthonormal_basis(ball_1d, 6, method="recurrence")
        np.testing.assert_allclose(a.coeffs, b.coeffs, rtol=1e-7, atol=1e-8)

    def test_degree_cap(self, ball_1d):
        """Degrees above the per-dimension cap exit with the cap stated."""
        with pytest.raises(DegreeTooLargeError, match="400"):
            orthonormal_basis(ball_1d, 401)

    def test_cholesky_cap(self, ball_1d):
        """Explicit Cholesky above its cap is refused."""
        with pytest.raises(DegreeTooLargeError):
            orthonormal_basis(ball_1d, 9, method="cholesky")

    def test_recurrence_is_one_dimensional(self, ball_2d):
        """The recurrence path needs n = 1."""
        with pytest.raises(InputError):
            orthonormal_basis(ball_2d, 3, method="recurrence")


class TestKernel:
    """Reproducing kernel K_k and its slices."""

    @pytest.mark.parametrize("n", [1, 2])
    @pytest.mark.parametrize("a", [0.0, 0.5, 1.0])
    def test_reproduction(self, n, a):
        """∫ K_k(x, ·) p dμ = p(x) for random p in P_15."""
        space = orthonormal_basis(Measure.ball(n, a), 15)
        assert reproduction_residual(space, count=20, seed=3) <= 1e-8

    def test_symmetry_and_diagonal(self, space_2d, rng):
        """K is symmetric and β_k is positive."""
        x = 0.6 * rng.uniform(-1, 1, size=(5, 2))
        kernel = kernel_matrix(space_2d, x)
        np.testing.assert_allclose(kernel, kernel.T, atol=1e-12)
        beta, inverse = christoffel(space_2d, x[0])
        assert beta > 0 and inverse == pytest.approx(1 / beta)

    def test_extremal_property(self, space_2d, rng):
        """|p(x)|^2 <= β_k(x) ‖p‖^2 for random p, with equality for p = K_k(·, x)."""
        x = 0.9 * rng.uniform(-0.7, 0.7, size=(40, 2))
        phi = space_2d.basis_matrix(x)
        beta = space_2d.christoffel_values(x)
        for _ in range(20):
            coeffs = rng.standard_normal(space_2d.dim)
            values = phi @ coeffs
            assert np.all(values**2 <= beta * np.dot(coeffs, coeffs) * (1 + 1e-12))
        extremal = phi[0] @ phi[0]
        assert extremal**2 == pytest.approx(beta[0] * np.dot(phi[0], phi[0]), rel=1e-12)

    def test_christoffel_nondecreasing_in_k(self, space_2d, rng):
        """β_j(x) grows with j at every point."""
        x = 0.9 * rng.uniform(-0.7, 0.7, size=(30, 2))
        ladder = np.array([space_2d.christoffel_values(x, j) for j in range(space_2d.k + 1)])
        assert np.all(np.diff(ladder, axis=0) >= -1e-12)

    def test_k_zero(self, ball_1d):
        """K_0 is the inverse mass."""
        space = orthonormal_basis(ball_1d, 0)
        assert kernel_eval(space, [0.3], [-0.7]) == pytest.approx(0.5)

    def test_slices_sum_to_kernel(self, space_1d):
        """Σ_{j <= k} P_j = K_k."""
        total = sum(slice_kernel(space_1d, j, [0.2], [0.5]) for j in range(space_1d.k + 1))
        assert total == pytest.approx(kernel_eval(space_1d, [0.2], [0.5]), abs=1e-10)

    def test_outside_points(self, space_1d):
        """Evaluation off the domain raises."""
        with pytest.raises(DomainError):
            kernel_eval(space_1d, [1.2], [0.0])

    def test_export(self, ball_2d):
        """Graded-lex labels and a lower triangular coefficient matrix."""
        space = orthonormal_basis(ball_2d, 2, method="cholesky")
        labels, coeffs = export_coefficients(space)
        assert labels == monomial_labels(space.indices)
        assert labels[0] == "1" and len(labels) == 6
        assert coeffs.shape == (6, 6)
        assert np.allclose(np.triu(coeffs, 1), 0.0)


class TestDiagonalEstimate:
    """β_k(x) against min(k^n / d^a, k^(n + 2a))."""

    @pytest.mark.parametrize("a", [0.0, 0.5])
    def test_spread_stable_1d(self, a):
        """The max/min ratio settles between the two largest k."""
        m = Measure.ball(1, a)
        table = diagonal_estimate_ratio(m, [5, 10, 20, 40], interior_grid(m, 50))
        spreads = {s.k: s.spread for s in table.summaries}
        assert abs(spreads[40] / spreads[20] - 1.0) <= 0.2

    @pytest.mark.slow
    @pytest.mark.parametrize("a", [0.0, 0.5])
    def test_spread_stable_2d(self, a):
        """Same law in two dimensions."""
        m = Measure.ball(2, a)
        table = diagonal_estimate_ratio(m, [5, 10, 20], interior_grid(m, 12))
        spreads = {s.k: s.spread for s in table.summaries}
        assert abs(spreads[20] / spreads[10] - 1.0) <= 0.2

    def test_boundary_grid_rejected(self, ball_1d):
        """Grid points on the boundary make the model infinite."""
        with pytest.raises(DomainError):
            diagonal_estimate_ratio(ball_1d, [5], [[1.0]])

    def test_box_corner_flag(self, box_2d):
        """Points near two faces are flagged."""
        table = diagonal_estimate_ratio(box_2d, [3], [[0.95, 1.95], [0.0, 1.0]])
        flags = [row.near_corner for row in table.rows]
        assert flags == [True, False]
