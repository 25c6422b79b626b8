import numpy as np
import pytest

from mzkit.core.errors import NodeComputationError
from mzkit.services.gegenbauer import (
    gauss_nodes_1d,
    gegenbauer_mass,
    orthonormal_coefficients,
    orthonormal_values,
)


class TestGaussRules:
    """Golub-Welsch rules for (1 - x^2)^(a - 1/2)."""

    def test_masses(self):
        """Total masses of the Lebesgue and Chebyshev weights."""
        assert gegenbauer_mass(0.5) == pytest.approx(2.0, rel=1e-14)
        assert gegenbauer_mass(0.0) == pytest.approx(np.pi, rel=1e-14)

    def test_three_point_legendre_rule(self):
        """The classical three-point Gauss-Legendre rule."""
        nodes, weights = gauss_nodes_1d(3, 0.5)
        np.testing.assert_allclose(nodes, [-np.sqrt(0.6), 0.0, np.sqrt(0.6)], atol=1e-14)
        np.testing.assert_allclose(weights, [5 / 9, 8 / 9, 5 / 9], atol=1e-14)

    @pytest.mark.parametrize("a", [0.0, 0.5, 1.0, 2.5])
    def test_rule_is_exact_and_symmetric(self, a):
        """An m-point rule integrates the monomials up to degree 2m - 1 and mirrors about 0."""
        nodes, weights = gauss_nodes_1d(12, a)
        assert np.all(weights > 0)
        np.testing.assert_array_equal(nodes, -nodes[::-1])
        reference_nodes, reference_weights = gauss_nodes_1d(40, a)
        for power in range(0, 24):
            exact = np.dot(reference_weights, reference_nodes**power)
            assert np.dot(weights, nodes**power) == pytest.approx(exact, abs=1e-12)

    def test_invalid_arguments(self):
        """Zero nodes and negative exponents are rejected."""
        with pytest.raises(NodeComputationError):
            gauss_nodes_1d(0, 0.5)
        with pytest.raises(NodeComputationError):
            gauss_nodes_1d(5, -0.1)


class TestOrthonormalPolynomials:
    """Recurrence values and monomial coefficients."""

    @pytest.mark.parametrize("a", [0.0, 0.5, 1.0])
    def test_orthonormal_under_gauss_rule(self, a):
        """p_0..p_k are orthonormal under a rule exact to degree 2k."""
        k = 30
        nodes, weights = gauss_nodes_1d(k + 1, a)
        values = orthonormal_values(nodes, k, a)
        gram = values.T @ (weights[:, None] * values)
        np.testing.assert_allclose(gram, np.eye(k + 1), atol=1e-12)

    def test_coefficients_match_values(self):
        """The coefficient rows evaluate to the recurrence values."""
        x = np.linspace(-1.0, 1.0, 9)
        coeffs = orthonormal_coefficients(6, 1.0)
        values = orthonormal_values(x, 6, 1.0)
        powers = x[:, None] ** np.arange(7)[None, :]
        np.testing.assert_allclose(powers @ coeffs.T, values, atol=1e-12)

    def test_constant_polynomial(self):
        """p_0 is 1 / sqrt(mass)."""
        values = orthonormal_values(np.array([0.3]), 0, 0.5)
        assert values.shape == (1, 1)
        assert values[0, 0] == pytest.approx(1 / np.sqrt(2.0))
