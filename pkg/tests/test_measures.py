import numpy as np
import pytest

from mzkit.core.errors import DomainError, InputError, OrderTooLargeError
from mzkit.models.measure import Measure
from mzkit.services.measures import (
    check_in_domain,
    contains,
    enumerate_multiindices,
    integrate,
    interior_grid,
    moment,
    quadrature_rule,
    sample_points,
    space_dimension,
    total_mass,
)


class TestMultiIndices:
    """Graded-lex enumeration of P_k."""

    def test_graded_lex_order(self):
        """Degrees ascend, exponents descend lexicographically within a degree."""
        assert enumerate_multiindices(2, 2) == [(0, 0), (1, 0), (0, 1), (2, 0), (1, 1), (0, 2)]

    @pytest.mark.parametrize("n,k,dim", [(1, 7, 8), (2, 3, 10), (3, 2, 10), (2, 40, 861)])
    def test_dimension(self, n, k, dim):
        """dim P_k = C(n + k, n) and the enumeration has that length."""
        assert space_dimension(n, k) == dim
        assert len(enumerate_multiindices(n, k)) == dim

    def test_invalid(self):
        """Negative degrees are rejected."""
        with pytest.raises(InputError):
            enumerate_multiindices(2, -1)


class TestMoments:
    """Closed-form moments."""

    def test_ball_masses(self, ball_1d, ball_2d, chebyshev_1d):
        """Segment length, disk area and the Chebyshev mass."""
        assert total_mass(ball_1d) == pytest.approx(2.0)
        assert total_mass(ball_2d) == pytest.approx(np.pi)
        assert total_mass(chebyshev_1d) == pytest.approx(np.pi)

    def test_odd_moments_vanish(self, ball_2d, ellipse_2d):
        """Symmetric domains kill odd exponents."""
        assert moment(ball_2d, (1, 2)) == 0.0
        assert moment(ellipse_2d, (0, 3)) == 0.0

    def test_box_moment(self, box_2d):
        """Product of the one-dimensional moments."""
        assert moment(box_2d, (0, 1)) == pytest.approx(4.0)
        assert moment(box_2d, (2, 0)) == pytest.approx(4.0 / 3.0)

    def test_ellipse_area(self, ellipse_2d):
        """π times the semiaxes."""
        assert total_mass(ellipse_2d) == pytest.approx(np.pi * 2.0 * 0.5)

    def test_wrong_length(self, ball_2d):
        """Multi-indices must match the dimension."""
        with pytest.raises(InputError):
            moment(ball_2d, (1,))


class TestQuadrature:
    """Rules exact to their degree."""

    @pytest.mark.parametrize("fixture", ["ball_1d", "chebyshev_1d", "ball_2d", "box_2d", "ellipse_2d"])
    def test_exact_on_monomials(self, request, fixture):
        """Every monomial of degree <= 8 is integrated exactly."""
        m = request.getfixturevalue(fixture)
        rule = quadrature_rule(m, 8)
        for alpha in enumerate_multiindices(m.n, 8):
            values = np.prod(rule.nodes ** np.asarray(alpha), axis=1)
            assert np.dot(rule.weights, values) == pytest.approx(moment(m, alpha), abs=1e-12)

    def test_weighted_ball_3d(self):
        """The weighted ball in three dimensions."""
        m = Measure.ball(3, 1.0)
        rule = quadrature_rule(m, 6)
        assert np.all(rule.weights > 0)
        for alpha in [(0, 0, 0), (2, 0, 0), (2, 2, 2), (4, 0, 2)]:
            values = np.prod(rule.nodes ** np.asarray(alpha), axis=1)
            assert np.dot(rule.weights, values) == pytest.approx(moment(m, alpha), rel=1e-11)

    def test_integrate(self, ball_1d):
        """∫ x^2 dx over [-1, 1]."""
        assert integrate(ball_1d, lambda x: x[:, 0] ** 2, 2) == pytest.approx(2 / 3)

    @pytest.mark.parametrize("fixture", ["ball_2d", "box_2d", "ellipse_2d"])
    def test_integrate_linear_and_monotone(self, request, fixture):
        """∫ (αf + βg) = α∫f + β∫g, and f >= g gives ∫f >= ∫g."""
        m = request.getfixturevalue(fixture)

        def f(x):
            return np.cos(x[:, 0]) + x[:, 1] ** 2

        def g(x):
            return np.sin(x[:, 0] * x[:, 1])

        combined = integrate(m, lambda x: 2.5 * f(x) - 0.75 * g(x), 12)
        assert combined == pytest.approx(2.5 * integrate(m, f, 12) - 0.75 * integrate(m, g, 12), rel=1e-12)
        # f + 2 > 1 >= g on each of these domains
        assert integrate(m, lambda x: f(x) + 2.0, 12) >= integrate(m, g, 12)
        assert integrate(m, lambda x: np.abs(g(x)), 12) >= 0.0

    def test_node_cap(self, override_settings, ball_2d):
        """Rules above the node cap are refused."""
        override_settings(quadrature_node_cap=10)
        with pytest.raises(OrderTooLargeError):
            quadrature_rule(ball_2d, 30)


class TestDomain:
    """Membership, grids and sampling."""

    def test_outside_point(self, ball_1d):
        """Points beyond the closed ball raise DomainError."""
        with pytest.raises(DomainError):
            check_in_domain(ball_1d, [[1.5]])

    def test_boundary_is_closed(self, box_2d):
        """Boundary points belong to the domain."""
        assert contains(box_2d, [[1.0, 2.0]]).all()

    def test_interior_grid_1d(self, ball_1d):
        """linspace(-0.98, 0.98, 50) on the segment."""
        grid = interior_grid(ball_1d, 50)
        np.testing.assert_allclose(grid[:, 0], np.linspace(-0.98, 0.98, 50))

    def test_interior_grid_ellipse(self, ellipse_2d):
        """Grid points stay strictly inside."""
        grid = interior_grid(ellipse_2d, 15)
        assert grid.shape[0] > 0
        assert np.all(np.sum((grid / np.array([2.0, 0.5])) ** 2, axis=1) < 1.0)

    def test_samples_in_domain(self, ellipse_2d, rng):
        """Uniform samples land in the domain."""
        points = sample_points(ellipse_2d, 500, rng)
        assert points.shape == (500, 2)
        assert contains(ellipse_2d, points).all()
