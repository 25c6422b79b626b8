import numpy as np
import pytest

from mzkit.core.errors import EmptyMeasureError, InputError, LPSizeCapError, MassMismatchError
from mzkit.infrastructure.transport_solvers import LinprogSolver, MonotoneCouplingSolver, NetworkSimplexSolver
from mzkit.models.family import DiscreteMeasure, FamilyLevel, PointFamily
from mzkit.services.generators import gauss_level
from mzkit.services.polyspace import orthonormal_basis
from mzkit.services.transport import (
    interpolation_transport_gap,
    moment_table,
    offdiag_second_moment,
    transport_table,
    vaserstein1,
)


def atoms(points, masses) -> DiscreteMeasure:
    return DiscreteMeasure.from_arrays(points, masses)


class TestVaserstein:
    """Exact W1 between discrete measures."""

    def test_point_masses_1d(self):
        """Moving a unit atom by 1/2 costs 1/2."""
        assert vaserstein1(atoms([0.0], [1.0]), atoms([0.5], [1.0])) == pytest.approx(0.5)

    def test_point_masses_2d(self):
        """Euclidean cost in the plane."""
        value = vaserstein1(atoms([[0.0, 0.0]], [1.0]), atoms([[0.3, 0.4]], [1.0]))
        assert value == pytest.approx(0.5)

    def test_mass_scales_cost(self):
        """W1 is homogeneous in the common mass."""
        sigma = atoms([-0.5, 0.5], [0.25, 0.25])
        nu = atoms([0.0], [0.5])
        assert vaserstein1(sigma, nu) == pytest.approx(0.25)

    def test_solvers_agree(self, rng):
        """Network simplex, HiGHS and the monotone coupling give the same value in 1D."""
        sigma = atoms(rng.uniform(-1, 1, 12), np.full(12, 1 / 12))
        weights = rng.uniform(0.5, 1.5, 9)
        nu = atoms(rng.uniform(-1, 1, 9), weights / weights.sum())
        monotone = vaserstein1(sigma, nu, MonotoneCouplingSolver())
        simplex = vaserstein1(sigma, nu, NetworkSimplexSolver())
        lp = vaserstein1(sigma, nu, LinprogSolver())
        assert simplex == pytest.approx(monotone, abs=1e-9)
        assert lp == pytest.approx(simplex, abs=1e-8)

    def test_lp_matches_emd_in_2d(self, rng):
        """HiGHS cross-checks the network simplex in the plane."""
        sigma = atoms(rng.uniform(-0.5, 0.5, (8, 2)), np.full(8, 0.125))
        nu = atoms(rng.uniform(-0.5, 0.5, (10, 2)), np.full(10, 0.1))
        assert vaserstein1(sigma, nu, LinprogSolver()) == pytest.approx(vaserstein1(sigma, nu), abs=1e-8)

    @pytest.mark.parametrize("dimension", [1, 2])
    def test_metric_on_random_triples(self, rng, dimension):
        """Symmetry and the triangle inequality on random equal-mass triples."""
        for _ in range(5):
            triple = []
            for size in rng.integers(3, 9, size=3):
                weights = rng.uniform(0.2, 1.0, size)
                triple.append(atoms(rng.uniform(-1, 1, (size, dimension)), weights / weights.sum()))
            first, second, third = triple
            assert vaserstein1(first, second) == pytest.approx(vaserstein1(second, first), abs=1e-9)
            assert vaserstein1(first, third) <= vaserstein1(first, second) + vaserstein1(second, third) + 1e-9

    def test_mass_mismatch(self):
        """Unequal total masses are rejected."""
        with pytest.raises(MassMismatchError):
            vaserstein1(atoms([0.0], [1.0]), atoms([0.5], [0.9]))

    def test_empty(self):
        """Transport from an empty measure is undefined."""
        empty = atoms(np.zeros((0, 1)), np.zeros(0))
        with pytest.raises(EmptyMeasureError):
            vaserstein1(empty, atoms([0.5], [1.0]))

    def test_dimension_mismatch(self):
        """Both measures must live in the same space."""
        with pytest.raises(InputError):
            vaserstein1(atoms([0.0], [1.0]), atoms([[0.0, 0.0]], [1.0]))

    def test_lp_cap(self):
        """The atom cap stops oversized programs with a numerical error."""
        sigma = atoms([[0.0, 0.0], [0.1, 0.0]], [0.5, 0.5])
        nu = atoms([[0.0, 0.1], [0.1, 0.1]], [0.5, 0.5])
        with pytest.raises(LPSizeCapError) as info:
            vaserstein1(sigma, nu, NetworkSimplexSolver(atom_cap=3))
        assert info.value.exit_code == 2


class TestTransportGap:
    """W1 between a level and its subspace kernel density."""

    def test_gap_row(self, ball_1d):
        """Full-size levels carry unit mass."""
        fam = PointFamily(n=1, families=[FamilyLevel(k=10, points=gauss_level(10, 0.5))])
        row = interpolation_transport_gap(fam, 10, orthonormal_basis(ball_1d, 10))
        assert row.mass == pytest.approx(1.0)
        assert 0 < row.distance < 0.5
        assert row.mesh > 0

    def test_partial_level_mass(self, ball_1d):
        """A level with fewer points than dim P_k carries mass #Λ_k / dim P_k on both sides."""
        fam = PointFamily(n=1, families=[FamilyLevel(k=9, points=np.array([[-0.5], [0.0], [0.5]]))])
        row = interpolation_transport_gap(fam, 9, orthonormal_basis(ball_1d, 9))
        assert row.mass == pytest.approx(0.3)

    def test_grid_order_floor(self, ball_1d):
        """The grid must integrate degree 2k exactly."""
        fam = PointFamily(n=1, families=[FamilyLevel(k=10, points=gauss_level(10, 0.5))])
        with pytest.raises(InputError):
            interpolation_transport_gap(fam, 10, orthonormal_basis(ball_1d, 10), quad_order=12)

    def test_empty_family(self, ball_1d):
        """Families without points have no transport table."""
        fam = PointFamily(n=1, families=[FamilyLevel(k=3, points=np.zeros((0, 1)))])
        with pytest.raises(EmptyMeasureError):
            transport_table(fam, ball_1d)

    @pytest.mark.slow
    def test_gauss_gap_decreases(self, ball_1d):
        """W1 of Gauss families shrinks along k = 10, 20, 40, 80."""
        ks = [10, 20, 40, 80]
        fam = PointFamily(n=1, families=[FamilyLevel(k=k, points=gauss_level(k, 0.5)) for k in ks])
        distances = [row.distance for row in transport_table(fam, ball_1d, threads=2)]
        assert all(b < a for a, b in zip(distances, distances[1:]))


class TestSecondMoment:
    """Off-diagonal second moment of the reproducing kernel."""

    def test_degree_zero(self, ball_1d):
        """K_0 is constant, leaving E|X - Y|^2 = 2 Var X = 2/3 for the Lebesgue weight."""
        assert offdiag_second_moment(orthonormal_basis(ball_1d, 0)) == pytest.approx(2 / 3, rel=1e-10)

    def test_scaled_moment_bounded(self, ball_1d):
        """k times the moment stays within a constant factor over the ladder."""
        rows = moment_table(ball_1d, [10, 20, 40, 80])
        scaled = [row.scaled for row in rows]
        assert max(scaled) / min(scaled) < 3
        assert [row.k for row in rows] == [10, 20, 40, 80]

    def test_moment_decreasing(self, ball_1d):
        """The moment itself decays in k."""
        moments = [row.moment for row in moment_table(ball_1d, [5, 10, 20])]
        assert moments[0] > moments[1] > moments[2]

    def test_order_floor(self, space_1d):
        """Quadrature must reach degree 2k + 2."""
        with pytest.raises(InputError):
            offdiag_second_moment(space_1d, quad_order=10, k=20)
