import numpy as np
import pytest

from mzkit.core.errors import DualBasisUndefinedError, InputError
from mzkit.models.family import DiscreteMeasure, FamilyLevel, PointFamily
from mzkit.models.measure import Measure, MetricBall
from mzkit.services import geometry
from mzkit.services.diagnostics import (
    carleson_embedding_constant,
    carleson_ratio,
    count_in_balls,
    density_report,
    dual_and_subspace_kernel,
    frame_bounds,
    gram_matrix,
    largest_hole,
    level_measure,
    normalized_coordinates,
    riesz_bounds,
    run_diagnostics,
    separation_constant,
)
from mzkit.services.generators import gauss_level
from mzkit.services.polyspace import orthonormal_basis


def single_level(k: int, points) -> PointFamily:
    return PointFamily(n=1, families=[FamilyLevel(k=k, points=np.asarray(points, dtype=float).reshape(-1, 1))])


def gauss_levels(ks, a: float = 0.5) -> PointFamily:
    return PointFamily(n=1, families=[FamilyLevel(k=k, points=gauss_level(k, a)) for k in ks])


class TestSeparation:
    """k times the smallest pairwise distance."""

    def test_gauss_families_separated(self, ball_1d):
        """Gauss nodes stay uniformly separated over k = 10..80."""
        ks = list(range(10, 81, 10))
        fam = gauss_levels(ks)
        constants = [separation_constant(fam, k, ball_1d) for k in ks]
        assert min(constants) > 2.0
        assert max(constants) < 4.0

    def test_collision(self, ball_1d):
        """Two coincident points give 0."""
        assert separation_constant(single_level(5, [0.1, 0.1]), 5, ball_1d) == 0.0

    def test_single_point(self, ball_1d):
        """Fewer than two points give inf."""
        assert separation_constant(single_level(3, [0.0]), 3, ball_1d) == float("inf")

    def test_matches_brute_force(self, ball_2d, rng):
        """Tree search agrees with the full distance matrix."""
        points = 0.9 * rng.uniform(-0.7, 0.7, size=(40, 2))
        fam = PointFamily(n=2, families=[FamilyLevel(k=7, points=points)])
        d = geometry.pairwise_distances(ball_2d, points)
        np.fill_diagonal(d, np.inf)
        assert separation_constant(fam, 7, ball_2d) == pytest.approx(7 * d.min(), rel=1e-6)

    def test_missing_level(self, ball_1d):
        """Unknown levels are input errors."""
        with pytest.raises(InputError):
            separation_constant(single_level(3, [0.0]), 4, ball_1d)


class TestGramAndFrames:
    """Riesz and frame bounds of normalized kernels."""

    @pytest.mark.parametrize("a", [0.0, 0.5, 1.0])
    @pytest.mark.parametrize("k", [5, 20, 60])
    def test_gauss_gram_is_identity(self, a, k):
        """At the k + 1 Gauss nodes the normalized kernels are orthonormal."""
        m = Measure.ball(1, a)
        fam = gauss_levels([k], a)
        gram = gram_matrix(fam, k, orthonormal_basis(m, k))
        np.testing.assert_allclose(gram, np.eye(k + 1), atol=1e-10)

    def test_gauss_bounds(self, space_1d):
        """Riesz and frame bounds are both 1 at Gauss nodes."""
        fam = gauss_levels([10])
        lower, upper = riesz_bounds(fam, 10, space_1d)
        assert lower == pytest.approx(1.0, abs=1e-10) and upper == pytest.approx(1.0, abs=1e-10)
        lower, upper, rank = frame_bounds(fam, 10, space_1d)
        assert rank == 11
        assert lower == pytest.approx(1.0, abs=1e-10)

    def test_dependent_kernels(self, space_1d):
        """More points than dim P_k: Riesz lower bound 0, frame still full rank."""
        fam = single_level(3, np.linspace(-0.9, 0.9, 8))
        lower, upper = riesz_bounds(fam, 3, space_1d)
        assert lower == 0.0 and upper > 1.0
        frame_lower, _, rank = frame_bounds(fam, 3, space_1d)
        assert rank == 4 and frame_lower > 0

    def test_too_few_points_for_a_frame(self, space_1d):
        """Fewer points than dim P_k: frame lower bound 0."""
        frame_lower, _, rank = frame_bounds(single_level(6, [-0.5, 0.0, 0.5]), 6, space_1d)
        assert rank == 3 and frame_lower == 0.0

    def test_frame_operator_shares_gram_spectrum(self, space_2d, rng):
        """The nonzero spectra of S = Σ κ_λ ⊗ κ_λ and of G coincide, above and below dim P_k."""
        width = space_2d.level_dimension(5)
        for count in (12, 30):
            points = 0.9 * rng.uniform(-0.7, 0.7, size=(count, 2))
            fam = PointFamily(n=2, families=[FamilyLevel(k=5, points=points)])
            b = normalized_coordinates(points, space_2d, 5)
            rank = min(count, width)
            gram_spectrum = np.linalg.eigvalsh(gram_matrix(fam, 5, space_2d))[-rank:]
            frame_spectrum = np.linalg.eigvalsh(b.T @ b)[-rank:]
            np.testing.assert_allclose(frame_spectrum, gram_spectrum, atol=1e-10)

    def test_interpolating_levels_are_separated(self, ball_1d):
        """Riesz lower bounds near 1 go with separation bounded below; a near collision breaks both."""
        ks = [10, 20, 40, 80]
        fam = gauss_levels(ks)
        space = orthonormal_basis(ball_1d, 80)
        for k in ks:
            assert riesz_bounds(fam, k, space)[0] >= 0.99
            assert separation_constant(fam, k, ball_1d) >= 2.0
        points = gauss_level(20, 0.5).copy()
        points[1] = points[0] + 1e-4 / 20
        crowded = single_level(20, points)
        assert separation_constant(crowded, 20, ball_1d) < 0.1
        assert riesz_bounds(crowded, 20, space)[0] < 1e-3

    def test_level_above_space(self, space_1d):
        """The space must reach the level degree."""
        with pytest.raises(InputError):
            gram_matrix(single_level(30, [0.0]), 30, space_1d)


class TestCarleson:
    """Carleson ratios and embedding constants."""

    def test_single_atom(self, ball_1d):
        """One unit atom at the center: sup of 1 / V(B(x, 1/k)) over nearby net centers."""
        mu = DiscreteMeasure.from_arrays([[0.0]], [1.0])
        ratio, center = carleson_ratio(mu, 10, ball_1d)
        assert ratio == pytest.approx(1 / 0.11, rel=0.01)
        assert abs(center[0]) < np.sin(0.1)

    def test_empty_measure(self, ball_1d):
        """No atoms, no mass."""
        mu = DiscreteMeasure.from_arrays(np.zeros((0, 1)), np.zeros(0))
        assert carleson_ratio(mu, 5, ball_1d) == (0.0, None)

    def test_weighted_reference_needs_ball(self, box_2d):
        """The weighted reference is defined for ball measures."""
        mu = DiscreteMeasure.from_arrays([[0.0, 1.0]], [1.0])
        with pytest.raises(InputError):
            carleson_ratio(mu, 3, box_2d, reference="weighted")

    def test_gauss_embedding_constant(self, space_1d):
        """Christoffel masses at Gauss nodes integrate |p|^2 exactly: C = 1."""
        points = gauss_level(10, 0.5)
        mu = level_measure(points, space_1d, 10)
        assert carleson_embedding_constant(mu, space_1d, 10) == pytest.approx(1.0, abs=1e-10)

    def test_ratio_controls_eigmax(self, space_1d, ball_1d):
        """Bounded Carleson ratios over k keep the top Gram eigenvalue bounded; clustering raises both."""
        ratios = []
        for k in (5, 10, 20):
            points = gauss_level(k, 0.5)
            mu = level_measure(points, space_1d, k)
            ratios.append(carleson_ratio(mu, k, ball_1d)[0])
            eigmax = riesz_bounds(single_level(k, points), k, space_1d)[1]
            assert eigmax == pytest.approx(carleson_embedding_constant(mu, space_1d, k), rel=1e-9)
            assert eigmax <= 1.0 + 1e-9
        assert max(ratios) <= 2 * min(ratios)

        clustered = np.concatenate([gauss_level(10, 0.5), 0.3 + 1e-3 * np.arange(5).reshape(-1, 1)])
        mu = level_measure(clustered, space_1d, 10)
        assert carleson_ratio(mu, 10, ball_1d)[0] > 3 * ratios[1]
        assert riesz_bounds(single_level(10, clustered), 10, space_1d)[1] > 4.0


class TestDualSystem:
    """Dual basis and subspace kernel."""

    def test_full_span(self, space_1d):
        """k + 1 points span P_k, so the subspace kernel is K_k."""
        fam = gauss_levels([8])
        dual = dual_and_subspace_kernel(fam, 8, space_1d)
        x = np.linspace(-0.9, 0.9, 7).reshape(-1, 1)
        np.testing.assert_allclose(dual.subspace_diagonal(x), space_1d.christoffel_values(x, 8), rtol=1e-9)

    def test_biorthogonal(self, space_1d):
        """<κ_λ, g_λ'> = δ, so g_λ(λ') = δ sqrt(β_k(λ'))."""
        fam = single_level(8, [-0.8, -0.3, 0.1, 0.6])
        dual = dual_and_subspace_kernel(fam, 8, space_1d)
        g = dual.dual(fam.points(8))
        beta = space_1d.christoffel_values(fam.points(8), 8)
        np.testing.assert_allclose(g / np.sqrt(beta)[:, None], np.eye(4), atol=1e-9)

    def test_singular(self, space_1d):
        """Coincident points make the dual basis undefined."""
        with pytest.raises(DualBasisUndefinedError):
            dual_and_subspace_kernel(single_level(4, [0.2, 0.2, 0.5]), 4, space_1d)


class TestDensity:
    """Counts per region against equilibrium masses."""

    def test_gauss_third(self, ball_1d):
        """At k = 200, (-1/2, 1/2) holds a third of the Gauss nodes."""
        fam = gauss_levels([200])
        region = MetricBall(center=(0.0,), radius=0.5, metric="euclidean")
        rows, trends = density_report(fam, ball_1d, [region])
        assert abs(rows[0].count_ratio - 1 / 3) <= 0.05 / 3
        assert trends[0].k_first == trends[0].k_last == 200

    def test_trend_over_levels(self, ball_1d):
        """Ratios approach 1 as k grows."""
        fam = gauss_levels([10, 40, 160])
        rows, trends = density_report(fam, ball_1d, [MetricBall(center=(0.0,), radius=0.5, metric="euclidean")])
        deviations = [abs(r.ratio - 1) for r in rows]
        assert deviations[-1] <= deviations[0]
        assert trends[0].max_deviation == pytest.approx(max(deviations))

    def test_counts_and_holes(self, ball_1d):
        """Ball counts grow with M; the largest hole is about π/2 in k units."""
        fam = gauss_levels([40])
        rows = count_in_balls(fam, 40, [0.0], [1, 2, 4, 8])
        counts = [r.count for r in rows]
        assert counts == sorted(counts) and counts[-1] > 0
        hole = largest_hole(fam, 40)
        assert 0.5 < hole.hole < 3.0

    def test_no_empty_ball_count_law(self):
        """At k = 200, #(Λ_k ∩ 𝔹(0, M/k)) is nonzero and grows like M within a factor 2 for M = 4, 8, 16."""
        fam = gauss_levels([200])
        multiples = [4, 8, 16]
        counts = [row.count for row in count_in_balls(fam, 200, [0.0], multiples)]
        assert min(counts) >= 1
        per_unit = [c / M for c, M in zip(counts, multiples)]
        assert max(per_unit) <= 2 * min(per_unit)

    def test_hole_centers_in_bulk(self):
        """Hole centers must satisfy |x0| < 1/4."""
        with pytest.raises(InputError):
            largest_hole(gauss_levels([5]), 5, centers=[[0.3]])


class TestRunDiagnostics:
    """The full report."""

    def test_report(self, gauss_family, ball_1d):
        """One entry per level with Riesz bounds 1 at Gauss nodes."""
        region = MetricBall(center=(0.0,), radius=0.5, metric="euclidean")
        report = run_diagnostics(gauss_family, ball_1d, [region])
        assert [level.k for level in report.levels] == [5, 10, 20]
        assert report.level(10).riesz_min == pytest.approx(1.0, abs=1e-9)
        assert len(report.density) == 3
        assert report.tolerances["dual_eigmin"] == 1e-10

    def test_thread_count_does_not_change_results(self, gauss_family, ball_1d):
        """Levels merge in k order whatever the worker count."""
        one = run_diagnostics(gauss_family, ball_1d, threads=1)
        four = run_diagnostics(gauss_family, ball_1d, threads=4)
        assert one.model_dump_json() == four.model_dump_json()

    def test_dimension_mismatch(self, gauss_family, ball_2d):
        """Family and measure must share the dimension."""
        with pytest.raises(InputError):
            run_diagnostics(gauss_family, ball_2d)
