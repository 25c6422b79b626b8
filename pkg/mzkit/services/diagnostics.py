"""
Separation, Carleson, Riesz/frame and density diagnostics of point families.

Level k of a family Λ is tested through the normalized kernels
κ_λ = K_k(·, λ) / sqrt(β_k(λ)). With B the matrix of their ONB coordinates
(row λ = Φ(λ) / sqrt(β_k(λ))), the Gram matrix is G = B B^T and the frame
operator is S = B^T B.
"""
from typing import Optional, Sequence

import numpy as np
from scipy.linalg import LinAlgError, cho_factor, cho_solve, eigvalsh
from scipy.spatial import cKDTree

from mzkit.core.config import settings
from mzkit.core.errors import DualBasisUndefinedError, EigenSolverError, InputError
from mzkit.core.logging import get_logger
from mzkit.infrastructure.executor import WorkerPool
from mzkit.models.family import DiscreteMeasure, PointFamily
from mzkit.models.measure import Measure, MetricBall
from mzkit.models.report import (
    CountRow,
    DensityRow,
    DensityTrend,
    DiagnosticsReport,
    HoleReport,
    LevelDiagnostics,
)
from mzkit.services import geometry
from mzkit.services.measures import as_points, check_in_domain, space_dimension
from mzkit.services.polyspace import PolySpace, orthonormal_basis

logger = get_logger(__name__)

DUAL_EIGMIN = 1e-10
CHUNK_ENTRIES = 1 << 22


def _level_points(fam: PointFamily, k: int) -> np.ndarray:
    try:
        return fam.points(k)
    except KeyError as exc:
        raise InputError(f"family has no level k={k}", k=k) from exc


def _unit_ball(n: int) -> Measure:
    return Measure.ball(n, 0.5)


def separation_constant(fam: PointFamily, k: int, m: Optional[Measure] = None) -> float:
    """k times the smallest distance between two points of Λ_k (inf below two points).

    The distance is ρ on the ball and ellipsoid and the box-proxy quasi-metric on boxes.
    """
    m = m or _unit_ball(fam.n)
    points = _level_points(fam, k)
    if points.shape[0] < 2:
        return float("inf")
    coords, p = geometry.metric_embedding(m, points)
    nearest, _ = cKDTree(coords).query(coords, k=2, p=p)
    smallest = float(geometry.embedded_to_distance(m, float(np.min(nearest[:, 1]))))
    return max(k, 1) * smallest


def level_measure(points: np.ndarray, ps: PolySpace, k: Optional[int] = None) -> DiscreteMeasure:
    """μ_k = Σ δ_λ / β_k(λ)."""
    if points.shape[0] == 0:
        return DiscreteMeasure(points=np.zeros((0, ps.n)), masses=np.zeros(0))
    beta = ps.christoffel_values(points, ps.k if k is None else k)
    return DiscreteMeasure(points=points, masses=1.0 / beta)


def carleson_ratio(
    mu_k: DiscreteMeasure,
    k: int,
    m: Measure,
    reference: str = "lebesgue",
    budget: Optional[int] = None,
) -> tuple[float, Optional[tuple[float, ...]]]:
    """sup over a ρ-net of spacing 1/(2k) of μ_k(B(x, 1/k)) / V(B(x, 1/k)) and its witness center.

    V is the proxy volume of the metric ball, Lebesgue or weighted (ball only).
    """
    if reference not in ("lebesgue", "weighted"):
        raise InputError(f"unknown Carleson reference '{reference}'")
    if reference == "weighted" and m.kind != "ball":
        raise InputError("the weighted reference needs a ball measure", kind=m.kind)
    if mu_k.size == 0 or mu_k.total_mass == 0:
        return 0.0, None
    atoms = check_in_domain(m, mu_k.points, what="atom")
    scale = max(k, 1)
    radius = 1.0 / scale
    centers = geometry.rho_net(m, 0.5 / scale, budget)
    lebesgue, weighted = geometry.metric_ball_volumes(m, centers, radius)
    volumes = weighted if reference == "weighted" else lebesgue
    chunk = max(1, CHUNK_ENTRIES // atoms.shape[0])
    masses = np.empty(centers.shape[0])
    for start in range(0, centers.shape[0], chunk):
        block = geometry.distance_matrix(m, centers[start : start + chunk], atoms)
        masses[start : start + chunk] = (block < radius) @ mu_k.masses
    ratios = masses / volumes
    best = int(np.argmax(ratios))
    logger.debug("Carleson ratio", k=k, centers=centers.shape[0], ratio=float(ratios[best]))
    return float(ratios[best]), tuple(float(v) for v in centers[best])


def carleson_embedding_constant(mu_k: DiscreteMeasure, ps: PolySpace, k: Optional[int] = None) -> float:
    """Best C in ∫ |p|^2 dμ_k <= C ‖p‖^2 over P_k."""
    if mu_k.size == 0:
        return 0.0
    width = ps.level_dimension(ps.k if k is None else k)
    phi = ps.basis_matrix(mu_k.points)[:, :width]
    weighted = phi * np.sqrt(mu_k.masses)[:, None]
    return float(_spectrum(weighted.T @ weighted)[-1])


def _spectrum(matrix: np.ndarray) -> np.ndarray:
    try:
        values = eigvalsh(matrix)
    except (LinAlgError, ValueError) as exc:
        raise EigenSolverError(f"eigen-solver failure: {exc}") from exc
    return np.clip(values, 0.0, None)


def check_level(fam: PointFamily, k: int, ps: PolySpace) -> np.ndarray:
    if k > ps.k:
        raise InputError(f"space of degree {ps.k} cannot test level k={k}", k=k)
    if fam.n != ps.n:
        raise InputError("family and measure dimensions differ", family=fam.n, measure=ps.n)
    return check_in_domain(ps.measure, _level_points(fam, k))


def normalized_coordinates(points: np.ndarray, ps: PolySpace, k: int) -> np.ndarray:
    """B with B[λ] = Φ_k(λ) / sqrt(β_k(λ))."""
    phi = ps.basis_matrix(points)[:, : ps.level_dimension(k)]
    return phi / np.sqrt(np.einsum("ij,ij->i", phi, phi))[:, None]


def gram_matrix(fam: PointFamily, k: int, ps: PolySpace) -> np.ndarray:
    """G[i, j] = K_k(λ_i, λ_j) / sqrt(β_k(λ_i) β_k(λ_j))."""
    b = normalized_coordinates(check_level(fam, k, ps), ps, k)
    gram = b @ b.T
    np.fill_diagonal(gram, 1.0)
    return gram


def riesz_bounds(fam: PointFamily, k: int, ps: PolySpace) -> tuple[float, float]:
    """Extreme eigenvalues of the Gram matrix; eigmin is 0 whenever the κ_λ are dependent."""
    points = check_level(fam, k, ps)
    if points.shape[0] == 0:
        return 0.0, 0.0
    b = normalized_coordinates(points, ps, k)
    values = _spectrum(b @ b.T)
    lower = float(values[0])
    if np.linalg.matrix_rank(b) < points.shape[0]:
        lower = 0.0
    return lower, float(values[-1])


def frame_bounds(fam: PointFamily, k: int, ps: PolySpace) -> tuple[float, float, int]:
    """Extreme eigenvalues of S = Σ κ_λ ⊗ κ_λ in the ONB, and the rank of the κ_λ."""
    points = check_level(fam, k, ps)
    if points.shape[0] == 0:
        return 0.0, 0.0, 0
    b = normalized_coordinates(points, ps, k)
    values = _spectrum(b.T @ b)
    rank = int(np.linalg.matrix_rank(b))
    lower = float(values[0]) if rank == b.shape[1] else 0.0
    return lower, float(values[-1]), rank


class DualSystem:
    """Dual basis g_λ = Σ (G^-1)_{λλ'} κ_λ' and the subspace kernel 𝒦_k of span{κ_λ}."""

    def __init__(self, points: np.ndarray, ps: PolySpace, k: int):
        self.points = points
        self.space = ps
        self.k = k
        self.width = ps.level_dimension(k)
        self.coordinates = normalized_coordinates(points, ps, k)
        gram = self.coordinates @ self.coordinates.T
        eigmin = float(_spectrum(gram)[0]) if points.shape[0] else 0.0
        if eigmin <= DUAL_EIGMIN:
            raise DualBasisUndefinedError(eigmin)
        self._factor = cho_factor(gram, lower=True)

    def kappa(self, x) -> np.ndarray:
        """κ_λ(x); one row per x, one column per λ."""
        phi = self.space.basis_matrix(x)[:, : self.width]
        return phi @ self.coordinates.T

    def dual(self, x) -> np.ndarray:
        """g_λ(x); one row per x, one column per λ."""
        return cho_solve(self._factor, self.kappa(x).T).T

    def subspace_kernel(self, x, y=None) -> np.ndarray:
        kx = self.kappa(x)
        ky = kx if y is None else self.kappa(y)
        return kx @ cho_solve(self._factor, ky.T)

    def subspace_diagonal(self, x) -> np.ndarray:
        """𝒦_k(x, x) = Σ_λ κ_λ(x) g_λ(x)."""
        kx = self.kappa(x)
        return np.einsum("ij,ij->i", kx, cho_solve(self._factor, kx.T).T)


def dual_and_subspace_kernel(fam: PointFamily, k: int, ps: PolySpace) -> DualSystem:
    return DualSystem(check_level(fam, k, ps), ps, k)


def density_report(
    fam: PointFamily,
    m: Measure,
    regions: Sequence[MetricBall],
) -> tuple[list[DensityRow], list[DensityTrend]]:
    """#(Λ_k ∩ region) / dim P_k against the equilibrium mass of each region, per level."""
    equilibrium = [geometry.equilibrium_mass(m, region) for region in regions]
    exact = [geometry.exact_equilibrium_mass(m, region) for region in regions]
    rows: list[DensityRow] = []
    for level in fam.entries:
        dim = space_dimension(fam.n, level.k)
        for region, mass, exact_mass in zip(regions, equilibrium, exact):
            count = int(np.count_nonzero(geometry.in_metric_ball(m, level.points, region))) if level.count else 0
            count_ratio = count / dim
            rows.append(
                DensityRow(
                    k=level.k,
                    center=tuple(region.center),
                    radius=region.radius,
                    count=count,
                    dim=dim,
                    count_ratio=count_ratio,
                    equilibrium=mass,
                    exact_equilibrium=exact_mass,
                    ratio=count_ratio / mass if mass > 0 else 0.0,
                )
            )
    return rows, _density_trends(rows, regions)


def _density_trends(rows: list[DensityRow], regions: Sequence[MetricBall]) -> list[DensityTrend]:
    trends = []
    for region in regions:
        mine = [r for r in rows if r.center == tuple(region.center) and r.radius == region.radius]
        if not mine:
            continue
        trends.append(
            DensityTrend(
                center=tuple(region.center),
                radius=region.radius,
                k_first=mine[0].k,
                k_last=mine[-1].k,
                ratio_first=mine[0].ratio,
                ratio_last=mine[-1].ratio,
                max_deviation=max(abs(r.ratio - 1.0) for r in mine),
            )
        )
    return trends


def count_in_balls(fam: PointFamily, k: int, center, multiples: Sequence[float]) -> list[CountRow]:
    """#(Λ_k ∩ 𝔹(x, M/k)) for every M."""
    points = _level_points(fam, k)
    center = as_points(center, fam.n)[0]
    distances = np.linalg.norm(points - center, axis=1) if points.shape[0] else np.zeros(0)
    scale = max(k, 1)
    return [CountRow(k=k, M=float(M), count=int(np.count_nonzero(distances < M / scale))) for M in multiples]


def _hole_centers(n: int, k: int) -> np.ndarray:
    spacing = 1.0 / (4 * max(k, 1))
    line = np.arange(-0.25 + spacing / 2, 0.25, spacing)
    grid = np.stack(np.meshgrid(*([line] * n), indexing="ij"), axis=-1).reshape(-1, n)
    return grid[np.linalg.norm(grid, axis=1) < 0.25]


def largest_hole(fam: PointFamily, k: int, centers=None) -> HoleReport:
    """Largest M with Λ_k ∩ 𝔹(x0, M/k) empty over centers |x0| < 1/4."""
    points = _level_points(fam, k)
    centers = _hole_centers(fam.n, k) if centers is None else as_points(centers, fam.n)
    if np.any(np.linalg.norm(centers, axis=1) >= 0.25):
        raise InputError("hole centers must satisfy |x0| < 1/4")
    if points.shape[0] == 0:
        return HoleReport(k=k, hole=float("inf"), center=tuple(float(v) for v in centers[0]))
    gaps, _ = cKDTree(points).query(centers)
    best = int(np.argmax(gaps))
    return HoleReport(k=k, hole=float(max(k, 1) * gaps[best]), center=tuple(float(v) for v in centers[best]))


def _diagnose_level(
    fam: PointFamily, k: int, m: Measure, ps: PolySpace, reference: str, budget: Optional[int]
) -> LevelDiagnostics:
    points = check_level(fam, k, ps)
    mu_k = level_measure(points, ps, k)
    ratio, center = carleson_ratio(mu_k, k, m, reference, budget)
    riesz = riesz_bounds(fam, k, ps)
    lower, upper, rank = frame_bounds(fam, k, ps)
    level = LevelDiagnostics(
        k=k,
        count=int(points.shape[0]),
        dim=ps.level_dimension(k),
        separation=separation_constant(fam, k, m),
        carleson_ratio=ratio,
        carleson_center=center,
        carleson_constant=carleson_embedding_constant(mu_k, ps, k),
        riesz_min=riesz[0],
        riesz_max=riesz[1],
        frame_lower=lower,
        frame_upper=upper,
        rank=rank,
    )
    logger.info("Level diagnosed", k=k, count=level.count, riesz_min=level.riesz_min, frame_lower=lower)
    return level


def run_diagnostics(
    fam: PointFamily,
    m: Measure,
    regions: Optional[Sequence[MetricBall]] = None,
    reference: str = "lebesgue",
    precision: Optional[str] = None,
    method: Optional[str] = None,
    threads: Optional[int] = None,
    budget: Optional[int] = None,
) -> DiagnosticsReport:
    """Every diagnostic for every level; levels run in parallel and merge in k order."""
    if fam.n != m.n:
        raise InputError("family and measure dimensions differ", family=fam.n, measure=m.n)
    if not fam.entries:
        raise InputError("family has no levels")
    for level in fam.entries:
        check_in_domain(m, level.points, what=f"point of level k={level.k}")
    space = orthonormal_basis(m, max(fam.degrees), precision, method)
    with WorkerPool(threads) as pool:
        levels = pool.map_ordered(lambda k: _diagnose_level(fam, k, m, space, reference, budget), fam.degrees)
    density, trends = density_report(fam, m, regions) if regions else ([], [])
    return DiagnosticsReport(
        measure=m,
        levels=levels,
        density=density,
        density_trends=trends,
        carleson_reference=reference,
        carleson_net_spacing="1/(2k)",
        equilibrium_grade=geometry.equilibrium_grade(m),
        tolerances={**settings.tolerances(), "dual_eigmin": DUAL_EIGMIN},
    )
