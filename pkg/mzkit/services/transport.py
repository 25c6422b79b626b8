"""
Vaserstein-1 distances between a level of a family and the subspace kernel density.

σ_k puts mass 1/dim P_k on every point of Λ_k; ν_k = 𝒦_k(x, x) dμ(x) / dim P_k is
discretized on a quadrature grid of the measure. Both have mass #Λ_k / dim P_k.
"""
from typing import Optional, Sequence

import numpy as np
from scipy.spatial import cKDTree

from mzkit.core.errors import EmptyMeasureError, InputError, MassMismatchError
from mzkit.core.logging import get_logger
from mzkit.infrastructure.executor import WorkerPool
from mzkit.infrastructure.transport_solvers import (
    MonotoneCouplingSolver,
    NetworkSimplexSolver,
    TransportSolver,
)
from mzkit.models.family import DiscreteMeasure, PointFamily
from mzkit.models.measure import Measure
from mzkit.models.report import MomentRow, TransportRow
from mzkit.services.diagnostics import DualSystem, check_level
from mzkit.services.measures import quadrature_rule
from mzkit.services.polyspace import PolySpace, orthonormal_basis

logger = get_logger(__name__)

MASS_TOLERANCE = 1e-10


def vaserstein1(
    sigma: DiscreteMeasure, nu: DiscreteMeasure, solver: Optional[TransportSolver] = None
) -> float:
    """Exact W1 with Euclidean cost; monotone coupling in 1D, network simplex otherwise."""
    if sigma.size == 0 or nu.size == 0:
        raise EmptyMeasureError("transport between empty measures is undefined")
    if sigma.dimension != nu.dimension:
        raise InputError("measures live in different dimensions", sigma=sigma.dimension, nu=nu.dimension)
    if abs(sigma.total_mass - nu.total_mass) > MASS_TOLERANCE:
        raise MassMismatchError(sigma.total_mass, nu.total_mass)
    if solver is None:
        solver = MonotoneCouplingSolver() if sigma.dimension == 1 else NetworkSimplexSolver()
    return solver.solve(sigma, nu)


def default_transport_order(n: int, k: int) -> int:
    """Exactness degree of the grid carrying ν_k: about 4(k + 1) nodes in 1D, 2k + 2 above."""
    return 8 * (k + 1) if n == 1 else 2 * k + 2


def grid_mesh(nodes: np.ndarray) -> float:
    """Largest nearest-neighbour distance among the grid nodes."""
    if nodes.shape[0] < 2:
        return 0.0
    distances, _ = cKDTree(nodes).query(nodes, k=2)
    return float(np.max(distances[:, 1]))


def subspace_density_measure(dual: DualSystem, quad_order: int) -> tuple[DiscreteMeasure, float]:
    """ν_k on the quadrature grid and the mesh of that grid."""
    rule = quadrature_rule(dual.space.measure, quad_order)
    diagonal = dual.subspace_diagonal(rule.nodes)
    masses = np.clip(diagonal, 0.0, None) * rule.weights / dual.width
    return DiscreteMeasure(points=np.array(rule.nodes), masses=masses), grid_mesh(rule.nodes)


def interpolation_transport_gap(
    fam: PointFamily,
    k: int,
    ps: PolySpace,
    quad_order: Optional[int] = None,
    solver: Optional[TransportSolver] = None,
) -> TransportRow:
    """W1(σ_k, ν_k) with the grid mesh it carries as discretization error."""
    points = check_level(fam, k, ps)
    if points.shape[0] == 0:
        raise EmptyMeasureError(f"level k={k} is empty: transport distance undefined", k=k)
    quad_order = default_transport_order(ps.n, k) if quad_order is None else quad_order
    if quad_order < 2 * k:
        raise InputError("transport grid order must be at least 2k", order=quad_order, k=k)
    dual = DualSystem(points, ps, k)
    sigma = DiscreteMeasure(points=points, masses=np.full(points.shape[0], 1.0 / dual.width))
    nu, mesh = subspace_density_measure(dual, quad_order)
    distance = vaserstein1(sigma, nu, solver)
    logger.info("Transport gap", k=k, distance=distance, mesh=mesh, atoms=sigma.size + nu.size)
    return TransportRow(k=k, distance=distance, mesh=mesh, mass=sigma.total_mass)


def transport_table(
    fam: PointFamily,
    m: Measure,
    quad_order: Optional[int] = None,
    precision: Optional[str] = None,
    method: Optional[str] = None,
    threads: Optional[int] = None,
) -> list[TransportRow]:
    """Transport gap of every nonempty level, in k order."""
    degrees = [level.k for level in fam.entries if level.count]
    if not degrees:
        raise EmptyMeasureError("family has no nonempty level")
    space = orthonormal_basis(m, max(degrees), precision, method)
    with WorkerPool(threads) as pool:
        return pool.map_ordered(lambda k: interpolation_transport_gap(fam, k, space, quad_order), degrees)


def offdiag_second_moment(ps: PolySpace, quad_order: Optional[int] = None, k: Optional[int] = None) -> float:
    """(1 / dim P_k) ∬ |x - y|^2 K_k(x, y)^2 dμ(x) dμ(y) by tensor quadrature."""
    k = ps.k if k is None else k
    quad_order = 2 * k + 2 if quad_order is None else quad_order
    if quad_order < 2 * k + 2:
        raise InputError("second moment needs quadrature order at least 2k + 2", order=quad_order, k=k)
    rule = quadrature_rule(ps.measure, quad_order)
    width = ps.level_dimension(k)
    phi = ps.basis_matrix(rule.nodes, check=False)[:, :width]
    nodes, weights = rule.nodes, rule.weights
    sq_norms = np.einsum("ij,ij->i", nodes, nodes)
    chunk = max(1, (1 << 22) // nodes.shape[0])
    total = 0.0
    for start in range(0, nodes.shape[0], chunk):
        stop = start + chunk
        kernel = phi[start:stop] @ phi.T
        gaps = sq_norms[start:stop, None] + sq_norms[None, :] - 2.0 * nodes[start:stop] @ nodes.T
        total += float(weights[start:stop] @ (np.clip(gaps, 0.0, None) * kernel**2) @ weights)
    return total / width


def moment_table(
    m: Measure,
    ks: Sequence[int],
    precision: Optional[str] = None,
    method: Optional[str] = None,
) -> list[MomentRow]:
    """Second moment and k times it over a k ladder, read from one space."""
    ks = sorted(set(int(k) for k in ks))
    space = orthonormal_basis(m, max(ks), precision, method)
    rows = []
    for k in ks:
        value = offdiag_second_moment(space, k=k)
        rows.append(MomentRow(k=k, moment=value, scaled=k * value))
    return rows
