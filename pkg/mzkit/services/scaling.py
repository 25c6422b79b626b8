"""
Bessel machinery for the scaling limit of kernels at the center of the ball,
and the multi-start search for orthogonal configurations of normalized kernels.

J*_ν(t) = J_ν(t) / t^ν, finite at 0 with J*_ν(0) = 1 / (2^ν Γ(ν + 1)).
"""
from typing import Optional, Sequence, Union

import numpy as np
from scipy.optimize import brentq, minimize
from scipy.special import gammaln, jv

from mzkit.core.config import settings
from mzkit.core.errors import InputError, SearchNotConvergedError
from mzkit.core.logging import get_logger
from mzkit.infrastructure.executor import WorkerPool
from mzkit.models.measure import Measure
from mzkit.models.report import BesselProfile, PairDistance, ScalingRow, SearchLedger, ZeroDistanceReport
from mzkit.services.gegenbauer import gauss_nodes_1d
from mzkit.services.measures import as_points, sample_points, space_dimension
from mzkit.services.polyspace import PolySpace, orthonormal_basis

logger = get_logger(__name__)

SERIES_LIMIT = 1.0
SERIES_TERMS = 30
ZERO_SCAN_STEP = 0.05
ZERO_XTOL = 1e-13
T_SUPPORTED = 200.0
BULK_RADIUS = 0.25


def _check_order(nu: float) -> None:
    if nu < 0.5:
        raise InputError("Bessel order must be at least 1/2", nu=nu)


def jstar_at_zero(nu: float) -> float:
    return float(np.exp(-nu * np.log(2.0) - gammaln(nu + 1.0)))


def jstar(nu: float, t: Union[float, np.ndarray]) -> Union[float, np.ndarray]:
    """J_ν(t) / t^ν: power series for t <= 1, scipy's J_ν above."""
    _check_order(nu)
    arr = np.atleast_1d(np.asarray(t, dtype=float))
    if np.any(arr < 0):
        raise InputError("jstar takes t >= 0")
    out = np.empty_like(arr)
    small = arr <= SERIES_LIMIT
    if np.any(small):
        s = arr[small]
        j = np.arange(SERIES_TERMS)[:, None]
        log_terms = 2 * j * np.log(0.5) - gammaln(j + 1.0) - gammaln(j + nu + 1.0) - nu * np.log(2.0)
        powers = np.where(j == 0, 1.0, s[None, :] ** (2 * j))
        out[small] = np.sum((-1.0) ** j * np.exp(log_terms) * powers, axis=0)
    large = ~small
    if np.any(large):
        out[large] = jv(nu, arr[large]) / arr[large] ** nu
    return float(out[0]) if np.ndim(t) == 0 else out.reshape(np.shape(t))


def bessel_zeros(nu: float, t_max: float = T_SUPPORTED) -> list[float]:
    """Positive zeros of J_ν up to t_max, bracketed on a fine scan and refined by brentq."""
    _check_order(nu)
    grid = np.arange(ZERO_SCAN_STEP, t_max + ZERO_SCAN_STEP, ZERO_SCAN_STEP)
    values = jv(nu, grid)
    zeros: list[float] = []
    for i in range(grid.shape[0] - 1):
        left, right = values[i], values[i + 1]
        if left == 0.0:
            zeros.append(float(grid[i]))
        elif left * right < 0:
            zeros.append(float(brentq(lambda s: jv(nu, s), grid[i], grid[i + 1], xtol=ZERO_XTOL)))
    return [z for z in zeros if z <= t_max]


def bessel_profile(nu: float, t_max: float = T_SUPPORTED) -> BesselProfile:
    return BesselProfile(nu=nu, jstar_at_zero=jstar_at_zero(nu), t_max=t_max, zeros=bessel_zeros(nu, t_max))


def _cube_grid(n: int, R: float, grid_count: int) -> np.ndarray:
    line = np.linspace(-R, R, grid_count)
    return np.stack(np.meshgrid(*([line] * n), indexing="ij"), axis=-1).reshape(-1, n)


def scaling_error(
    m: Measure,
    ks: Sequence[int],
    R: float,
    grid_count: int = 41,
    precision: Optional[str] = None,
    method: Optional[str] = None,
) -> list[ScalingRow]:
    """sup over u, v in [-R, R]^n of |K_k(u/k, v/k) / K_k(0, 0) - J*(|u - v|) / J*(0)| for each k."""
    if m.kind != "ball":
        raise InputError("the scaling limit is taken at the center of a ball measure")
    ks = sorted(set(int(k) for k in ks))
    if not ks or ks[0] < 1:
        raise InputError("scaling needs degrees k >= 1")
    if R <= 0 or np.sqrt(m.n) * R / ks[0] > BULK_RADIUS:
        raise InputError(
            f"grid [-R, R]^n / k must stay within radius {BULK_RADIUS} of the center",
            R=R,
            k_min=ks[0],
        )
    nu = 0.5 * m.n
    grid = _cube_grid(m.n, R, grid_count)
    gaps = np.linalg.norm(grid[:, None, :] - grid[None, :, :], axis=2)
    limit = jstar(nu, gaps) / jstar_at_zero(nu)
    space = orthonormal_basis(m, ks[-1], precision, method)
    origin = np.zeros((1, m.n))
    rows = []
    for k in ks:
        kernel = space.kernel_matrix(grid / k, degree=k)
        center = float(space.christoffel_values(origin, degree=k)[0])
        error = float(np.max(np.abs(kernel / center - limit)))
        rows.append(ScalingRow(k=k, R=R, grid_count=grid_count, sup_error=error))
    if not scaling_is_monotone(rows):
        logger.warning("Scaling error not decreasing in k", errors=[r.sup_error for r in rows])
    return rows


def scaling_is_monotone(rows: Sequence[ScalingRow]) -> bool:
    errors = [r.sup_error for r in rows]
    return all(b < a for a, b in zip(errors, errors[1:]))


def bessel_zero_distance_test(points, nu: float, tol: float) -> ZeroDistanceReport:
    """Pairwise distances of X against the zeros of J_ν."""
    points = np.asarray(points, dtype=float)
    points = points.reshape(-1, 1) if points.ndim == 1 else points
    if points.shape[0] < 2:
        raise InputError("the zero-distance test needs at least two points")
    i, j = np.triu_indices(points.shape[0], k=1)
    distances = np.linalg.norm(points[i] - points[j], axis=1)
    zeros = np.asarray(bessel_zeros(nu, max(T_SUPPORTED, float(np.max(distances)) + 2 * np.pi)))
    nearest = zeros[np.argmin(np.abs(distances[:, None] - zeros[None, :]), axis=1)]
    gaps = np.abs(distances - nearest)
    pairs = [
        PairDistance(i=int(a), j=int(b), distance=float(d), nearest_zero=float(z), gap=float(g))
        for a, b, d, z, g in zip(i, j, distances, nearest, gaps)
    ]
    return ZeroDistanceReport(nu=nu, tol=tol, pairs=pairs, compatible=bool(np.all(gaps <= tol)))


def to_ball(z: np.ndarray) -> np.ndarray:
    """Map R^n onto the open unit ball: z tanh|z| / |z|."""
    norms = np.linalg.norm(z, axis=1, keepdims=True)
    scale = np.divide(np.tanh(norms), norms, out=np.ones_like(norms), where=norms > 0)
    return z * scale


def from_ball(x: np.ndarray) -> np.ndarray:
    norms = np.linalg.norm(x, axis=1, keepdims=True)
    clipped = np.clip(norms, 0.0, 1.0 - 1e-15)
    scale = np.divide(np.arctanh(clipped), norms, out=np.ones_like(norms), where=norms > 0)
    return x * scale


def orthogonality_residual(space: PolySpace, points: np.ndarray) -> float:
    """Σ_{i≠j} K(λ_i, λ_j)^2 / (β(λ_i) β(λ_j))."""
    phi = space.basis_matrix(points, check=False)
    b = phi / np.sqrt(np.einsum("ij,ij->i", phi, phi))[:, None]
    gram = b @ b.T
    np.fill_diagonal(gram, 0.0)
    return float(np.sum(gram**2))


def _restart(args: tuple) -> tuple[float, int, np.ndarray, bool]:
    space, start, max_iter = args
    shape = start.shape

    def objective(z: np.ndarray) -> float:
        return orthogonality_residual(space, to_ball(z.reshape(shape)))

    result = minimize(
        objective,
        from_ball(start).reshape(-1),
        method="L-BFGS-B",
        options={"maxiter": max_iter, "ftol": 1e-15, "gtol": 1e-10},
    )
    best = to_ball(result.x.reshape(shape))
    residual = orthogonality_residual(space, best)
    # a zero residual is an orthogonal configuration whatever the line search reported
    converged = bool(result.success) or residual <= 1e-24
    return residual, int(result.nit), best, converged


def _starts(n: int, a: float, k: int, m: int, seed: int, restarts: int) -> list[np.ndarray]:
    measure = Measure.ball(n, a)
    starts = []
    for index in range(restarts):
        if index == 0 and n == 1 and m == k + 1:
            starts.append(gauss_nodes_1d(k + 1, a)[0].reshape(-1, 1))
            continue
        rng = np.random.default_rng([seed, index])
        starts.append(0.9 * sample_points(measure, m, rng))
    return starts


def orthogonality_residual_search(
    n: int,
    a: float,
    k: int,
    m: int,
    seed: Optional[int] = None,
    restarts: int = 20,
    max_iter: int = 2000,
    threads: Optional[int] = None,
    strict: bool = False,
) -> SearchLedger:
    """Multi-start minimization of the off-diagonal Gram mass over m-point configurations.

    Restart 0 starts from the Gauss nodes when n = 1 and m = k + 1; the others
    start from seeded random points. The best restart is the smallest
    (residual, restart index).
    """
    seed = settings.default_seed if seed is None else seed
    dim = space_dimension(n, k)
    if not 1 <= m <= dim:
        raise InputError(f"point count must lie in [1, dim P_k] = [1, {dim}]", m=m)
    if restarts < 1:
        raise InputError("at least one restart is required", restarts=restarts)
    measure = Measure.ball(n, a)
    if m == 1:
        configuration = np.zeros((1, n))
        return SearchLedger(
            n=n,
            a=a,
            k=k,
            m=m,
            seed=seed,
            restarts=1,
            best_residual=0.0,
            best_restart=0,
            configuration=configuration,
            residuals=[0.0],
            iterations=[0],
            converged=True,
        )
    space = orthonormal_basis(measure, k)
    starts = _starts(n, a, k, m, seed, restarts)
    with WorkerPool(threads) as pool:
        outcomes = pool.map_ordered(_restart, [(space, start, max_iter) for start in starts])
    best = min(range(len(outcomes)), key=lambda i: (outcomes[i][0], i))
    residual, iterations, configuration, converged = outcomes[best]
    ledger = SearchLedger(
        n=n,
        a=a,
        k=k,
        m=m,
        seed=seed,
        restarts=restarts,
        best_residual=residual,
        best_restart=best,
        configuration=as_points(configuration, n),
        residuals=[o[0] for o in outcomes],
        iterations=[o[1] for o in outcomes],
        converged=converged,
    )
    logger.info("Orthogonality search finished", n=n, k=k, m=m, best_residual=residual, restart=best)
    if not converged:
        error = SearchNotConvergedError(residual, iterations)
        logger.warning(error.message, restart=best)
        if strict:
            raise error
    return ledger
