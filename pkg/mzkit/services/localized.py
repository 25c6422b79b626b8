"""
Localized kernels L_k(x, y) = Σ_j â(j/k) P_j(x, y) on the weighted ball.

The slices P_j come from the graded orthonormal basis of a single degree-2k
space, so L_k is Φ(x) diag(â(deg/k)) Φ(y)^T. â vanishes from t = 2 on, which
truncates the sum at j = 2k.
"""
from typing import Optional, Sequence, Union

import numpy as np
from scipy.linalg import null_space
from scipy.signal import find_peaks

from mzkit.core.errors import InputError, QuadratureRefinementError
from mzkit.core.logging import get_logger
from mzkit.models.measure import Measure
from mzkit.models.report import DecayProfile, DecayRow, IntegralEstimateRow, IntegralEstimateTable, SandwichRow
from mzkit.services import geometry
from mzkit.services.measures import as_points, check_in_domain, quadrature_rule
from mzkit.services.polyspace import PolySpace, orthonormal_basis

logger = get_logger(__name__)

DECAY_FIT_RANGE = (2.0, 20.0)
MAX_REFINEMENTS = 4


def _flat(s: np.ndarray) -> np.ndarray:
    out = np.zeros_like(s)
    positive = s > 0
    out[positive] = np.exp(-1.0 / s[positive])
    return out


def cutoff_hat(t: Union[float, np.ndarray]) -> Union[float, np.ndarray]:
    """Smooth cutoff: 1 on [0, 1], 0 on [2, inf), f(2-t) / (f(2-t) + f(t-1)) between, f(s) = exp(-1/s)."""
    arr = np.asarray(t, dtype=float)
    if np.any(arr < 0):
        raise InputError("cutoff argument must be nonnegative")
    left, right = _flat(2.0 - arr), _flat(arr - 1.0)
    denominator = left + right
    middle = np.divide(left, denominator, out=np.zeros_like(arr), where=denominator > 0)
    value = np.where(arr <= 1.0, 1.0, np.where(arr >= 2.0, 0.0, middle))
    return float(value) if np.ndim(t) == 0 else value


class LocalizedKernel:
    """L_k for the ball measure (1 - |x|^2)^(a - 1/2) dx.

    ``sharp=True`` replaces the smooth cutoff by the indicator of [0, 1], which
    gives back K_k; it is used as the non-localized reference.
    """

    def __init__(self, n: int, a: float, k: int, sharp: bool = False, precision: Optional[str] = None):
        if k < 0:
            raise InputError("degree must be nonnegative", k=k)
        self.n = n
        self.a = a
        self.k = k
        self.sharp = sharp
        self.measure = Measure.ball(n, a)
        self.space: PolySpace = orthonormal_basis(self.measure, 2 * k, precision)
        degrees = self.space.degrees
        if k == 0:
            self.filter = (degrees == 0).astype(float)
        elif sharp:
            self.filter = (degrees <= k).astype(float)
        else:
            self.filter = np.asarray(cutoff_hat(degrees / k), dtype=float)
        self._normalization: Optional[float] = None

    def __repr__(self) -> str:
        return f"LocalizedKernel(n={self.n}, a={self.a:g}, k={self.k}, sharp={self.sharp})"

    def matrix(self, xs, ys=None) -> np.ndarray:
        phi_x = self.space.basis_matrix(xs)
        phi_y = phi_x if ys is None else self.space.basis_matrix(ys)
        return (phi_x * self.filter) @ phi_y.T

    def diagonal(self, xs) -> np.ndarray:
        phi = self.space.basis_matrix(xs)
        return np.einsum("ij,j,ij->i", phi, self.filter, phi)

    def norm_sq(self, xs) -> np.ndarray:
        """‖L_k(x, ·)‖² = Σ â(j/k)² P_j(x, x)."""
        phi = self.space.basis_matrix(xs)
        return np.einsum("ij,j,ij->i", phi, self.filter**2, phi)

    def christoffel(self, xs, degree: Optional[int] = None) -> np.ndarray:
        """β_j(x) read from the degree-2k ladder (j = k by default)."""
        return self.space.christoffel_values(xs, self.k if degree is None else degree)

    def normalization(self) -> float:
        """b with p(y) = b ∫ L_k(x, y) p(x) dμ(x), from reproducing the constant at the center."""
        if self._normalization is None:
            rule = quadrature_rule(self.measure, 2 * self.k)
            center = np.zeros((1, self.n))
            integral = float(self.matrix(center, rule.nodes)[0] @ rule.weights)
            self._normalization = 1.0 / integral
        return self._normalization


def localized_kernel_eval(lk: LocalizedKernel, x, y) -> float:
    return float(lk.matrix(x, y)[0, 0])


def localized_norm_sq(lk: LocalizedKernel, x) -> float:
    return float(lk.norm_sq(x)[0])


def normalization(lk: LocalizedKernel) -> float:
    return lk.normalization()


def diagonal_sandwich(lk: LocalizedKernel, xs, tol: float = 1e-10) -> list[SandwichRow]:
    """β_k(x) <= L_k(x, x) <= β_2k(x) and β_k(x) <= ‖L_k(x, ·)‖² <= β_2k(x) at each x, up to ``tol`` relative."""
    xs = check_in_domain(lk.measure, xs)
    beta_k = lk.christoffel(xs)
    beta_2k = lk.christoffel(xs, 2 * lk.k)
    diagonal = lk.diagonal(xs)
    norms = lk.norm_sq(xs)
    rows = []
    for i in range(xs.shape[0]):
        slack = tol * beta_2k[i]
        holds = bool(
            beta_k[i] - slack <= diagonal[i] <= beta_2k[i] + slack and beta_k[i] - slack <= norms[i] <= beta_2k[i] + slack
        )
        rows.append(
            SandwichRow(
                x=tuple(float(v) for v in xs[i]),
                beta_k=float(beta_k[i]),
                localized=float(diagonal[i]),
                beta_2k=float(beta_2k[i]),
                norm_sq=float(norms[i]),
                holds=holds,
            )
        )
    return rows


def _ray_exit(x0: np.ndarray, u: np.ndarray) -> float:
    """Largest s with |x0 + s u| <= 1."""
    p = float(np.dot(x0, u))
    return -p + float(np.sqrt(p * p + 1.0 - float(np.dot(x0, x0))))


def decay_profile(lk: LocalizedKernel, x0, ray, samples: int = 400) -> DecayProfile:
    """|L_k(x0, y)| / sqrt(β_k(x0) β_k(y)) along a ray, against k ρ(x0, y).

    The exponent is the negated least-squares slope of log |L| against
    log(1 + k ρ) over the local maxima of the profile inside the fit range.
    """
    if samples < 8:
        raise InputError("decay profile needs at least 8 samples", samples=samples)
    x0 = check_in_domain(lk.measure, x0)[0]
    u = np.asarray(ray, dtype=float).reshape(-1)
    if u.shape[0] != lk.n or not np.linalg.norm(u) > 0:
        raise InputError("ray must be a nonzero direction in the ambient dimension")
    u = u / np.linalg.norm(u)
    steps = np.linspace(0.0, _ray_exit(x0, u), samples)
    ys = x0 + steps[:, None] * u
    ys /= np.maximum(1.0, np.linalg.norm(ys, axis=1))[:, None]
    values = np.abs(lk.matrix(x0.reshape(1, -1), ys)[0])
    beta0 = float(lk.christoffel(x0.reshape(1, -1))[0])
    normalized = values / np.sqrt(beta0 * lk.christoffel(ys))
    scaled = max(lk.k, 1) * geometry.rho_matrix(x0.reshape(1, -1), ys)[0]
    rows = [DecayRow(scaled_distance=float(d), value=float(v)) for d, v in zip(scaled, normalized)]
    lo, hi = DECAY_FIT_RANGE
    peaks, _ = find_peaks(normalized)
    peaks = peaks[(scaled[peaks] >= lo) & (scaled[peaks] <= hi) & (normalized[peaks] > 0)]
    exponent = float("nan")
    if peaks.size >= 3:
        slope = np.polyfit(np.log1p(scaled[peaks]), np.log(normalized[peaks]), 1)[0]
        exponent = float(-slope)
    else:
        logger.warning("Decay fit range barely sampled", k=lk.k, peaks=int(peaks.size))
    return DecayProfile(
        k=lk.k,
        a=lk.a,
        x0=tuple(float(v) for v in x0),
        ray=tuple(float(v) for v in u),
        rows=rows,
        exponent=exponent,
        fit_range=DECAY_FIT_RANGE,
    )


def _refined_integral(measure: Measure, integrand, order: int) -> tuple[float, int]:
    """Integral with order doubling until two successive values agree to 1%."""
    rule = quadrature_rule(measure, order)
    coarse = float(np.dot(rule.weights, integrand(rule.nodes)))
    for _ in range(MAX_REFINEMENTS):
        order *= 2
        rule = quadrature_rule(measure, order)
        fine = float(np.dot(rule.weights, integrand(rule.nodes)))
        if abs(fine - coarse) <= 0.01 * abs(fine):
            return fine, order
        coarse = fine
    raise QuadratureRefinementError(coarse, fine, order)


def integral_estimate_check(
    ks: Sequence[int],
    a: float,
    alpha: float,
    gamma: float,
    grid,
    n: int = 1,
    growth_limit: float = 2.0,
) -> IntegralEstimateTable:
    """Tabulate β_k(x)^(1-α) ∫ β_k(y)^α (1 + k ρ(x, y))^(-γ) dμ_a(y) over x and k.

    The table is flagged unbounded when the per-k maxima grow by more than
    ``growth_limit`` across the k range.
    """
    if alpha <= 0:
        raise InputError("alpha must be positive", alpha=alpha)
    if gamma < 0:
        raise InputError("gamma must be nonnegative", gamma=gamma)
    measure = Measure.ball(n, a)
    grid = check_in_domain(measure, grid, what="grid point")
    rows: list[IntegralEstimateRow] = []
    per_k_max: dict[int, float] = {}
    for k in sorted(set(int(k) for k in ks)):
        space = orthonormal_basis(measure, k)
        beta_grid = space.christoffel_values(grid)
        for x, beta_x in zip(grid, beta_grid):
            xrow = x.reshape(1, -1)

            def integrand(nodes: np.ndarray, xrow=xrow, space=space, k=k) -> np.ndarray:
                beta = _beta_unchecked(space, nodes)
                decay = (1.0 + k * geometry.rho_matrix(xrow, nodes)[0]) ** (-gamma)
                return beta**alpha * decay

            integral, order = _refined_integral(measure, integrand, 16 * (k + 1))
            value = integral * beta_x ** (1.0 - alpha)
            rows.append(
                IntegralEstimateRow(
                    k=k, x=tuple(float(v) for v in x), integral=integral, value=float(value), order=order
                )
            )
            per_k_max[k] = max(per_k_max.get(k, 0.0), float(value))
    maxima = list(per_k_max.values())
    growth = max(maxima) / min(maxima)
    bounded = growth <= growth_limit
    if not bounded:
        logger.warning("Integral estimate grows with k", alpha=alpha, gamma=gamma, growth=growth)
    return IntegralEstimateTable(
        a=a, alpha=alpha, gamma=gamma, rows=rows, per_k_max=per_k_max, growth=growth, bounded=bounded
    )


def _beta_unchecked(space: PolySpace, nodes: np.ndarray) -> np.ndarray:
    phi = space.basis_matrix(nodes, check=False)
    return np.einsum("ij,ij->i", phi, phi)


def _geodesic_points(y: np.ndarray, radii: np.ndarray, directions: int) -> np.ndarray:
    """Points at the given ρ-distances from y along geodesics of the lifted hemisphere.

    Returns an array of shape (directions, len(radii), n); entries leaving the
    closed hemisphere are NaN.
    """
    n = y.shape[0]
    lift = np.append(y, np.sqrt(max(1.0 - float(np.dot(y, y)), 0.0)))
    tangent = null_space(lift.reshape(1, -1))
    if n == 1:
        frames = np.array([[1.0], [-1.0]])
    else:
        frames = np.vstack([np.eye(n), -np.eye(n)])[:directions]
    out = np.full((frames.shape[0], radii.shape[0], n), np.nan)
    for i, coords in enumerate(frames):
        u = tangent @ coords
        points = np.cos(radii)[:, None] * lift + np.sin(radii)[:, None] * u
        keep = points[:, -1] >= -1e-15
        out[i, keep] = points[keep, :n]
    return out


def near_diagonal_radius(
    lk: LocalizedKernel, y, threshold: float = 0.5, max_scaled: float = 8.0, samples: int = 400
) -> float:
    """Largest ε with L_k(x, y) >= threshold · β_k(y) for every sampled x with k ρ(x, y) < ε."""
    y = check_in_domain(lk.measure, y)[0]
    scale = max(lk.k, 1)
    scaled = np.linspace(0.0, max_scaled, samples + 1)[1:]
    points = _geodesic_points(y, scaled / scale, 2 * lk.n)
    beta_y = float(lk.christoffel(y.reshape(1, -1))[0])
    epsilon = max_scaled
    for branch in points:
        valid = ~np.isnan(branch[:, 0])
        if not np.any(valid):
            continue
        values = np.full(scaled.shape[0], np.inf)
        values[valid] = lk.matrix(branch[valid], y.reshape(1, -1))[:, 0]
        failing = np.nonzero(values < threshold * beta_y)[0]
        if failing.size:
            epsilon = min(epsilon, float(scaled[failing[0]]))
    return epsilon


def lipschitz_constant(lk: LocalizedKernel, y, ws=None, xs=None) -> float:
    """Smallest C with |L(w, x) - L(w, y)| <= C k ρ(x, y) sqrt(β_k(w) β_k(y)) on the samples.

    Defaults: w on a coarse grid of the ball, x on geodesics at k ρ(x, y) in {1/4, 1/2, 3/4, 1}.
    """
    y = check_in_domain(lk.measure, y)[0]
    scale = max(lk.k, 1)
    if xs is None:
        branches = _geodesic_points(y, np.array([0.25, 0.5, 0.75, 1.0]) / scale, 2 * lk.n)
        xs = branches.reshape(-1, lk.n)
        xs = xs[~np.isnan(xs[:, 0])]
    xs = check_in_domain(lk.measure, xs)
    if ws is None:
        line = np.linspace(-0.95, 0.95, 21)
        ws = line.reshape(-1, 1) if lk.n == 1 else np.array([p for p in _grid(line, lk.n) if np.dot(p, p) <= 0.95**2])
    ws = check_in_domain(lk.measure, ws)
    distances = scale * geometry.rho_matrix(xs, y.reshape(1, -1))[:, 0]
    keep = distances > 0
    xs, distances = xs[keep], distances[keep]
    at_x = lk.matrix(ws, xs)
    at_y = lk.matrix(ws, y.reshape(1, -1))
    beta_w = lk.christoffel(ws)
    beta_y = float(lk.christoffel(y.reshape(1, -1))[0])
    ratios = np.abs(at_x - at_y) / (distances[None, :] * np.sqrt(beta_w[:, None] * beta_y))
    return float(np.max(ratios))


def _grid(line: np.ndarray, n: int) -> np.ndarray:
    return np.stack(np.meshgrid(*([line] * n), indexing="ij"), axis=-1).reshape(-1, n)


def slice_inner_product(space: PolySpace, x, i: int, j: int) -> float:
    """∫ P_i(x, ·) P_j(x, ·) dμ by quadrature of degree 2 · space.k."""
    x = as_points(x, space.n)
    rule = quadrature_rule(space.measure, 2 * space.k)
    left = space.slice_matrix(i, x, rule.nodes)[0]
    right = space.slice_matrix(j, x, rule.nodes)[0]
    return float(np.dot(rule.weights, left * right))
