"""
Orthonormal bases of (P_k, L^2(μ)) and the kernels built from them.

Every assembly path produces the same graded basis: φ_j is the Gram-Schmidt
orthonormalization of the j-th monomial in graded-lex order with a positive
leading coefficient. The first dim P_j functions therefore span P_j, so one
space of degree K carries every kernel K_j and slice P_j with j <= K.
"""
import threading
from abc import ABC, abstractmethod
from typing import Optional, Sequence

import mpmath
import numpy as np
from numpy.polynomial import polynomial as P
from scipy.linalg import LinAlgError, cholesky, solve_triangular

from mzkit.core.config import settings
from mzkit.core.errors import (
    DegreeTooLargeError,
    DomainError,
    GramSingularError,
    InputError,
    OrthonormalityError,
)
from mzkit.core.logging import get_logger
from mzkit.infrastructure.precision import ExtendedContext
from mzkit.models.measure import Measure, MultiIndex
from mzkit.models.report import DiagonalEstimateTable, DiagonalRow, DiagonalSummary
from mzkit.services import geometry
from mzkit.services.gegenbauer import gauss_nodes_1d, orthonormal_coefficients, orthonormal_values
from mzkit.services.measures import (
    as_points,
    check_in_domain,
    enumerate_multiindices,
    moment,
    moment_extended,
    quadrature_rule,
    sample_points,
    space_dimension,
    to_reference,
    total_mass,
)

logger = get_logger(__name__)

__all__ = [
    "PolySpace",
    "orthonormal_basis",
    "kernel_eval",
    "kernel_matrix",
    "christoffel",
    "basis_matrix",
    "slice_kernel",
    "export_coefficients",
    "reproduction_residual",
    "gauss_nodes_1d",
    "diagonal_estimate_ratio",
]


def monomial_matrix(points: np.ndarray, indices: Sequence[MultiIndex]) -> np.ndarray:
    """V[i, j] = x_i^(α_j)."""
    exps = np.asarray(indices, dtype=int)
    top = int(exps.max()) if exps.size else 0
    powers = points[:, :, None] ** np.arange(top + 1)[None, None, :]
    axes = np.arange(points.shape[1])[None, :]
    return np.prod(powers[:, axes, exps], axis=2)


class BasisEvaluator(ABC):
    """Evaluates the orthonormal functions φ_0..φ_{dim-1} at points."""

    @abstractmethod
    def evaluate(self, points: np.ndarray) -> np.ndarray:
        pass

    @abstractmethod
    def coefficients(self) -> np.ndarray:
        """Monomial coefficients, one row per basis function."""
        pass


class MonomialEvaluator(BasisEvaluator):
    def __init__(self, indices: Sequence[MultiIndex], coeffs: np.ndarray):
        self.indices = list(indices)
        self.coeffs = coeffs

    def evaluate(self, points: np.ndarray) -> np.ndarray:
        return monomial_matrix(points, self.indices) @ self.coeffs.T

    def coefficients(self) -> np.ndarray:
        return self.coeffs.copy()


class RecurrenceEvaluator(BasisEvaluator):
    """Gegenbauer three-term recurrence on an interval, through an affine map."""

    def __init__(self, k: int, a: float, center: float = 0.0, half_width: float = 1.0):
        self.k = k
        self.a = a
        self.center = center
        self.half_width = half_width

    def evaluate(self, points: np.ndarray) -> np.ndarray:
        u = (points[:, 0] - self.center) / self.half_width
        return orthonormal_values(u, self.k, self.a) / np.sqrt(self.half_width)

    def coefficients(self) -> np.ndarray:
        reference = orthonormal_coefficients(self.k, self.a)
        shift = np.array([-self.center / self.half_width, 1.0 / self.half_width])
        coeffs = np.zeros_like(reference)
        for j, row in enumerate(reference):
            composed = _compose(row, shift)
            coeffs[j, : composed.shape[0]] = composed
        return coeffs / np.sqrt(self.half_width)


def _compose(row: np.ndarray, shift: np.ndarray) -> np.ndarray:
    """Coefficients of p(c0 + c1 x) from those of p (Horner on coefficient arrays)."""
    result = np.zeros(1)
    for c in row[::-1]:
        result = P.polyadd(P.polymul(result, shift), [c])
    return result


class ArnoldiEvaluator(BasisEvaluator):
    """Graded Gram-Schmidt of x_i φ_parent; evaluated by replaying the recurrence."""

    def __init__(self, indices: Sequence[MultiIndex], parents: np.ndarray, axes: np.ndarray, h: np.ndarray, mass: float):
        self.indices = list(indices)
        self.parents = parents
        self.axes = axes
        self.h = h
        self.mass = mass

    def evaluate(self, points: np.ndarray) -> np.ndarray:
        dim = len(self.indices)
        values = np.empty((points.shape[0], dim))
        values[:, 0] = 1.0 / np.sqrt(self.mass)
        for j in range(1, dim):
            v = points[:, self.axes[j]] * values[:, self.parents[j]] - values[:, :j] @ self.h[j, :j]
            values[:, j] = v / self.h[j, j]
        return values

    def coefficients(self) -> np.ndarray:
        dim = len(self.indices)
        position = {alpha: i for i, alpha in enumerate(self.indices)}
        n = len(self.indices[0])
        shift = np.zeros((n, dim), dtype=int)
        for i, alpha in enumerate(self.indices):
            for axis in range(n):
                raised = alpha[:axis] + (alpha[axis] + 1,) + alpha[axis + 1 :]
                shift[axis, i] = position.get(raised, -1)
        coeffs = np.zeros((dim, dim))
        coeffs[0, 0] = 1.0 / np.sqrt(self.mass)
        for j in range(1, dim):
            parent = coeffs[self.parents[j]]
            moved = np.zeros(dim)
            support = np.nonzero(parent)[0]
            moved[shift[self.axes[j], support]] = parent[support]
            coeffs[j] = (moved - self.h[j, :j] @ coeffs[:j]) / self.h[j, j]
        return coeffs


class PolySpace:
    """P_k with an orthonormal basis for L^2(μ); immutable after construction."""

    def __init__(
        self,
        measure: Measure,
        k: int,
        evaluator: BasisEvaluator,
        method: str,
        precision: str,
        deviation: float,
    ):
        self.measure = measure
        self.k = k
        self.n = measure.n
        self.indices: list[MultiIndex] = enumerate_multiindices(measure.n, k)
        self.dim = len(self.indices)
        self.degrees = np.array([sum(alpha) for alpha in self.indices], dtype=int)
        self.method = method
        self.precision = precision
        self.deviation = deviation
        self._evaluator = evaluator
        self._coeffs: Optional[np.ndarray] = None
        self._lock = threading.Lock()

    def __repr__(self) -> str:
        return f"PolySpace({self.measure.label()}, k={self.k}, dim={self.dim}, method={self.method})"

    def level_dimension(self, j: int) -> int:
        """dim P_j for j <= k (0 for j < 0)."""
        if j < 0:
            return 0
        if j > self.k:
            raise DegreeTooLargeError(j, self.k, what="slice degree")
        return space_dimension(self.n, j)

    @property
    def coeffs(self) -> np.ndarray:
        with self._lock:
            if self._coeffs is None:
                self._coeffs = self._evaluator.coefficients()
                self._coeffs.setflags(write=False)
        return self._coeffs

    def basis_matrix(self, points, check: bool = True) -> np.ndarray:
        points = check_in_domain(self.measure, points) if check else as_points(points, self.n)
        return self._evaluator.evaluate(points)

    def kernel_matrix(self, x, y=None, degree: Optional[int] = None) -> np.ndarray:
        width = self.level_dimension(self.k if degree is None else degree)
        phi_x = self.basis_matrix(x)[:, :width]
        phi_y = phi_x if y is None else self.basis_matrix(y)[:, :width]
        return phi_x @ phi_y.T

    def christoffel_values(self, x, degree: Optional[int] = None) -> np.ndarray:
        """β_j(x) = K_j(x, x) for every row of x."""
        width = self.level_dimension(self.k if degree is None else degree)
        phi = self.basis_matrix(x)[:, :width]
        return np.einsum("ij,ij->i", phi, phi)

    def slice_matrix(self, j: int, x, y=None) -> np.ndarray:
        """P_j(x, y) = K_j(x, y) - K_{j-1}(x, y)."""
        lo, hi = self.level_dimension(j - 1), self.level_dimension(j)
        phi_x = self.basis_matrix(x)[:, lo:hi]
        phi_y = phi_x if y is None else self.basis_matrix(y)[:, lo:hi]
        return phi_x @ phi_y.T


_spaces: dict[tuple, PolySpace] = {}
_spaces_lock = threading.Lock()


def orthonormal_basis(
    m: Measure, k: int, precision: Optional[str] = None, method: Optional[str] = None
) -> PolySpace:
    """Orthonormal basis of P_k for m; cached per (measure, k, precision, method)."""
    precision = precision or settings.precision
    method = method or settings.basis_method
    if k < 0:
        raise DegreeTooLargeError(k, 0, what="negative degree")
    cap = settings.cap_for(settings.degree_cap, m.n)
    if k > cap:
        raise DegreeTooLargeError(k, cap)
    method = _resolve_method(m, k, precision, method)
    key = (m, k, precision, method)
    with _spaces_lock:
        space = _spaces.get(key)
        if space is None:
            space = _assemble(m, k, precision, method)
            _spaces[key] = space
    return space


def _resolve_method(m: Measure, k: int, precision: str, method: str) -> str:
    if method == "recurrence" and m.n != 1:
        raise InputError("the recurrence path is one-dimensional", n=m.n)
    if method == "cholesky":
        caps = settings.cholesky_degree_cap_extended if precision == "extended" else settings.cholesky_degree_cap_double
        cap = settings.cap_for(caps, m.n)
        if k > cap:
            raise DegreeTooLargeError(k, cap, what=f"degree for the {precision} Cholesky path")
        return method
    if method != "auto":
        return method
    caps = settings.cholesky_degree_cap_extended if precision == "extended" else settings.cholesky_degree_cap_double
    if k <= settings.cap_for(caps, m.n):
        return "cholesky"
    # recurrence stays an explicit cross-check
    return "arnoldi"


def _assemble(m: Measure, k: int, precision: str, method: str) -> PolySpace:
    indices = enumerate_multiindices(m.n, k)
    if method == "cholesky":
        evaluator = _cholesky_evaluator(m, k, indices, precision)
    elif method == "recurrence":
        evaluator = _recurrence_evaluator(m, k)
    else:
        evaluator = _arnoldi_evaluator(m, k, indices)
    rule = quadrature_rule(m, 2 * k)
    phi = evaluator.evaluate(rule.nodes)
    gram = phi.T @ (rule.weights[:, None] * phi)
    deviation = float(np.max(np.abs(gram - np.eye(len(indices)))))
    # every evaluator runs in float64; the extended Gram is checked in _cholesky_evaluator
    tolerance = settings.onb_tolerance_double
    if deviation > tolerance:
        raise OrthonormalityError(k, deviation, tolerance)
    logger.info(
        "Basis assembled",
        measure=m.label(),
        k=k,
        dim=len(indices),
        method=method,
        precision=precision,
        deviation=deviation,
    )
    return PolySpace(m, k, evaluator, method, precision, deviation)


def _cholesky_evaluator(m: Measure, k: int, indices: list[MultiIndex], precision: str) -> MonomialEvaluator:
    dim = len(indices)
    threshold = settings.pivot_threshold
    sums = [[tuple(p + q for p, q in zip(alpha, beta)) for beta in indices] for alpha in indices]
    if precision == "extended":
        ctx = ExtendedContext()
        with ctx.active():
            cache: dict[MultiIndex, mpmath.mpf] = {}
            gram = mpmath.zeros(dim, dim)
            for i in range(dim):
                for j in range(dim):
                    key = sums[i][j]
                    if key not in cache:
                        cache[key] = moment_extended(m, key, ctx)
                    gram[i, j] = cache[key]
            lower = ctx.cholesky_lower(gram, k, threshold)
            inverse = ctx.lower_inverse(lower)
            check = inverse * gram * inverse.T
            deviation = max(abs(check[i, j] - (1 if i == j else 0)) for i in range(dim) for j in range(dim))
            if deviation > settings.onb_tolerance_extended:
                raise OrthonormalityError(k, float(deviation), settings.onb_tolerance_extended)
            coeffs = ctx.to_float(inverse)
        return MonomialEvaluator(indices, coeffs)
    moments: dict[MultiIndex, float] = {}
    gram = np.empty((dim, dim))
    for i in range(dim):
        for j in range(dim):
            key = sums[i][j]
            if key not in moments:
                moments[key] = moment(m, key)
            gram[i, j] = moments[key]
    try:
        lower = cholesky(gram, lower=True)
    except LinAlgError as exc:
        raise GramSingularError(k, 0.0, float(np.max(np.diag(gram)))) from exc
    pivots = np.diag(lower) ** 2
    running = np.maximum.accumulate(pivots)
    bad = np.nonzero(pivots <= threshold * running)[0]
    if bad.size:
        raise GramSingularError(k, float(pivots[bad[0]]), float(running[bad[0]]))
    coeffs = solve_triangular(lower, np.eye(dim), lower=True)
    return MonomialEvaluator(indices, coeffs)


def _recurrence_evaluator(m: Measure, k: int) -> RecurrenceEvaluator:
    if m.kind == "ball":
        return RecurrenceEvaluator(k, m.a)
    if m.kind == "box":
        lo, hi = m.bounds[0]
        return RecurrenceEvaluator(k, 0.5, 0.5 * (lo + hi), 0.5 * (hi - lo))
    return RecurrenceEvaluator(k, 0.5, 0.0, m.semiaxes[0])


def _arnoldi_evaluator(m: Measure, k: int, indices: list[MultiIndex]) -> ArnoldiEvaluator:
    rule = quadrature_rule(m, 2 * k)
    dim = len(indices)
    position = {alpha: i for i, alpha in enumerate(indices)}
    root_w = np.sqrt(rule.weights)
    mass = total_mass(m)
    q = np.empty((rule.size, dim))
    q[:, 0] = root_w / np.sqrt(mass)
    parents = np.zeros(dim, dtype=int)
    axes = np.zeros(dim, dtype=int)
    h = np.zeros((dim, dim))
    for j in range(1, dim):
        alpha = indices[j]
        axis = next(i for i, e in enumerate(alpha) if e > 0)
        parent = position[alpha[:axis] + (alpha[axis] - 1,) + alpha[axis + 1 :]]
        v = rule.nodes[:, axis] * q[:, parent]
        start = np.linalg.norm(v)
        coefficients = np.zeros(j)
        for _ in range(2):
            step = q[:, :j].T @ v
            v = v - q[:, :j] @ step
            coefficients += step
        norm = np.linalg.norm(v)
        if norm <= settings.pivot_threshold * start:
            raise GramSingularError(k, float(norm**2), float(start**2))
        q[:, j] = v / norm
        parents[j], axes[j] = parent, axis
        h[j, :j] = coefficients
        h[j, j] = norm
    return ArnoldiEvaluator(indices, parents, axes, h, mass)


def kernel_eval(ps: PolySpace, x, y) -> float:
    """K_k(x, y) for single points."""
    return float(ps.kernel_matrix(x, y)[0, 0])


def kernel_matrix(ps: PolySpace, xs, ys=None) -> np.ndarray:
    return ps.kernel_matrix(xs, ys)


def christoffel(ps: PolySpace, x) -> tuple[float, float]:
    """(β_k(x), 1 / β_k(x))."""
    beta = float(ps.christoffel_values(x)[0])
    return beta, 1.0 / beta


def basis_matrix(ps: PolySpace, points) -> np.ndarray:
    return ps.basis_matrix(points)


def slice_kernel(ps: PolySpace, j: int, x, y) -> float:
    return float(ps.slice_matrix(j, x, y)[0, 0])


def monomial_labels(indices: Sequence[MultiIndex]) -> list[str]:
    """Column labels such as ``1``, ``x1``, ``x1^2*x2``."""
    labels = []
    for alpha in indices:
        factors = [f"x{i + 1}" if e == 1 else f"x{i + 1}^{e}" for i, e in enumerate(alpha) if e > 0]
        labels.append("*".join(factors) if factors else "1")
    return labels


def export_coefficients(ps: PolySpace) -> tuple[list[str], np.ndarray]:
    """Graded-lex header and coefficient matrix (row j = φ_j)."""
    return monomial_labels(ps.indices), np.array(ps.coeffs)


def reproduction_residual(ps: PolySpace, count: int = 20, seed: Optional[int] = None) -> float:
    """max |∫ K_k(x, ·) p dμ - p(x)| / ‖p‖ over random p ∈ P_k and random x."""
    rng = np.random.default_rng(settings.default_seed if seed is None else seed)
    c = rng.standard_normal((ps.dim, count))
    c /= np.linalg.norm(c, axis=0, keepdims=True)
    x = sample_points(ps.measure, count, rng)
    rule = quadrature_rule(ps.measure, 2 * ps.k)
    phi_nodes = ps.basis_matrix(rule.nodes, check=False)
    phi_x = ps.basis_matrix(x, check=False)
    kernel = phi_x @ phi_nodes.T
    reproduced = kernel @ (rule.weights[:, None] * (phi_nodes @ c))
    return float(np.max(np.abs(reproduced - phi_x @ c)))


def diagonal_estimate_ratio(
    m: Measure,
    ks: Sequence[int],
    grid,
    precision: Optional[str] = None,
    method: Optional[str] = None,
) -> DiagonalEstimateTable:
    """Table of β_k(x) / min(k^n / d(x)^a_eff, k^(n + 2 a_eff)) over a grid of interior points.

    k = 0 uses k = 1 in the model so the ratio stays finite.
    """
    grid = check_in_domain(m, grid, what="grid point")
    distances = geometry.boundary_distances(m, grid)
    if np.any(distances <= 0):
        raise DomainError("diagonal estimate grid must lie in the open domain")
    a_eff = m.weight_exponent
    ks = sorted(set(int(k) for k in ks))
    space = orthonormal_basis(m, max(ks), precision, method)
    phi = space.basis_matrix(grid)
    squares = np.cumsum(phi**2, axis=1)
    corners = _near_corner(m, grid)
    rows: list[DiagonalRow] = []
    summaries: list[DiagonalSummary] = []
    for k in ks:
        beta = squares[:, space.level_dimension(k) - 1]
        scale = float(max(k, 1))
        model = np.minimum(scale**m.n / distances**a_eff, scale ** (m.n + 2 * a_eff))
        ratio = beta / model
        rows.extend(
            DiagonalRow(
                k=k,
                x=tuple(float(v) for v in grid[i]),
                beta=float(beta[i]),
                model=float(model[i]),
                ratio=float(ratio[i]),
                near_corner=bool(corners[i]),
            )
            for i in range(grid.shape[0])
        )
        lo, hi = float(np.min(ratio)), float(np.max(ratio))
        summaries.append(DiagonalSummary(k=k, min_ratio=lo, max_ratio=hi, spread=hi / lo))
    return DiagonalEstimateTable(measure=m, a_eff=a_eff, rows=rows, summaries=summaries)


def _near_corner(m: Measure, grid: np.ndarray, margin: float = 0.1) -> np.ndarray:
    """Box points close to two faces at once (relative to the half widths)."""
    if m.kind != "box" or m.n < 2:
        return np.zeros(grid.shape[0], dtype=bool)
    gaps = np.sort(1.0 - np.abs(to_reference(m, grid)), axis=1)
    return gaps[:, 1] < margin
