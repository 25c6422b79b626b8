"""
Admissible measures: exact monomial moments, quadrature rules and sampling.

Ball rules are products of a radial Gauss-Jacobi rule and a centrally
symmetric sphere rule (trapezoid in azimuth, Gauss in the polar angles), box
rules are tensor Gauss-Legendre, ellipsoid rules are the affine image of the
Lebesgue ball rule. A rule built for ``degree`` d integrates every polynomial
of total degree at most d exactly.
"""
import threading
from typing import Callable, Optional, Sequence

import numpy as np
from pydantic import Field
from scipy.special import comb, gammaln, roots_jacobi

from mzkit.core.config import settings
from mzkit.core.errors import DegreeTooLargeError, DomainError, InputError, OrderTooLargeError
from mzkit.core.logging import get_logger
from mzkit.infrastructure.precision import ExtendedContext
from mzkit.models.base import BaseRecord, PointArray, VectorArray
from mzkit.models.measure import Measure, MultiIndex
from mzkit.services.gegenbauer import gauss_nodes_1d

logger = get_logger(__name__)

DOMAIN_TOLERANCE = 1e-12


class QuadratureRule(BaseRecord):
    """Nodes and positive weights integrating P_degree exactly against a measure."""

    nodes: PointArray
    weights: VectorArray
    degree: int = Field(..., ge=0)

    @property
    def size(self) -> int:
        return int(self.weights.shape[0])


def enumerate_multiindices(n: int, k: int) -> list[MultiIndex]:
    """All exponent tuples of total degree <= k in graded-lex order.

    Degrees ascend; within a degree the tuples descend lexicographically, so
    for n=2 the order is 1, x1, x2, x1^2, x1 x2, x2^2, ...
    """
    if n < 1 or k < 0:
        raise InputError("enumeration needs n >= 1 and k >= 0", n=n, k=k)

    def compositions(total: int, parts: int):
        if parts == 1:
            yield (total,)
            return
        for first in range(total, -1, -1):
            for rest in compositions(total - first, parts - 1):
                yield (first,) + rest

    return [alpha for degree in range(k + 1) for alpha in compositions(degree, n)]


def space_dimension(n: int, k: int) -> int:
    """dim P_k = C(n + k, n)."""
    return int(comb(n + k, n, exact=True))


def moment(m: Measure, alpha: MultiIndex) -> float:
    """Exact value of the integral of x^alpha against m."""
    alpha = tuple(int(e) for e in alpha)
    if len(alpha) != m.n:
        raise InputError(f"multi-index of length {len(alpha)} for a measure in dimension {m.n}")
    if m.kind == "box":
        value = 1.0
        for (lo, hi), e in zip(m.bounds, alpha):
            value *= (hi ** (e + 1) - lo ** (e + 1)) / (e + 1)
        if not np.isfinite(value):
            raise DegreeTooLargeError(sum(alpha), settings.cap_for(settings.degree_cap, m.n), what="moment degree")
        return float(value)
    if any(e % 2 for e in alpha):
        return 0.0
    if m.kind == "ball":
        log_value = _log_ball_moment(alpha, m.a)
    else:
        log_value = _log_ball_moment(alpha, 0.5)
        log_value += sum((e + 1) * np.log(s) for s, e in zip(m.semiaxes, alpha))
    value = np.exp(log_value)
    if not np.isfinite(value):
        raise DegreeTooLargeError(sum(alpha), settings.cap_for(settings.degree_cap, m.n), what="moment degree")
    return float(value)


def _log_ball_moment(alpha: Sequence[int], a: float) -> float:
    halves = [0.5 * (e + 1) for e in alpha]
    return float(sum(gammaln(h) for h in halves) + gammaln(a + 0.5) - gammaln(sum(halves) + a + 0.5))


def moment_extended(m: Measure, alpha: MultiIndex, ctx: ExtendedContext):
    """Moment as an mpmath number; call inside ``ctx.active()``."""
    if m.kind == "ball":
        return ctx.ball_moment(m.n, m.a, alpha)
    if m.kind == "box":
        return ctx.box_moment(m.bounds, alpha)
    return ctx.ellipsoid_moment(m.semiaxes, alpha)


def total_mass(m: Measure) -> float:
    return moment(m, (0,) * m.n)


_rules: dict[tuple[Measure, int], QuadratureRule] = {}
_rules_lock = threading.Lock()


def quadrature_rule(m: Measure, degree: int) -> QuadratureRule:
    """Cached rule exact for total degree ``degree``; built once per (measure, degree)."""
    degree = max(int(degree), 0)
    key = (m, degree)
    rule = _rules.get(key)
    if rule is not None:
        return rule
    with _rules_lock:
        rule = _rules.get(key)
        if rule is None:
            count = rule_size(m, degree)
            if count > settings.quadrature_node_cap:
                raise OrderTooLargeError(count, settings.quadrature_node_cap)
            nodes, weights = _build_rule(m, degree)
            rule = QuadratureRule(nodes=nodes, weights=weights, degree=degree)
            rule.nodes.setflags(write=False)
            rule.weights.setflags(write=False)
            _rules[key] = rule
            logger.debug("Quadrature rule built", measure=m.label(), degree=degree, nodes=count)
    return rule


def rule_size(m: Measure, degree: int) -> int:
    per_axis = degree // 2 + 1
    if m.kind == "box":
        return per_axis**m.n
    if m.n == 1:
        return per_axis
    return (degree // 4 + 1) * _sphere_size(m.n, degree)


def _sphere_size(ambient: int, degree: int) -> int:
    return 2 * (degree // 2 + 1) * (degree // 2 + 1) ** (ambient - 2)


def _build_rule(m: Measure, degree: int) -> tuple[np.ndarray, np.ndarray]:
    if m.kind == "box":
        axes, axis_weights = [], []
        base_nodes, base_weights = np.polynomial.legendre.leggauss(degree // 2 + 1)
        for lo, hi in m.bounds:
            half = 0.5 * (hi - lo)
            axes.append(0.5 * (hi + lo) + half * base_nodes)
            axis_weights.append(half * base_weights)
        nodes = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, m.n)
        weights = np.prod(np.stack(np.meshgrid(*axis_weights, indexing="ij"), axis=-1).reshape(-1, m.n), axis=1)
        return nodes, weights
    a = m.a if m.kind == "ball" else 0.5
    nodes, weights = _ball_rule(m.n, a, degree)
    if m.kind == "ellipsoid":
        semiaxes = np.asarray(m.semiaxes)
        nodes = nodes * semiaxes
        weights = weights * float(np.prod(semiaxes))
    return nodes, weights


def _ball_rule(n: int, a: float, degree: int) -> tuple[np.ndarray, np.ndarray]:
    if n == 1:
        nodes, weights = gauss_nodes_1d(degree // 2 + 1, a)
        return nodes.reshape(-1, 1), weights
    # t = 2 r^2 - 1 turns the radial weight into a Jacobi weight
    t, wt = roots_jacobi(degree // 4 + 1, a - 0.5, 0.5 * (n - 2))
    radii = np.sqrt(0.5 * (1.0 + t))
    radial_weights = wt * 2.0 ** (-(a - 0.5) - 0.5 * (n - 2) - 2.0)
    directions, sphere_weights = sphere_rule(n, degree)
    nodes = (radii[:, None, None] * directions[None, :, :]).reshape(-1, n)
    weights = (radial_weights[:, None] * sphere_weights[None, :]).reshape(-1)
    return nodes, weights


def sphere_rule(ambient: int, degree: int) -> tuple[np.ndarray, np.ndarray]:
    """Centrally symmetric rule on the unit sphere of R^ambient, exact to ``degree``."""
    if ambient == 2:
        count = 2 * (degree // 2 + 1)
        theta = 2.0 * np.pi * np.arange(count) / count
        return np.column_stack([np.cos(theta), np.sin(theta)]), np.full(count, 2.0 * np.pi / count)
    # first coordinate z carries the weight (1 - z^2)^((ambient - 3) / 2)
    z, wz = gauss_nodes_1d(degree // 2 + 1, 0.5 * (ambient - 2))
    inner, inner_weights = sphere_rule(ambient - 1, degree)
    scale = np.sqrt(np.clip(1.0 - z**2, 0.0, None))
    first = np.repeat(z, inner.shape[0])[:, None]
    rest = (scale[:, None, None] * inner[None, :, :]).reshape(-1, ambient - 1)
    weights = (wz[:, None] * inner_weights[None, :]).reshape(-1)
    return np.hstack([first, rest]), weights


def integrate(m: Measure, f: Callable[[np.ndarray], np.ndarray], order: int) -> float:
    """Integral of f against m with a rule exact to degree ``order``.

    ``f`` receives the node matrix (one row per node) and returns one value per node.
    """
    if order < 1:
        raise InputError("quadrature order must be at least 1", order=order)
    rule = quadrature_rule(m, order)
    values = np.asarray(f(rule.nodes), dtype=float).reshape(-1)
    return float(np.dot(rule.weights, values))


def as_points(points, n: int) -> np.ndarray:
    """Coerce a point or a list of points into an (N, n) float matrix."""
    arr = np.asarray(points, dtype=float)
    if arr.ndim == 0:
        arr = arr.reshape(1, 1)
    elif arr.ndim == 1:
        arr = arr.reshape(-1, 1) if n == 1 else arr.reshape(1, -1)
    if arr.ndim != 2 or arr.shape[1] != n:
        raise InputError(f"points of shape {arr.shape} do not live in dimension {n}")
    return arr


def to_reference(m: Measure, points: np.ndarray) -> np.ndarray:
    """Affine map onto the unit ball (ellipsoid) or the cube [-1, 1]^n (box)."""
    points = as_points(points, m.n)
    if m.kind == "ellipsoid":
        return points / np.asarray(m.semiaxes)
    if m.kind == "box":
        bounds = np.asarray(m.bounds)
        return (2.0 * points - (bounds[:, 0] + bounds[:, 1])) / (bounds[:, 1] - bounds[:, 0])
    return points


def from_reference(m: Measure, points: np.ndarray) -> np.ndarray:
    points = as_points(points, m.n)
    if m.kind == "ellipsoid":
        return points * np.asarray(m.semiaxes)
    if m.kind == "box":
        bounds = np.asarray(m.bounds)
        return 0.5 * (points * (bounds[:, 1] - bounds[:, 0]) + (bounds[:, 0] + bounds[:, 1]))
    return points


def contains(m: Measure, points, tol: float = DOMAIN_TOLERANCE) -> np.ndarray:
    """Boolean mask of points lying in the closed domain."""
    ref = to_reference(m, points)
    if m.kind == "box":
        return np.all(np.abs(ref) <= 1.0 + tol, axis=1)
    return np.einsum("ij,ij->i", ref, ref) <= 1.0 + tol


def check_in_domain(m: Measure, points, what: str = "point") -> np.ndarray:
    points = as_points(points, m.n)
    inside = contains(m, points)
    if not np.all(inside):
        first = int(np.argmin(inside))
        raise DomainError(
            f"{what} outside the closed domain of {m.label()}",
            index=first,
            point=points[first].tolist(),
        )
    return points


def sample_points(m: Measure, count: int, rng: Optional[np.random.Generator] = None) -> np.ndarray:
    """Points uniform with respect to Lebesgue measure on the domain."""
    rng = rng if rng is not None else np.random.default_rng(settings.default_seed)
    if m.kind == "box":
        return from_reference(m, rng.uniform(-1.0, 1.0, size=(count, m.n)))
    directions = rng.standard_normal((count, m.n))
    directions /= np.linalg.norm(directions, axis=1, keepdims=True)
    radii = rng.uniform(0.0, 1.0, size=count) ** (1.0 / m.n)
    return from_reference(m, directions * radii[:, None])


def interior_grid(m: Measure, count: int = 50, margin: float = 0.98) -> np.ndarray:
    """``count`` points per axis on [-margin, margin]^n in reference coordinates, kept inside the domain.

    For n = 1 this is linspace(-margin, margin, count) mapped to the domain.
    """
    if count < 1:
        raise InputError("grid needs at least one point per axis", count=count)
    if not 0 < margin < 1:
        raise InputError("grid margin must lie in (0, 1)", margin=margin)
    line = np.linspace(-margin, margin, count)
    grid = np.stack(np.meshgrid(*([line] * m.n), indexing="ij"), axis=-1).reshape(-1, m.n)
    if m.kind != "box":
        grid = grid[np.einsum("ij,ij->i", grid, grid) <= margin**2]
    return from_reference(m, grid)
