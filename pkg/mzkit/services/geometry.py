"""
Anisotropic distance, metric-ball volumes, boundary distances and
equilibrium masses.

A point x of the unit ball is lifted to the upper hemisphere as
(x, sqrt(1 - |x|^2)); ρ is the geodesic distance of the lifts. Ellipsoids are
pulled back to the ball. Boxes use the box-proxy quasi-metric: the largest
one-dimensional arcsine distance over the axes of the normalized cube.
The equilibrium measure of the ball is the projection of the hemisphere
surface measure. On boxes and ellipsoids masses are taken under the density
1/sqrt(d(x, ∂Ω)) normalized numerically, a comparability-grade stand-in; the
closed-form laws (affine image of the ball law, product of edge arcsine laws)
remain available through ``exact_equilibrium_mass``.
"""
import threading
from typing import Optional

import numpy as np
from scipy.linalg import null_space
from scipy.special import beta as beta_function
from scipy.special import betainc

from mzkit.core.config import settings
from mzkit.core.errors import DomainError, InputError, NetTooLargeError, RegionOutsideDomainError
from mzkit.core.logging import get_logger
from mzkit.models.measure import Measure, MetricBall
from mzkit.services.measures import (
    as_points,
    check_in_domain,
    from_reference,
    sphere_rule,
    to_reference,
)

logger = get_logger(__name__)

RADIAL_NODES = 96
TANGENT_DEGREE = {2: 800, 3: 160}
COMPARABILITY_RADIAL_NODES = 64
COMPARABILITY_DEGREE = {2: 240, 3: 48}
BOX_AXIS_NODES = {2: 128, 3: 40}


def _lift_height(points: np.ndarray) -> np.ndarray:
    return np.sqrt(np.clip(1.0 - np.einsum("ij,ij->i", points, points), 0.0, None))


def rho_matrix(xs, ys) -> np.ndarray:
    """ρ between every row of xs and every row of ys (points of the closed unit ball)."""
    xs = np.atleast_2d(np.asarray(xs, dtype=float))
    ys = np.atleast_2d(np.asarray(ys, dtype=float))
    inner = xs @ ys.T + np.outer(_lift_height(xs), _lift_height(ys))
    return np.arccos(np.clip(inner, -1.0, 1.0))


def rho(x, y) -> float:
    """arccos(<x, y> + sqrt(1 - |x|^2) sqrt(1 - |y|^2))."""
    x = np.asarray(x, dtype=float).reshape(1, -1)
    y = np.asarray(y, dtype=float).reshape(1, -1)
    if x.shape != y.shape:
        raise InputError("points of different dimensions")
    if np.dot(x[0], x[0]) > 1.0 + 1e-12 or np.dot(y[0], y[0]) > 1.0 + 1e-12:
        raise DomainError("ρ is defined on the closed unit ball")
    return float(rho_matrix(x, y)[0, 0])


def _axis_angles(reference: np.ndarray) -> np.ndarray:
    return np.arcsin(np.clip(reference, -1.0, 1.0))


def distance_matrix(m: Measure, xs, ys) -> np.ndarray:
    """Domain distance: ρ (ball), ρ of the pullbacks (ellipsoid), box-proxy quasi-metric (box)."""
    xs = to_reference(m, xs)
    ys = to_reference(m, ys)
    if m.kind == "box":
        tx, ty = _axis_angles(xs), _axis_angles(ys)
        return np.max(np.abs(tx[:, None, :] - ty[None, :, :]), axis=2)
    return rho_matrix(xs, ys)


def distance(m: Measure, x, y) -> float:
    return float(distance_matrix(m, x, y)[0, 0])


def pairwise_distances(m: Measure, points) -> np.ndarray:
    return distance_matrix(m, points, points)


def metric_embedding(m: Measure, points) -> tuple[np.ndarray, float]:
    """Coordinates and Minkowski exponent p in which the domain distance is increasing.

    Ball and ellipsoid: hemisphere lifts, chord c and ρ = 2 arcsin(c / 2).
    Box: axis angles under the max norm, which is the box-proxy distance itself.
    """
    ref = to_reference(m, points)
    if m.kind == "box":
        return _axis_angles(ref), np.inf
    return np.column_stack([ref, _lift_height(ref)]), 2.0


def embedded_to_distance(m: Measure, d):
    """Domain distance from the embedded Minkowski distance."""
    if m.kind == "box":
        return d
    return 2.0 * np.arcsin(np.clip(np.asarray(d, dtype=float) / 2.0, 0.0, 1.0))


def metric_ball_volumes(m: Measure, centers, eps: float) -> tuple[np.ndarray, np.ndarray]:
    """Proxy volumes (Lebesgue, weighted) of the metric balls of radius eps around each center.

    Ball: eps^n (sqrt(1 - |x|^2) + eps) and eps^n (sqrt(1 - |x|^2) + eps)^(2a).
    Ellipsoid: the Lebesgue ball proxy of the pullback times the Jacobian.
    Box: product over the axes of the one-dimensional proxy times the half widths.
    """
    if not 0 < eps <= np.pi:
        raise InputError("metric ball radius must lie in (0, pi]", eps=eps)
    ref = to_reference(m, check_in_domain(m, centers))
    if m.kind == "box":
        half = 0.5 * np.diff(np.asarray(m.bounds), axis=1).reshape(-1)
        volume = np.prod(half * eps * (np.sqrt(np.clip(1.0 - ref**2, 0.0, None)) + eps), axis=1)
        return volume, volume
    height = _lift_height(ref)
    lebesgue = eps**m.n * (height + eps)
    if m.kind == "ellipsoid":
        lebesgue = lebesgue * float(np.prod(m.semiaxes))
        return lebesgue, lebesgue
    return lebesgue, eps**m.n * (height + eps) ** (2.0 * m.a)


def metric_ball_volume(m: Measure, x, eps: float) -> tuple[float, float]:
    """Proxy volumes (Lebesgue, weighted) of the metric ball of radius eps around x."""
    lebesgue, weighted = metric_ball_volumes(m, x, eps)
    return float(lebesgue[0]), float(weighted[0])


def metric_ball_volume_mc(
    m: Measure, x, eps: float, samples: int = 20_000, seed: Optional[int] = None
) -> tuple[float, float]:
    """Seeded Monte-Carlo (Lebesgue, weighted) volumes of the metric ball.

    Samples the cube of half width eps around the pullback, which contains the
    ρ-ball because ρ dominates the Euclidean distance. Box balls are products of
    arcs and are returned exactly.
    """
    x = check_in_domain(m, x)
    ref = to_reference(m, x)[0]
    if m.kind == "box":
        theta = _axis_angles(ref)
        lengths = np.sin(np.minimum(theta + eps, np.pi / 2)) - np.sin(np.maximum(theta - eps, -np.pi / 2))
        half = 0.5 * np.diff(np.asarray(m.bounds), axis=1).reshape(-1)
        volume = float(np.prod(half * lengths))
        return volume, volume
    rng = np.random.default_rng(settings.default_seed if seed is None else seed)
    side = min(eps, 2.0)
    cloud = ref + rng.uniform(-side, side, size=(samples, m.n))
    norms = np.einsum("ij,ij->i", cloud, cloud)
    inside = norms <= 1.0
    inside[inside] = rho_matrix(ref.reshape(1, -1), cloud[inside])[0] < eps
    cube = (2.0 * side) ** m.n
    lebesgue = cube * float(np.mean(inside))
    if m.kind == "ellipsoid":
        jacobian = float(np.prod(m.semiaxes))
        return lebesgue * jacobian, lebesgue * jacobian
    weights = np.zeros(samples)
    weights[inside] = (1.0 - norms[inside]) ** (m.a - 0.5)
    return lebesgue, cube * float(np.mean(weights))


def boundary_distances(m: Measure, points) -> np.ndarray:
    """Euclidean distance to the boundary for every row (points in the closed domain)."""
    return _boundary_distances(m, check_in_domain(m, points))


def _boundary_distances(m: Measure, points: np.ndarray) -> np.ndarray:
    if m.kind == "ball":
        return np.clip(1.0 - np.linalg.norm(points, axis=1), 0.0, None)
    if m.kind == "box":
        bounds = np.asarray(m.bounds)
        margins = np.minimum(points - bounds[:, 0], bounds[:, 1] - points)
        return np.clip(np.min(margins, axis=1), 0.0, None)
    return _ellipsoid_boundary_distances(np.asarray(m.semiaxes), points)


def _ellipsoid_boundary_distances(s: np.ndarray, points: np.ndarray, tol: float = 1e-10) -> np.ndarray:
    """Row-wise version of _ellipsoid_boundary_distance; Newton steps run on all rows at once."""
    s2 = s**2
    smallest = float(np.min(s2))
    on_min_axes = np.isclose(s2, smallest)
    out = np.zeros(points.shape[0])
    inside = np.sum((points / s) ** 2, axis=1) < 1.0
    special = inside & np.all(np.abs(points[:, on_min_axes]) <= 1e-14 * np.max(s), axis=1)
    for i in np.flatnonzero(special):
        out[i] = _ellipsoid_boundary_distance(s, points[i], tol)
    regular = inside & ~special
    x = points[regular]
    if x.shape[0] == 0:
        return out
    lo = np.full(x.shape[0], -smallest)
    hi = np.zeros(x.shape[0])
    t = np.zeros(x.shape[0])
    for _ in range(200):
        shifted = s2 + t[:, None]
        value = np.sum((s * x / shifted) ** 2, axis=1) - 1.0
        positive = value > 0
        lo = np.where(positive, t, lo)
        hi = np.where(positive, hi, t)
        slope = -2.0 * np.sum(s2 * x**2 / shifted**3, axis=1)
        with np.errstate(divide="ignore", invalid="ignore"):
            candidate = t - value / slope
        bracketed = (lo < candidate) & (candidate < hi)
        candidate = np.where(bracketed, candidate, 0.5 * (lo + hi))
        done = np.abs(candidate - t) <= tol * 1e-4 * (smallest + np.abs(t))
        t = candidate
        if np.all(done):
            break
    nearest = s2 * x / (s2 + t[:, None])
    out[regular] = np.linalg.norm(nearest - x, axis=1)
    return out


def boundary_distance(m: Measure, x) -> float:
    return float(boundary_distances(m, x)[0])


def _ellipsoid_boundary_distance(s: np.ndarray, x: np.ndarray, tol: float = 1e-10) -> float:
    """Distance from an interior point to the ellipsoid sum (y_i / s_i)^2 = 1.

    The nearest point is y_i = s_i^2 x_i / (s_i^2 + t) with t in (-min s^2, 0]
    solving F(t) = sum (s_i x_i / (s_i^2 + t))^2 - 1 = 0; safeguarded Newton.
    """
    s2 = s**2
    if np.sum((x / s) ** 2) >= 1.0:
        return 0.0
    smallest = float(np.min(s2))
    on_min_axes = np.isclose(s2, smallest)
    if np.all(np.abs(x[on_min_axes]) <= 1e-14 * np.max(s)):
        # the normal equation may have no root: the nearest point then sits at t = -min s^2
        others = ~on_min_axes
        y_others = s2[others] * x[others] / (s2[others] - smallest)
        spent = float(np.sum((y_others / s[others]) ** 2))
        if spent <= 1.0:
            return float(np.sqrt(np.sum((y_others - x[others]) ** 2) + smallest * (1.0 - spent)))

    def f(t: float) -> float:
        return float(np.sum((s * x / (s2 + t)) ** 2) - 1.0)

    def df(t: float) -> float:
        return float(-2.0 * np.sum(s2 * x**2 / (s2 + t) ** 3))

    lo, hi = -smallest, 0.0
    t = 0.0
    for _ in range(200):
        value = f(t)
        if value > 0:
            lo = t
        else:
            hi = t
        slope = df(t)
        step = value / slope if slope != 0 else 0.0
        candidate = t - step
        if not lo < candidate < hi:
            candidate = 0.5 * (lo + hi)
        if abs(candidate - t) <= tol * 1e-4 * (smallest + abs(t)):
            t = candidate
            break
        t = candidate
    nearest = s2 * x / (s2 + t)
    return float(np.linalg.norm(nearest - x))


def equilibrium_grade(m: Measure) -> str:
    """``exact`` on the ball; ``comparability`` where the 1/sqrt(d) density stands in."""
    return "exact" if m.kind == "ball" else "comparability"


def _region_center(m: Measure, region: MetricBall) -> np.ndarray:
    center = check_in_domain(m, np.asarray(region.center, dtype=float), what="region center")[0]
    if region.metric == "euclidean" and region.radius > boundary_distance(m, center) + 1e-12:
        raise RegionOutsideDomainError("region outside domain", center=list(region.center), radius=region.radius)
    if region.metric == "box_proxy" and m.kind != "box":
        raise InputError("box-proxy regions need a box domain")
    return center


def _angle_window(m: Measure, center: np.ndarray, radius: float) -> tuple[np.ndarray, np.ndarray]:
    theta = _axis_angles(to_reference(m, center)[0])
    return np.maximum(theta - radius, -np.pi / 2), np.minimum(theta + radius, np.pi / 2)


def equilibrium_mass(m: Measure, region: MetricBall) -> float:
    """Normalized equilibrium mass of a Euclidean or metric ball inside the domain.

    Exact on the ball. On boxes and ellipsoids the mass is taken under the
    density 1/sqrt(d(x, ∂Ω)), normalized numerically to a probability measure
    (see ``equilibrium_grade``).
    """
    if m.kind == "ball":
        return exact_equilibrium_mass(m, region)
    center = _region_center(m, region)
    if m.n == 1:
        return _interval_density_mass(m, *_region_interval(m, center, region))
    if region.metric == "euclidean":
        part = _polar_density_integral(m, center, region.radius)
    elif m.kind == "box":
        part = _box_angle_integral(m, *_angle_window(m, center, region.radius))
    else:
        part = _cap_density_integral(m, to_reference(m, center)[0], region.radius)
    return float(np.clip(part / _density_total(m), 0.0, 1.0))


def exact_equilibrium_mass(m: Measure, region: MetricBall) -> float:
    """Mass under the closed-form law: hemisphere projection on the ball, its
    affine image on an ellipsoid, the product of edge arcsine laws on a box."""
    center = _region_center(m, region)
    if region.metric == "euclidean":
        return _euclidean_region_mass(m, center, region.radius)
    if m.kind == "box":
        lo, hi = _angle_window(m, center, region.radius)
        return float(np.prod((hi - lo) / np.pi))
    return _cap_mass(to_reference(m, center)[0], region.radius)


def _interval(m: Measure) -> tuple[float, float]:
    """Midpoint and half-length of a one-dimensional box or ellipsoid."""
    if m.kind == "box":
        lo, hi = m.bounds[0]
        return 0.5 * (lo + hi), 0.5 * (hi - lo)
    return 0.0, float(m.semiaxes[0])


def _region_interval(m: Measure, center: np.ndarray, region: MetricBall) -> tuple[float, float]:
    if region.metric == "euclidean":
        return float(center[0] - region.radius), float(center[0] + region.radius)
    mid, half = _interval(m)
    lo, hi = _angle_window(m, center, region.radius)
    return mid + half * float(np.sin(lo[0])), mid + half * float(np.sin(hi[0]))


def _interval_density_mass(m: Measure, lo: float, hi: float) -> float:
    """Closed form of the normalized density (h - |x - mid|)^(-1/2) on [mid - h, mid + h]."""
    mid, half = _interval(m)

    def cdf(x: float) -> float:
        u = float(np.clip(x - mid, -half, half))
        if u <= 0:
            return float(np.sqrt(u + half) / (2.0 * np.sqrt(half)))
        return float(1.0 - np.sqrt(half - u) / (2.0 * np.sqrt(half)))

    return float(np.clip(cdf(hi) - cdf(lo), 0.0, 1.0))


def _box_angle_integral(m: Measure, lo: np.ndarray, hi: np.ndarray) -> float:
    """Integral of d^(-1/2) over the sub-box x_i = mid_i + h_i sin(θ_i), lo_i <= θ_i <= hi_i.

    The Jacobian prod h_i cos(θ_i) cancels the boundary singularity.
    """
    bounds = np.asarray(m.bounds)
    mid = 0.5 * (bounds[:, 0] + bounds[:, 1])
    half = 0.5 * (bounds[:, 1] - bounds[:, 0])
    nodes, gl_weights = np.polynomial.legendre.leggauss(BOX_AXIS_NODES.get(m.n, 12))
    axes = [0.5 * (b + a) + 0.5 * (b - a) * nodes for a, b in zip(lo, hi)]
    axis_weights = [0.5 * (b - a) * gl_weights for a, b in zip(lo, hi)]
    theta = np.stack([grid.ravel() for grid in np.meshgrid(*axes, indexing="ij")], axis=1)
    weights = np.prod(np.stack([grid.ravel() for grid in np.meshgrid(*axis_weights, indexing="ij")], axis=1), axis=1)
    margins = half * (1.0 - np.abs(np.sin(theta)))
    jacobian = np.prod(half * np.cos(theta), axis=1)
    integrand = jacobian / np.sqrt(np.clip(np.min(margins, axis=1), 1e-300, None))
    return float(np.dot(weights, integrand))


def _cap_density_integral(m: Measure, x: np.ndarray, eps: float) -> float:
    """Integral of d^(-1/2) over the pulled-back ρ-ball of an ellipsoid.

    Geodesic polar coordinates on the hemisphere; dy = h dσ with h the lift height,
    which cancels the boundary singularity.
    """
    n = x.shape[0]
    s = np.asarray(m.semiaxes)
    lift = np.append(x, np.sqrt(max(1.0 - float(np.dot(x, x)), 0.0)))
    tangent = null_space(lift.reshape(1, -1))
    directions, weights = sphere_rule(n, COMPARABILITY_DEGREE.get(n, 24))
    exits = np.pi / 2 + np.arctan2(directions @ tangent[-1, :], lift[-1])
    limits = np.minimum(min(eps, np.pi), exits)
    nodes, gl_weights = np.polynomial.legendre.leggauss(COMPARABILITY_RADIAL_NODES)
    geodesic = 0.5 * limits[:, None] * (nodes + 1.0)
    tangents = directions @ tangent.T
    lifted = np.cos(geodesic)[..., None] * lift + np.sin(geodesic)[..., None] * tangents[:, None, :]
    height = np.clip(lifted[..., n], 0.0, None)
    ambient = (lifted[..., :n] * s).reshape(-1, n)
    d = _ellipsoid_boundary_distances(s, ambient).reshape(geodesic.shape)
    integrand = height * np.sin(geodesic) ** (n - 1) / np.sqrt(np.clip(d, 1e-300, None))
    radial = 0.5 * limits * (integrand @ gl_weights)
    return float(np.prod(s) * np.dot(weights, radial))


def _polar_density_integral(m: Measure, center: np.ndarray, radius: float) -> float:
    """Integral of d^(-1/2) over a Euclidean ball inside the domain."""
    n = m.n
    directions, weights = sphere_rule(n, COMPARABILITY_DEGREE.get(n, 24))
    nodes, gl_weights = np.polynomial.legendre.leggauss(COMPARABILITY_RADIAL_NODES)
    t = 0.5 * radius * (nodes + 1.0)
    points = center + t[None, :, None] * directions[:, None, :]
    d = _boundary_distances(m, points.reshape(-1, n)).reshape(points.shape[:2])
    integrand = t ** (n - 1) / np.sqrt(np.clip(d, 1e-300, None))
    return float(np.dot(weights, 0.5 * radius * (integrand @ gl_weights)))


_totals: dict[Measure, float] = {}
_totals_lock = threading.Lock()


def _density_total(m: Measure) -> float:
    """Integral of d^(-1/2) over the whole box or ellipsoid; cached per measure."""
    with _totals_lock:
        if m not in _totals:
            if m.kind == "box":
                full = np.full(m.n, np.pi / 2)
                _totals[m] = _box_angle_integral(m, -full, full)
            else:
                _totals[m] = _cap_density_integral(m, np.zeros(m.n), np.pi)
            logger.debug("Density normalization computed", kind=m.kind, n=m.n, total=_totals[m])
        return _totals[m]


def _sin_power_integral(n: int, c: float) -> float:
    """Integral of sin(s)^(n - 1) over [0, c], 0 <= c <= pi."""
    half = 0.5 * beta_function(0.5 * n, 0.5) * betainc(0.5 * n, 0.5, np.sin(min(c, np.pi / 2)) ** 2)
    if c <= np.pi / 2:
        return float(half)
    full = beta_function(0.5 * n, 0.5)
    return float(full - 0.5 * full * betainc(0.5 * n, 0.5, np.sin(c) ** 2))


def _cap_mass(x: np.ndarray, eps: float) -> float:
    """Hemisphere-normalized area of the ρ-ball of radius eps around x."""
    n = x.shape[0]
    eps = min(eps, np.pi)
    if n == 1:
        theta = float(np.arcsin(np.clip(x[0], -1.0, 1.0)))
        return float((min(theta + eps, np.pi / 2) - max(theta - eps, -np.pi / 2)) / np.pi)
    lift = np.append(x, np.sqrt(max(1.0 - float(np.dot(x, x)), 0.0)))
    tangent = null_space(lift.reshape(1, -1))
    directions, weights = sphere_rule(n, TANGENT_DEGREE.get(n, 60))
    heights = directions @ tangent[-1, :]
    # the geodesic leaves the closed upper hemisphere at s = π/2 + atan2(U_z, X_z)
    exits = np.pi / 2 + np.arctan2(heights, lift[-1])
    limits = np.minimum(eps, exits)
    radial = np.array([_sin_power_integral(n, c) for c in limits])
    mean = float(np.dot(weights, radial) / np.sum(weights))
    return float(np.clip(2.0 * mean / beta_function(0.5 * n, 0.5), 0.0, 1.0))


def _euclidean_region_mass(m: Measure, center: np.ndarray, radius: float) -> float:
    n = m.n
    if m.kind == "box":
        return _box_region_mass(m, center, radius)
    s = np.ones(n) if m.kind == "ball" else np.asarray(m.semiaxes)
    c = center / s
    if n == 1:
        lo = np.clip((center[0] - radius) / s[0], -1.0, 1.0)
        hi = np.clip((center[0] + radius) / s[0], -1.0, 1.0)
        return float((np.arcsin(hi) - np.arcsin(lo)) / np.pi)
    if m.kind == "ball" and np.allclose(center, 0.0, atol=1e-15):
        return float(betainc(0.5 * n, 0.5, min(radius, 1.0) ** 2))
    directions, weights = sphere_rule(n, TANGENT_DEGREE.get(n, 60))
    nodes, gl_weights = np.polynomial.legendre.leggauss(RADIAL_NODES)
    q = 1.0 - float(np.dot(c, c))
    total = 0.0
    for omega, weight in zip(directions, weights):
        scaled = omega / s
        w = float(np.dot(scaled, scaled))
        p = float(np.dot(c, scaled))
        root = np.sqrt(p * p + q * w)
        t_plus, t_minus = (-p + root) / w, (-p - root) / w
        # t = t_plus - u^2 removes the square-root singularity at the boundary
        u_lo, u_hi = np.sqrt(max(t_plus - radius, 0.0)), np.sqrt(max(t_plus, 0.0))
        u = 0.5 * (u_hi + u_lo) + 0.5 * (u_hi - u_lo) * nodes
        t = t_plus - u**2
        integrand = 2.0 * t ** (n - 1) / np.sqrt(w * np.clip(t - t_minus, 1e-300, None))
        total += weight * 0.5 * (u_hi - u_lo) * float(np.dot(gl_weights, integrand))
    mean = total / float(np.sum(weights))
    jacobian = 1.0 / float(np.prod(s))
    return float(np.clip(2.0 * mean * jacobian / beta_function(0.5 * n, 0.5), 0.0, 1.0))


def _box_region_mass(m: Measure, center: np.ndarray, radius: float) -> float:
    n = m.n
    bounds = np.asarray(m.bounds)
    half = 0.5 * (bounds[:, 1] - bounds[:, 0])
    if n == 1:
        ref = to_reference(m, np.array([[center[0] - radius], [center[0] + radius]]))[:, 0]
        ref = np.clip(ref, -1.0, 1.0)
        return float((np.arcsin(ref[1]) - np.arcsin(ref[0])) / np.pi)
    directions, weights = sphere_rule(n, TANGENT_DEGREE.get(n, 60))
    nodes, gl_weights = np.polynomial.legendre.leggauss(RADIAL_NODES)
    t = 0.5 * radius * (nodes + 1.0)
    total = 0.0
    for omega, weight in zip(directions, weights):
        points = center + t[:, None] * omega
        ref = np.clip(to_reference(m, points), -1.0 + 1e-15, 1.0 - 1e-15)
        density = np.prod(1.0 / (np.pi * half * np.sqrt(1.0 - ref**2)), axis=1)
        total += weight * 0.5 * radius * float(np.dot(gl_weights, density * t ** (n - 1)))
    return float(np.clip(total, 0.0, 1.0))


def in_metric_ball(m: Measure, points, region: MetricBall) -> np.ndarray:
    """Mask of points inside the open region."""
    points = as_points(points, m.n)
    center = np.asarray(region.center, dtype=float).reshape(1, -1)
    if region.metric == "euclidean":
        return np.linalg.norm(points - center, axis=1) < region.radius
    return distance_matrix(m, center, points)[0] < region.radius


def _sphere_net(dimension: int, radius: float, spacing: float) -> np.ndarray:
    """Unit vectors of R^(dimension + 1) forming a spacing-net of a sphere of the given radius."""
    if radius <= spacing / 2:
        base = np.zeros((1, dimension + 1))
        base[0, 0] = 1.0
        return base
    if dimension == 1:
        count = max(1, int(np.ceil(2.0 * np.pi * radius / spacing)))
        angles = 2.0 * np.pi * np.arange(count) / count
        return np.column_stack([np.cos(angles), np.sin(angles)])
    steps = max(1, int(np.ceil(np.pi * radius / spacing)))
    parts = []
    for i in range(steps + 1):
        psi = np.pi * i / steps
        inner = _sphere_net(dimension - 1, radius * np.sin(psi), spacing)
        parts.append(np.column_stack([np.full(inner.shape[0], np.cos(psi)), np.sin(psi) * inner]))
    return np.vstack(parts)


def _sphere_net_size(dimension: int, radius: float, spacing: float) -> int:
    if radius <= spacing / 2:
        return 1
    if dimension == 1:
        return max(1, int(np.ceil(2.0 * np.pi * radius / spacing)))
    steps = max(1, int(np.ceil(np.pi * radius / spacing)))
    return sum(_sphere_net_size(dimension - 1, radius * np.sin(np.pi * i / steps), spacing) for i in range(steps + 1))


def _polar_angles(spacing: float) -> np.ndarray:
    steps = int(np.ceil((np.pi / 2) / spacing))
    return np.minimum(np.arange(steps + 1) * spacing, np.pi / 2)


def rho_net_size(m: Measure, spacing: float) -> int:
    if m.kind == "box" or m.n == 1:
        axis = 2 * len(_polar_angles(spacing)) - 1
        return axis ** (m.n if m.kind == "box" else 1)
    return sum(_sphere_net_size(m.n - 1, np.sin(theta), spacing) for theta in _polar_angles(spacing))


def rho_net(m: Measure, spacing: float, budget: Optional[int] = None) -> np.ndarray:
    """Deterministic net: every domain point lies within ``spacing`` of a net point.

    Built on the lifted hemisphere in polar rings around the north pole (ball,
    ellipsoid) or on a per-axis arcsine grid containing the center (box, n = 1).
    """
    if spacing <= 0:
        raise InputError("net spacing must be positive", spacing=spacing)
    budget = settings.carleson_net_budget if budget is None else budget
    size = rho_net_size(m, spacing)
    if size > budget:
        raise NetTooLargeError(size, budget)
    if m.kind == "box" or m.n == 1:
        half = _polar_angles(spacing)
        axis = np.sin(np.concatenate([-half[:0:-1], half]))
        if m.kind == "box":
            grids = np.meshgrid(*([axis] * m.n), indexing="ij")
            ref = np.stack(grids, axis=-1).reshape(-1, m.n)
        else:
            ref = axis.reshape(-1, 1)
        return from_reference(m, ref)
    parts = []
    for theta in _polar_angles(spacing):
        directions = _sphere_net(m.n - 1, np.sin(theta), spacing)
        parts.append(np.sin(theta) * directions)
    ref = np.vstack(parts)
    logger.debug("Net built", measure=m.label(), spacing=spacing, size=ref.shape[0])
    return from_reference(m, ref)
