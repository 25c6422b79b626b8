"""
Candidate point families on the unit ball.

gauss_1d        zeros of the degree k + 1 orthogonal polynomial (n = 1)
tensor_gauss    Cartesian products of 1D Gauss nodes, thinned to the ball
random_separated  dart throwing under ρ with separation ε / k
equilibrium_random  samples of the equilibrium measure

Random kinds draw level k from the generator seeded with (seed, k).
"""
from typing import Literal, Optional, Sequence

import numpy as np
from scipy.special import betaincinv

from mzkit.core.config import settings
from mzkit.core.errors import InputError
from mzkit.core.logging import get_logger
from mzkit.models.family import FamilyLevel, PointFamily
from mzkit.models.report import GenerationLevel, GenerationReport
from mzkit.services import geometry
from mzkit.services.gegenbauer import gauss_nodes_1d
from mzkit.services.measures import space_dimension

logger = get_logger(__name__)

FamilyKind = Literal["gauss_1d", "tensor_gauss", "random_separated", "equilibrium_random"]
MAX_REJECTIONS = 2000


def equilibrium_sample(n: int, count: int, rng: np.random.Generator) -> np.ndarray:
    """Inverse-CDF radius r = sqrt(I^-1(n/2, 1/2; U)) with uniform directions."""
    radii = np.sqrt(betaincinv(0.5 * n, 0.5, rng.uniform(0.0, 1.0, size=count)))
    if n == 1:
        signs = np.where(rng.uniform(0.0, 1.0, size=count) < 0.5, -1.0, 1.0)
        return (signs * radii).reshape(-1, 1)
    directions = rng.standard_normal((count, n))
    directions /= np.linalg.norm(directions, axis=1, keepdims=True)
    return directions * radii[:, None]


def gauss_level(k: int, a: float) -> np.ndarray:
    return gauss_nodes_1d(k + 1, a)[0].reshape(-1, 1)


def tensor_gauss_level(n: int, k: int, a: float) -> np.ndarray:
    """Products of the k + 1 Gauss nodes per axis that fall in the closed ball."""
    line = gauss_nodes_1d(k + 1, a)[0]
    grid = np.stack(np.meshgrid(*([line] * n), indexing="ij"), axis=-1).reshape(-1, n)
    return grid[np.einsum("ij,ij->i", grid, grid) <= 1.0]


def random_separated_level(
    n: int, k: int, epsilon: float, target: int, rng: np.random.Generator
) -> tuple[np.ndarray, bool]:
    """Dart throwing with candidates from the equilibrium measure.

    Stops at ``target`` points or after MAX_REJECTIONS consecutive rejections
    (saturated).
    """
    separation = epsilon / max(k, 1)
    accepted = np.empty((target, n))
    count = 0
    rejections = 0
    while count < target and rejections < MAX_REJECTIONS:
        candidate = equilibrium_sample(n, 1, rng)
        if count and np.min(geometry.rho_matrix(candidate, accepted[:count])) < separation:
            rejections += 1
            continue
        accepted[count] = candidate[0]
        count += 1
        rejections = 0
    return accepted[:count], count < target


def generate_family(
    kind: FamilyKind,
    ks: Sequence[int],
    n: int = 1,
    a: float = 0.5,
    epsilon: Optional[float] = None,
    target: Optional[int] = None,
    seed: Optional[int] = None,
) -> tuple[PointFamily, GenerationReport]:
    """Build a family over the k list; ``target`` defaults to dim P_k per level."""
    ks = sorted(set(int(k) for k in ks))
    if not ks or ks[0] < 0:
        raise InputError("generation needs a nonempty list of degrees k >= 0")
    if a < 0:
        raise InputError("weight exponent must be nonnegative", a=a)
    if kind == "gauss_1d" and n != 1:
        raise InputError("gauss_1d families are one-dimensional", n=n)
    if kind == "random_separated" and (epsilon is None or epsilon <= 0):
        raise InputError("random_separated needs a positive separation epsilon")
    random_kind = kind in ("random_separated", "equilibrium_random")
    seed = (settings.default_seed if seed is None else seed) if random_kind else None
    levels: list[FamilyLevel] = []
    report: list[GenerationLevel] = []
    for k in ks:
        wanted = space_dimension(n, k) if target is None else int(target)
        saturated = False
        if kind == "gauss_1d":
            points, wanted = gauss_level(k, a), None
        elif kind == "tensor_gauss":
            points, wanted = tensor_gauss_level(n, k, a), None
        elif kind == "random_separated":
            points, saturated = random_separated_level(n, k, epsilon, wanted, np.random.default_rng([seed, k]))
            if saturated:
                logger.warning("Saturation before target count", k=k, target=wanted, achieved=points.shape[0])
        elif kind == "equilibrium_random":
            points = equilibrium_sample(n, wanted, np.random.default_rng([seed, k]))
        else:
            raise InputError(f"unknown family kind '{kind}'")
        levels.append(FamilyLevel(k=k, points=points.reshape(-1, n)))
        report.append(GenerationLevel(k=k, target=wanted, achieved=int(points.shape[0]), saturated=saturated))
    logger.info("Family generated", kind=kind, n=n, levels=len(levels))
    return PointFamily(n=n, families=levels), GenerationReport(kind=kind, seed=seed, levels=report)
