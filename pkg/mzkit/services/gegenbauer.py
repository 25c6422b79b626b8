"""
Three-term recurrence of the orthonormal polynomials for the weight
(1 - x^2)^(a - 1/2) on [-1, 1], and the Gauss rules built from its Jacobi matrix.
"""
import numpy as np
from scipy.linalg import LinAlgError, eigh_tridiagonal
from scipy.special import gammaln

from mzkit.core.errors import NodeComputationError
from mzkit.core.logging import get_logger

logger = get_logger(__name__)


def gegenbauer_mass(a: float) -> float:
    """Total mass of (1 - x^2)^(a - 1/2) on [-1, 1]."""
    return float(np.exp(0.5 * np.log(np.pi) + gammaln(a + 0.5) - gammaln(a + 1.0)))


def recurrence_coefficients(m: int, a: float) -> np.ndarray:
    """Off-diagonal entries b_1..b_{m-1} of the (zero-diagonal) Jacobi matrix.

    x p_j = b_{j+1} p_{j+1} + b_j p_{j-1} for the orthonormal family p_j.
    """
    j = np.arange(1, m, dtype=float)
    b2 = np.empty_like(j)
    if b2.size:
        b2[0] = 1.0 / (2.0 * (a + 1.0))
        rest = j[1:]
        b2[1:] = rest * (rest + 2.0 * a - 1.0) / (4.0 * (rest + a) * (rest + a - 1.0))
    return np.sqrt(b2)


def gauss_nodes_1d(m: int, a: float) -> tuple[np.ndarray, np.ndarray]:
    """Gauss nodes and weights for (1 - x^2)^(a - 1/2), exact to degree 2m - 1.

    Golub-Welsch: nodes are the eigenvalues of the Jacobi matrix, weights are
    the total mass times the squared first eigenvector components.
    """
    if m < 1:
        raise NodeComputationError("node count must be at least 1", m=m)
    if a < 0:
        raise NodeComputationError("weight exponent must be nonnegative", a=a)
    mass = gegenbauer_mass(a)
    if m == 1:
        return np.zeros(1), np.array([mass])
    try:
        nodes, vectors = eigh_tridiagonal(np.zeros(m), recurrence_coefficients(m, a))
    except (LinAlgError, ValueError) as exc:
        raise NodeComputationError("node computation failed", m=m, a=a, reason=str(exc)) from exc
    weights = mass * vectors[0, :] ** 2
    order = np.argsort(nodes)
    nodes, weights = nodes[order], weights[order]
    # the weight is even: enforce the mirror symmetry exactly
    nodes = 0.5 * (nodes - nodes[::-1])
    weights = 0.5 * (weights + weights[::-1])
    if m % 2 == 1:
        nodes[m // 2] = 0.0
    if not (np.all(np.isfinite(nodes)) and np.all(weights > 0)):
        raise NodeComputationError("node computation failed", m=m, a=a)
    logger.debug("Gauss rule computed", m=m, a=a)
    return nodes, weights


def orthonormal_values(x: np.ndarray, k: int, a: float) -> np.ndarray:
    """Matrix of p_0..p_k evaluated at x (shape (len(x), k + 1))."""
    x = np.asarray(x, dtype=float).reshape(-1)
    values = np.empty((x.shape[0], k + 1))
    values[:, 0] = 1.0 / np.sqrt(gegenbauer_mass(a))
    if k == 0:
        return values
    b = recurrence_coefficients(k + 1, a)
    values[:, 1] = x * values[:, 0] / b[0]
    for j in range(1, k):
        values[:, j + 1] = (x * values[:, j] - b[j - 1] * values[:, j - 1]) / b[j]
    return values


def orthonormal_coefficients(k: int, a: float) -> np.ndarray:
    """Monomial coefficients of p_0..p_k; row j holds p_j, column i the power x^i."""
    coeffs = np.zeros((k + 1, k + 1))
    coeffs[0, 0] = 1.0 / np.sqrt(gegenbauer_mass(a))
    if k == 0:
        return coeffs
    b = recurrence_coefficients(k + 1, a)
    coeffs[1, 1:] = coeffs[0, :-1] / b[0]
    for j in range(1, k):
        shifted = np.zeros(k + 1)
        shifted[1:] = coeffs[j, :-1]
        coeffs[j + 1] = (shifted - b[j - 1] * coeffs[j - 1]) / b[j]
    return coeffs
