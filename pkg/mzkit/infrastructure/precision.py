"""
Extended precision backend for the monomial Cholesky assembly.
"""
from contextlib import contextmanager
from typing import Iterator, Optional, Sequence

import mpmath
import numpy as np

from mzkit.core.config import settings
from mzkit.core.errors import GramSingularError


class ExtendedContext:
    """mpmath arithmetic at a fixed number of decimal digits."""

    def __init__(self, dps: Optional[int] = None):
        self.dps = dps or settings.extended_dps

    @contextmanager
    def active(self) -> Iterator[None]:
        with mpmath.workdps(self.dps):
            yield

    def ball_moment(self, n: int, a: float, alpha: Sequence[int]) -> mpmath.mpf:
        if any(e % 2 for e in alpha):
            return mpmath.mpf(0)
        a = mpmath.mpf(a)
        half = mpmath.mpf(1) / 2
        log_value = sum(mpmath.loggamma(half * (e + 1)) for e in alpha)
        log_value += mpmath.loggamma(a + half)
        log_value -= mpmath.loggamma(sum(half * (e + 1) for e in alpha) + a + half)
        return mpmath.exp(log_value)

    def box_moment(self, bounds: Sequence[tuple[float, float]], alpha: Sequence[int]) -> mpmath.mpf:
        value = mpmath.mpf(1)
        for (lo, hi), e in zip(bounds, alpha):
            lo, hi = mpmath.mpf(lo), mpmath.mpf(hi)
            value *= (hi ** (e + 1) - lo ** (e + 1)) / (e + 1)
        return value

    def ellipsoid_moment(self, semiaxes: Sequence[float], alpha: Sequence[int]) -> mpmath.mpf:
        scale = mpmath.mpf(1)
        for s, e in zip(semiaxes, alpha):
            scale *= mpmath.mpf(s) ** (e + 1)
        return scale * self.ball_moment(len(semiaxes), 0.5, alpha)

    def cholesky_lower(self, gram: mpmath.matrix, k: int, threshold: float) -> mpmath.matrix:
        """Unpivoted Cholesky in the given order, failing on small pivots.

        Every pivot is compared with the largest pivot seen so far.
        """
        size = gram.rows
        lower = mpmath.zeros(size, size)
        largest = mpmath.mpf(0)
        for j in range(size):
            pivot = gram[j, j] - mpmath.fsum(lower[j, i] ** 2 for i in range(j))
            largest = max(largest, pivot)
            if pivot <= threshold * largest:
                raise GramSingularError(k, float(pivot), float(largest))
            lower[j, j] = mpmath.sqrt(pivot)
            for r in range(j + 1, size):
                lower[r, j] = (gram[r, j] - mpmath.fsum(lower[r, i] * lower[j, i] for i in range(j))) / lower[j, j]
        return lower

    def lower_inverse(self, lower: mpmath.matrix) -> mpmath.matrix:
        """Inverse of a lower-triangular matrix by forward substitution."""
        size = lower.rows
        inverse = mpmath.zeros(size, size)
        for c in range(size):
            inverse[c, c] = 1 / lower[c, c]
            for r in range(c + 1, size):
                acc = mpmath.fsum(lower[r, i] * inverse[i, c] for i in range(c, r))
                inverse[r, c] = -acc / lower[r, r]
        return inverse

    @staticmethod
    def to_float(matrix: mpmath.matrix) -> np.ndarray:
        return np.array(
            [[float(matrix[r, c]) for c in range(matrix.cols)] for r in range(matrix.rows)],
            dtype=float,
        )
