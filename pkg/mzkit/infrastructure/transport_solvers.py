"""
Exact W1 solvers for discrete measures of equal mass.
"""
from abc import ABC, abstractmethod
from typing import Optional

import numpy as np
import ot
import scipy.sparse as sp
from scipy.optimize import linprog
from scipy.stats import wasserstein_distance

from mzkit.core.config import settings
from mzkit.core.errors import LPSizeCapError, NumericalError
from mzkit.core.logging import get_logger
from mzkit.models.family import DiscreteMeasure

logger = get_logger(__name__)


class TransportSolver(ABC):
    """W1 with Euclidean cost between two discrete measures of the same mass."""

    name: str = "solver"

    @abstractmethod
    def solve(self, sigma: DiscreteMeasure, nu: DiscreteMeasure) -> float:
        pass


class MonotoneCouplingSolver(TransportSolver):
    """One-dimensional W1 through the cumulative distribution functions."""

    name = "monotone"

    def solve(self, sigma: DiscreteMeasure, nu: DiscreteMeasure) -> float:
        mass = sigma.total_mass
        if mass == 0:
            return 0.0
        return float(
            mass
            * wasserstein_distance(
                sigma.points[:, 0], nu.points[:, 0], u_weights=sigma.masses, v_weights=nu.masses
            )
        )


class _CappedSolver(TransportSolver):
    def __init__(self, atom_cap: Optional[int] = None):
        self.atom_cap = settings.lp_atom_cap if atom_cap is None else atom_cap

    def _check_size(self, sigma: DiscreteMeasure, nu: DiscreteMeasure) -> None:
        atoms = sigma.size + nu.size
        if atoms > self.atom_cap:
            raise LPSizeCapError(atoms, self.atom_cap)


class NetworkSimplexSolver(_CappedSolver):
    """Exact transport LP through the POT network simplex."""

    name = "network_simplex"

    def solve(self, sigma: DiscreteMeasure, nu: DiscreteMeasure) -> float:
        self._check_size(sigma, nu)
        a = np.ascontiguousarray(sigma.masses, dtype=np.float64)
        b = np.ascontiguousarray(nu.masses, dtype=np.float64)
        if a.sum() == 0:
            return 0.0
        # equal sums exactly
        b = b * (a.sum() / b.sum())
        cost = ot.dist(sigma.points, nu.points, metric="euclidean")
        value, log = ot.emd2(a, b, cost, numItermax=10_000_000, log=True)
        if log.get("warning"):
            logger.warning("Network simplex warning", warning=log["warning"])
        return float(value)


class LinprogSolver(_CappedSolver):
    """The same LP through scipy's HiGHS; used as a cross-check."""

    name = "linprog"

    def solve(self, sigma: DiscreteMeasure, nu: DiscreteMeasure) -> float:
        self._check_size(sigma, nu)
        rows, cols = sigma.size, nu.size
        cost = ot.dist(sigma.points, nu.points, metric="euclidean").reshape(-1)
        source = sp.kron(sp.identity(rows), np.ones((1, cols)))
        target = sp.kron(np.ones((1, rows)), sp.identity(cols))
        constraints = sp.vstack([source, target]).tocsc()
        b_eq = np.concatenate([sigma.masses, nu.masses * (sigma.total_mass / nu.total_mass)])
        result = linprog(cost, A_eq=constraints, b_eq=b_eq, bounds=(0, None), method="highs")
        if not result.success:
            raise NumericalError(f"transport LP failed: {result.message}")
        return float(result.fun)
