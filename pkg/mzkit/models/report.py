from typing import Any, List, Optional

from pydantic import Field

from mzkit.models.base import BaseRecord, PointArray
from mzkit.models.measure import Measure


def _point_columns(prefix: str, point) -> dict[str, float]:
    if point is None:
        return {}
    return {f"{prefix}{i + 1}": float(v) for i, v in enumerate(point)}


class TableRecord(BaseRecord):
    """Row of a CSV table; tuple fields are spread over numbered columns."""

    def csv_row(self) -> dict[str, Any]:
        row: dict[str, Any] = {}
        for name, value in self.model_dump().items():
            if isinstance(value, (tuple, list)):
                row.update(_point_columns(name, value))
            else:
                row[name] = value
        return row


# Kernel diagonal


class DiagonalRow(TableRecord):
    k: int
    x: tuple[float, ...]
    beta: float
    model: float
    ratio: float
    near_corner: bool = False


class DiagonalSummary(TableRecord):
    k: int
    min_ratio: float
    max_ratio: float
    spread: float


class DiagonalEstimateTable(BaseRecord):
    """β_k(x) against the model min(k^n / d^a_eff, k^(n + 2 a_eff))."""

    measure: Measure
    a_eff: float
    rows: List[DiagonalRow]
    summaries: List[DiagonalSummary]

    @property
    def min_ratio(self) -> float:
        return min(s.min_ratio for s in self.summaries)

    @property
    def max_ratio(self) -> float:
        return max(s.max_ratio for s in self.summaries)

    @property
    def spread(self) -> float:
        return self.max_ratio / self.min_ratio


# Localized kernels


class DecayRow(TableRecord):
    scaled_distance: float
    value: float


class DecayProfile(BaseRecord):
    k: int
    a: float
    x0: tuple[float, ...]
    ray: tuple[float, ...]
    rows: List[DecayRow]
    exponent: float = Field(..., description="Negated slope of log |L| against log(1 + k rho) over local maxima")
    fit_range: tuple[float, float]


class SandwichRow(TableRecord):
    x: tuple[float, ...]
    beta_k: float
    localized: float
    beta_2k: float
    norm_sq: float
    holds: bool


class IntegralEstimateRow(TableRecord):
    k: int
    x: tuple[float, ...]
    integral: float
    value: float = Field(..., description="integral times β_k(x)^(1 - α)")
    order: int


class IntegralEstimateTable(BaseRecord):
    a: float
    alpha: float
    gamma: float
    rows: List[IntegralEstimateRow]
    per_k_max: dict[int, float]
    growth: float = Field(..., description="max over k of per-k maxima divided by their min")
    bounded: bool


# Diagnostics


class LevelDiagnostics(TableRecord):
    k: int
    count: int
    dim: int
    separation: float
    carleson_ratio: float
    carleson_center: Optional[tuple[float, ...]] = None
    carleson_constant: float
    riesz_min: float
    riesz_max: float
    frame_lower: float
    frame_upper: float
    rank: int


class DensityRow(TableRecord):
    k: int
    center: tuple[float, ...]
    radius: float
    count: int
    dim: int
    count_ratio: float
    equilibrium: float
    exact_equilibrium: float
    ratio: float


class DensityTrend(TableRecord):
    """First and last level of one region, with the largest |ratio - 1| in between."""

    center: tuple[float, ...]
    radius: float
    k_first: int
    k_last: int
    ratio_first: float
    ratio_last: float
    max_deviation: float


class DiagnosticsReport(BaseRecord):
    """Spectra, separation, Carleson and density results for every level of a family."""

    measure: Measure
    levels: List[LevelDiagnostics]
    density: List[DensityRow] = Field(default_factory=list)
    density_trends: List[DensityTrend] = Field(default_factory=list)
    carleson_reference: str = "lebesgue"
    carleson_net_spacing: str = "1/(2k)"
    equilibrium_grade: str = Field("exact", description="exact on the ball, comparability on boxes and ellipsoids")
    tolerances: dict[str, float] = Field(default_factory=dict)

    def level(self, k: int) -> LevelDiagnostics:
        for entry in self.levels:
            if entry.k == k:
                return entry
        raise KeyError(f"no level with k={k}")


class CountRow(TableRecord):
    k: int
    M: float
    count: int


class HoleReport(BaseRecord):
    k: int
    hole: float = Field(..., description="Largest M with an empty Euclidean ball of radius M/k")
    center: tuple[float, ...]


# Transport


class TransportRow(TableRecord):
    k: int
    distance: float
    mesh: float
    mass: float


class MomentRow(TableRecord):
    k: int
    moment: float
    scaled: float


# Scaling


class ScalingRow(TableRecord):
    k: int
    R: float
    grid_count: int
    sup_error: float


class BesselProfile(BaseRecord):
    nu: float
    jstar_at_zero: float
    t_max: float
    zeros: List[float]


class PairDistance(TableRecord):
    i: int
    j: int
    distance: float
    nearest_zero: float
    gap: float


class ZeroDistanceReport(BaseRecord):
    nu: float
    tol: float
    pairs: List[PairDistance]
    compatible: bool


class SearchLedger(BaseRecord):
    """Outcome of a multi-start orthogonality search; evidence only."""

    n: int
    a: float
    k: int
    m: int
    seed: int
    restarts: int
    best_residual: float
    best_restart: int
    configuration: PointArray
    residuals: List[float]
    iterations: List[int]
    converged: bool

    def csv_rows(self) -> list[dict[str, Any]]:
        return [
            {"restart": i, "residual": r, "iterations": it}
            for i, (r, it) in enumerate(zip(self.residuals, self.iterations))
        ]


# Generators


class GenerationLevel(TableRecord):
    k: int
    target: Optional[int] = None
    achieved: int
    saturated: bool = False


class GenerationReport(BaseRecord):
    kind: str
    seed: Optional[int] = None
    levels: List[GenerationLevel]

    @property
    def saturated(self) -> bool:
        return any(level.saturated for level in self.levels)

