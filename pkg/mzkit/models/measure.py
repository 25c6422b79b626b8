from typing import Literal, Optional

from pydantic import ConfigDict, Field, model_validator

from mzkit.models.base import BaseRecord

MultiIndex = tuple[int, ...]
"""Exponent tuple of a monomial x^α; ordered graded-lexicographically."""


class Measure(BaseRecord):
    """Admissible measure: weighted ball, or Lebesgue measure on a box or an ellipsoid."""

    model_config = ConfigDict(
        frozen=True,
        json_schema_extra={
            "examples": [
                {"kind": "ball", "n": 2, "a": 0.5},
                {"kind": "box", "n": 2, "bounds": [[-1.0, 1.0], [-1.0, 1.0]]},
                {"kind": "ellipsoid", "n": 2, "semiaxes": [2.0, 1.0]},
            ]
        },
    )

    kind: Literal["ball", "box", "ellipsoid"] = Field(..., description="Domain family")
    n: int = Field(..., ge=1, description="Dimension")
    a: Optional[float] = Field(None, ge=0.0, description="Weight exponent of (1-|x|^2)^(a-1/2), ball only")
    bounds: Optional[tuple[tuple[float, float], ...]] = Field(None, description="Box bounds per axis")
    semiaxes: Optional[tuple[float, ...]] = Field(None, description="Axis-aligned ellipsoid semiaxes")

    @model_validator(mode="after")
    def check_kind_fields(self) -> "Measure":
        if self.kind == "ball":
            if self.a is None:
                raise ValueError("ball measure requires the weight exponent 'a'")
            if self.bounds is not None or self.semiaxes is not None:
                raise ValueError("ball measure takes no bounds or semiaxes")
        elif self.kind == "box":
            if self.a is not None:
                raise ValueError("box measure carries Lebesgue weight only")
            if self.bounds is None or len(self.bounds) != self.n:
                raise ValueError("box measure requires one [lo, hi] pair per axis")
            if any(not hi > lo for lo, hi in self.bounds):
                raise ValueError("box bounds must satisfy lo < hi")
        else:
            if self.a is not None:
                raise ValueError("ellipsoid measure carries Lebesgue weight only")
            if self.semiaxes is None or len(self.semiaxes) != self.n:
                raise ValueError("ellipsoid measure requires one semiaxis per axis")
            if any(not s > 0 for s in self.semiaxes):
                raise ValueError("ellipsoid semiaxes must be positive")
        return self

    @classmethod
    def ball(cls, n: int, a: float) -> "Measure":
        return cls(kind="ball", n=n, a=float(a))

    @classmethod
    def box(cls, bounds) -> "Measure":
        bounds = tuple((float(lo), float(hi)) for lo, hi in bounds)
        return cls(kind="box", n=len(bounds), bounds=bounds)

    @classmethod
    def ellipsoid(cls, semiaxes) -> "Measure":
        semiaxes = tuple(float(s) for s in semiaxes)
        return cls(kind="ellipsoid", n=len(semiaxes), semiaxes=semiaxes)

    @property
    def weight_exponent(self) -> float:
        """Exponent a of the ball weight; Lebesgue models behave like a = 1/2."""
        return self.a if self.kind == "ball" else 0.5

    @property
    def is_symmetric(self) -> bool:
        if self.kind != "box":
            return True
        return all(lo == -hi for lo, hi in self.bounds)

    def label(self) -> str:
        if self.kind == "ball":
            return f"ball(n={self.n}, a={self.a:g})"
        if self.kind == "box":
            return f"box({list(self.bounds)})"
        return f"ellipsoid({list(self.semiaxes)})"


class MetricBall(BaseRecord):
    """Ball of the anisotropic metric (or a Euclidean ball) inside a domain."""

    center: tuple[float, ...]
    radius: float = Field(..., gt=0.0)
    metric: Literal["rho_ball", "euclidean", "box_proxy"] = "rho_ball"

    @model_validator(mode="after")
    def check_radius(self) -> "MetricBall":
        if self.metric == "rho_ball" and self.radius > 3.141592653589793 + 1e-15:
            raise ValueError("rho balls have radius at most pi")
        return self
