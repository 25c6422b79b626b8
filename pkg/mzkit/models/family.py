from typing import List

import numpy as np
from pydantic import ConfigDict, Field, model_validator

from mzkit.models.base import BaseRecord, PointArray, VectorArray


class FamilyLevel(BaseRecord):
    """Point set Λ_k attached to the degree k."""

    k: int = Field(..., ge=0, description="Polynomial degree of the level")
    points: PointArray = Field(..., description="Points of the level, one row per point")

    @property
    def count(self) -> int:
        return int(self.points.shape[0])


class PointFamily(BaseRecord):
    """Sequence {Λ_k} of finite point sets tagged with their degrees."""

    model_config = ConfigDict(
        frozen=True,
        populate_by_name=True,
        arbitrary_types_allowed=True,
        json_schema_extra={
            "example": {
                "n": 1,
                "families": [
                    {"k": 1, "points": [[-0.5773502691896257], [0.5773502691896257]]},
                ],
            }
        },
    )

    n: int = Field(..., ge=1, description="Dimension")
    entries: List[FamilyLevel] = Field(default_factory=list, alias="families")

    @model_validator(mode="before")
    @classmethod
    def shape_empty_levels(cls, data):
        if isinstance(data, dict):
            n = data.get("n")
            levels = data.get("families", data.get("entries"))
            if isinstance(n, int) and isinstance(levels, list):
                shaped = []
                for level in levels:
                    if isinstance(level, dict) and len(level.get("points", [])) == 0:
                        level = {**level, "points": np.zeros((0, n))}
                    shaped.append(level)
                key = "families" if "families" in data else "entries"
                data = {**data, key: shaped}
        return data

    @model_validator(mode="after")
    def check_levels(self) -> "PointFamily":
        degrees = [level.k for level in self.entries]
        if any(b <= a for a, b in zip(degrees, degrees[1:])):
            raise ValueError("family degrees must be strictly increasing")
        for level in self.entries:
            if level.points.shape[1] != self.n:
                raise ValueError(f"level k={level.k} has points of dimension {level.points.shape[1]}, expected {self.n}")
        return self

    @property
    def degrees(self) -> list[int]:
        return [level.k for level in self.entries]

    def level(self, k: int) -> FamilyLevel:
        for entry in self.entries:
            if entry.k == k:
                return entry
        raise KeyError(f"no level with k={k}")

    def points(self, k: int) -> np.ndarray:
        return self.level(k).points


class DiscreteMeasure(BaseRecord):
    """Finite atomic measure Σ m_i δ_{x_i}."""

    points: PointArray
    masses: VectorArray

    @model_validator(mode="after")
    def check_atoms(self) -> "DiscreteMeasure":
        if self.points.shape[0] != self.masses.shape[0]:
            raise ValueError("one mass per atom is required")
        if np.any(self.masses < 0):
            raise ValueError("atom masses must be nonnegative")
        return self

    @classmethod
    def from_arrays(cls, points, masses) -> "DiscreteMeasure":
        points = np.asarray(points, dtype=float)
        if points.ndim == 1:
            points = points.reshape(-1, 1)
        return cls(points=points, masses=np.asarray(masses, dtype=float))

    @property
    def total_mass(self) -> float:
        return float(np.sum(self.masses))

    @property
    def size(self) -> int:
        return int(self.masses.shape[0])

    @property
    def dimension(self) -> int:
        return int(self.points.shape[1]) if self.points.ndim == 2 else 1
