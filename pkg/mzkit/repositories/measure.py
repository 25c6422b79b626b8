from typing import Optional

from mzkit.core.errors import SchemaError
from mzkit.models.family import DiscreteMeasure
from mzkit.models.measure import Measure
from mzkit.repositories.base import BaseRepository, PathLike


class MeasureRepository(BaseRepository[Measure]):
    """{"kind": "ball" | "box" | "ellipsoid", "n": int, "a"?, "bounds"?, "semiaxes"?}."""

    def __init__(self):
        super().__init__(Measure)


class DiscreteMeasureRepository(BaseRepository[DiscreteMeasure]):
    """{"points": [[...], ...], "masses": [...]}."""

    def __init__(self):
        super().__init__(DiscreteMeasure)

    def read(self, path: PathLike, n: Optional[int] = None) -> DiscreteMeasure:
        record = super().read(path)
        if n is not None and record.size and record.dimension != n:
            raise SchemaError(f"measure in {path} lives in dimension {record.dimension}, expected {n}", field="points")
        return record
