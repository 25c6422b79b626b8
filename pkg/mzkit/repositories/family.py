from pathlib import Path
from typing import Any, Optional

from mzkit.core.errors import SchemaError
from mzkit.models.family import PointFamily
from mzkit.models.report import GenerationReport
from mzkit.repositories.base import BaseRepository, PathLike, write_json


class FamilyRepository(BaseRepository[PointFamily]):
    """PointFamily JSON: {"n": int, "families": [{"k": int, "points": [[...], ...]}, ...]}."""

    def __init__(self):
        super().__init__(PointFamily)

    def parse(self, data: Any, source: str = "input") -> PointFamily:
        if not isinstance(data, dict):
            raise SchemaError(f"invalid {source}: a family must be a JSON object")
        if "families" not in data:
            raise SchemaError(f"invalid {source}: missing families", field="families")
        return super().parse(data, source)

    def write(
        self,
        path: PathLike,
        record: PointFamily,
        header: Optional[dict[str, Any]] = None,
        generation: Optional[GenerationReport] = None,
    ) -> Path:
        """Family JSON; a generation report rides along under ``generation`` and is ignored on read."""
        payload = record.model_dump(mode="json", by_alias=True)
        if generation is not None:
            payload["generation"] = generation.model_dump(mode="json")
        return write_json(path, payload, header)
