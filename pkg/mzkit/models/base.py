from typing import Any

import numpy as np
from pydantic import BaseModel, ConfigDict
from pydantic_core import core_schema


class PointArray(np.ndarray):
    """Float64 point matrix (rows are points) for Pydantic fields."""

    @classmethod
    def __get_pydantic_core_schema__(cls, source_type: Any, handler):
        return core_schema.no_info_plain_validator_function(
            cls.validate,
            serialization=core_schema.plain_serializer_function_ser_schema(
                lambda v: np.asarray(v, dtype=float).tolist()
            ),
        )

    @classmethod
    def validate(cls, v):
        try:
            arr = np.array(v, dtype=float)
        except (TypeError, ValueError) as exc:
            raise ValueError(f"Invalid point list: {exc}") from exc
        if arr.ndim == 1:
            # scalars are one-dimensional points
            arr = arr.reshape(-1, 1) if arr.size else arr.reshape(0, 0)
        if arr.ndim != 2:
            raise ValueError("Points must be a list of coordinate lists")
        if not np.all(np.isfinite(arr)):
            raise ValueError("Points must be finite")
        return arr

    @classmethod
    def __get_pydantic_json_schema__(cls, core_schema_, handler):
        return {"type": "array", "items": {"type": "array", "items": {"type": "number"}}}


class VectorArray(np.ndarray):
    """Float64 one-dimensional array for Pydantic fields."""

    @classmethod
    def __get_pydantic_core_schema__(cls, source_type: Any, handler):
        return core_schema.no_info_plain_validator_function(
            cls.validate,
            serialization=core_schema.plain_serializer_function_ser_schema(
                lambda v: np.asarray(v, dtype=float).tolist()
            ),
        )

    @classmethod
    def validate(cls, v):
        try:
            arr = np.array(v, dtype=float).reshape(-1)
        except (TypeError, ValueError) as exc:
            raise ValueError(f"Invalid number list: {exc}") from exc
        if not np.all(np.isfinite(arr)):
            raise ValueError("Values must be finite")
        return arr

    @classmethod
    def __get_pydantic_json_schema__(cls, core_schema_, handler):
        return {"type": "array", "items": {"type": "number"}}


class BaseRecord(BaseModel):
    """Base model for immutable domain records."""

    model_config = ConfigDict(
        frozen=True,
        populate_by_name=True,
        arbitrary_types_allowed=True,
    )
