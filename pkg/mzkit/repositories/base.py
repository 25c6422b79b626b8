import csv
import io
from pathlib import Path
from typing import Any, Generic, Iterable, Optional, Sequence, Type, TypeVar, Union

import numpy as np
import orjson
from pydantic import BaseModel, ValidationError

from mzkit import __version__
from mzkit.core.config import settings
from mzkit.core.errors import InputError, SchemaError
from mzkit.core.logging import get_logger

logger = get_logger(__name__)

T = TypeVar("T", bound=BaseModel)

JSON_OPTIONS = orjson.OPT_INDENT_2 | orjson.OPT_SORT_KEYS | orjson.OPT_SERIALIZE_NUMPY

PathLike = Union[str, Path]


def build_header(
    command: str,
    config: Optional[dict[str, Any]] = None,
    seeds: Optional[Sequence[int]] = None,
    tolerances: Optional[dict[str, float]] = None,
) -> dict[str, Any]:
    """Provenance block embedded in every artifact; no wall-clock data."""
    base_config = {
        "precision": settings.precision,
        "basis_method": settings.basis_method,
        "extended_dps": settings.extended_dps,
    }
    return {
        "tool": "mzkit",
        "version": __version__,
        "command": command,
        "config": {**base_config, **(config or {})},
        "seeds": [int(s) for s in (seeds or [])],
        "tolerances": {**settings.tolerances(), **(tolerances or {})},
    }


def dumps(payload: Any) -> bytes:
    return orjson.dumps(payload, option=JSON_OPTIONS) + b"\n"


def format_value(value: Any) -> str:
    """CSV cell text; floats carry 17 significant digits."""
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (float, np.floating)):
        return format(float(value), ".17g")
    if value is None:
        return ""
    return str(value)


def _location(exc: ValidationError) -> str:
    error = exc.errors()[0]
    return ".".join(str(part) for part in error["loc"])


class BaseRepository(Generic[T]):
    """JSON file repository for one pydantic model."""

    def __init__(self, model_class: Type[T]):
        self.model_class = model_class

    def load_raw(self, path: PathLike) -> Any:
        path = Path(path)
        try:
            content = path.read_bytes()
        except OSError as exc:
            raise InputError(f"cannot read {path}: {exc.strerror}", path=str(path)) from exc
        try:
            return orjson.loads(content)
        except orjson.JSONDecodeError as exc:
            raise SchemaError(f"malformed JSON in {path}: {exc.msg}", line=exc.lineno) from exc

    def parse(self, data: Any, source: str = "input") -> T:
        try:
            return self.model_class.model_validate(data)
        except ValidationError as exc:
            error = exc.errors()[0]
            raise SchemaError(f"invalid {source}: {error['msg']}", field=_location(exc)) from exc

    def read(self, path: PathLike) -> T:
        """Load and validate a record; unknown keys such as the header are ignored."""
        record = self.parse(self.load_raw(path), source=str(path))
        logger.debug("Record read", path=str(path), model=self.model_class.__name__)
        return record

    def write(self, path: PathLike, record: T, header: Optional[dict[str, Any]] = None) -> Path:
        payload = record.model_dump(mode="json", by_alias=True)
        return write_json(path, payload, header)


def write_json(path: PathLike, payload: Any, header: Optional[dict[str, Any]] = None) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    if isinstance(payload, BaseModel):
        payload = payload.model_dump(mode="json", by_alias=True)
    document = {"header": header, **payload} if header is not None else payload
    path.write_bytes(dumps(document))
    logger.debug("JSON written", path=str(path))
    return path


def render_csv(
    rows: Iterable[dict[str, Any]],
    header: Optional[dict[str, Any]] = None,
    columns: Optional[Sequence[str]] = None,
) -> str:
    """CSV with the union of row keys as columns (first-seen order); the header goes in a comment line."""
    rows = list(rows)
    if columns is None:
        columns = []
        for row in rows:
            columns.extend(key for key in row if key not in columns)
    buffer = io.StringIO()
    if header is not None:
        buffer.write("# " + orjson.dumps(header, option=orjson.OPT_SORT_KEYS).decode() + "\n")
    writer = csv.DictWriter(buffer, fieldnames=list(columns), restval="", lineterminator="\n")
    writer.writeheader()
    for row in rows:
        writer.writerow({key: format_value(value) for key, value in row.items()})
    return buffer.getvalue()


def write_csv(
    path: PathLike,
    rows: Iterable[dict[str, Any]],
    header: Optional[dict[str, Any]] = None,
    columns: Optional[Sequence[str]] = None,
) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    rows = list(rows)
    path.write_bytes(render_csv(rows, header, columns).encode("utf-8"))
    logger.debug("CSV written", path=str(path), rows=len(rows))
    return path
