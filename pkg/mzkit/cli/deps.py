"""
Shared helpers of the command modules: argument parsing, measure and family
loading, output headers and the error-to-exit-code mapping.
"""
import functools
import re
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Callable, Optional, Sequence

import typer
from pydantic import ValidationError

from mzkit.core.config import settings
from mzkit.core.errors import InputError, MZKitError, SchemaError
from mzkit.core.logging import get_logger
from mzkit.models.family import PointFamily
from mzkit.models.measure import Measure, MetricBall
from mzkit.models.report import TableRecord
from mzkit.repositories.base import build_header
from mzkit.repositories.family import FamilyRepository
from mzkit.repositories.measure import MeasureRepository
from mzkit.repositories.report import ReportRepository

logger = get_logger(__name__)

PRECISIONS = ("double", "extended")
METHODS = ("auto", "cholesky", "arnoldi", "recurrence")


@dataclass
class CliContext:
    threads: int = 1


def get_threads(ctx: typer.Context) -> int:
    obj = ctx.obj if isinstance(ctx.obj, CliContext) else None
    return obj.threads if obj is not None else settings.threads


def handle_errors(fn: Callable) -> Callable:
    """Input errors exit with 1, numerical caps and failures with 2, both as ``error: <message>``."""

    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except MZKitError as exc:
            logger.debug("Command failed", error=exc.message, **exc.context)
            typer.echo(f"error: {exc.message}", err=True)
            raise typer.Exit(code=exc.exit_code)
        except ValidationError as exc:
            error = exc.errors()[0]
            field = ".".join(str(part) for part in error["loc"])
            typer.echo(f"error: {error['msg']} (field '{field}')", err=True)
            raise typer.Exit(code=1)

    return wrapper


_RANGE = re.compile(r"^\s*(-?\d+)\s*\.\.\s*(-?\d+)\s*(?::\s*(\d+))?\s*$")


def parse_k_list(text: str) -> list[int]:
    """Degrees from ``1..40``, ``10..80:10`` (with step) or ``20,40,80``; sorted and unique."""
    degrees: set[int] = set()
    for part in text.split(","):
        if not part.strip():
            continue
        match = _RANGE.match(part)
        try:
            if match:
                lo, hi = int(match.group(1)), int(match.group(2))
                step = int(match.group(3) or 1)
                if step < 1 or hi < lo:
                    raise ValueError(part)
                degrees.update(range(lo, hi + 1, step))
            else:
                degrees.add(int(part))
        except ValueError as exc:
            raise InputError(f"malformed degree list '{text}'") from exc
    if not degrees or min(degrees) < 0:
        raise InputError(f"degree list '{text}' must hold nonnegative integers")
    return sorted(degrees)


def parse_floats(text: str, what: str = "value list") -> tuple[float, ...]:
    try:
        values = tuple(float(v) for v in text.split(",") if v.strip())
    except ValueError as exc:
        raise InputError(f"malformed {what} '{text}'") from exc
    if not values:
        raise InputError(f"empty {what}")
    return values


def parse_bounds(text: str) -> tuple[tuple[float, float], ...]:
    """``lo:hi,lo:hi`` per axis."""
    try:
        pairs = tuple(tuple(float(v) for v in part.split(":")) for part in text.split(","))
    except ValueError as exc:
        raise InputError(f"malformed bounds '{text}'") from exc
    if any(len(p) != 2 for p in pairs):
        raise InputError(f"bounds '{text}' need lo:hi per axis")
    return pairs


def parse_region(text: str, metric: str) -> MetricBall:
    """``x1,x2,...:r``."""
    if ":" not in text:
        raise InputError(f"region '{text}' must read center:radius")
    center, radius = text.rsplit(":", 1)
    try:
        return MetricBall(center=parse_floats(center, "region center"), radius=float(radius), metric=metric)
    except ValueError as exc:
        raise InputError(f"malformed region '{text}': {exc}") from exc


def build_measure(
    kind: str,
    n: int,
    a: Optional[float] = None,
    bounds: Optional[str] = None,
    semiaxes: Optional[str] = None,
    measure_file: Optional[Path] = None,
) -> Measure:
    """Measure from a JSON file or from the command-line flags."""
    if measure_file is not None:
        return MeasureRepository().read(measure_file)
    try:
        if kind == "ball":
            return Measure.ball(n, 0.5 if a is None else a)
        if kind == "box":
            box_bounds = parse_bounds(bounds) if bounds else tuple((-1.0, 1.0) for _ in range(n))
            return Measure.box(box_bounds)
        if kind == "ellipsoid":
            if not semiaxes:
                raise InputError("ellipsoid measures need --semiaxes")
            return Measure.ellipsoid(parse_floats(semiaxes, "semiaxes"))
    except ValidationError as exc:
        error = exc.errors()[0]
        raise SchemaError(f"invalid measure: {error['msg']}", field=".".join(str(p) for p in error["loc"])) from exc
    raise InputError(f"unknown measure kind '{kind}'")


def load_family(path: Path) -> PointFamily:
    family = FamilyRepository().read(path)
    if not family.entries:
        raise InputError(f"family in {path} has no levels")
    return family


def measure_for_family(family: PointFamily, measure: Measure) -> Measure:
    if family.n != measure.n:
        raise InputError(f"family dimension {family.n} does not match measure dimension {measure.n}")
    return measure


def make_header(
    command: str,
    config: Optional[dict[str, Any]] = None,
    seeds: Optional[Sequence[int]] = None,
    tolerances: Optional[dict[str, float]] = None,
) -> dict[str, Any]:
    """Output header; paths are reduced to file names so runs are relocatable."""
    cleaned = {key: (Path(value).name if isinstance(value, Path) else value) for key, value in (config or {}).items()}
    return build_header(command, cleaned, seeds, tolerances)


def echo_written(path: Path) -> None:
    typer.echo(f"wrote {path}")


def measure_option():
    return typer.Option("ball", "--measure", help="Measure kind: ball, box or ellipsoid")


def dimension_option():
    return typer.Option(1, "--n", min=1, help="Dimension")


def weight_option():
    return typer.Option(None, "--a", min=0.0, help="Weight exponent of the ball measure (default 1/2)")


def bounds_option():
    return typer.Option(None, "--bounds", help="Box bounds, lo:hi per axis, comma separated")


def semiaxes_option():
    return typer.Option(None, "--semiaxes", help="Ellipsoid semiaxes, comma separated")


def measure_file_option():
    return typer.Option(None, "--measure-file", help="Measure JSON; overrides the measure flags")


def precision_option():
    return typer.Option(None, "--precision", help="Basis assembly precision: double or extended")


def method_option():
    return typer.Option(None, "--method", help="Basis assembly path: auto, cholesky, arnoldi or recurrence")


def check_choice(value: Optional[str], choices: Sequence[str], flag: str) -> Optional[str]:
    if value is not None and value not in choices:
        raise InputError(f"{flag} must be one of {', '.join(choices)} (got '{value}')")
    return value


def measure_config(measure: Measure) -> dict[str, Any]:
    return measure.model_dump(mode="json", exclude_none=True)


def deliver_rows(
    out: Optional[Path],
    rows: Sequence[TableRecord],
    header: dict[str, Any],
    key: str = "rows",
    extra: Optional[dict[str, Any]] = None,
) -> None:
    """Rows to ``--out`` (CSV or JSON by suffix), or as CSV on stdout without it."""
    repository = ReportRepository()
    if out is None:
        typer.echo(repository.render_table(rows, header), nl=False)
        return
    echo_written(repository.write_rows(out, rows, header, key=key, extra=extra))


def deliver_table(out: Optional[Path], rows: Sequence[dict[str, Any]], header: dict[str, Any]) -> None:
    repository = ReportRepository()
    if out is None:
        typer.echo(repository.render_table(rows, header), nl=False)
        return
    echo_written(repository.write_table(out, rows, header))
