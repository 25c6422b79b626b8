from pathlib import Path
from typing import Optional

import typer

from mzkit.cli import deps
from mzkit.models.report import TableRecord
from mzkit.services.diagnostics import separation_constant


class SeparationRow(TableRecord):
    k: int
    count: int
    separation: float


@deps.handle_errors
def run(
    family: Path = typer.Option(..., "--family", help="PointFamily JSON"),
    measure: str = deps.measure_option(),
    a: Optional[float] = deps.weight_option(),
    bounds: Optional[str] = deps.bounds_option(),
    semiaxes: Optional[str] = deps.semiaxes_option(),
    measure_file: Optional[Path] = deps.measure_file_option(),
    out: Optional[Path] = typer.Option(None, "--out", help="CSV or JSON; CSV on stdout without it"),
) -> None:
    """k times the smallest pairwise distance of each level (0 on coincident points)."""
    fam = deps.load_family(family)
    m = deps.measure_for_family(fam, deps.build_measure(measure, fam.n, a, bounds, semiaxes, measure_file))
    rows = [SeparationRow(k=k, count=fam.level(k).count, separation=separation_constant(fam, k, m)) for k in fam.degrees]
    header = deps.make_header("separation", {"family": family, "measure": deps.measure_config(m)})
    deps.deliver_rows(out, rows, header)
