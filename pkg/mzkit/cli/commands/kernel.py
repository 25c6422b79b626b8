from pathlib import Path
from typing import Optional

import typer

from mzkit.cli import deps
from mzkit.core.config import settings
from mzkit.repositories.report import ReportRepository
from mzkit.services.measures import interior_grid
from mzkit.services.polyspace import diagonal_estimate_ratio, orthonormal_basis, reproduction_residual


@deps.handle_errors
def run(
    k: str = typer.Option(..., "--k", help="Degrees, e.g. 5,10,20 or 1..40"),
    measure: str = deps.measure_option(),
    n: int = deps.dimension_option(),
    a: Optional[float] = deps.weight_option(),
    bounds: Optional[str] = deps.bounds_option(),
    semiaxes: Optional[str] = deps.semiaxes_option(),
    measure_file: Optional[Path] = deps.measure_file_option(),
    grid_count: int = typer.Option(50, "--grid", min=1, help="Grid points per axis"),
    precision: Optional[str] = deps.precision_option(),
    method: Optional[str] = deps.method_option(),
    check: bool = typer.Option(False, "--check", help="Also report the reproduction residual at the largest k"),
    seed: Optional[int] = typer.Option(None, "--seed", help="Seed of the reproduction check"),
    out: Path = typer.Option(..., "--out", help="Report JSON, or CSV of the per-point rows"),
) -> None:
    """β_k(x) over min(k^n / d(x)^a, k^(n + 2a)) on an interior grid."""
    deps.check_choice(precision, deps.PRECISIONS, "--precision")
    deps.check_choice(method, deps.METHODS, "--method")
    m = deps.build_measure(measure, n, a, bounds, semiaxes, measure_file)
    ks = deps.parse_k_list(k)
    table = diagonal_estimate_ratio(m, ks, interior_grid(m, grid_count), precision, method)
    config = {"measure": deps.measure_config(m), "k": ks, "grid": grid_count}
    seeds: list[int] = []
    extra: dict[str, float] = {}
    if check:
        seed = settings.default_seed if seed is None else seed
        seeds.append(seed)
        residual = reproduction_residual(orthonormal_basis(m, ks[-1], precision, method), seed=seed)
        extra["reproduction_residual"] = residual
    header = deps.make_header("kernel", config, seeds)
    repository = ReportRepository()
    if out.suffix.lower() == ".csv":
        path = repository.write_table(out, table.rows, header)
    else:
        path = repository.write_report(out, {**table.model_dump(mode="json"), "spread": table.spread, **extra}, header)
    deps.echo_written(path)
