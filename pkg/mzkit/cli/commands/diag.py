from pathlib import Path
from typing import List, Optional

import typer

from mzkit.cli import deps
from mzkit.core.config import settings
from mzkit.core.errors import InputError
from mzkit.repositories.report import ReportRepository
from mzkit.services.diagnostics import DUAL_EIGMIN, run_diagnostics

REFERENCES = ("lebesgue", "weighted")
METRICS = ("euclidean", "rho_ball", "box_proxy")


@deps.handle_errors
def run(
    ctx: typer.Context,
    family: Path = typer.Option(..., "--family", help="PointFamily JSON"),
    measure: str = deps.measure_option(),
    a: Optional[float] = deps.weight_option(),
    bounds: Optional[str] = deps.bounds_option(),
    semiaxes: Optional[str] = deps.semiaxes_option(),
    measure_file: Optional[Path] = deps.measure_file_option(),
    region: Optional[List[str]] = typer.Option(None, "--region", help="Density region center:radius, repeatable"),
    metric: str = typer.Option("euclidean", "--metric", help="Region metric: euclidean, rho_ball or box_proxy"),
    reference: str = typer.Option("lebesgue", "--reference", help="Carleson reference: lebesgue or weighted"),
    precision: Optional[str] = deps.precision_option(),
    method: Optional[str] = deps.method_option(),
    out: Path = typer.Option(..., "--out", help="DiagnosticsReport JSON"),
) -> None:
    """Separation, Carleson, Riesz and frame bounds for every level, plus density per region."""
    deps.check_choice(precision, deps.PRECISIONS, "--precision")
    deps.check_choice(method, deps.METHODS, "--method")
    deps.check_choice(reference, REFERENCES, "--reference")
    deps.check_choice(metric, METRICS, "--metric")
    fam = deps.load_family(family)
    m = deps.measure_for_family(fam, deps.build_measure(measure, fam.n, a, bounds, semiaxes, measure_file))
    regions = [deps.parse_region(text, metric) for text in region or []]
    if reference == "weighted" and m.kind != "ball":
        raise InputError("the weighted Carleson reference is defined for ball measures")
    report = run_diagnostics(
        fam, m, regions, reference=reference, precision=precision, method=method, threads=deps.get_threads(ctx)
    )
    header = deps.make_header(
        "diag",
        {
            "family": family,
            "measure": deps.measure_config(m),
            "regions": [r.model_dump(mode="json") for r in regions],
            "reference": reference,
            "carleson_net_budget": settings.carleson_net_budget,
        },
        tolerances={"dual_eigmin": DUAL_EIGMIN},
    )
    deps.echo_written(ReportRepository().write_report(out, report, header))
