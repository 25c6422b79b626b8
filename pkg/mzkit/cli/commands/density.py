from pathlib import Path
from typing import List, Optional

import typer

from mzkit.cli import deps
from mzkit.core.errors import InputError
from mzkit.services import geometry
from mzkit.services.diagnostics import count_in_balls, density_report, largest_hole


@deps.handle_errors
def run(
    family: Path = typer.Option(..., "--family", help="PointFamily JSON"),
    region: Optional[List[str]] = typer.Option(None, "--region", help="Region center:radius, repeatable"),
    metric: str = typer.Option("euclidean", "--metric", help="Region metric: euclidean, rho_ball or box_proxy"),
    measure: str = deps.measure_option(),
    a: Optional[float] = deps.weight_option(),
    bounds: Optional[str] = deps.bounds_option(),
    semiaxes: Optional[str] = deps.semiaxes_option(),
    measure_file: Optional[Path] = deps.measure_file_option(),
    holes: bool = typer.Option(False, "--holes", help="Also report ball counts and the largest hole per level"),
    multiples: str = typer.Option("1,2,4,8", "--multiples", help="Ball radii M/k for the counts"),
    out: Optional[Path] = typer.Option(None, "--out", help="CSV or JSON; CSV on stdout without it"),
) -> None:
    """#(Λ_k ∩ region) / dim P_k against the equilibrium mass of each region."""
    if not region:
        raise InputError("density needs at least one --region")
    deps.check_choice(metric, ("euclidean", "rho_ball", "box_proxy"), "--metric")
    fam = deps.load_family(family)
    m = deps.measure_for_family(fam, deps.build_measure(measure, fam.n, a, bounds, semiaxes, measure_file))
    regions = [deps.parse_region(text, metric) for text in region]
    rows, trends = density_report(fam, m, regions)
    config = {
        "family": family,
        "measure": deps.measure_config(m),
        "regions": [r.model_dump(mode="json") for r in regions],
        "equilibrium_grade": geometry.equilibrium_grade(m),
    }
    extra = {"trends": [t.model_dump(mode="json") for t in trends]}
    if holes:
        radii = deps.parse_floats(multiples, "multiples")
        config["multiples"] = list(radii)
        origin = [0.0] * fam.n
        counts = [row for k in fam.degrees for row in count_in_balls(fam, k, origin, radii)]
        extra["counts"] = [row.model_dump(mode="json") for row in counts]
        extra["holes"] = [largest_hole(fam, k).model_dump(mode="json") for k in fam.degrees]
    header = deps.make_header("density", config)
    deps.deliver_rows(out, rows, header, extra=extra)
