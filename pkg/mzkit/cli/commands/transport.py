from pathlib import Path
from typing import Optional

import typer

from mzkit.cli import deps
from mzkit.core.errors import InputError
from mzkit.services.transport import MASS_TOLERANCE, moment_table, transport_table


@deps.handle_errors
def run(
    ctx: typer.Context,
    family: Optional[Path] = typer.Option(None, "--family", help="PointFamily JSON for the transport gap table"),
    moment: bool = typer.Option(False, "--moment", help="Tabulate k times the off-diagonal second moment instead"),
    k: Optional[str] = typer.Option(None, "--k", help="Degrees of the moment table, e.g. 5..40"),
    measure: str = deps.measure_option(),
    n: int = deps.dimension_option(),
    a: Optional[float] = deps.weight_option(),
    bounds: Optional[str] = deps.bounds_option(),
    semiaxes: Optional[str] = deps.semiaxes_option(),
    measure_file: Optional[Path] = deps.measure_file_option(),
    quad_order: Optional[int] = typer.Option(None, "--quad-order", min=1, help="Quadrature order of the continuous side"),
    precision: Optional[str] = deps.precision_option(),
    method: Optional[str] = deps.method_option(),
    out: Optional[Path] = typer.Option(None, "--out", help="CSV or JSON; CSV on stdout without it"),
) -> None:
    """W1 between Σ δ_λ / β_k(λ) and the subspace density, or the off-diagonal moment trend."""
    deps.check_choice(precision, deps.PRECISIONS, "--precision")
    deps.check_choice(method, deps.METHODS, "--method")
    if moment:
        if k is None:
            raise InputError("--moment needs --k")
        m = deps.build_measure(measure, n, a, bounds, semiaxes, measure_file)
        ks = deps.parse_k_list(k)
        rows = moment_table(m, ks, precision, method)
        header = deps.make_header("transport", {"mode": "moment", "measure": deps.measure_config(m), "k": ks})
        deps.deliver_rows(out, rows, header)
        return
    if family is None:
        raise InputError("transport needs --family, or --moment with --k")
    fam = deps.load_family(family)
    m = deps.measure_for_family(fam, deps.build_measure(measure, fam.n, a, bounds, semiaxes, measure_file))
    rows = transport_table(fam, m, quad_order, precision, method, threads=deps.get_threads(ctx))
    header = deps.make_header(
        "transport",
        {"mode": "gap", "family": family, "measure": deps.measure_config(m), "quad_order": quad_order},
        tolerances={"mass": MASS_TOLERANCE},
    )
    deps.deliver_rows(out, rows, header)
