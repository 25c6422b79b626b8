from pathlib import Path
from typing import Optional

import typer

from mzkit.cli import deps
from mzkit.repositories.report import ReportRepository
from mzkit.services.polyspace import export_coefficients, orthonormal_basis


@deps.handle_errors
def run(
    k: int = typer.Option(..., "--k", min=0, help="Degree"),
    measure: str = deps.measure_option(),
    n: int = deps.dimension_option(),
    a: Optional[float] = deps.weight_option(),
    bounds: Optional[str] = deps.bounds_option(),
    semiaxes: Optional[str] = deps.semiaxes_option(),
    measure_file: Optional[Path] = deps.measure_file_option(),
    precision: Optional[str] = deps.precision_option(),
    method: Optional[str] = deps.method_option(),
    out: Path = typer.Option(..., "--out", help="Coefficient CSV"),
) -> None:
    """Orthonormal basis of P_k as monomial coefficients in graded-lex order."""
    deps.check_choice(precision, deps.PRECISIONS, "--precision")
    deps.check_choice(method, deps.METHODS, "--method")
    m = deps.build_measure(measure, n, a, bounds, semiaxes, measure_file)
    space = orthonormal_basis(m, k, precision, method)
    labels, coeffs = export_coefficients(space)
    header = deps.make_header(
        "basis",
        {"measure": deps.measure_config(m), "k": k, "precision": space.precision, "method": space.method},
    )
    deps.echo_written(ReportRepository().write_coefficients(out, labels, coeffs, header))
