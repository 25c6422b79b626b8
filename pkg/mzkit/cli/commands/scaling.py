from pathlib import Path
from typing import Optional

import typer

from mzkit.cli import deps
from mzkit.core.errors import InputError
from mzkit.models.measure import Measure
from mzkit.repositories.report import ReportRepository
from mzkit.services.scaling import (
    T_SUPPORTED,
    bessel_profile,
    bessel_zero_distance_test,
    orthogonality_residual_search,
    scaling_error,
    scaling_is_monotone,
)

MODES = ("limit", "zeros", "profile", "search")


def _parse_points(text: str, n: int) -> list[tuple[float, ...]]:
    """``x1,x2;y1,y2;...``"""
    points = [deps.parse_floats(part, "point") for part in text.split(";") if part.strip()]
    if any(len(p) != n for p in points):
        raise InputError(f"every point needs {n} coordinates")
    return points


@deps.handle_errors
def run(
    ctx: typer.Context,
    mode: str = typer.Option("limit", "--mode", help=f"One of {', '.join(MODES)}"),
    n: int = deps.dimension_option(),
    a: Optional[float] = deps.weight_option(),
    k: Optional[str] = typer.Option(None, "--k", help="Degrees for --mode limit, a single degree for search"),
    radius: float = typer.Option(5.0, "--R", help="Half width of the scaled grid [-R, R]^n"),
    grid_count: int = typer.Option(41, "--grid", min=2, help="Grid points per axis"),
    points: Optional[str] = typer.Option(None, "--points", help="Points x1,x2;y1,y2;... for --mode zeros"),
    tol: float = typer.Option(1e-6, "--tol", help="Distance tolerance of --mode zeros"),
    t_max: float = typer.Option(T_SUPPORTED, "--t-max", help="Zero range of --mode profile"),
    count: Optional[int] = typer.Option(None, "--m", help="Point count of --mode search (default k + 1)"),
    seed: Optional[int] = typer.Option(None, "--seed", help="Search seed (default MZKIT_DEFAULT_SEED)"),
    restarts: int = typer.Option(20, "--restarts", min=1, help="Search restarts"),
    max_iter: int = typer.Option(2000, "--max-iter", min=1, help="Iterations per restart"),
    strict: bool = typer.Option(False, "--strict", help="Exit with 2 when the search does not converge"),
    out: Optional[Path] = typer.Option(None, "--out", help="CSV or JSON; CSV on stdout without it"),
) -> None:
    """Bessel scaling limit at the center, zero-distance tests and the orthogonality search."""
    deps.check_choice(mode, MODES, "--mode")
    a = 0.5 if a is None else a
    nu = 0.5 * n
    repository = ReportRepository()

    if mode == "limit":
        if k is None:
            raise InputError("--mode limit needs --k")
        ks = deps.parse_k_list(k)
        m = Measure.ball(n, a)
        rows = scaling_error(m, ks, radius, grid_count)
        header = deps.make_header("scaling", {"mode": mode, "measure": deps.measure_config(m), "k": ks, "R": radius})
        deps.deliver_rows(out, rows, header, extra={"monotone": scaling_is_monotone(rows)})
        return

    if mode == "zeros":
        if points is None:
            raise InputError("--mode zeros needs --points")
        report = bessel_zero_distance_test(_parse_points(points, n), nu, tol)
        header = deps.make_header("scaling", {"mode": mode, "n": n, "nu": nu}, tolerances={"zero_distance": tol})
        if out is None or out.suffix.lower() == ".csv":
            deps.deliver_rows(out, report.pairs, header)
        else:
            deps.echo_written(repository.write_report(out, report, header))
        return

    if mode == "profile":
        profile = bessel_profile(nu, t_max)
        header = deps.make_header("scaling", {"mode": mode, "n": n, "nu": nu, "t_max": t_max})
        if out is None:
            typer.echo(" ".join(format(z, ".17g") for z in profile.zeros))
        else:
            deps.echo_written(repository.write_report(out, profile, header))
        return

    if k is None:
        raise InputError("--mode search needs --k")
    ks = deps.parse_k_list(k)
    if len(ks) != 1:
        raise InputError("--mode search takes a single degree")
    degree = ks[0]
    m_count = degree + 1 if count is None else count
    ledger = orthogonality_residual_search(
        n, a, degree, m_count, seed, restarts, max_iter, threads=deps.get_threads(ctx), strict=strict
    )
    header = deps.make_header(
        "scaling",
        {"mode": mode, "n": n, "a": a, "k": degree, "m": m_count, "restarts": restarts, "max_iter": max_iter},
        seeds=[ledger.seed],
    )
    if out is None or out.suffix.lower() == ".csv":
        deps.deliver_table(out, ledger.csv_rows(), header)
    else:
        deps.echo_written(repository.write_report(out, ledger, header))
