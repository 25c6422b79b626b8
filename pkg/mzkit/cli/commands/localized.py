from pathlib import Path
from typing import Optional

import typer

from mzkit.cli import deps
from mzkit.core.errors import InputError
from mzkit.models.measure import Measure
from mzkit.repositories.report import ReportRepository
from mzkit.services.localized import (
    LocalizedKernel,
    decay_profile,
    diagonal_sandwich,
    integral_estimate_check,
    lipschitz_constant,
    near_diagonal_radius,
    normalization,
)
from mzkit.services.measures import interior_grid

MODES = ("sandwich", "decay", "integral", "near-diagonal", "lipschitz", "normalization")


@deps.handle_errors
def run(
    mode: str = typer.Option("sandwich", "--mode", help=f"One of {', '.join(MODES)}"),
    k: str = typer.Option(..., "--k", help="Degree, or a degree list for --mode integral and lipschitz"),
    n: int = deps.dimension_option(),
    a: Optional[float] = deps.weight_option(),
    x0: Optional[str] = typer.Option(None, "--x0", help="Base point (default: the center)"),
    ray: Optional[str] = typer.Option(None, "--ray", help="Decay direction (default: first axis)"),
    samples: int = typer.Option(400, "--samples", help="Samples along the ray"),
    alpha: float = typer.Option(1.0, "--alpha", help="Christoffel exponent of the integral estimate"),
    gamma: float = typer.Option(4.0, "--gamma", help="Decay exponent of the integral estimate"),
    grid_count: int = typer.Option(21, "--grid", min=1, help="Grid points per axis"),
    threshold: float = typer.Option(0.5, "--threshold", help="Fraction of β_k(y) for --mode near-diagonal"),
    out: Optional[Path] = typer.Option(None, "--out", help="CSV or JSON; CSV on stdout without it"),
) -> None:
    """Localized kernel L_k = Σ â(j/k) P_j on the weighted ball."""
    deps.check_choice(mode, MODES, "--mode")
    a = 0.5 if a is None else a
    ks = deps.parse_k_list(k)
    point = list(deps.parse_floats(x0, "--x0")) if x0 else [0.0] * n
    if len(point) != n:
        raise InputError(f"--x0 needs {n} coordinates")
    config = {"mode": mode, "n": n, "a": a, "k": ks, "x0": point}
    repository = ReportRepository()

    if mode == "integral":
        config.update(alpha=alpha, gamma=gamma, grid=grid_count)
        grid = interior_grid(Measure.ball(n, a), grid_count, margin=0.95)
        table = integral_estimate_check(ks, a, alpha, gamma, grid, n=n)
        header = deps.make_header("localized", config)
        extra = {
            "per_k_max": {str(key): value for key, value in table.per_k_max.items()},
            "growth": table.growth,
            "bounded": table.bounded,
        }
        deps.deliver_rows(out, table.rows, header, extra=extra)
        return

    if mode == "lipschitz":
        constants = {str(degree): lipschitz_constant(LocalizedKernel(n, a, degree), point) for degree in ks}
        header = deps.make_header("localized", config)
        _deliver_values(repository, out, header, {"lipschitz": constants})
        return

    if len(ks) != 1:
        raise InputError(f"--mode {mode} takes a single degree")
    lk = LocalizedKernel(n, a, ks[0])
    if mode == "decay":
        direction = list(deps.parse_floats(ray, "--ray")) if ray else [1.0] + [0.0] * (n - 1)
        config.update(ray=direction, samples=samples)
        profile = decay_profile(lk, point, direction, samples)
        header = deps.make_header("localized", config)
        extra = {"exponent": profile.exponent, "fit_range": list(profile.fit_range)}
        deps.deliver_rows(out, profile.rows, header, extra=extra)
    elif mode == "sandwich":
        config["grid"] = grid_count
        rows = diagonal_sandwich(lk, interior_grid(lk.measure, grid_count))
        header = deps.make_header("localized", config, tolerances={"sandwich": 1e-10})
        deps.deliver_rows(out, rows, header, extra={"holds": all(r.holds for r in rows)})
    elif mode == "near-diagonal":
        config["threshold"] = threshold
        header = deps.make_header("localized", config)
        _deliver_values(repository, out, header, {"epsilon": near_diagonal_radius(lk, point, threshold)})
    else:
        header = deps.make_header("localized", config)
        _deliver_values(repository, out, header, {"normalization": normalization(lk)})


def _deliver_values(repository: ReportRepository, out: Optional[Path], header: dict, values: dict) -> None:
    if out is None:
        for key, value in values.items():
            typer.echo(f"{key}: {value}")
        return
    deps.echo_written(repository.write_report(out, values, header))
