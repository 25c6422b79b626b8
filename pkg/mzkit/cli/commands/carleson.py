from pathlib import Path
from typing import List, Optional

import typer

from mzkit.cli import deps
from mzkit.core.config import settings
from mzkit.infrastructure.executor import WorkerPool
from mzkit.models.report import TableRecord
from mzkit.services.diagnostics import carleson_embedding_constant, carleson_ratio, check_level, level_measure
from mzkit.services.polyspace import orthonormal_basis


class CarlesonRow(TableRecord):
    k: int
    atoms: int
    ratio: float
    center: Optional[tuple[float, ...]] = None
    embedding_constant: float


@deps.handle_errors
def run(
    ctx: typer.Context,
    family: Path = typer.Option(..., "--family", help="PointFamily JSON"),
    measure: str = deps.measure_option(),
    a: Optional[float] = deps.weight_option(),
    bounds: Optional[str] = deps.bounds_option(),
    semiaxes: Optional[str] = deps.semiaxes_option(),
    measure_file: Optional[Path] = deps.measure_file_option(),
    reference: str = typer.Option("lebesgue", "--reference", help="Reference volume: lebesgue or weighted"),
    budget: Optional[int] = typer.Option(None, "--budget", min=1, help="Net size cap (default MZKIT_CARLESON_NET_BUDGET)"),
    out: Optional[Path] = typer.Option(None, "--out", help="CSV or JSON; CSV on stdout without it"),
) -> None:
    """Carleson ratio of μ_k = Σ δ_λ / β_k(λ) over a ρ-net, and the embedding constant, per level."""
    fam = deps.load_family(family)
    m = deps.measure_for_family(fam, deps.build_measure(measure, fam.n, a, bounds, semiaxes, measure_file))
    space = orthonormal_basis(m, max(fam.degrees))

    def level(k: int) -> CarlesonRow:
        points = check_level(fam, k, space)
        mu_k = level_measure(points, space, k)
        ratio, center = carleson_ratio(mu_k, k, m, reference, budget)
        return CarlesonRow(
            k=k,
            atoms=mu_k.size,
            ratio=ratio,
            center=center,
            embedding_constant=carleson_embedding_constant(mu_k, space, k),
        )

    with WorkerPool(deps.get_threads(ctx)) as pool:
        rows: List[CarlesonRow] = pool.map_ordered(level, fam.degrees)
    header = deps.make_header(
        "carleson",
        {
            "family": family,
            "measure": deps.measure_config(m),
            "reference": reference,
            "budget": budget or settings.carleson_net_budget,
        },
    )
    deps.deliver_rows(out, rows, header)
