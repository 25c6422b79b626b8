from pathlib import Path
from typing import Optional

import typer

from mzkit.cli import deps
from mzkit.repositories.family import FamilyRepository
from mzkit.services.generators import generate_family

KINDS = ("gauss_1d", "tensor_gauss", "random_separated", "equilibrium_random")


@deps.handle_errors
def run(
    kind: str = typer.Option(..., "--kind", help=f"One of {', '.join(KINDS)}"),
    k: str = typer.Option(..., "--k", help="Degrees, e.g. 1..40 or 10,20,40"),
    n: int = deps.dimension_option(),
    a: Optional[float] = deps.weight_option(),
    epsilon: Optional[float] = typer.Option(None, "--epsilon", help="Separation ε of random_separated (points ε/k apart)"),
    target: Optional[int] = typer.Option(None, "--target", min=1, help="Points per level (default dim P_k)"),
    seed: Optional[int] = typer.Option(None, "--seed", help="Seed of the random kinds (default MZKIT_DEFAULT_SEED)"),
    out: Path = typer.Option(..., "--out", help="PointFamily JSON"),
) -> None:
    """Candidate families; level k of a random kind is drawn from the generator seeded with (seed, k)."""
    deps.check_choice(kind, KINDS, "--kind")
    a = 0.5 if a is None else a
    ks = deps.parse_k_list(k)
    family, report = generate_family(kind, ks, n=n, a=a, epsilon=epsilon, target=target, seed=seed)
    header = deps.make_header(
        "generate",
        {"kind": kind, "n": n, "a": a, "k": ks, "epsilon": epsilon, "target": target},
        seeds=[] if report.seed is None else [report.seed],
    )
    deps.echo_written(FamilyRepository().write(out, family, header, generation=report))
