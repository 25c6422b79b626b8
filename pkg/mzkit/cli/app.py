"""
mzkit command-line application.
"""
from typing import Optional

import click
import typer
from typer.core import TyperGroup

from mzkit import __version__
from mzkit.cli.commands import basis, carleson, density, diag, generate, kernel, localized, scaling, separation, transport
from mzkit.cli.deps import CliContext
from mzkit.core.config import settings
from mzkit.core.logging import configure_logging, get_logger

logger = get_logger(__name__)


class MZKitGroup(TyperGroup):
    """Click usage errors are input errors: exit 1 rather than click's 2."""

    def make_context(self, info_name, args, parent=None, **extra):
        try:
            return super().make_context(info_name, args, parent=parent, **extra)
        except click.UsageError as exc:
            exc.exit_code = 1
            raise

    def invoke(self, ctx: click.Context):
        try:
            return super().invoke(ctx)
        except click.UsageError as exc:
            exc.exit_code = 1
            raise


app = typer.Typer(
    name="mzkit",
    cls=MZKitGroup,
    help="Weighted polynomial kernels and sampling diagnostics on the ball and model domains.",
    no_args_is_help=True,
    add_completion=False,
)


def _version(value: bool) -> None:
    if value:
        typer.echo(f"mzkit {__version__}")
        raise typer.Exit()


@app.callback()
def main(
    ctx: typer.Context,
    threads: int = typer.Option(settings.threads, "--threads", min=1, help="Worker threads for per-level work"),
    log_level: Optional[str] = typer.Option(None, "--log-level", help="Log level (default from MZKIT_LOG_LEVEL)"),
    version: bool = typer.Option(False, "--version", callback=_version, is_eager=True, help="Print the version"),
) -> None:
    configure_logging(log_level)
    ctx.obj = CliContext(threads=threads)
    logger.debug("CLI started", command=ctx.invoked_subcommand, threads=threads)


app.command("basis", help="Export the orthonormal basis coefficients of P_k.")(basis.run)
app.command("kernel", help="Tabulate the kernel diagonal against its boundary model.")(kernel.run)
app.command("diag", help="Run every diagnostic over a point family.")(diag.run)
app.command("carleson", help="Carleson ratios of the weighted level measures.")(carleson.run)
app.command("separation", help="Separation constants k * min rho per level.")(separation.run)
app.command("density", help="Counts per region against the equilibrium mass.")(density.run)
app.command("localized", help="Localized kernel checks.")(localized.run)
app.command("transport", help="Transport distance of the interpolation measures.")(transport.run)
app.command("scaling", help="Bessel scaling limit at the center of the ball.")(scaling.run)
app.command("generate", help="Generate candidate point families.")(generate.run)


if __name__ == "__main__":
    app()
