"""`becprobe` command line: run, validate and list experiment presets."""

from pathlib import Path

import typer
from rich.console import Console
from rich.table import Table

from .errors import BecprobeError, ExperimentError, exit_code_for
from .experiments import list_presets, resolve_config, validate_experiment
from .runtime import install_rich_uncaught_exceptions, load_env, print_colored_traceback

console = Console()
err_console = Console(stderr=True)

cli_app = typer.Typer(
    help="becprobe - continuously imaged 1D condensates",
    invoke_without_command=False,
    no_args_is_help=True,
)


def _fail(error: BaseException) -> typer.Exit:
    if isinstance(error, ExperimentError):
        err_console.print(f"[bold red]{error.args[0]}[/bold red]: {error.original_error}")
        err_console.print(f"run dir: {error.run_dir} (see becprobe.log and manifest.json)")
    elif isinstance(error, BecprobeError):
        err_console.print(f"[bold red]error[/bold red]: {error}")
    else:
        print_colored_traceback(error)
    return typer.Exit(code=exit_code_for(error))


@cli_app.command()
def run(
    config: str = typer.Argument(..., help="Preset name, TOML config file, manifest.json or run directory"),
    seed: int | None = typer.Option(None, "--seed", "-s", help="Override the master seed"),
    out: Path | None = typer.Option(None, "--out", "-o", help="Write the run bundle here"),
    threads: int | None = typer.Option(None, "--threads", "-t", help="Worker threads for ensembles"),
    override: list[str] = typer.Option([], "--override", "-O", help="key=value (dotted keys, JSON values)"),
    force: bool = typer.Option(False, "--force", "-f", help="Rerun even if a complete run exists"),
) -> None:
    """Run an experiment and write its outputs and manifest."""
    if threads is not None and threads < 1:
        raise typer.BadParameter("--threads must be at least 1")
    try:
        experiment, preset = resolve_config(config, override)
        if seed is not None:
            experiment = experiment.with_seed(seed)
        directory = experiment.run(preset=preset, threads=threads, out=out, force=force)
    except Exception as e:
        raise _fail(e) from e
    console.print(str(directory))


@cli_app.command()
def validate(
    config: str = typer.Argument(..., help="Preset name, TOML config file, manifest.json or run directory"),
    override: list[str] = typer.Option([], "--override", "-O", help="key=value (dotted keys, JSON values)"),
    physics: bool = typer.Option(True, "--physics/--schema-only", help="Also check grid, step size and coverage"),
) -> None:
    """Check a config without running it. Exits 2 if there are errors."""
    try:
        experiment, _ = resolve_config(config, override)
        report = validate_experiment(experiment, physics=physics)
    except Exception as e:
        raise _fail(e) from e

    if not report.issues:
        console.print(f"[green]ok[/green] {report.experiment} {report.config_hash}")
        return
    table = Table(title=f"{report.experiment} {report.config_hash}")
    table.add_column("severity")
    table.add_column("field")
    table.add_column("message")
    for issue in report.issues:
        style = "red" if issue.severity == "error" else "yellow"
        table.add_row(f"[{style}]{issue.severity}[/{style}]", issue.field, issue.message)
    console.print(table)
    if not report.ok:
        raise typer.Exit(code=2)


@cli_app.command()
def presets() -> None:
    """List the shipped presets."""
    table = Table(title="becprobe presets")
    table.add_column("name", style="bold")
    table.add_column("experiment")
    table.add_column("description")
    table.add_column("provenance")
    for info in list_presets():
        table.add_row(info.name, info.experiment, info.description, info.provenance)
    console.print(table)


def cli() -> None:
    """CLI entry point."""
    load_env()
    install_rich_uncaught_exceptions()
    cli_app()


if __name__ == "__main__":
    cli()
