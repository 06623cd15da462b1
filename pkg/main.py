"""CLI entry point for grover-cycle-walk."""

import logging
try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib
from pathlib import Path
from typing import Any, Callable, Optional

import typer
from pydantic import ValidationError

from src.cyclewalk.errors import CycleWalkError, DegeneratePointError, QuadratureError, WindowOverflowError
from src.cyclewalk.models import RunConfig
from src.cyclewalk.presets import PRESET_GRAPH
from src.cyclewalk.settings import LOG_LEVEL
from src.launcher import Launcher, render

logging.basicConfig(level=LOG_LEVEL)
logger = logging.getLogger("cyclewalk")

app = typer.Typer(help="Grover walks on the cycle-with-tails graph and the periodic cycle chain")

EXIT_VERIFICATION_FAILED = 1
EXIT_BAD_INPUT = 2
EXIT_NUMERIC = 3

ConfigOption = typer.Option(None, "--config", help="TOML file whose [config] table supplies defaults")
PresetOption = typer.Option(None, help="Named initial state: case-i, case-ii, fig3a, fig3b or uniform")
InitialOption = typer.Option(None, help="JSON initial-state file (or a preset name)")
RadiusOption = typer.Option(None, help="Window radius (default: wide enough for t_max)")
OutOption = typer.Option(None, help="Output path")


def parse_toml(path: Path) -> dict[str, Any]:
    """Read the [config] table of a TOML run file."""
    with open(path, "rb") as f:
        data = tomllib.load(f)
    table = data.get("config", {}) or {}
    if not isinstance(table, dict):
        raise ValueError(f"[config] in {path} must be a table")
    return table


def build_config(command: str, config_path: Optional[Path], **flags: Any) -> RunConfig:
    """Merge TOML defaults with explicitly given flags; flags win."""
    values = parse_toml(config_path) if config_path else {}
    initial = flags.get("initial")
    if initial in PRESET_GRAPH and flags.get("preset") is None and not Path(initial).exists():
        flags["preset"], flags["initial"] = initial, None
    values.update({key: value for key, value in flags.items() if value is not None})
    values["command"] = command
    return RunConfig.model_validate(values)


def _execute(command: str, config_path: Optional[Path], workflow: Callable[[Launcher, RunConfig], Any], **flags):
    try:
        config = build_config(command, config_path, **flags)
        return workflow(Launcher(), config)
    except (WindowOverflowError, QuadratureError, DegeneratePointError) as e:
        typer.echo(f"Error: {e}", err=True)
        raise typer.Exit(EXIT_NUMERIC)
    except (CycleWalkError, ValidationError, ValueError, OSError, tomllib.TOMLDecodeError) as e:
        typer.echo(f"Error: {e}", err=True)
        raise typer.Exit(EXIT_BAD_INPUT)


def _banner(title: str) -> None:
    typer.echo("=" * 60)
    typer.echo(title)
    typer.echo("=" * 60)


@app.command()
def simulate(
    preset: Optional[str] = PresetOption,
    initial: Optional[str] = InitialOption,
    graph: Optional[str] = typer.Option(None, help="Expected graph: tilde-c4 or c4-prime"),
    radius: Optional[int] = RadiusOption,
    t_max: Optional[int] = typer.Option(None, "--t-max", help="Number of steps (default 200)"),
    out: Optional[str] = typer.Option(None, help="Distribution CSV (default distribution.csv); summary goes next to it"),
    config: Optional[Path] = ConfigOption,
):
    """Evolve an initial state and write the position law at every time."""
    summary = _execute(
        "simulate", config, Launcher.simulate,
        preset=preset, initial=initial, graph=graph, radius=radius, t_max=t_max, out=out,
    )
    _banner(f"Simulation on {summary.graph} (radius {summary.radius}, t_max {summary.t_max})")
    typer.echo(render(summary))


@app.command()
def rates(
    preset: Optional[str] = PresetOption,
    initial: Optional[str] = InitialOption,
    radius: Optional[int] = RadiusOption,
    t_max: Optional[int] = typer.Option(None, "--t-max", help="Step limit (default 200)"),
    out: Optional[str] = OutOption,
    config: Optional[Path] = ConfigOption,
):
    """Reflected, trapped and transmitted mass on the cycle with tails."""
    result = _execute(
        "rates", config, Launcher.rates,
        preset=preset, initial=initial, radius=radius, t_max=t_max, out=out,
    )
    typer.echo(render(result))


@app.command()
def localize(
    preset: Optional[str] = PresetOption,
    initial: Optional[str] = InitialOption,
    out: Optional[str] = OutOption,
    config: Optional[Path] = ConfigOption,
):
    """Trapped mass of an initial state and its weight on each cycle eigenvector."""
    result = _execute("localize", config, Launcher.localize, preset=preset, initial=initial, out=out)
    typer.echo(render(result))


@app.command()
def spectrum(
    grid: Optional[int] = typer.Option(None, help="Number of k-points (multiple of 4, default 4096)"),
    out: Optional[str] = OutOption,
    config: Optional[Path] = ConfigOption,
):
    """Band eigenvalues, walk eigenvalues and velocities on a uniform k-grid."""
    text = _execute("spectrum", config, Launcher.spectrum, grid=grid, out=out)
    if not out:
        typer.echo(text, nl=False)


@app.command()
def density(
    initial: Optional[str] = typer.Option(None, help="JSON initial-state file or 'uniform'"),
    preset: Optional[str] = PresetOption,
    grid: Optional[int] = typer.Option(None, help="Number of k-points (multiple of 4, default 16384)"),
    out: Optional[str] = typer.Option(None, help="Curves CSV (default curves.csv); sidecar JSON goes next to it"),
    cdf_at: Optional[str] = typer.Option(None, "--cdf-at", help="Comma-separated points at which to report the CDF"),
    config: Optional[Path] = ConfigOption,
):
    """Limit density of X_t / t on the periodic chain."""
    sidecar = _execute(
        "density", config, Launcher.density,
        initial=initial, preset=preset, grid=grid, out=out, cdf_at=cdf_at,
    )
    typer.echo(render(sidecar))


@app.command()
def verify(
    seed: Optional[int] = typer.Option(None, help="Seed for the random-state criteria (default 0)"),
    only: Optional[str] = typer.Option(None, help="Comma-separated criteria to run"),
    out: Optional[str] = OutOption,
    config: Optional[Path] = ConfigOption,
):
    """Run the acceptance criteria and report measured against expected values."""
    report = _execute("verify", config, Launcher.verify, seed=seed, only=only, out=out)
    typer.echo(render(report))
    if not report.passed:
        failed = ", ".join(c.name for c in report.criteria if not c.passed)
        typer.echo(f"Failed criteria: {failed}", err=True)
        raise typer.Exit(EXIT_VERIFICATION_FAILED)


if __name__ == "__main__":
    app()
