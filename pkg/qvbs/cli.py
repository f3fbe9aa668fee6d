"""
QVBS v1 - Command Line Interface

Parameter scans of the transfer-matrix spectrum and the correlators, and
the oracle verification suite, written as CSV or JSON.

Usage:
    python -m qvbs.cli spectrum --spin 1 --q 1
    python -m qvbs.cli spectrum --spin 4 --q-grid 0.25:4:13:log
    python -m qvbs.cli correlate --spin 1 --q 1 --pair zz --r 2..10 --mode thermo
    python -m qvbs.cli verify --spin 1 --q 0.5,1,2 --L 2..6
    python -m qvbs.cli verify --prop1 --spin 2 --n-max 5
    python -m qvbs.cli schema --output run_report.schema.json

Exit status: 0 when every check passes, 1 when a numerical check fails,
2 on invalid usage (including over-budget requests).
"""

import logging
import sys
from pathlib import Path
from typing import Callable

import click
from rich.console import Console
from rich.progress import Progress, SpinnerColumn, TextColumn
from rich.table import Table

from . import __version__
from .config import AppSettings, get_config, load_env
from .errors import BudgetExceededError, InvalidParameterError
from .models import CheckRow, RunConfig, RunReport
from .oracle import check_budget
from .output import write_report, write_schema
from .sweep import (
    DEFAULT_Q_GRID,
    CorrelatePoint,
    SpectrumPoint,
    VerifyPoint,
    correlate_point,
    lowering_grid,
    lowering_point,
    parse_int_range,
    parse_q_grid,
    parse_q_values,
    run_grid,
    spectrum_point,
    verify_point,
)

console = Console()
err_console = Console(stderr=True)

LOG_FORMAT = "%(asctime)s - %(name)s - %(levelname)s - %(message)s"
MAX_LOWERING_SPIN = 3


def setup_logging(settings: AppSettings) -> None:
    """Configure the root logger once per invocation"""
    level = getattr(logging, settings.log_level.upper(), logging.INFO)
    if settings.log_format.lower() == "rich":
        from rich.logging import RichHandler
        logging.basicConfig(level=level, format="%(message)s", handlers=[RichHandler(console=err_console)], force=True)
    else:
        logging.basicConfig(level=level, format=LOG_FORMAT, stream=sys.stderr, force=True)


def parse_tolerances(items: tuple[str, ...]) -> dict[str, float]:
    """('oracle=1e-9', ...) -> {'oracle': 1e-9}"""
    out = {}
    for item in items:
        name, sep, value = item.partition("=")
        if not sep:
            raise InvalidParameterError(f"tolerance override must be NAME=VALUE, got {item!r}")
        try:
            out[name.strip()] = float(value)
        except ValueError:
            raise InvalidParameterError(f"tolerance {name} is not a number: {value!r}") from None
    return out


def build_config(
    command: str,
    spin: int,
    q_text: str | None,
    q_grid: str | None,
    output_format: str,
    output: Path | None,
    jobs: int | None,
    tol: tuple[str, ...],
    **extra,
) -> RunConfig:
    """Merge flags over settings into a validated RunConfig; bad input is a usage error."""
    cfg = get_config()
    try:
        if q_text and q_grid:
            raise InvalidParameterError("give either --q or --q-grid, not both")
        q_values = parse_q_values(q_text) if q_text else parse_q_grid(q_grid or DEFAULT_Q_GRID)
        path = output or cfg.output_dir / f"{command}.{output_format}"
        return RunConfig(
            command=command,
            spin=spin,
            q_values=q_values,
            output_format=output_format,
            output_path=str(path),
            tolerances=parse_tolerances(tol),
            jobs=jobs or cfg.run.jobs,
            **extra,
        )
    except ValueError as e:
        raise click.UsageError(str(e)) from e


def guard(check: Callable[[], object]) -> None:
    """Run a precondition; argument and budget errors become usage errors."""
    try:
        check()
    except (InvalidParameterError, BudgetExceededError) as e:
        raise click.UsageError(str(e)) from e


def check_spin_budget(spin: int) -> None:
    limit = get_config().budgets.max_spin
    if spin > limit:
        raise BudgetExceededError(f"spin S={spin} exceeds the configured limit {limit}")


def tolerance_items(config: RunConfig) -> tuple[tuple[str, float], ...]:
    return tuple(sorted(config.tolerances.items()))


def run_with_progress(description: str, func, points: list, jobs: int) -> list:
    with Progress(
        SpinnerColumn(),
        TextColumn("[progress.description]{task.description}"),
        console=console,
        transient=True,
    ) as progress:
        progress.add_task(description, total=None)
        return run_grid(func, points, jobs)


def finish(report: RunReport) -> None:
    """Write the report, print failures and exit with the status contract."""
    config = report.config
    path = write_report(report, Path(config.output_path), config.output_format)
    console.print(f"Wrote {config.output_format.upper()} to {path}")
    if report.passed:
        console.print("[bold green]All checks passed[/bold green]")
        return
    console.print("[red]Error:[/red] numerical checks failed")
    failures = [row for row in report.checks if not row.passed] if report.command == "verify" else [
        row for row in report.spectrum if not row.passed
    ]
    for row in failures[:20]:
        name = row.check if isinstance(row, CheckRow) else "spectrum"
        console.print(f"  [red]- {name}[/red] S={row.S} q={row.q:.6g}: {row.detail}")
    if len(failures) > 20:
        console.print(f"  ... and {len(failures) - 20} more")
    sys.exit(1)


def grid_options(func):
    """Options shared by every grid command"""
    options = [
        click.option("--spin", "-S", "spin", required=True, type=click.IntRange(min=1),
                     help="Spin S of every site (S >= 1)"),
        click.option("--q", "q_text", default=None, help="Comma-separated q values, e.g. 0.5,1,2"),
        click.option("--q-grid", "q_grid", default=None,
                     help=f"start:stop:count[:log|lin] (default: {DEFAULT_Q_GRID})"),
        click.option("--format", "output_format", type=click.Choice(["csv", "json"]), default="csv",
                     help="Output format (default: csv)"),
        click.option("--output", "-o", type=click.Path(dir_okay=False, path_type=Path), default=None,
                     help="Output file (default: $QVBS_OUTPUT_DIR/<command>.<format>)"),
        click.option("--jobs", "-j", type=click.IntRange(min=1), default=None,
                     help="Worker processes (default: $QVBS_JOBS)"),
        click.option("--tol", "tol", multiple=True, help="Tolerance override NAME=VALUE, repeatable"),
    ]
    for option in reversed(options):
        func = option(func)
    return func


@click.group()
@click.version_option(version=__version__)
@click.option("--env-file", default=".env", help="dotenv file with QVBS_* settings")
def cli(env_file: str):
    """QVBS - q-deformed VBS chain spectrum and correlators"""
    load_env(env_file)
    setup_logging(get_config().app)


@cli.command()
@grid_options
def spectrum(spin, q_text, q_grid, output_format, output, jobs, tol):
    """
    Closed-form spectrum of G checked against a numeric eigensolve.

    One row per q with the eigenvalues, the number of blocks each was
    found in, and the eigenvector, intertwiner and norm residuals.
    """
    config = build_config("spectrum", spin, q_text, q_grid, output_format, output, jobs, tol)
    guard(lambda: check_spin_budget(config.spin))

    points = [SpectrumPoint(S=config.spin, q=q, tolerances=tolerance_items(config)) for q in config.q_values]
    rows = run_with_progress(f"Spectrum S={config.spin} over {len(points)} q values...", spectrum_point, points,
                             config.jobs)

    table = Table(title=f"Spectrum S={config.spin}")
    table.add_column("q", justify="right", style="cyan")
    table.add_column("lambda_l", style="green")
    table.add_column("degeneracy")
    table.add_column("max residual", justify="right")
    table.add_column("passed")
    for row in rows:
        residual = max(row.max_eigenvalue_error, row.max_eigen_residual, row.max_intertwiner_residual,
                       row.max_norm_residual)
        table.add_row(
            f"{row.q:.6g}",
            ", ".join(f"{value:.8g}" for value in row.eigenvalues),
            ", ".join(str(count) for count in row.degeneracies),
            f"{residual:.2e}",
            "[green]yes[/green]" if row.passed else "[red]no[/red]",
        )
    console.print(table)

    finish(RunReport(
        version=__version__, command="spectrum", config=config,
        passed=all(row.passed for row in rows), spectrum=rows,
    ))


@cli.command()
@grid_options
@click.option("--pair", type=click.Choice(["zz", "pm"]), default="zz", help="S^z S^z or S^+ S^- (default: zz)")
@click.option("--mode", type=click.Choice(["finite", "thermo", "asymptotic", "both", "all"]), default="thermo",
              help="finite L, infinite chain, large-r form; both = finite and thermo with a gap column")
@click.option("--L", "lengths", default="20", help="Chain lengths for finite mode, e.g. 8..16 or 12,16 (default: 20)")
@click.option("--r", "separations", default="2..10", help="Sites r of the second operator, 2 <= r, and r <= L in finite modes (default: 2..10)")
def correlate(spin, q_text, q_grid, output_format, output, jobs, tol, pair, mode, lengths, separations):
    """
    Two-point functions <A_1 B_r> in long format, ready for plotting.

    Each row carries the value, ln|value|, the ratio to the value at r-1
    and the correlation length fitted over its series.
    """
    try:
        parsed_lengths = parse_int_range(lengths)
        parsed_separations = parse_int_range(separations)
    except InvalidParameterError as e:
        raise click.UsageError(str(e)) from e
    config = build_config(
        "correlate", spin, q_text, q_grid, output_format, output, jobs, tol,
        pair=pair, mode=mode, lengths=parsed_lengths, separations=parsed_separations,
    )
    guard(lambda: check_spin_budget(config.spin))

    points = [
        CorrelatePoint(S=config.spin, q=q, pair=config.pair, mode=config.mode,
                       lengths=tuple(config.lengths), separations=tuple(config.separations))
        for q in config.q_values
    ]
    series = run_with_progress(f"Correlators S={config.spin} pair={config.pair}...", correlate_point, points,
                               config.jobs)
    rows = [row for block in series for row in block]
    console.print(f"[green]{len(rows)} rows[/green] over {len(points)} q values, mode {config.mode}")

    finish(RunReport(version=__version__, command="correlate", config=config, passed=True, correlators=rows))


@cli.command()
@grid_options
@click.option("--L", "lengths", default="2..6", help="Chain lengths for the oracle checks (default: 2..6)")
@click.option("--seed", type=int, default=None, help="Seed of the sampled identity checks (default: $QVBS_SEED)")
@click.option("--prop1", is_flag=True, help="Run the lowering-operator grid on two sites instead")
@click.option("--n-max", "n_max", type=click.IntRange(min=0), default=None,
              help="Largest lowering power in the --prop1 grid (default: 2J+1)")
def verify(spin, q_text, q_grid, output_format, output, jobs, tol, lengths, seed, prop1, n_max):
    """
    Cross-check every closed form against the brute-force oracle.

    Writes one row per named check with its worst residual and exits 1
    if any check fails.
    """
    cfg = get_config()
    try:
        parsed_lengths = [] if prop1 else parse_int_range(lengths)
    except InvalidParameterError as e:
        raise click.UsageError(str(e)) from e
    config = build_config(
        "verify", spin, q_text, q_grid, output_format, output, jobs, tol,
        lengths=parsed_lengths, seed=cfg.run.seed if seed is None else seed, prop1=prop1, n_max=n_max,
    )

    if config.prop1:
        if config.spin > MAX_LOWERING_SPIN:
            raise click.UsageError(f"--prop1 runs for 1 <= S <= {MAX_LOWERING_SPIN}, got S={config.spin}")
        tolerance = config.tolerances.get("proposition", cfg.tolerances.proposition)
        points = lowering_grid(config.spin, config.q_values, config.n_max, tolerance)
        rows = run_with_progress(f"Lowering grid S={config.spin}, {len(points)} cases...", lowering_point, points,
                                 config.jobs)
    else:
        guard(lambda: check_spin_budget(config.spin))
        for L in config.lengths:
            guard(lambda: check_budget(config.spin, L))
        points = [
            VerifyPoint(S=config.spin, q=q, lengths=tuple(config.lengths), tolerances=tolerance_items(config),
                        seed=config.seed, index=index)
            for index, q in enumerate(config.q_values)
        ]
        blocks = run_with_progress(f"Verifying S={config.spin} over {len(points)} q values...", verify_point,
                                   points, config.jobs)
        rows = [row for block in blocks for row in block]

    summary: dict[str, list[CheckRow]] = {}
    for row in rows:
        summary.setdefault(row.check, []).append(row)
    table = Table(title=f"Checks S={config.spin}")
    table.add_column("Check", style="cyan")
    table.add_column("Cases", justify="right")
    table.add_column("Max residual", justify="right")
    table.add_column("Failed", justify="right")
    for name, group in summary.items():
        failed = sum(1 for row in group if not row.passed)
        table.add_row(
            name,
            str(len(group)),
            f"{max(row.max_residual for row in group):.2e}",
            f"[red]{failed}[/red]" if failed else "0",
        )
    console.print(table)

    finish(RunReport(
        version=__version__, command="verify", config=config,
        passed=all(row.passed for row in rows), checks=rows,
    ))


@cli.command()
@click.option("--output", "-o", type=click.Path(dir_okay=False, path_type=Path), default=None,
              help="Schema file (default: $QVBS_OUTPUT_DIR/run_report.schema.json)")
def schema(output: Path | None):
    """Write the JSON Schema that every JSON report validates against."""
    path = write_schema(output or get_config().output_dir / "run_report.schema.json")
    console.print(f"Wrote schema to {path}")


def main():
    """Entry point for the CLI"""
    cli()


if __name__ == "__main__":
    main()
