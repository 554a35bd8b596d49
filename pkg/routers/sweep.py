from pathlib import Path

import typer
from pydantic import ValidationError
from rich.table import Table

from config import settings
from models.harness import SweepConfig, SweepMode
from services.harness_service import run_sweep
from utils.errors import LcltError
from utils.helpers import console, echo, exit_with_error, exit_with_usage, fmt, option_int_list, read_measure
from utils.report_writer import write_report


def cmd_sweep(
    measure: Path = typer.Argument(..., help="Measure file"),
    n: str = typer.Option(..., "--n", help="Step counts 'n1,n2,...' (at least five, increasing)"),
    alpha: float = typer.Option(settings.DEFAULT_ALPHA, "--alpha", help="Weight exponent in (0, 1/2)"),
    mode: SweepMode = typer.Option(SweepMode.THEOREM, "--mode", help="Approximant"),
    out: Path = typer.Option(Path("report"), "--out", help="Output prefix for .csv and .json"),
    jobs: int = typer.Option(settings.N_JOBS, "--jobs", help="Parallel workers"),
):
    """Error sweep over n with log-log slope fit; writes CSV and JSON reports."""
    try:
        config = SweepConfig(
            measure_path=measure,
            n_list=option_int_list(n, "--n"),
            alpha=alpha,
            mode=mode,
            output=out,
            n_jobs=jobs,
        )
    except ValidationError as e:
        exit_with_usage(e)

    m = read_measure(config.measure_path)
    try:
        report = run_sweep(m, config)
    except LcltError as e:
        exit_with_error(e)
    paths = write_report(report, config.output)

    table = Table("n", "sup |err|", "argmax x", "E(n)", "skipped")
    for row in report.rows:
        table.add_row(
            str(row.n), fmt(row.sup_abs_err), ",".join(str(c) for c in row.argmax_x), fmt(row.weighted_err), str(row.skipped_cells)
        )
    console.print(table)
    echo(f"slope: {fmt(report.slope)} +/- {fmt(report.slope_stderr)}")
    if report.c_hat is not None:
        echo(f"C_hat: {fmt(report.c_hat)}")
    echo(f"wrote: {', '.join(str(p) for p in paths)}")
    if not report.ok:
        echo(f"failed: {report.failure}")
        raise typer.Exit(code=1)
