from pathlib import Path
from typing import List, Optional

import typer
from pydantic import ValidationError
from rich.table import Table

from config import settings
from services.harness_service import run_suite
from utils.helpers import console, echo, exit_with_usage, fmt, option_alpha, option_int_list
from utils.report_writer import write_suite


def cmd_suite(
    measures: List[Path] = typer.Argument(..., help="Centered measure files"),
    n: str = typer.Option("100,200,400,800,1600", "--n", help="Step counts 'n1,n2,...'"),
    alpha: float = typer.Option(settings.DEFAULT_ALPHA, "--alpha", callback=option_alpha, help="Weight exponent in (0, 1/2)"),
    out: Optional[Path] = typer.Option(None, "--out", help="Write the suite summary as JSON"),
    jobs: int = typer.Option(settings.N_JOBS, "--jobs", help="Parallel workers per sweep"),
):
    """Theorem sweep over several measures: C_hat per measure and its spread."""
    n_list = option_int_list(n, "--n")
    if len(n_list) < settings.MIN_SLOPE_POINTS:
        raise typer.BadParameter(f"need at least {settings.MIN_SLOPE_POINTS} values", param_hint="--n")
    try:
        report = run_suite(measures, n_list, alpha, jobs)
    except ValidationError as e:
        exit_with_usage(e)

    table = Table("measure", "C_hat", "status")
    for entry in report.entries:
        table.add_row(entry.measure, fmt(entry.c_hat), entry.failure or "ok")
    console.print(table)
    echo(f"spread: min {fmt(report.c_min)}, max {fmt(report.c_max)}, ratio {fmt(report.ratio)}")
    if out is not None:
        echo(f"wrote: {write_suite(report, out)}")
    if any(entry.failure for entry in report.entries):
        raise typer.Exit(code=1)
