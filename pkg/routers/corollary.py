from pathlib import Path
from typing import Optional

import typer
from rich.table import Table

from services.harness_service import corollary_table
from utils.errors import LcltError
from utils.helpers import console, exit_with_error, fmt, option_int_list, read_measure


def cmd_corollary(
    measure: Path = typer.Argument(..., help="Measure file"),
    n: str = typer.Option("50,100,200,400,800,1600", "--n", help="Step counts 'n1,n2,...'"),
    L: Optional[float] = typer.Option(None, "--L", help="Override the constant L"),
):
    """Exact H^{*n}(nE) against (2 pi n)^{-d/2} (det V)^{-1/2} (1 + L/n), scaled by n^{(d+3)/2}."""
    n_list = option_int_list(n, "--n")
    m = read_measure(measure)
    try:
        rows = corollary_table(m, n_list, L)
    except LcltError as e:
        exit_with_error(e)

    table = Table("n", "x = nE", "exact", "approximant", "scaled diff")
    for row in rows:
        if row.skipped:
            table.add_row(str(row.n), "skipped (nE not integral)", "-", "-", "-")
            continue
        table.add_row(str(row.n), ",".join(str(c) for c in row.x), fmt(row.exact), fmt(row.value), fmt(row.scaled_diff))
    console.print(table)
