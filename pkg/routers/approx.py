from pathlib import Path

import typer

from config import settings
from models.harness import ApproxMode
from services.harness_service import approx_row
from utils.errors import LcltError
from utils.helpers import echo, exit_with_error, fmt, option_alpha, option_vector, read_measure


def cmd_approx(
    measure: Path = typer.Argument(..., help="Measure file"),
    n: int = typer.Option(..., "--n", min=1, help="Number of steps"),
    x: str = typer.Option(..., "--x", help="Lattice point 'c1,..,cd'"),
    mode: ApproxMode = typer.Option(ApproxMode.LEMMA, "--mode", help="Approximant"),
    alpha: float = typer.Option(settings.DEFAULT_ALPHA, "--alpha", callback=option_alpha, help="Weight exponent in (0, 1/2)"),
):
    """Compare the exact n-step probability at x with one approximant."""
    m = read_measure(measure)
    point = option_vector(x, m.dimension, "--x", integral=True)
    try:
        row = approx_row(m, n, point, mode, alpha)
    except LcltError as e:
        exit_with_error(e)

    echo(f"n: {row.n}")
    echo(f"x: {','.join(str(c) for c in row.x)}")
    echo(f"mode: {row.mode.value}")
    echo(f"exact (dp): {fmt(row.exact_dp)}")
    echo(f"exact (dft): {fmt(row.exact_dft)}")
    echo(f"approximant: {fmt(row.approximant)}")
    echo(f"abs error: {fmt(row.abs_err)}")
    echo(f"weight n^(-1-alpha) phi_(2dl^2n)(x): {fmt(row.weight)}")
