from pathlib import Path

import typer

from services.tilt_service import solve_tilt
from utils.errors import LcltError
from utils.helpers import echo, exit_with_error, fmt, fmt_matrix, fmt_vector, option_vector, read_measure
from utils.measure_io import dump_measure


def cmd_tilt(
    measure: Path = typer.Argument(..., help="Measure file"),
    xi: str = typer.Option(..., "--xi", help="Target mean 'v1,..,vd'"),
):
    """Solve D log Z(t) = xi and print the rate I(xi) and the tilted measure."""
    m = read_measure(measure)
    target = option_vector(xi, m.dimension, "--xi")
    try:
        solution = solve_tilt(m, target)
    except LcltError as e:
        exit_with_error(e)

    echo(f"xi: {fmt_vector(solution.xi)}")
    echo(f"t: {fmt_vector(solution.t)}")
    echo(f"log Z(t): {fmt(solution.log_z)}")
    echo(f"I(xi): {fmt(solution.rate)}")
    echo(f"V_xi: {fmt_matrix(solution.tilted_cov.matrix)}")
    echo(f"residual: {solution.residual:.3e}")
    echo(f"iterations: {solution.iterations}")
    echo("")
    typer.echo(dump_measure(solution.tilted, comments=[f"tilted to xi = {','.join(fmt(c) for c in solution.xi)}"]), nl=False)
