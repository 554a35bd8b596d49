from pathlib import Path

import typer

from services.edgeworth_service import build_model, dump_model
from utils.errors import LcltError
from utils.helpers import exit_with_error, read_measure


def cmd_model(measure: Path = typer.Argument(..., help="Measure file")):
    """Print the Edgeworth model (cumulants, correction polynomials, L) as JSON."""
    m = read_measure(measure)
    try:
        text = dump_model(build_model(m))
    except LcltError as e:
        exit_with_error(e)
    typer.echo(text)
