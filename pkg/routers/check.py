from pathlib import Path
from typing import Optional
import logging

import typer

from services.measure_service import validate
from utils.errors import LcltError
from utils.helpers import echo, exit_with_error, fmt, fmt_vector, read_measure, yes_no

logger = logging.getLogger(__name__)


def cmd_check(
    measure: Path = typer.Argument(..., help="Measure file"),
    cap: Optional[int] = typer.Option(None, "--cap", min=1, help="Largest n scanned for return times"),
):
    """Validate a step distribution: mass, steplength, maximality and aperiodicity."""
    m = read_measure(measure)
    try:
        report = validate(m, cap)
    except LcltError as e:
        exit_with_error(e)

    echo(f"measure: {measure}")
    echo(f"dimension: {m.dimension}")
    echo(f"steplength: {m.steplength}")
    echo(f"support size: {m.support_size}")
    echo(f"mass_ok: {yes_no(report.mass_ok)}")
    echo(f"steplength_ok: {yes_no(report.steplength_ok)}")
    echo(f"maximal: {yes_no(report.maximal)}")
    echo(f"affine rank: {report.affine_rank}")
    echo(f"aperiodic: {report.aperiodic.render()}")
    echo(f"mean: {fmt_vector(report.mean)}")
    echo(f"gamma: {fmt(report.gamma)}")
    if report.char_fn_gap is not None:
        echo(f"max |char fn| away from 0: {fmt(report.char_fn_gap)}")
    if not report.ok:
        logger.info(f"{measure} failed validation")
        raise typer.Exit(code=1)
