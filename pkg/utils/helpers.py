from pathlib import Path
from typing import List, NoReturn, Optional
import logging

import numpy as np
import typer
from pydantic import ValidationError
from rich.console import Console

from models.measure import LatticeMeasure
from utils.errors import LcltError, ParseError
from utils.measure_io import load_measure_file, parse_int_list, parse_vector

logger = logging.getLogger(__name__)

console = Console(soft_wrap=True, highlight=False)


def echo(line: str) -> None:
    """Plain line on stdout, no markup interpretation"""
    console.print(line, markup=False)


def exit_with_error(e: LcltError) -> NoReturn:
    logger.debug(f"Command failed with {type(e).__name__}", exc_info=True)
    console.print(f"[bold red]{type(e).__name__}[/bold red]: ", end="")
    echo(str(e))
    raise typer.Exit(code=1)


def exit_with_usage(e: ValidationError) -> NoReturn:
    for error in e.errors():
        field = ".".join(str(part) for part in error["loc"]) or "config"
        echo(f"Invalid {field}: {error['msg']}")
    raise typer.Exit(code=2)


def read_measure(path: Path) -> LatticeMeasure:
    try:
        return load_measure_file(path)
    except LcltError as e:
        exit_with_error(e)


def option_vector(text: str, dim: int, name: str, integral: bool = False) -> np.ndarray:
    try:
        return parse_vector(text, dim, integral=integral)
    except ParseError as e:
        raise typer.BadParameter(str(e), param_hint=name)


def option_int_list(text: str, name: str) -> List[int]:
    try:
        values = parse_int_list(text)
    except ParseError as e:
        raise typer.BadParameter(str(e), param_hint=name)
    if not values:
        raise typer.BadParameter("empty list", param_hint=name)
    return values


def fmt(value: Optional[float]) -> str:
    return "-" if value is None else f"{value:.12g}"


def fmt_vector(v) -> str:
    return "(" + ", ".join(fmt(float(c)) for c in np.atleast_1d(v)) + ")"


def fmt_matrix(m) -> str:
    m = np.atleast_2d(m)
    return "[" + "; ".join(" ".join(fmt(float(c)) for c in row) for row in m) + "]"


def yes_no(flag: bool) -> str:
    return "yes" if flag else "no"


def option_alpha(value: float) -> float:
    if not 0.0 < value < 0.5:
        raise typer.BadParameter(f"must lie strictly inside (0, 1/2), got {value}")
    return value
