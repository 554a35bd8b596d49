from fractions import Fraction
from pathlib import Path
from typing import Dict, Iterable, List, Optional, Tuple
import logging

import numpy as np

from models.measure import ConvolvedMeasure, LatticeMeasure
from utils.errors import InvariantError, ParseError

logger = logging.getLogger(__name__)

INT64_MAX = int(np.iinfo(np.int64).max)


def parse_probability(token: str, lineno: int) -> Fraction:
    """Decimal or p/q token converted exactly"""
    try:
        value = Fraction(token.strip())
    except (ValueError, ZeroDivisionError):
        raise ParseError(f"line {lineno}: cannot parse probability '{token}'")
    return value


def _header_value(line: str, key: str, lineno: int) -> int:
    parts = line.split()
    if len(parts) != 2 or parts[0] != key:
        raise ParseError(f"line {lineno}: expected '{key} <int>', got '{line.strip()}'")
    try:
        value = int(parts[1])
    except ValueError:
        raise ParseError(f"line {lineno}: '{parts[1]}' is not an integer")
    if value < 1:
        raise InvariantError(f"line {lineno}: {key} must be positive")
    return value


def parse_measure(text: str) -> LatticeMeasure:
    """
    Parse measure-file text:
        dim <d>
        steplength <l>
        <c1> ... <cd> <prob>
    Lines starting with '#' are comments.
    """
    lines = [
        (lineno, raw)
        for lineno, raw in enumerate(text.splitlines(), start=1)
        if raw.strip() and not raw.lstrip().startswith("#")
    ]
    if len(lines) < 2:
        raise ParseError("measure file needs 'dim' and 'steplength' headers")

    dim = _header_value(lines[0][1], "dim", lines[0][0])
    steplength = _header_value(lines[1][1], "steplength", lines[1][0])

    entries: Dict[Tuple[int, ...], Fraction] = {}
    for lineno, raw in lines[2:]:
        tokens = raw.split()
        if len(tokens) != dim + 1:
            raise InvariantError(
                f"line {lineno}: expected {dim} coordinates and a probability, got {len(tokens)} fields"
            )
        try:
            coords = tuple(int(tok) for tok in tokens[:dim])
        except ValueError:
            raise ParseError(f"line {lineno}: coordinates must be integers")
        prob = parse_probability(tokens[dim], lineno)
        if prob < 0:
            raise InvariantError(f"line {lineno}: negative probability {tokens[dim]}")
        if coords in entries:
            raise ParseError(f"line {lineno}: duplicate support point {coords}")
        entries[coords] = prob

    return measure_from_entries(dim, steplength, entries)


def measure_from_entries(
    dim: int,
    steplength: int,
    entries: Dict[Tuple[int, ...], Fraction],
) -> LatticeMeasure:
    """Build a measure from exact masses, dropping zero-mass points"""
    support = sorted((x, p) for x, p in entries.items() if p != 0)
    if not support:
        raise InvariantError("support is empty")
    if any(abs(c) > INT64_MAX for x, _ in support for c in x):
        raise InvariantError(f"coordinates must fit in a signed 64-bit integer (|c| <= {INT64_MAX})")
    points = np.array([x for x, _ in support], dtype=np.int64).reshape(len(support), dim)
    exact = tuple(Fraction(p) for _, p in support)
    return LatticeMeasure(
        dimension=dim,
        steplength=steplength,
        points=points,
        probabilities=np.array([float(p) for p in exact]),
        exact=exact,
    )


def load_measure_file(path: Path) -> LatticeMeasure:
    path = Path(path)
    logger.debug(f"Loading measure from {path}")
    try:
        text = path.read_text(encoding="utf-8")
    except (OSError, UnicodeDecodeError) as e:
        raise ParseError(f"cannot read {path}: {e}")
    return parse_measure(text)


def format_probability(m: LatticeMeasure, i: int) -> str:
    if m.exact is not None:
        p = m.exact[i]
        return str(p.numerator) if p.denominator == 1 else f"{p.numerator}/{p.denominator}"
    return repr(float(m.probabilities[i]))


def dump_measure(m: LatticeMeasure, comments: Optional[Iterable[str]] = None) -> str:
    """Serialize in the measure file format; comments become '# ...' header lines"""
    out: List[str] = []
    if isinstance(m, ConvolvedMeasure):
        out.append(f"# n = {m.n}")
        out.append(f"# provenance = {m.provenance.value}")
    out.extend(f"# {c}" for c in (comments or []))
    out.append(f"dim {m.dimension}")
    out.append(f"steplength {m.steplength}")
    for i, x in enumerate(m.points):
        if m.probabilities[i] == 0 and m.exact is None:
            continue
        coords = " ".join(str(int(c)) for c in x)
        out.append(f"{coords} {format_probability(m, i)}")
    return "\n".join(out) + "\n"


def parse_vector(text: str, dim: Optional[int] = None, integral: bool = False) -> np.ndarray:
    """Parse 'c1,..,cd' into a vector"""
    tokens = [tok for tok in text.replace(" ", "").split(",") if tok]
    if not tokens:
        raise ParseError(f"empty vector '{text}'")
    try:
        if integral:
            values = np.array([int(tok) for tok in tokens], dtype=np.int64)
        else:
            values = np.array([float(Fraction(tok)) for tok in tokens], dtype=float)
    except (ValueError, ZeroDivisionError):
        raise ParseError(f"cannot parse vector '{text}'")
    if dim is not None and values.shape[0] != dim:
        raise ParseError(f"vector '{text}' has {values.shape[0]} entries, expected {dim}")
    return values


def parse_int_list(text: str) -> List[int]:
    """Parse '50,100,200' into a list of ints"""
    try:
        return [int(tok) for tok in text.replace(" ", "").split(",") if tok]
    except ValueError:
        raise ParseError(f"cannot parse integer list '{text}'")
