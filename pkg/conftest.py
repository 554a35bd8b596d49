from fractions import Fraction
from pathlib import Path
import sys

import pytest

ROOT = Path(__file__).resolve().parent
if str(ROOT) not in sys.path:
    sys.path.insert(0, str(ROOT))

from config import settings  # noqa: E402
from models.measure import LatticeMeasure  # noqa: E402
from utils.measure_io import load_measure_file, measure_from_entries  # noqa: E402

MEASURES_DIR = settings.MEASURES_DIR


@pytest.fixture
def measures_dir() -> Path:
    return MEASURES_DIR


@pytest.fixture
def lazy() -> LatticeMeasure:
    return load_measure_file(MEASURES_DIR / "lazy.txt")


@pytest.fixture
def simple() -> LatticeMeasure:
    return load_measure_file(MEASURES_DIR / "simple.txt")


@pytest.fixture
def asym() -> LatticeMeasure:
    return load_measure_file(MEASURES_DIR / "asym.txt")


@pytest.fixture
def product2d() -> LatticeMeasure:
    return load_measure_file(MEASURES_DIR / "product2d.txt")


@pytest.fixture
def shifted() -> LatticeMeasure:
    return load_measure_file(MEASURES_DIR / "shifted.txt")


@pytest.fixture
def line2d() -> LatticeMeasure:
    """Support on the x-axis of Z^2: not maximal"""
    return measure_from_entries(
        2, 1, {(-1, 0): Fraction(1, 4), (0, 0): Fraction(1, 2), (1, 0): Fraction(1, 4)}
    )


@pytest.fixture
def write_measure(tmp_path):
    """Write measure-file text to a temporary file and return its path"""

    def _write(text: str, name: str = "measure.txt") -> Path:
        path = tmp_path / name
        path.write_text(text, encoding="utf-8")
        return path

    return _write
