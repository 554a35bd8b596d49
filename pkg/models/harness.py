from enum import Enum
from pathlib import Path
from typing import List, Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field, field_validator

from config import settings


class SweepMode(str, Enum):
    THEOREM = "theorem"
    LEMMA = "lemma"
    COROLLARY = "corollary"
    GAUSSIAN_ONLY = "gaussian-only"


class ApproxMode(str, Enum):
    THEOREM = "theorem"
    LEMMA = "lemma"
    COROLLARY = "corollary"
    GAUSSIAN_ONLY = "gaussian-only"
    TILTED = "tilted"


class SweepConfig(BaseModel):
    model_config = ConfigDict(frozen=True)

    measure_path: Path
    n_list: List[int]
    alpha: float = settings.DEFAULT_ALPHA
    mode: SweepMode = SweepMode.THEOREM
    output: Optional[Path] = None
    n_jobs: int = settings.N_JOBS

    @field_validator('alpha')
    @classmethod
    def validate_alpha(cls, v: float) -> float:
        if not 0.0 < v < 0.5:
            raise ValueError(f"alpha must lie strictly inside (0, 1/2), got {v}")
        return v

    @field_validator('n_list')
    @classmethod
    def validate_n_list(cls, v: List[int]) -> List[int]:
        if any(n < 1 for n in v):
            raise ValueError("every n must be at least 1")
        if any(b <= a for a, b in zip(v, v[1:])):
            raise ValueError("n list must be strictly increasing")
        if len(v) < settings.MIN_SLOPE_POINTS:
            raise ValueError(f"slope fits need at least {settings.MIN_SLOPE_POINTS} values of n, got {len(v)}")
        return v

    @field_validator('n_jobs')
    @classmethod
    def validate_n_jobs(cls, v: int) -> int:
        if v == 0:
            raise ValueError("n_jobs must be nonzero")
        return v


class ErrorRow(BaseModel):
    model_config = ConfigDict(frozen=True)

    n: int
    sup_abs_err: float = Field(..., ge=0.0)
    argmax_x: Tuple[int, ...]
    weighted_err: Optional[float] = Field(None, ge=0.0)
    skipped_cells: int = 0


class ErrorReport(BaseModel):
    """Per-n error rows with the sweep summary; ``failure`` marks a sweep that stopped early"""

    model_config = ConfigDict(frozen=True)

    measure: str
    mode: SweepMode
    alpha: float
    rows: List[ErrorRow]
    c_hat: Optional[float] = None
    slope: Optional[float] = None
    slope_stderr: Optional[float] = None
    failure: Optional[str] = None

    @property
    def ok(self) -> bool:
        return self.failure is None


class ApproxRow(BaseModel):
    model_config = ConfigDict(frozen=True)

    n: int
    x: Tuple[int, ...]
    mode: ApproxMode
    exact_dp: float
    exact_dft: float
    approximant: float
    abs_err: float
    weight: float


class CorollaryRow(BaseModel):
    model_config = ConfigDict(frozen=True)

    n: int
    x: Optional[Tuple[int, ...]] = None
    exact: Optional[float] = None
    value: Optional[float] = None
    scaled_diff: Optional[float] = None
    skipped: bool = False


class SuiteEntry(BaseModel):
    model_config = ConfigDict(frozen=True)

    measure: str
    c_hat: Optional[float]
    failure: Optional[str] = None


class SuiteReport(BaseModel):
    """Empirical constants across a measure suite with their spread"""

    model_config = ConfigDict(frozen=True)

    alpha: float
    n_list: List[int]
    entries: List[SuiteEntry]
    c_min: Optional[float] = None
    c_max: Optional[float] = None
    ratio: Optional[float] = None
