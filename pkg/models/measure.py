from enum import Enum
from fractions import Fraction
from typing import ClassVar, Dict, List, Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from config import settings
from utils.errors import InvariantError
from utils.multi_index import LatticePoint, MultiIndex


def _frozen(array: np.ndarray) -> np.ndarray:
    array.setflags(write=False)
    return array


class Provenance(str, Enum):
    DP = "dp"
    DFT = "dft"


class LatticeMeasure(BaseModel):
    """Finitely supported probability mass function on Z^d.

    ``points`` has shape (k, d) and is sorted lexicographically; ``probabilities``
    holds the matching masses. ``exact`` carries the rational masses when the
    measure was parsed or convolved in rational arithmetic.
    """

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    mass_tolerance: ClassVar[float] = settings.MASS_TOLERANCE

    dimension: int = Field(..., ge=1)
    steplength: int = Field(..., ge=1)
    points: np.ndarray
    probabilities: np.ndarray
    exact: Optional[Tuple[Fraction, ...]] = None

    @field_validator('points', mode='before')
    @classmethod
    def validate_points(cls, v: np.ndarray) -> np.ndarray:
        v = np.array(v, dtype=np.int64, copy=True)
        if v.ndim != 2:
            raise InvariantError(f"points must be a (k, d) array, got shape {v.shape}")
        return _frozen(v)

    @field_validator('probabilities', mode='before')
    @classmethod
    def validate_probabilities(cls, v: np.ndarray) -> np.ndarray:
        v = np.array(v, dtype=float, copy=True).reshape(-1)
        return _frozen(v)

    @model_validator(mode='after')
    def check_invariants(self) -> "LatticeMeasure":
        k, d = self.points.shape
        if d != self.dimension:
            raise InvariantError(f"points have dimension {d}, measure declares {self.dimension}")
        if k == 0:
            raise InvariantError("support is empty")
        if self.probabilities.shape != (k,):
            raise InvariantError("probabilities do not match the number of points")
        if np.any(self.probabilities < 0):
            raise InvariantError("negative probability")
        if self.exact is not None:
            if len(self.exact) != k:
                raise InvariantError("exact masses do not match the number of points")
            mass_error = abs(float(sum(self.exact, Fraction(0)) - 1))
        else:
            mass_error = abs(float(np.sum(self.probabilities)) - 1.0)
        if mass_error > self.mass_tolerance:
            raise InvariantError(f"total mass differs from 1 by {mass_error:.3e}")
        sq_norms = np.sum(self.points.astype(object) ** 2, axis=1)
        if any(s > self.steplength ** 2 for s in sq_norms):
            raise InvariantError(f"support point outside the steplength ball |x| <= {self.steplength}")
        return self

    @property
    def support_size(self) -> int:
        return int(self.points.shape[0])

    @property
    def entries(self) -> Dict[LatticePoint, float]:
        return {tuple(int(c) for c in p): float(w) for p, w in zip(self.points, self.probabilities)}

    @property
    def support(self) -> np.ndarray:
        """Points carrying strictly positive mass"""
        return self.points[self.probabilities > 0]

    def prob(self, x) -> float:
        return self.entries.get(tuple(int(c) for c in x), 0.0)

    def prob_exact(self, x) -> Fraction:
        if self.exact is None:
            raise InvariantError("measure carries no exact masses")
        key = tuple(int(c) for c in x)
        for p, w in zip(self.points, self.exact):
            if tuple(int(c) for c in p) == key:
                return w
        return Fraction(0)

    def mean(self) -> np.ndarray:
        return self.probabilities @ self.points.astype(float)

    def to_grid(self) -> Tuple[np.ndarray, np.ndarray]:
        """Dense box representation: (origin, array) with array[i] = m(origin + i)"""
        origin = self.points.min(axis=0)
        shape = tuple(self.points.max(axis=0) - origin + 1)
        grid = np.zeros(shape, dtype=float)
        grid[tuple((self.points - origin).T)] = self.probabilities
        return origin, grid


class ConvolvedMeasure(LatticeMeasure):
    """n-step distribution produced by one of the exact oracles"""

    mass_tolerance: ClassVar[float] = settings.CONVOLVED_MASS_TOLERANCE

    n: int = Field(..., ge=1)
    provenance: Provenance


class CovarianceMatrix(BaseModel):
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    matrix: np.ndarray
    eigenvalues: np.ndarray
    smallest_eigenvalue: float
    determinant: float
    inverse: Optional[np.ndarray] = None

    @property
    def dimension(self) -> int:
        return int(self.matrix.shape[0])

    @property
    def positive_definite(self) -> bool:
        return self.inverse is not None


class MomentTable(BaseModel):
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    dimension: int
    max_order: int
    values: Dict[MultiIndex, float]
    mean: np.ndarray

    def __getitem__(self, nu) -> float:
        return self.values[MultiIndex(nu)]


class SupportHull(BaseModel):
    """Convex closure of the support.

    ``equations`` rows are (normal, offset) with normal . x + offset <= 0 on the
    hull; they are present for d <= 3. ``points`` keeps the full support for
    the linear-feasibility route.
    """

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    dimension: int
    vertices: np.ndarray
    points: np.ndarray
    equations: Optional[np.ndarray] = None
    volume: float
    degenerate: bool


class AperiodicityStatus(str, Enum):
    YES = "yes"
    NO = "no"
    UNDETERMINED = "undetermined"


class Aperiodicity(BaseModel):
    model_config = ConfigDict(frozen=True)

    status: AperiodicityStatus
    period: Optional[int] = None
    return_times: List[int] = []
    checked_up_to: int

    def render(self) -> str:
        if self.status == AperiodicityStatus.NO:
            return f"no (period {self.period})"
        if self.status == AperiodicityStatus.UNDETERMINED:
            return f"undetermined (cap {self.checked_up_to})"
        return "yes"


class ValidationReport(BaseModel):
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    mass_ok: bool
    steplength_ok: bool
    maximal: bool
    aperiodic: Aperiodicity
    mean: np.ndarray
    gamma: float
    affine_rank: int
    char_fn_gap: Optional[float] = None

    @property
    def ok(self) -> bool:
        return (
            self.mass_ok
            and self.steplength_ok
            and self.maximal
            and self.aperiodic.status == AperiodicityStatus.YES
        )
