from typing import Dict

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from models.measure import CovarianceMatrix
from models.polynomial import Polynomial
from utils.errors import InvariantError
from utils.multi_index import MultiIndex, unit, zero


class TruncatedSeries(BaseModel):
    """Formal power series in d variables, truncated at total degree max_degree"""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    dimension: int = Field(..., ge=1)
    max_degree: int = Field(..., ge=0)
    coefficients: Dict[MultiIndex, float] = {}

    @field_validator('coefficients', mode='before')
    @classmethod
    def validate_coefficients(cls, v) -> Dict[MultiIndex, float]:
        return {MultiIndex(nu): float(c) for nu, c in dict(v).items() if c != 0}

    @model_validator(mode='after')
    def check_degree(self) -> "TruncatedSeries":
        for nu in self.coefficients:
            if len(nu) != self.dimension:
                raise InvariantError(f"term {tuple(nu)} in a series of dimension {self.dimension}")
            if nu.order > self.max_degree:
                raise InvariantError(f"term {tuple(nu)} exceeds truncation degree {self.max_degree}")
        return self

    @property
    def constant_term(self) -> float:
        return self.coefficients.get(zero(self.dimension), 0.0)

    def coefficient(self, nu) -> float:
        return self.coefficients.get(MultiIndex(nu), 0.0)

    def __add__(self, other: "TruncatedSeries") -> "TruncatedSeries":
        out = dict(self.coefficients)
        for nu, c in other.coefficients.items():
            out[nu] = out.get(nu, 0.0) + c
        return TruncatedSeries(dimension=self.dimension, max_degree=min(self.max_degree, other.max_degree), coefficients=out)

    def __mul__(self, other: "TruncatedSeries") -> "TruncatedSeries":
        degree = min(self.max_degree, other.max_degree)
        out: Dict[MultiIndex, float] = {}
        for a, ca in self.coefficients.items():
            for b, cb in other.coefficients.items():
                if a.order + b.order > degree:
                    continue
                key = a + b
                out[key] = out.get(key, 0.0) + ca * cb
        return TruncatedSeries(dimension=self.dimension, max_degree=degree, coefficients=out)

    def scale(self, c: float) -> "TruncatedSeries":
        return TruncatedSeries(
            dimension=self.dimension,
            max_degree=self.max_degree,
            coefficients={nu: c * v for nu, v in self.coefficients.items()},
        )

    def without_constant(self) -> "TruncatedSeries":
        return TruncatedSeries(
            dimension=self.dimension,
            max_degree=self.max_degree,
            coefficients={nu: c for nu, c in self.coefficients.items() if nu.order > 0},
        )


class CumulantTable(BaseModel):
    """chi_nu for 1 <= |nu| <= max_order"""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    dimension: int
    max_order: int
    values: Dict[MultiIndex, float]

    def __getitem__(self, nu) -> float:
        return self.values.get(MultiIndex(nu), 0.0)

    @property
    def mean(self) -> np.ndarray:
        return np.array([self[unit(self.dimension, j)] for j in range(self.dimension)])

    @property
    def covariance(self) -> np.ndarray:
        d = self.dimension
        out = np.zeros((d, d))
        for i in range(d):
            for j in range(d):
                out[i, j] = self[unit(d, i) + unit(d, j)]
        return out


class CumulantPolynomial(BaseModel):
    """chi_r(z) = sum_{|nu| = r} (r!/nu!) chi_nu z^nu"""

    model_config = ConfigDict(frozen=True)

    order: int = Field(..., ge=1)
    polynomial: Polynomial

    @model_validator(mode='after')
    def check_homogeneous(self) -> "CumulantPolynomial":
        if not self.polynomial.is_homogeneous(self.order):
            raise InvariantError(f"cumulant polynomial of order {self.order} is not homogeneous")
        return self

    @property
    def is_zero(self) -> bool:
        return not self.polynomial.coefficients


class HermiteFactor(BaseModel):
    """h_nu with D^nu phi_V = h_nu phi_V"""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    nu: MultiIndex
    polynomial: Polynomial


class EdgeworthModel(BaseModel):
    """Everything the lemma, corollary and theorem approximants need for one measure.

    q3, q4 and q33 satisfy chi_3(D) phi_V = q3 phi_V, chi_4(D) phi_V = q4 phi_V and
    chi_3^2(D) phi_V = q33 phi_V. p3 = -q3/6 and p6 = q4/24 + q33/72.
    """

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    dimension: int
    steplength: int
    mean: np.ndarray
    covariance: CovarianceMatrix
    cumulants: CumulantTable
    chi3: CumulantPolynomial
    chi4: CumulantPolynomial
    chi3_squared: Polynomial
    q3: Polynomial
    q4: Polynomial
    q33: Polynomial
    p3: Polynomial
    p6: Polynomial
    corollary_constant: float

    @property
    def centered(self) -> bool:
        return bool(np.all(np.abs(self.mean) <= 1e-12))
