from typing import Dict, Iterable, List, Tuple, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from utils.errors import DimensionMismatch
from utils.multi_index import MultiIndex, monomials, unit, zero

Number = Union[int, float]


class Polynomial(BaseModel):
    """Real polynomial in d variables stored as a coefficient map nu -> c_nu.

    Zero coefficients are dropped, so equality of coefficient maps is equality
    of polynomials.
    """

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    dimension: int = Field(..., ge=1)
    coefficients: Dict[MultiIndex, float] = {}

    @field_validator('coefficients', mode='before')
    @classmethod
    def validate_coefficients(cls, v) -> Dict[MultiIndex, float]:
        return {MultiIndex(nu): float(c) for nu, c in dict(v).items() if c != 0}

    @model_validator(mode='after')
    def check_dimension(self) -> "Polynomial":
        for nu in self.coefficients:
            if len(nu) != self.dimension:
                raise DimensionMismatch(f"monomial {tuple(nu)} in a polynomial of dimension {self.dimension}")
        return self

    @classmethod
    def zero(cls, d: int) -> "Polynomial":
        return cls(dimension=d, coefficients={})

    @classmethod
    def constant(cls, d: int, c: Number) -> "Polynomial":
        return cls(dimension=d, coefficients={zero(d): c})

    @classmethod
    def linear(cls, coeffs: Iterable[Number]) -> "Polynomial":
        """sum_j a_j x_j"""
        coeffs = list(coeffs)
        d = len(coeffs)
        return cls(dimension=d, coefficients={unit(d, j): a for j, a in enumerate(coeffs)})

    @property
    def degree(self) -> int:
        """-1 for the zero polynomial"""
        return max((nu.order for nu in self.coefficients), default=-1)

    def coefficient(self, nu) -> float:
        return self.coefficients.get(MultiIndex(nu), 0.0)

    def terms(self) -> List[Tuple[MultiIndex, float]]:
        """Coefficients grouped by increasing total degree, lexicographically descending within a degree"""
        return sorted(self.coefficients.items(), key=lambda item: (item[0].order, tuple(-e for e in item[0])))

    def evaluate(self, x) -> Union[float, np.ndarray]:
        """p(x) for a single point of shape (d,) or row-wise for shape (k, d)"""
        x = np.asarray(x, dtype=float)
        single = x.ndim <= 1
        points = x.reshape(1, -1) if single else x
        if points.shape[1] != self.dimension:
            raise DimensionMismatch(f"point of dimension {points.shape[1]} for a polynomial in dimension {self.dimension}")
        values = np.zeros(points.shape[0])
        for nu, c in self.coefficients.items():
            values += c * monomials(points, nu)
        return float(values[0]) if single else values

    def __call__(self, x):
        return self.evaluate(x)

    def _check(self, other: "Polynomial") -> None:
        if other.dimension != self.dimension:
            raise DimensionMismatch(f"polynomials of dimension {self.dimension} and {other.dimension}")

    def __add__(self, other: "Polynomial") -> "Polynomial":
        self._check(other)
        out = dict(self.coefficients)
        for nu, c in other.coefficients.items():
            out[nu] = out.get(nu, 0.0) + c
        return Polynomial(dimension=self.dimension, coefficients=out)

    def __sub__(self, other: "Polynomial") -> "Polynomial":
        return self + other.scale(-1.0)

    def __mul__(self, other: Union["Polynomial", Number]) -> "Polynomial":
        if not isinstance(other, Polynomial):
            return self.scale(other)
        self._check(other)
        out: Dict[MultiIndex, float] = {}
        for a, ca in self.coefficients.items():
            for b, cb in other.coefficients.items():
                key = a + b
                out[key] = out.get(key, 0.0) + ca * cb
        return Polynomial(dimension=self.dimension, coefficients=out)

    __rmul__ = __mul__

    def scale(self, c: Number) -> "Polynomial":
        return Polynomial(dimension=self.dimension, coefficients={nu: c * v for nu, v in self.coefficients.items()})

    def derivative(self, j: int) -> "Polynomial":
        """Partial derivative in x_j"""
        out = {nu.drop(j): nu[j] * c for nu, c in self.coefficients.items() if nu[j] > 0}
        return Polynomial(dimension=self.dimension, coefficients=out)

    def is_homogeneous(self, r: int) -> bool:
        return all(nu.order == r for nu in self.coefficients)

    def parity_residue(self, odd: bool) -> float:
        """Largest |c_nu| on monomials of the wrong parity (0.0 if the polynomial is purely odd/even)"""
        wrong = [abs(c) for nu, c in self.coefficients.items() if (nu.order % 2 == 1) != odd]
        return max(wrong, default=0.0)

    def to_list(self) -> List[list]:
        """[[exponents...], coefficient] pairs in term order"""
        return [[list(nu), c] for nu, c in self.terms()]
