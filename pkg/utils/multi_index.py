from functools import lru_cache
from math import factorial, prod
from typing import Iterable, List, Tuple

import numpy as np

# Points of Z^d are plain integer tuples.
LatticePoint = Tuple[int, ...]


class MultiIndex(tuple):
    """Nonnegative integer exponent vector nu with order |nu|"""

    def __new__(cls, exponents: Iterable[int]):
        values = tuple(int(e) for e in exponents)
        if any(e < 0 for e in values):
            raise ValueError(f"negative exponent in multi-index {values}")
        return super().__new__(cls, values)

    @property
    def order(self) -> int:
        return sum(self)

    @property
    def dimension(self) -> int:
        return len(self)

    def factorial(self) -> int:
        """nu! = prod nu_j!"""
        return prod(factorial(e) for e in self)

    def multinomial(self) -> int:
        """|nu|! / nu!"""
        return factorial(self.order) // self.factorial()

    def __add__(self, other) -> "MultiIndex":
        return MultiIndex(a + b for a, b in zip(self, other))

    def drop(self, j: int) -> "MultiIndex":
        """nu - e_j"""
        if self[j] == 0:
            raise ValueError(f"cannot lower exponent {j} of {tuple(self)}")
        return MultiIndex(e - (1 if i == j else 0) for i, e in enumerate(self))

    def __repr__(self) -> str:
        return f"MultiIndex{tuple(self)}"


def unit(d: int, j: int) -> MultiIndex:
    return MultiIndex(1 if i == j else 0 for i in range(d))


def zero(d: int) -> MultiIndex:
    return MultiIndex((0,) * d)


@lru_cache(maxsize=None)
def multi_indices(d: int, order: int) -> Tuple[MultiIndex, ...]:
    """All multi-indices of dimension d with |nu| == order, lexicographically descending"""
    if d == 1:
        return (MultiIndex((order,)),)
    out: List[MultiIndex] = []
    for first in range(order, -1, -1):
        for rest in multi_indices(d - 1, order - first):
            out.append(MultiIndex((first,) + tuple(rest)))
    return tuple(out)


@lru_cache(maxsize=None)
def multi_indices_upto(d: int, max_order: int) -> Tuple[MultiIndex, ...]:
    """All multi-indices with |nu| <= max_order, grouped by increasing order"""
    return tuple(nu for r in range(max_order + 1) for nu in multi_indices(d, r))


def monomials(points: np.ndarray, nu: Iterable[int]) -> np.ndarray:
    """Evaluate x^nu row-wise for points of shape (k, d)"""
    points = np.asarray(points, dtype=float)
    exps = np.asarray(tuple(nu), dtype=int)
    return np.prod(points ** exps, axis=1)
