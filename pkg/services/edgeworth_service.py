from functools import lru_cache
from typing import Dict, Optional, Tuple, Union
import logging

import numpy as np
import orjson

from models.edgeworth import (
    CumulantPolynomial,
    CumulantTable,
    EdgeworthModel,
    HermiteFactor,
    TruncatedSeries,
)
from models.measure import CovarianceMatrix, LatticeMeasure, MomentTable
from models.polynomial import Polynomial
from services.measure_service import covariance, moments, require_inverse
from utils.errors import PreconditionError
from utils.multi_index import MultiIndex, multi_indices, multi_indices_upto

logger = logging.getLogger(__name__)

# Series log and cumulants stop at order four; chi_3^2 only needs the square of chi_3.
CUMULANT_ORDER = 4
MAX_OPERATOR_ORDER = 6


def series_log(s: TruncatedSeries) -> TruncatedSeries:
    """log s = sum_k (-1)^{k+1} (s-1)^k / k, truncated at the degree of s"""
    if s.max_degree < 1:
        raise PreconditionError("series log needs truncation degree >= 1")
    if abs(s.constant_term - 1.0) > 1e-12:
        raise PreconditionError(f"series log needs constant term 1, got {s.constant_term}")
    u = s.without_constant()
    power = u
    result = u
    for k in range(2, s.max_degree + 1):
        power = power * u
        result = result + power.scale((-1) ** (k + 1) / k)
    return result


def moment_series(table: MomentTable, max_degree: int = CUMULANT_ORDER) -> TruncatedSeries:
    """
    sum_nu mu_nu s^nu / nu!. With s = it this is the characteristic function; the
    identity log M(s) = sum chi_nu s^nu / nu! holds coefficientwise, so powers of i
    cancel and the series can be kept real.
    """
    d = table.dimension
    coefficients = {nu: table.values[nu] / nu.factorial() for nu in multi_indices_upto(d, max_degree)}
    return TruncatedSeries(dimension=d, max_degree=max_degree, coefficients=coefficients)


def cumulants(m: LatticeMeasure, max_order: int = CUMULANT_ORDER) -> CumulantTable:
    log_series = series_log(moment_series(moments(m, max_order), max_order))
    values = {
        nu: log_series.coefficient(nu) * nu.factorial()
        for nu in multi_indices_upto(m.dimension, max_order)
        if nu.order >= 1
    }
    return CumulantTable(dimension=m.dimension, max_order=max_order, values=values)


def cumulant_polynomial(c: CumulantTable, r: int) -> CumulantPolynomial:
    if not 1 <= r <= c.max_order:
        raise PreconditionError(f"cumulant polynomial order must be in 1..{c.max_order}, got {r}")
    coefficients = {nu: nu.multinomial() * c[nu] for nu in multi_indices(c.dimension, r)}
    return CumulantPolynomial(order=r, polynomial=Polynomial(dimension=c.dimension, coefficients=coefficients))


def scaled_covariance(cov: CovarianceMatrix, factor: float) -> CovarianceMatrix:
    """Covariance of factor * V with the decomposition rescaled instead of recomputed"""
    d = cov.dimension
    return CovarianceMatrix(
        matrix=cov.matrix * factor,
        eigenvalues=cov.eigenvalues * factor,
        smallest_eigenvalue=cov.smallest_eigenvalue * factor,
        determinant=cov.determinant * factor ** d,
        inverse=None if cov.inverse is None else cov.inverse / factor,
    )


def gaussian_density(cov: CovarianceMatrix, x) -> Union[float, np.ndarray]:
    """phi_V(x) = (2 pi)^{-d/2} (det V)^{-1/2} exp(-x.V^{-1}x / 2); row-wise for x of shape (k, d)"""
    inverse = require_inverse(cov)
    d = cov.dimension
    x = np.asarray(x, dtype=float)
    single = x.ndim <= 1
    points = x.reshape(1, -1) if single else x
    quad = np.einsum("ki,ij,kj->k", points, inverse, points)
    values = (2 * np.pi) ** (-d / 2) * cov.determinant ** -0.5 * np.exp(-quad / 2)
    return float(values[0]) if single else values


@lru_cache(maxsize=4096)
def _hermite(inverse_key: Tuple[float, ...], d: int, nu: MultiIndex) -> Polynomial:
    if nu.order == 0:
        return Polynomial.constant(d, 1.0)
    j = next(i for i, e in enumerate(nu) if e > 0)
    lower = _hermite(inverse_key, d, nu.drop(j))
    row = Polynomial.linear(inverse_key[j * d:(j + 1) * d])
    return lower.derivative(j) - row * lower


def hermite_factor(cov: CovarianceMatrix, nu) -> HermiteFactor:
    """h_nu from h_0 = 1 and h_{nu+e_j} = d_j h_nu - (V^{-1}x)_j h_nu"""
    nu = MultiIndex(nu)
    if nu.order > MAX_OPERATOR_ORDER:
        raise PreconditionError(f"Hermite factors are built up to order {MAX_OPERATOR_ORDER}, got {nu.order}")
    inverse = require_inverse(cov)
    key = tuple(float(v) for v in inverse.reshape(-1))
    return HermiteFactor(nu=nu, polynomial=_hermite(key, cov.dimension, nu))


def operator_polynomial(p: Polynomial, cov: CovarianceMatrix) -> Polynomial:
    """q with p(D) phi_V = q phi_V"""
    q = Polynomial.zero(cov.dimension)
    for nu, c in p.coefficients.items():
        q = q + hermite_factor(cov, nu).polynomial.scale(c)
    return q


def apply_operator(p: Polynomial, cov: CovarianceMatrix, x) -> Union[float, np.ndarray]:
    """(p(D) phi_V)(x)"""
    return operator_polynomial(p, cov).evaluate(x) * gaussian_density(cov, x)


def squared_operator(p: CumulantPolynomial) -> Polynomial:
    """Operator whose symbol is the square of p's; p(D)f * p(D)g = p(D)^2 (f * g)"""
    return p.polynomial * p.polynomial


def build_model(m: LatticeMeasure) -> EdgeworthModel:
    cov = covariance(m)
    require_inverse(cov)
    table = cumulants(m)
    chi3 = cumulant_polynomial(table, 3)
    chi4 = cumulant_polynomial(table, 4)
    chi3_squared = squared_operator(chi3)
    q3 = operator_polynomial(chi3.polynomial, cov)
    q4 = operator_polynomial(chi4.polynomial, cov)
    q33 = operator_polynomial(chi3_squared, cov)
    p6 = q4.scale(1 / 24) + q33.scale(1 / 72)
    model = EdgeworthModel(
        dimension=m.dimension,
        steplength=m.steplength,
        mean=table.mean,
        covariance=cov,
        cumulants=table,
        chi3=chi3,
        chi4=chi4,
        chi3_squared=chi3_squared,
        q3=q3,
        q4=q4,
        q33=q33,
        p3=q3.scale(-1 / 6),
        p6=p6,
        corollary_constant=p6.coefficient((0,) * m.dimension),
    )
    logger.debug(f"Built Edgeworth model: d={m.dimension}, L={model.corollary_constant:.6g}")
    return model


def lemma_approximant(model: EdgeworthModel, n: int, x) -> Union[float, np.ndarray]:
    """n^{-d/2} [1 - q3(y)/(6 sqrt n) + (q4(y)/24 + q33(y)/72)/n] phi_V(y), y = (x - nE)/sqrt(n)"""
    if n < 1:
        raise PreconditionError(f"n must be at least 1, got {n}")
    y = (np.asarray(x, dtype=float) - n * model.mean) / np.sqrt(n)
    bracket = 1.0 - model.q3.evaluate(y) / (6 * np.sqrt(n)) + model.p6.evaluate(y) / n
    return n ** (-model.dimension / 2) * bracket * gaussian_density(model.covariance, y)


def gaussian_approximant(model: EdgeworthModel, n: int, x) -> Union[float, np.ndarray]:
    """Uncorrected local limit value n^{-d/2} phi_V((x - nE)/sqrt n)"""
    if n < 1:
        raise PreconditionError(f"n must be at least 1, got {n}")
    y = (np.asarray(x, dtype=float) - n * model.mean) / np.sqrt(n)
    return n ** (-model.dimension / 2) * gaussian_density(model.covariance, y)


def corollary_constant(model: EdgeworthModel) -> float:
    """L = q4(0)/24 + q33(0)/72"""
    return model.corollary_constant


def corollary_value(model: EdgeworthModel, n: int, L: Optional[float] = None) -> float:
    """(2 pi n)^{-d/2} (det V)^{-1/2} (1 + L/n)"""
    L = model.corollary_constant if L is None else L
    d = model.dimension
    return (2 * np.pi * n) ** (-d / 2) * model.covariance.determinant ** -0.5 * (1 + L / n)


def _require_centered(model: EdgeworthModel) -> None:
    if not model.centered:
        raise PreconditionError(f"theorem approximant needs mean zero, got {model.mean.tolist()}")


def theorem_polynomials(model: EdgeworthModel) -> Tuple[Polynomial, Polynomial]:
    _require_centered(model)
    return model.p3, model.p6


def theorem_approximant(model: EdgeworthModel, n: int, x) -> Union[float, np.ndarray]:
    """[1 + P3(x/sqrt n)/sqrt n + P6(x/sqrt n)/n] phi_{nV}(x)"""
    _require_centered(model)
    if n < 1:
        raise PreconditionError(f"n must be at least 1, got {n}")
    x = np.asarray(x, dtype=float)
    y = x / np.sqrt(n)
    bracket = 1.0 + model.p3.evaluate(y) / np.sqrt(n) + model.p6.evaluate(y) / n
    return bracket * gaussian_density(scaled_covariance(model.covariance, n), x)


def dominance_factor(model: EdgeworthModel) -> float:
    """(2 d l^2 / gamma)^{d/2}, so that phi_{nV} <= factor * phi_{2 d l^2 n}"""
    d = model.dimension
    return (2 * d * model.steplength ** 2 / model.covariance.smallest_eigenvalue) ** (d / 2)


def _cumulant_rows(table: CumulantTable) -> list:
    return [
        {"nu": list(nu), "value": table[nu]}
        for nu in multi_indices_upto(table.dimension, table.max_order)
        if nu.order >= 1
    ]


def model_document(model: EdgeworthModel) -> Dict[str, object]:
    """Diagnostic view of the model with keys in a fixed order"""
    cov = model.covariance
    return {
        "dimension": model.dimension,
        "steplength": model.steplength,
        "E": model.mean.tolist(),
        "V": cov.matrix.tolist(),
        "V_inv": cov.inverse.tolist(),
        "det_V": cov.determinant,
        "gamma": cov.smallest_eigenvalue,
        "cumulants": _cumulant_rows(model.cumulants),
        "chi3": model.chi3.polynomial.to_list(),
        "chi4": model.chi4.polynomial.to_list(),
        "q3": model.q3.to_list(),
        "q4": model.q4.to_list(),
        "q33": model.q33.to_list(),
        "P3": model.p3.to_list(),
        "P6": model.p6.to_list(),
        "L": model.corollary_constant,
        "dominance_factor": dominance_factor(model),
    }


def dump_model(model: EdgeworthModel) -> str:
    return orjson.dumps(model_document(model), option=orjson.OPT_INDENT_2).decode()
