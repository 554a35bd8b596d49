from typing import Tuple, Union
import logging

import numpy as np
from scipy.special import logsumexp

from config import settings
from models.measure import LatticeMeasure
from models.tilt import TiltSolution
from services.edgeworth_service import build_model, corollary_value
from services.measure_service import covariance_from_weights, hull_contains_interior, support_hull
from services.oracle_service import lookup, power_dp
from utils.errors import (
    DimensionMismatch,
    NoConvergence,
    NotInterior,
    PartitionOverflow,
    PreconditionError,
)

logger = logging.getLogger(__name__)

# exp overflows above this
MAX_LOG = 709.0
# Armijo backtracking gives up once the step is this small
MIN_STEP = 1e-12


def _vector(m: LatticeMeasure, t) -> np.ndarray:
    t = np.atleast_1d(np.asarray(t, dtype=float))
    if t.shape != (m.dimension,):
        raise DimensionMismatch(f"vector of dimension {t.shape[0]} for a measure in dimension {m.dimension}")
    return t


def log_partition_fn(m: LatticeMeasure, t) -> float:
    """log Z(t) = log sum_x exp(t.x) G(x), max-shifted"""
    t = _vector(m, t)
    return float(logsumexp(m.points @ t, b=m.probabilities))


def partition_fn(m: LatticeMeasure, t) -> float:
    log_z = log_partition_fn(m, t)
    if log_z > MAX_LOG:
        raise PartitionOverflow(f"Z(t) overflows double precision (log Z = {log_z:.1f})")
    return float(np.exp(log_z))


def _tilted_weights(m: LatticeMeasure, t: np.ndarray) -> Tuple[np.ndarray, float]:
    exponents = m.points @ t
    log_z = float(logsumexp(exponents, b=m.probabilities))
    with np.errstate(divide="ignore"):
        weights = np.exp(exponents + np.log(m.probabilities) - log_z)
    return weights / weights.sum(), log_z


def grad_hess_log_Z(m: LatticeMeasure, t) -> Tuple[np.ndarray, np.ndarray]:
    """Mean and covariance of G_t, i.e. D log Z(t) and D^2 log Z(t)"""
    t = _vector(m, t)
    weights, _ = _tilted_weights(m, t)
    x = m.points.astype(float)
    mean = weights @ x
    centered = x - mean
    hess = (centered * weights[:, None]).T @ centered
    return mean, (hess + hess.T) / 2


def tilt_measure(m: LatticeMeasure, t) -> LatticeMeasure:
    """G_t(x) = G(x) exp(t.x) / Z(t) on the support of G"""
    t = _vector(m, t)
    weights, _ = _tilted_weights(m, t)
    return LatticeMeasure(
        dimension=m.dimension,
        steplength=m.steplength,
        points=m.points,
        probabilities=weights,
    )


def solve_tilt(m: LatticeMeasure, xi) -> TiltSolution:
    """
    Damped Newton on F(t) = D log Z(t) - xi from t = 0 with Armijo backtracking
    on |F|. The Jacobian of F is the tilted covariance, positive definite for
    maximal measures.
    """
    xi = _vector(m, xi)
    if not hull_contains_interior(support_hull(m), xi):
        raise NotInterior(f"xi = {xi.tolist()} is not interior to the support hull")

    t = np.zeros(m.dimension)
    grad, hess = grad_hess_log_Z(m, t)
    residual = float(np.linalg.norm(grad - xi))
    iterations = 0
    while residual > settings.NEWTON_TOL:
        if iterations >= settings.NEWTON_MAX_ITER:
            raise NoConvergence(
                f"Newton stopped after {iterations} iterations at |F| = {residual:.3e} (xi too close to the boundary)"
            )
        try:
            step = np.linalg.solve(hess, xi - grad)
        except np.linalg.LinAlgError:
            raise NoConvergence(f"singular tilted covariance at t = {t.tolist()}")
        lam = 1.0
        while True:
            candidate = t + lam * step
            cand_grad, cand_hess = grad_hess_log_Z(m, candidate)
            cand_residual = float(np.linalg.norm(cand_grad - xi))
            if cand_residual <= (1 - settings.ARMIJO_C * lam) * residual:
                break
            lam /= 2
            if lam < MIN_STEP:
                raise NoConvergence(f"line search failed at |F| = {residual:.3e}")
        t, grad, hess, residual = candidate, cand_grad, cand_hess, cand_residual
        iterations += 1
        logger.debug(f"Newton iteration {iterations}: step {lam:g}, |F| = {residual:.3e}")

    tilted = tilt_measure(m, t)
    log_z = log_partition_fn(m, t)
    rate = float(t @ xi - log_z)
    if rate < 0:
        # rounding near xi = E
        rate = 0.0
    return TiltSolution(
        xi=xi,
        t=t,
        log_z=log_z,
        rate=rate,
        tilted=tilted,
        tilted_cov=covariance_from_weights(tilted.points, tilted.probabilities),
        iterations=iterations,
        residual=residual,
    )


def rate_fn(m: LatticeMeasure, xi) -> float:
    """I(xi) = t_xi . xi - log Z(t_xi)"""
    return solve_tilt(m, xi).rate


def factorize(m: LatticeMeasure, n: int, x) -> Tuple[float, float]:
    """(exp(-n I(x/n)), G_t^{*n}(x)); their product is G^{*n}(x)"""
    if n < 1:
        raise PreconditionError(f"n must be at least 1, got {n}")
    x = np.atleast_1d(np.asarray(x, dtype=np.int64))
    solution = solve_tilt(m, x / n)
    local = float(lookup(power_dp(solution.tilted, n), x[None, :])[0])
    return float(np.exp(-n * solution.rate)), local


def _sq_norms(x, d: int) -> Union[float, np.ndarray]:
    x = np.asarray(x, dtype=float)
    if x.ndim <= 1:
        return float(np.sum(x.reshape(-1, d) ** 2))
    return np.sum(x ** 2, axis=1)


def tail_bound(m: LatticeMeasure, n: int, x) -> Union[float, np.ndarray]:
    """exp(-|x|^2 / (2 d l^2 n)) for a centered measure"""
    if n < 1:
        raise PreconditionError(f"n must be at least 1, got {n}")
    mean = m.mean()
    if np.any(np.abs(mean) > 1e-12):
        raise PreconditionError(f"tail bound needs mean zero, got {mean.tolist()}")
    return np.exp(-_sq_norms(x, m.dimension) / (2 * m.dimension * m.steplength ** 2 * n))


def comparison_gaussian(d: int, steplength: int, n: int, x) -> Union[float, np.ndarray]:
    """phi_eta(x) with covariance eta Id_d, eta = 2 d l^2 n"""
    if n < 1:
        raise PreconditionError(f"n must be at least 1, got {n}")
    eta = 2 * d * steplength ** 2 * n
    return (2 * np.pi * eta) ** (-d / 2) * np.exp(-_sq_norms(x, d) / (2 * eta))


def tilted_approximant(m: LatticeMeasure, n: int, x) -> float:
    """exp(-n I(xi)) (2 pi n)^{-d/2} (det V_xi)^{-1/2} (1 + L(xi)/n) with xi = x/n"""
    if n < 1:
        raise PreconditionError(f"n must be at least 1, got {n}")
    x = np.atleast_1d(np.asarray(x, dtype=float))
    solution = solve_tilt(m, x / n)
    model = build_model(solution.tilted)
    return float(np.exp(-n * solution.rate) * corollary_value(model, n))
