from fractions import Fraction
from itertools import product
from math import gcd, prod
from typing import Optional
import logging

import numpy as np
from scipy import optimize, signal
from scipy.spatial import ConvexHull, QhullError

from config import settings
from models.measure import (
    Aperiodicity,
    AperiodicityStatus,
    CovarianceMatrix,
    LatticeMeasure,
    MomentTable,
    SupportHull,
    ValidationReport,
)
from services.oracle_service import char_fn_gap
from utils.errors import DegenerateHull, DimensionMismatch, SingularCovariance
from utils.measure_io import parse_measure
from utils.multi_index import monomials, multi_indices_upto, unit, zero

logger = logging.getLogger(__name__)

# Eigenvalues at or below this are treated as zero when deciding maximality.
RANK_TOLERANCE = 1e-12
# Period certificates search a . x = c (mod p) over at most this many vectors a.
MAX_CERTIFICATE_CANDIDATES = 100_000


def load_measure(text: str) -> LatticeMeasure:
    """Parse measure-file content and enforce all measure invariants"""
    return parse_measure(text)


def moments(m: LatticeMeasure, max_order: int) -> MomentTable:
    """Raw moments mu_nu = sum_x x^nu m(x) for |nu| <= max_order"""
    if max_order < 0:
        raise ValueError("max_order must be nonnegative")
    d = m.dimension
    values = {}
    for nu in multi_indices_upto(d, max_order):
        if m.exact is not None:
            powers = [prod(int(c) ** e for c, e in zip(x, nu)) for x in m.points]
            values[nu] = float(sum((w * p for w, p in zip(m.exact, powers)), Fraction(0)))
        else:
            values[nu] = float(m.probabilities @ monomials(m.points, nu))
    values[zero(d)] = 1.0
    if max_order >= 1:
        mean = np.array([values[unit(d, j)] for j in range(d)])
    else:
        mean = m.mean()
    return MomentTable(dimension=d, max_order=max_order, values=values, mean=mean)


def covariance_from_matrix(matrix) -> CovarianceMatrix:
    """Eigen-decomposition, determinant and (when positive definite) inverse of a covariance"""
    matrix = np.atleast_2d(np.asarray(matrix, dtype=float))
    matrix = (matrix + matrix.T) / 2
    eigenvalues = np.linalg.eigvalsh(matrix)
    gamma = float(eigenvalues[0])
    inverse = None
    if gamma > RANK_TOLERANCE:
        inverse = np.linalg.inv(matrix)
        inverse = (inverse + inverse.T) / 2
    return CovarianceMatrix(
        matrix=matrix,
        eigenvalues=eigenvalues,
        smallest_eigenvalue=gamma,
        determinant=float(np.prod(eigenvalues)),
        inverse=inverse,
    )


def covariance_from_weights(points: np.ndarray, weights: np.ndarray) -> CovarianceMatrix:
    """Covariance of a weighted point cloud"""
    x = np.asarray(points, dtype=float)
    centered = x - weights @ x
    return covariance_from_matrix((centered * weights[:, None]).T @ centered)


def covariance(m: LatticeMeasure) -> CovarianceMatrix:
    return covariance_from_weights(m.points, m.probabilities)


def require_inverse(cov: CovarianceMatrix) -> np.ndarray:
    if cov.inverse is None:
        raise SingularCovariance(
            f"covariance is not positive definite (smallest eigenvalue {cov.smallest_eigenvalue:.3e})"
        )
    return cov.inverse


def affine_rank(m: LatticeMeasure) -> int:
    """Dimension of the affine hull of the support"""
    support = m.support
    if support.shape[0] == 1:
        return 0
    return int(np.linalg.matrix_rank((support - support[0]).astype(float)))


def support_hull(m: LatticeMeasure) -> SupportHull:
    """Extreme points (and facets for d <= 3) of the convex closure of the support"""
    d = m.dimension
    points = np.unique(m.support, axis=0)
    rank = affine_rank(m)

    if d == 1:
        lo, hi = int(points.min()), int(points.max())
        vertices = np.array([[lo], [hi]]) if hi > lo else np.array([[lo]])
        equations = np.array([[-1.0, float(lo)], [1.0, -float(hi)]])
        return SupportHull(
            dimension=1,
            vertices=vertices,
            points=points,
            equations=equations,
            volume=float(hi - lo),
            degenerate=hi == lo,
        )

    if rank < d:
        return SupportHull(
            dimension=d, vertices=points, points=points, equations=None, volume=0.0, degenerate=True
        )

    try:
        hull = ConvexHull(points.astype(float))
    except QhullError as e:
        logger.warning(f"Qhull failed on a full-rank support: {e}")
        return SupportHull(
            dimension=d, vertices=points, points=points, equations=None, volume=0.0, degenerate=True
        )
    return SupportHull(
        dimension=d,
        vertices=points[np.sort(hull.vertices)],
        points=points,
        equations=hull.equations if d <= 3 else None,
        volume=float(hull.volume),
        degenerate=False,
    )


def _interior_by_facets(equations: np.ndarray, xi: np.ndarray, margin: float) -> bool:
    slack = equations[:, :-1] @ xi + equations[:, -1]
    return bool(np.max(slack) < -margin)


def _interior_by_feasibility(points: np.ndarray, xi: np.ndarray, margin: float) -> bool:
    """
    xi is interior iff it is a convex combination of the support points with
    every weight strictly positive (the hull being full dimensional).
    Maximises the smallest weight s over {lambda >= s, sum lambda = 1, P^T lambda = xi}.
    """
    k, d = points.shape
    # variables: lambda_1..lambda_k, s
    c = np.zeros(k + 1)
    c[-1] = -1.0
    a_eq = np.zeros((d + 1, k + 1))
    a_eq[:d, :k] = points.T
    a_eq[d, :k] = 1.0
    b_eq = np.append(xi, 1.0)
    a_ub = np.hstack([-np.eye(k), np.ones((k, 1))])
    b_ub = np.zeros(k)
    bounds = [(0, None)] * k + [(None, 1.0)]
    res = optimize.linprog(c, A_ub=a_ub, b_ub=b_ub, A_eq=a_eq, b_eq=b_eq, bounds=bounds, method="highs")
    if res.status != 0:
        return False
    return bool(-res.fun > margin)


def hull_contains_interior(h: SupportHull, xi, margin: Optional[float] = None) -> bool:
    """True iff xi lies strictly inside the hull (facet slack below -margin)"""
    xi = np.atleast_1d(np.asarray(xi, dtype=float))
    if xi.shape != (h.dimension,):
        raise DimensionMismatch(f"point of dimension {xi.shape[0]} for a hull in dimension {h.dimension}")
    if h.degenerate:
        raise DegenerateHull("support hull has no interior (measure is not maximal)")
    margin = settings.INTERIOR_MARGIN if margin is None else margin
    if h.equations is not None:
        return _interior_by_facets(h.equations, xi, margin)
    return _interior_by_feasibility(h.points.astype(float), xi, margin)


def _period_certificate(m: LatticeMeasure, p: int) -> bool:
    """
    Look for a . x = c (mod p) on the whole support with gcd(c, p) = 1; then every
    return time n satisfies n c = 0 (mod p), i.e. p divides n.
    """
    d = m.dimension
    if p ** d > MAX_CERTIFICATE_CANDIDATES:
        return False
    support = m.support
    for a in product(range(p), repeat=d):
        residues = np.mod(support @ np.array(a, dtype=np.int64), p)
        c = int(residues[0])
        if np.all(residues == c) and gcd(c, p) == 1:
            return True
    return False


def aperiodicity(m: LatticeMeasure, cap: Optional[int] = None) -> Aperiodicity:
    """Running gcd of the return times n <= cap with m^{*n}(0) > 0"""
    cap = settings.APERIODICITY_CAP if cap is None else cap
    origin, base = m.to_grid()
    base = (base > 0).astype(float)
    reach, reach_origin = base.copy(), origin.copy()
    running = 0
    returns = []
    checked = 0

    for n in range(1, cap + 1):
        if n > 1:
            cells = int(np.prod(np.array(reach.shape) + np.array(base.shape) - 1))
            if cells > settings.MAX_GRID_CELLS:
                logger.warning(f"Aperiodicity scan stopped at n={n - 1}: grid of {cells} cells")
                break
            reach = (signal.convolve(reach, base, method="direct") > 0.5).astype(float)
            reach_origin = reach_origin + origin
        checked = n
        idx = -reach_origin
        if np.all(idx >= 0) and np.all(idx < np.array(reach.shape)) and reach[tuple(idx)] > 0:
            returns.append(n)
            running = gcd(running, n)
            if running == 1:
                return Aperiodicity(status=AperiodicityStatus.YES, period=1, return_times=returns, checked_up_to=n)

    if running > 1 and _period_certificate(m, running):
        return Aperiodicity(
            status=AperiodicityStatus.NO, period=running, return_times=returns, checked_up_to=checked
        )
    logger.warning(f"Aperiodicity undetermined after n={checked} (running gcd {running})")
    return Aperiodicity(
        status=AperiodicityStatus.UNDETERMINED,
        period=running or None,
        return_times=returns,
        checked_up_to=checked,
    )


def validate(m: LatticeMeasure, aperiodicity_cap: Optional[int] = None) -> ValidationReport:
    """Collect structural findings; never raises on a well-formed measure"""
    mass_error = abs(float(np.sum(m.probabilities)) - 1.0)
    sq_norms = np.sum(m.support.astype(np.int64) ** 2, axis=1)
    cov = covariance(m)
    maximal = cov.positive_definite
    rank = affine_rank(m)
    if maximal != (rank == m.dimension):
        logger.warning(f"Maximality routes disagree: gamma={cov.smallest_eigenvalue:.3e}, affine rank={rank}")
    period = aperiodicity(m, aperiodicity_cap)
    gap = char_fn_gap(m) if maximal and period.status == AperiodicityStatus.YES else None
    return ValidationReport(
        mass_ok=mass_error <= settings.MASS_TOLERANCE,
        steplength_ok=bool(np.all(sq_norms <= m.steplength ** 2)),
        maximal=maximal,
        aperiodic=period,
        mean=m.mean(),
        gamma=cov.smallest_eigenvalue,
        affine_rank=rank,
        char_fn_gap=gap,
    )

