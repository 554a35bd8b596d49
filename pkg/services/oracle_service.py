from collections import defaultdict
from fractions import Fraction
from typing import Dict, Optional, Tuple
import logging

import numpy as np
from scipy import fft, signal

from config import settings
from models.measure import ConvolvedMeasure, LatticeMeasure, Provenance
from utils.errors import DimensionMismatch, NumericalFailure, PreconditionError, ResourceLimit

logger = logging.getLogger(__name__)


def _steps(m: LatticeMeasure) -> int:
    return m.n if isinstance(m, ConvolvedMeasure) else 1


def _exact_masses(m: LatticeMeasure) -> Tuple[Fraction, ...]:
    if m.exact is not None:
        return m.exact
    # binary floats convert exactly
    return tuple(Fraction(float(p)) for p in m.probabilities)


def _from_grid(origin: np.ndarray, grid: np.ndarray, steplength: int, n: int, provenance: Provenance) -> ConvolvedMeasure:
    idx = np.argwhere(grid > 0)
    points = idx + origin
    return ConvolvedMeasure(
        dimension=grid.ndim,
        steplength=steplength,
        points=points,
        probabilities=grid[tuple(idx.T)],
        n=n,
        provenance=provenance,
    )


def _check_cells(cells: int, what: str) -> None:
    if cells > settings.MAX_GRID_CELLS:
        raise ResourceLimit(f"{what} needs {cells} cells, cap is {settings.MAX_GRID_CELLS}")


def _convolve_exact(a: LatticeMeasure, b: LatticeMeasure) -> ConvolvedMeasure:
    acc: Dict[Tuple[int, ...], Fraction] = defaultdict(Fraction)
    b_items = list(zip((tuple(int(c) for c in y) for y in b.points), _exact_masses(b)))
    for x, p in zip(a.points, _exact_masses(a)):
        x = tuple(int(c) for c in x)
        for y, q in b_items:
            acc[tuple(i + j for i, j in zip(x, y))] += p * q
    support = sorted((z, w) for z, w in acc.items() if w != 0)
    exact = tuple(w for _, w in support)
    return ConvolvedMeasure(
        dimension=a.dimension,
        steplength=a.steplength + b.steplength,
        points=np.array([z for z, _ in support], dtype=np.int64).reshape(len(support), a.dimension),
        probabilities=np.array([float(w) for w in exact]),
        exact=exact,
        n=_steps(a) + _steps(b),
        provenance=Provenance.DP,
    )


def convolve(a: LatticeMeasure, b: LatticeMeasure, exact: bool = False) -> ConvolvedMeasure:
    """(a*b)(x) = sum_y a(y) b(x-y); the steplength bound is the sum of the bounds"""
    if a.dimension != b.dimension:
        raise DimensionMismatch(f"cannot convolve measures of dimension {a.dimension} and {b.dimension}")
    if exact:
        _check_cells(a.support_size * b.support_size, "exact convolution")
        return _convolve_exact(a, b)

    origin_a, grid_a = a.to_grid()
    origin_b, grid_b = b.to_grid()
    _check_cells(int(np.prod(np.array(grid_a.shape) + np.array(grid_b.shape) - 1)), "convolution")
    out = signal.convolve(grid_a, grid_b, method="direct")
    flushed = np.count_nonzero((out > 0) & (out < settings.UNDERFLOW_FLUSH))
    if flushed:
        logger.debug(f"Flushed {flushed} sub-{settings.UNDERFLOW_FLUSH:g} cells to zero")
    out[out < settings.UNDERFLOW_FLUSH] = 0.0
    return _from_grid(origin_a + origin_b, out, a.steplength + b.steplength, _steps(a) + _steps(b), Provenance.DP)


def _as_convolved(m: LatticeMeasure, exact: bool) -> ConvolvedMeasure:
    return ConvolvedMeasure(
        dimension=m.dimension,
        steplength=m.steplength,
        points=m.points,
        probabilities=m.probabilities,
        exact=_exact_masses(m) if exact else None,
        n=_steps(m),
        provenance=Provenance.DP,
    )


def power_dp(m: LatticeMeasure, n: int, exact: bool = False) -> ConvolvedMeasure:
    """m^{*n} by binary exponentiation of convolve"""
    if n < 1:
        raise PreconditionError(f"n must be at least 1, got {n}")
    _check_cells((2 * m.steplength * n + 1) ** m.dimension, f"support box of m^(*{n})")
    logger.debug(f"power_dp n={n} exact={exact} support={m.support_size}")
    result: Optional[ConvolvedMeasure] = None
    base = _as_convolved(m, exact)
    remaining = n
    while remaining:
        if remaining & 1:
            result = base if result is None else convolve(result, base, exact=exact)
        remaining >>= 1
        if remaining:
            base = convolve(base, base, exact=exact)
    return result


def dft_grid_size(steplength: int, n: int) -> int:
    """Smallest power of two >= 2 l n + 1"""
    need = 2 * steplength * n + 1
    return 1 << (need - 1).bit_length()


def power_dft(m: LatticeMeasure, n: int) -> ConvolvedMeasure:
    """
    m^{*n} by characteristic-function inversion on a periodic grid large enough
    that the support of m^{*n} does not wrap around.
    """
    if n < 1:
        raise PreconditionError(f"n must be at least 1, got {n}")
    d = m.dimension
    size = dft_grid_size(m.steplength, n)
    _check_cells(size ** d, f"transform grid for n={n}")
    logger.debug(f"power_dft n={n} grid={size}^{d}")

    grid = np.zeros((size,) * d, dtype=float)
    np.add.at(grid, tuple(np.mod(m.points, size).T), m.probabilities)
    # fftn(grid)[k] is the characteristic function at t = -2 pi k / size
    values = fft.ifftn(fft.fftn(grid) ** n)
    residue = float(np.max(np.abs(values.imag)))
    if residue > settings.IMAGINARY_RESIDUE_MAX:
        raise NumericalFailure(f"imaginary residue {residue:.3e} after inversion")
    real = np.clip(values.real, 0.0, None)

    radius = m.steplength * n
    coords = np.arange(size)
    coords = np.where(coords <= size // 2, coords, coords - size)
    mesh = np.stack(np.meshgrid(*([coords] * d), indexing="ij"), axis=-1).reshape(-1, d)
    flat = real.reshape(-1)
    keep = (flat > 0) & (np.sum(mesh.astype(np.int64) ** 2, axis=1) <= radius ** 2)
    order = np.lexsort(mesh[keep].T[::-1])
    return ConvolvedMeasure(
        dimension=d,
        steplength=radius,
        points=mesh[keep][order],
        probabilities=flat[keep][order],
        n=n,
        provenance=Provenance.DFT,
    )


def char_fn(m: LatticeMeasure, t) -> complex:
    """H^(t) = sum_x exp(i t.x) m(x); t may be a single vector or an array of vectors"""
    t = np.asarray(t, dtype=float)
    single = t.ndim <= 1
    t = t.reshape(1, -1) if single else t
    if t.shape[1] != m.dimension:
        raise DimensionMismatch(f"frequency of dimension {t.shape[1]} for a measure in dimension {m.dimension}")
    values = np.exp(1j * (t @ m.points.T.astype(float))) @ m.probabilities
    return complex(values[0]) if single else values


def char_fn_gap(m: LatticeMeasure, per_axis: Optional[int] = None) -> float:
    """max |H^(t)| over an equispaced grid of [-pi, pi]^d with t = 0 removed"""
    d = m.dimension
    per_axis = per_axis or (129 if d == 1 else 65 if d == 2 else 17)
    axis = np.linspace(-np.pi, np.pi, per_axis)
    mesh = np.stack(np.meshgrid(*([axis] * d), indexing="ij"), axis=-1).reshape(-1, d)
    mesh = mesh[np.any(np.abs(mesh) > 1e-15, axis=1)]
    return float(np.max(np.abs(char_fn(m, mesh))))


def lookup(m: LatticeMeasure, xs) -> np.ndarray:
    """m(x) for each row of xs (shape (k, d)); zero off the support"""
    xs = np.atleast_2d(np.asarray(xs, dtype=np.int64))
    origin, grid = m.to_grid()
    idx = xs - origin
    inside = np.all((idx >= 0) & (idx < np.array(grid.shape)), axis=1)
    out = np.zeros(xs.shape[0])
    out[inside] = grid[tuple(idx[inside].T)]
    return out
