from pathlib import Path
from typing import Callable, List, Optional, Sequence, Tuple
import logging

import numpy as np
from joblib import Parallel, delayed
from scipy import stats

from config import settings
from models.edgeworth import EdgeworthModel
from models.harness import (
    ApproxMode,
    ApproxRow,
    CorollaryRow,
    ErrorReport,
    ErrorRow,
    SuiteEntry,
    SuiteReport,
    SweepConfig,
    SweepMode,
)
from models.measure import LatticeMeasure
from services.edgeworth_service import (
    build_model,
    corollary_value,
    gaussian_approximant,
    lemma_approximant,
    theorem_approximant,
    theorem_polynomials,
)
from services.oracle_service import lookup, power_dft, power_dp
from services.tilt_service import comparison_gaussian, tail_bound, tilted_approximant
from utils.errors import ConfigError, LcltError, PreconditionError, TailBoundViolation
from utils.measure_io import load_measure_file

logger = logging.getLogger(__name__)

Approximant = Callable[[EdgeworthModel, int, np.ndarray], np.ndarray]

APPROXIMANTS = {
    SweepMode.THEOREM: theorem_approximant,
    SweepMode.LEMMA: lemma_approximant,
    SweepMode.GAUSSIAN_ONLY: gaussian_approximant,
}


def lattice_target(model: EdgeworthModel, n: int) -> Optional[Tuple[int, ...]]:
    """nE as a lattice point, or None when nE is not integral"""
    target = n * model.mean
    rounded = np.rint(target)
    if np.any(np.abs(target - rounded) > 1e-9):
        return None
    return tuple(int(c) for c in rounded)


def theorem_weight(m: LatticeMeasure, n: int, alpha: float, x) -> np.ndarray:
    """n^{-1-alpha} phi_{2 d l^2 n}(x)"""
    return n ** (-1.0 - alpha) * comparison_gaussian(m.dimension, m.steplength, n, x)


def approx_row(m: LatticeMeasure, n: int, x, mode: ApproxMode, alpha: float = settings.DEFAULT_ALPHA) -> ApproxRow:
    """Exact G^{*n}(x) from both oracles against the selected approximant"""
    x = np.atleast_1d(np.asarray(x, dtype=np.int64))
    point = x[None, :]
    model = build_model(m)
    if mode == ApproxMode.TILTED:
        value = tilted_approximant(m, n, x)
    elif mode == ApproxMode.COROLLARY:
        target = lattice_target(model, n)
        if target != tuple(int(c) for c in x):
            raise PreconditionError(f"corollary mode evaluates at x = nE only (nE = {(n * model.mean).tolist()})")
        value = corollary_value(model, n)
    else:
        value = float(APPROXIMANTS[SweepMode(mode.value)](model, n, point.astype(float))[0])
    exact_dp = float(lookup(power_dp(m, n), point)[0])
    exact_dft = float(lookup(power_dft(m, n), point)[0])
    return ApproxRow(
        n=n,
        x=tuple(int(c) for c in x),
        mode=mode,
        exact_dp=exact_dp,
        exact_dft=exact_dft,
        approximant=value,
        abs_err=abs(exact_dp - value),
        weight=float(theorem_weight(m, n, alpha, point)[0]),
    )


def _check_deep_cells(m: LatticeMeasure, n: int, xs: np.ndarray, exact: np.ndarray) -> None:
    bound = tail_bound(m, n, xs)
    violations = np.flatnonzero(exact > bound * (1 + 1e-9))
    if violations.size:
        x = tuple(int(c) for c in xs[violations[0]])
        logger.error(f"Tail bound violated at n={n}, x={x}: {exact[violations[0]]:.3e} > {bound[violations[0]]:.3e}")
        raise TailBoundViolation(f"G^(*{n})({x}) exceeds exp(-x^2/(2 d l^2 n)) in {violations.size} cells")


def sweep_row(m: LatticeMeasure, model: EdgeworthModel, n: int, mode: SweepMode, alpha: float) -> ErrorRow:
    """Errors of one approximant against power_dp(m, n) over the support of m^{*n}"""
    dist = power_dp(m, n)
    logger.info(f"Sweep {mode.value}: n={n}, support {dist.support_size}")

    if mode == SweepMode.COROLLARY:
        target = lattice_target(model, n)
        if target is None:
            raise PreconditionError(f"nE = {(n * model.mean).tolist()} is not a lattice point")
        exact = float(lookup(dist, np.array([target]))[0])
        return ErrorRow(n=n, sup_abs_err=abs(exact - corollary_value(model, n)), argmax_x=target)

    xs = dist.points
    exact = dist.probabilities
    errors = np.abs(exact - APPROXIMANTS[mode](model, n, xs.astype(float)))
    worst = int(np.argmax(errors))
    weighted = None
    skipped = 0
    if mode == SweepMode.THEOREM:
        weights = theorem_weight(m, n, alpha, xs)
        deep = weights < settings.WEIGHT_FLOOR
        skipped = int(np.count_nonzero(deep))
        if skipped:
            _check_deep_cells(m, n, xs[deep], exact[deep])
        weighted = float(np.max(errors[~deep] / weights[~deep], initial=0.0))
    return ErrorRow(
        n=n,
        sup_abs_err=float(errors[worst]),
        argmax_x=tuple(int(c) for c in xs[worst]),
        weighted_err=weighted,
        skipped_cells=skipped,
    )


def _guarded_row(m, model, n, mode, alpha) -> Tuple[int, Optional[ErrorRow], Optional[str]]:
    try:
        return n, sweep_row(m, model, n, mode, alpha), None
    except LcltError as e:
        return n, None, f"{type(e).__name__}: {e}"


def fit_loglog_slope(ns: Sequence[int], errors: Sequence[float]) -> Tuple[float, float]:
    """Least-squares slope of log error against log n with its standard error"""
    pairs = [(n, e) for n, e in zip(ns, errors) if e > 0]
    if len(pairs) < len(ns):
        logger.warning(f"Dropped {len(ns) - len(pairs)} zero errors from the slope fit")
    if len(pairs) < settings.MIN_SLOPE_POINTS:
        raise ConfigError(f"slope fit needs at least {settings.MIN_SLOPE_POINTS} positive errors, got {len(pairs)}")
    fit = stats.linregress(np.log([n for n, _ in pairs]), np.log([e for _, e in pairs]))
    return float(fit.slope), float(fit.stderr)


def run_sweep(m: LatticeMeasure, config: SweepConfig, label: Optional[str] = None) -> ErrorReport:
    """
    One row per n (computed in parallel, collected in n order). The first failing n
    stops the report there; rows before it are kept and ``failure`` says why.
    """
    model = build_model(m)
    if config.mode == SweepMode.THEOREM:
        theorem_polynomials(model)

    results = Parallel(n_jobs=config.n_jobs, prefer="threads")(
        delayed(_guarded_row)(m, model, n, config.mode, config.alpha) for n in config.n_list
    )
    rows: List[ErrorRow] = []
    failure = None
    for n, row, error in sorted(results, key=lambda r: r[0]):
        if error is not None:
            failure = f"n={n}: {error}"
            logger.error(f"Sweep stopped at {failure}")
            break
        rows.append(row)

    slope = stderr = None
    if len(rows) >= settings.MIN_SLOPE_POINTS:
        try:
            slope, stderr = fit_loglog_slope([r.n for r in rows], [r.sup_abs_err for r in rows])
        except ConfigError as e:
            if failure is None:
                failure = str(e)
    c_hat = None
    if config.mode == SweepMode.THEOREM and rows:
        c_hat = max(r.weighted_err for r in rows)
    return ErrorReport(
        measure=label or str(config.measure_path),
        mode=config.mode,
        alpha=config.alpha,
        rows=rows,
        c_hat=c_hat,
        slope=slope,
        slope_stderr=stderr,
        failure=failure,
    )


def corollary_table(m: LatticeMeasure, n_list: Sequence[int], L: Optional[float] = None) -> List[CorollaryRow]:
    """Exact H^{*n}(nE) against (2 pi n)^{-d/2} (det V)^{-1/2} (1 + L/n), difference scaled by n^{(d+3)/2}"""
    model = build_model(m)
    d = m.dimension
    rows = []
    for n in n_list:
        target = lattice_target(model, n)
        if target is None:
            logger.warning(f"Skipping n={n}: nE = {(n * model.mean).tolist()} is not a lattice point")
            rows.append(CorollaryRow(n=n, skipped=True))
            continue
        exact = float(lookup(power_dp(m, n), np.array([target]))[0])
        value = corollary_value(model, n, L)
        rows.append(
            CorollaryRow(
                n=n,
                x=target,
                exact=exact,
                value=value,
                scaled_diff=(exact - value) * n ** ((d + 3) / 2),
            )
        )
    return rows


def run_suite(paths: Sequence[Path], n_list: List[int], alpha: float, n_jobs: int = 1) -> SuiteReport:
    """Theorem sweep over several measures; the spread of C_hat evidences (not proves) uniformity"""
    entries = []
    for path in paths:
        config = SweepConfig(measure_path=path, n_list=n_list, alpha=alpha, mode=SweepMode.THEOREM, n_jobs=n_jobs)
        try:
            report = run_sweep(load_measure_file(path), config, label=Path(path).name)
        except LcltError as e:
            logger.error(f"Suite entry {path} failed: {e}")
            entries.append(SuiteEntry(measure=Path(path).name, c_hat=None, failure=f"{type(e).__name__}: {e}"))
            continue
        entries.append(SuiteEntry(measure=Path(path).name, c_hat=report.c_hat, failure=report.failure))

    constants = [e.c_hat for e in entries if e.c_hat is not None and e.failure is None]
    c_min = min(constants) if constants else None
    c_max = max(constants) if constants else None
    ratio = c_max / c_min if constants and c_min > 0 else None
    return SuiteReport(alpha=alpha, n_list=list(n_list), entries=entries, c_min=c_min, c_max=c_max, ratio=ratio)
