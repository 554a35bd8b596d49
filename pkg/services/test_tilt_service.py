import numpy as np
import pytest

from config import settings
from services.oracle_service import lookup, power_dp
from services.tilt_service import (
    comparison_gaussian,
    factorize,
    grad_hess_log_Z,
    log_partition_fn,
    partition_fn,
    rate_fn,
    solve_tilt,
    tail_bound,
    tilt_measure,
    tilted_approximant,
)
from utils.errors import DegenerateHull, DimensionMismatch, NoConvergence, NotInterior, PreconditionError


def test_partition_function_lazy(lazy) -> None:
    assert partition_fn(lazy, [0.0]) == pytest.approx(1.0)
    assert partition_fn(lazy, [0.7]) == pytest.approx(0.5 + 0.5 * np.cosh(0.7))
    assert log_partition_fn(lazy, [0.7]) == pytest.approx(np.log(0.5 + 0.5 * np.cosh(0.7)))
    with pytest.raises(DimensionMismatch):
        partition_fn(lazy, [0.1, 0.1])


def test_log_partition_stays_finite_for_large_t(lazy) -> None:
    assert log_partition_fn(lazy, [800.0]) == pytest.approx(800.0 + np.log(0.25))


def test_grad_hess_at_origin(lazy, product2d) -> None:
    grad, hess = grad_hess_log_Z(lazy, [0.0])
    assert grad == pytest.approx([0.0], abs=1e-15)
    assert hess == pytest.approx(np.array([[0.5]]))
    grad, hess = grad_hess_log_Z(product2d, [0.0, 0.0])
    assert np.allclose(hess, 0.5 * np.eye(2))


def test_grad_hess_finite_differences(asym) -> None:
    t, h = 0.3, 1e-5
    grad, hess = grad_hess_log_Z(asym, [t])
    fd_grad = (log_partition_fn(asym, [t + h]) - log_partition_fn(asym, [t - h])) / (2 * h)
    fd_hess = (grad_hess_log_Z(asym, [t + h])[0] - grad_hess_log_Z(asym, [t - h])[0]) / (2 * h)
    assert grad[0] == pytest.approx(fd_grad, abs=1e-8)
    assert hess[0, 0] == pytest.approx(fd_hess[0], abs=1e-8)


def test_tilt_measure_lazy(lazy) -> None:
    tilted = tilt_measure(lazy, [np.log(2.0)])
    assert tilted.probabilities == pytest.approx([1 / 9, 4 / 9, 4 / 9])
    assert np.array_equal(tilted.points, lazy.points)


def test_solve_tilt_at_mean(lazy) -> None:
    solution = solve_tilt(lazy, [0.0])
    assert solution.t == pytest.approx([0.0])
    assert solution.rate == 0.0
    assert solution.iterations == 0


def test_solve_tilt_lazy_half(lazy) -> None:
    solution = solve_tilt(lazy, [0.5])
    assert solution.t[0] == pytest.approx(np.log(3.0), abs=1e-10)
    assert solution.rate == pytest.approx(0.261624, abs=1e-6)
    assert solution.residual <= 1e-11
    assert solution.tilted.mean()[0] == pytest.approx(0.5, abs=1e-10)
    assert solution.tilted.probabilities == pytest.approx([1 / 16, 3 / 8, 9 / 16])
    assert solution.tilted_cov.matrix[0, 0] == pytest.approx(3 / 8)


@pytest.mark.parametrize("xi", [1.0, 1.5, -1.0])
def test_solve_tilt_outside_interior(lazy, xi) -> None:
    with pytest.raises(NotInterior):
        solve_tilt(lazy, [xi])


def test_solve_tilt_degenerate(line2d) -> None:
    with pytest.raises(DegenerateHull):
        solve_tilt(line2d, [0.1, 0.0])


def test_solve_tilt_iteration_cap(monkeypatch, lazy) -> None:
    monkeypatch.setattr(settings, "NEWTON_MAX_ITER", 1)
    with pytest.raises(NoConvergence):
        solve_tilt(lazy, [0.9])


def test_rate_symmetric_for_symmetric_walk(lazy, product2d) -> None:
    for xi in (0.1, 0.4, 0.8):
        assert rate_fn(lazy, [xi]) == pytest.approx(rate_fn(lazy, [-xi]), abs=1e-12)
        assert solve_tilt(lazy, [xi]).t == pytest.approx(-solve_tilt(lazy, [-xi]).t, abs=1e-10)
    assert rate_fn(product2d, [0.3, -0.5]) == pytest.approx(rate_fn(lazy, [0.3]) + rate_fn(lazy, [-0.5]), abs=1e-10)


@pytest.mark.parametrize("name,lo,hi", [("lazy", -0.9, 0.9), ("asym", -0.8, 1.8)])
def test_rate_quadratic_lower_bound(name, lo, hi, request) -> None:
    m = request.getfixturevalue(name)
    for xi in np.linspace(lo, hi, 14):
        assert rate_fn(m, [xi]) >= xi ** 2 / (2 * m.dimension * m.steplength ** 2) - 1e-12


def test_rate_derivative_is_tilt(asym) -> None:
    h = 1e-6
    for xi in (-0.5, 0.2, 1.1):
        fd = (rate_fn(asym, [xi + h]) - rate_fn(asym, [xi - h])) / (2 * h)
        assert fd == pytest.approx(solve_tilt(asym, [xi]).t[0], abs=1e-5)


def test_rate_convex(asym) -> None:
    grid = np.linspace(-0.8, 1.8, 27)
    rates = np.array([rate_fn(asym, [xi]) for xi in grid])
    assert np.all(rates[:-2] - 2 * rates[1:-1] + rates[2:] >= -1e-12)


@pytest.mark.parametrize("name,lo,hi", [("lazy", -0.95, 0.95), ("asym", -0.9, 1.9)])
def test_tilt_hits_target(name, lo, hi, request) -> None:
    m = request.getfixturevalue(name)
    for xi in np.linspace(lo, hi, 20):
        solution = solve_tilt(m, [xi])
        assert grad_hess_log_Z(m, solution.t)[0][0] == pytest.approx(xi, abs=1e-10)


def test_tilt_hits_target_2d(product2d) -> None:
    xi = np.array([0.6, -0.2])
    solution = solve_tilt(product2d, xi)
    assert solution.tilted.mean() == pytest.approx(xi, abs=1e-10)
    assert solution.tilted_cov.positive_definite


def test_factorize_single_cell(lazy) -> None:
    scale, local = factorize(lazy, 20, [8])
    exact = float(lookup(power_dp(lazy, 20), [[8]])[0])
    assert scale * local == pytest.approx(exact, rel=1e-10)
    assert scale == pytest.approx(np.exp(-20 * rate_fn(lazy, [0.4])))


@pytest.mark.parametrize("name", ["lazy", "asym"])
def test_factorize_recovers_distribution(name, request) -> None:
    m = request.getfixturevalue(name)
    lo, hi = int(m.support.min()), int(m.support.max())
    for n in (1, 2, 3, 4, 5, 7, 10, 15, 20, 25, 30):
        dist = power_dp(m, n)
        for x in range(lo * n + 1, hi * n):
            exact = dist.prob((x,))
            if exact < 1e-12:
                continue
            scale, local = factorize(m, n, [x])
            assert scale * local == pytest.approx(exact, rel=1e-8), (n, x)


def test_factorize_rejects_bad_n(lazy) -> None:
    with pytest.raises(PreconditionError):
        factorize(lazy, 0, [0])


@pytest.mark.parametrize("name", ["lazy", "asym"])
def test_tail_bound_holds(name, request) -> None:
    m = request.getfixturevalue(name)
    for n in range(1, 201):
        dist = power_dp(m, n)
        bound = tail_bound(m, n, dist.points)
        assert np.all(dist.probabilities <= bound * (1 + 1e-12)), n


def test_tail_bound_values(lazy, product2d) -> None:
    assert tail_bound(lazy, 1, [2]) == pytest.approx(np.exp(-2.0))
    assert tail_bound(product2d, 1, [4, 4]) == pytest.approx(np.exp(-2.0))
    assert tail_bound(lazy, 5, [0]) == 1.0


def test_tail_bound_needs_centered_measure(shifted) -> None:
    with pytest.raises(PreconditionError):
        tail_bound(shifted, 3, [1])


def test_comparison_gaussian() -> None:
    assert comparison_gaussian(1, 1, 1, [0]) == pytest.approx(0.2820948, abs=1e-7)
    for x in (0.0, 1.0, 3.5):
        assert comparison_gaussian(1, 2, 12, [2 * x]) == pytest.approx(0.5 * comparison_gaussian(1, 2, 3, [x]))
    values = comparison_gaussian(2, 1, 1, np.array([[0, 0], [1, 1]]))
    assert values[1] == pytest.approx(values[0] * np.exp(-0.25))


def test_tilted_approximant_improves_with_n(lazy) -> None:
    errors = []
    for n in (20, 40, 80, 160):
        x = n // 2
        exact = float(lookup(power_dp(lazy, n), [[x]])[0])
        errors.append(abs(tilted_approximant(lazy, n, [x]) - exact) / exact)
    assert all(b < a for a, b in zip(errors, errors[1:]))
    assert errors[-1] < 1e-4


@pytest.mark.parametrize("name,points", [("asym", (-0.5, 0.2, 1.1)), ("lazy", (-0.6, 0.0, 0.3, 0.8))])
def test_rate_curvature_is_inverse_tilted_variance(name, points, request) -> None:
    m = request.getfixturevalue(name)
    h = 1e-4
    for xi in points:
        second = (rate_fn(m, [xi + h]) - 2 * rate_fn(m, [xi]) + rate_fn(m, [xi - h])) / h ** 2
        variance = solve_tilt(m, [xi]).tilted_cov.matrix[0, 0]
        assert second == pytest.approx(1.0 / variance, abs=1e-5), xi
