import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from levyito.errors import ConfigError, StabilityError
from levyito.levy_core import LevyMeasureSpec, LevyModel
from levyito.mc_pricer import risk_neutral_model
from levyito.pide_solver import (
    PIDEParams,
    integral_operator,
    interpolate_price,
    jump_weights,
    log_grid,
    solve_pide,
)

SPOTS = (80.0, 90.0, 100.0, 110.0, 120.0)


@pytest.fixture(scope="module")
def desk():
    return risk_neutral_model(LevyMeasureSpec.cgmy(1, 5, 5, 0.5))


@pytest.fixture(scope="module")
def desk_solution(desk):
    return solve_pide(PIDEParams(desk, 0.05, 0.5, 100, 130, 400, 400))


def frozen(r=0.0, D=130.0, **kw):
    return PIDEParams(LevyModel(LevyMeasureSpec.zero()), r, 0.5, 100.0, D, 200, 50, **kw)


# -- grid ----------------------------------------------------------------------------


@settings(max_examples=30, deadline=None)
@given(st.floats(50.0, 150.0), st.floats(1.05, 3.0), st.integers(8, 500))
def test_log_grid_hits_strike_and_barrier(K, ratio, n_x):
    D = K * ratio
    x, spots, k = log_grid(K, D, n_x, math.log(K) - 2.0)
    assert spots[k] == K and spots[-1] == D
    assert np.all(np.diff(x) > 0) and x.size == n_x + 1


# -- degenerate dynamics -------------------------------------------------------------


def test_frozen_lattice_is_payoff():
    sol = solve_pide(frozen())
    payoff = np.where(sol.spots < 130.0, np.maximum(sol.spots - 100.0, 0.0), 0.0)
    assert np.array_equal(sol.values, np.broadcast_to(payoff, sol.values.shape))


def test_discount_consistency():
    # carry 0 keeps the asset still; only discounting acts
    sol = solve_pide(frozen(r=0.05, D=1e4, carry=0.0))
    for S in SPOTS + (105.5, 140.0):
        exact = math.exp(-0.05 * 0.5) * max(S - 100.0, 0.0)
        assert abs(interpolate_price(sol, 0.0, S) - exact) <= 1e-10


def test_terminal_and_barrier_exact(desk_solution):
    sol = desk_solution
    below = sol.spots < 130.0
    assert np.array_equal(sol.values[-1][below], np.maximum(sol.spots[below] - 100.0, 0.0))
    assert np.all(sol.values[:, ~below] == 0.0)


def test_values_bounded(desk_solution):
    assert np.all(desk_solution.values >= 0.0)
    assert np.all(desk_solution.values <= 130.0)


# -- shape and convergence -----------------------------------------------------------


def test_monotone_then_decreasing_to_barrier(desk):
    # raw scheme (no extrapolation); the terminal row is the payoff itself
    sol = solve_pide(PIDEParams(desk, 0.05, 0.5, 100, 130, 200, 200))
    for t, row in zip(sol.times[:-1], sol.values[:-1]):
        top = int(np.argmax(row))
        assert np.all(np.diff(row[: top + 1]) >= 0.0)
        assert np.all(np.diff(row[top:]) < 0.0) and row[-1] == 0.0
        # within a few steps of maturity the maximum still hugs the barrier
        if t <= 0.5 - 10 * sol.diagnostics["dt"]:
            assert top < row.size - 4


@pytest.mark.slow
def test_refinement_contracts(desk):
    prices = []
    for n in (100, 200, 400):
        sol = solve_pide(PIDEParams(desk, 0.05, 0.5, 100, 130, n, n))
        prices.append(np.array([interpolate_price(sol, 0.0, S) for S in SPOTS]))
    ratio = np.abs(prices[2] - prices[1]) / np.abs(prices[1] - prices[0])
    assert np.all(ratio <= 0.6)


@pytest.mark.slow
def test_extrapolation_accelerates(desk):
    def prices(n, extrapolate):
        sol = solve_pide(PIDEParams(desk, 0.05, 0.5, 100, 130, n, n, extrapolate=extrapolate))
        return np.array([interpolate_price(sol, 0.0, S) for S in SPOTS])

    raw = np.abs(prices(400, False) - prices(200, False))
    ext = np.abs(prices(400, True) - prices(200, True))
    assert np.all(ext < 0.5 * raw)


# -- interpolation -------------------------------------------------------------------


def test_interpolation_examples(desk_solution):
    sol = desk_solution
    assert interpolate_price(sol, 0.3, 130.0) == 0.0
    assert interpolate_price(sol, 0.5, 100.0) == 0.0
    i, j = 123, 321
    assert interpolate_price(sol, sol.times[i], sol.spots[j]) == sol.values[i, j]
    with pytest.raises(ConfigError):
        interpolate_price(sol, 0.0, 1e-3)
    with pytest.raises(ConfigError):
        interpolate_price(sol, 0.6, 100.0)


# -- integral operator ---------------------------------------------------------------


def test_integral_operator_cancellations():
    m = LevyMeasureSpec.cgmy(1, 5, 5, 0.5)
    spots = np.geomspace(50.0, 200.0, 101)
    assert integral_operator(np.full(101, 7.0), spots, m, 50) == 0.0
    assert abs(integral_operator(spots.copy(), spots, m, 50)) <= 1e-9


def test_integral_operator_refinement(desk, desk_solution):
    row = desk_solution.values[0]
    for S in SPOTS:
        j = int(np.argmin(np.abs(desk_solution.spots - S)))
        coarse = integral_operator(row, desk_solution.spots, desk.measure, j, barrier=130, strike=100)
        fine = integral_operator(row, desk_solution.spots, desk.measure, j, barrier=130, strike=100, order=160)
        assert abs(coarse - fine) <= 1e-4 * abs(fine)


def test_jump_weights_integrate_linear_functions():
    # the hat weights reproduce int nu and int y nu over |y| >= eps exactly on the grid
    m = LevyMeasureSpec.cgmy(1, 5, 5, 0.5)
    dx, eps, n = 0.01, 0.01, 400
    w = jump_weights(m, dx, eps, n)
    y = dx * np.arange(-n, n + 1)
    assert np.sum(w) == pytest.approx(m.integrate(lambda v: 1.0, inner=eps, outer=n * dx), rel=1e-9)
    assert np.sum(w * y) == pytest.approx(m.integrate(lambda v: v, inner=eps, outer=n * dx), rel=1e-8)


# -- errors --------------------------------------------------------------------------


def test_rejects_non_martingale_drift():
    with pytest.raises(ConfigError, match="martingale"):
        solve_pide(PIDEParams(LevyModel(LevyMeasureSpec.cgmy(1, 5, 5, 0.5), 0.0), 0.05, 0.5, 100, 130))


def test_unstable_step(desk):
    with pytest.raises(StabilityError, match="increase n_t"):
        solve_pide(PIDEParams(desk, 0.05, 0.5, 100, 130, 400, 2))


@pytest.mark.parametrize("kw", [dict(K=130.0), dict(r=-0.1), dict(T=0.0), dict(n_x=2),
                                dict(extrapolate=True, n_x=401)])
def test_params_validation(kw):
    base = dict(model=LevyModel(LevyMeasureSpec.zero()), r=0.0, T=0.5, K=100.0, D=130.0)
    with pytest.raises(ConfigError):
        PIDEParams(**{**base, **kw})
