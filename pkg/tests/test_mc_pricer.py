import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from levyito.errors import ConfigError, DomainError
from levyito.levy_core import LevyMeasureSpec, LevyModel, SamplePath, simulate_path
from levyito.mc_pricer import (
    barrier_payoffs,
    first_passage_time,
    martingale_diagnostic,
    martingale_drift,
    price_barrier_curve,
    price_barrier_mc,
    risk_neutral_model,
)

# mpmath reference, see tests/oracles.py
GAMMA_STAR = -0.080278732102768031831


@pytest.fixture(scope="module")
def desk():
    return risk_neutral_model(LevyMeasureSpec.cgmy(1, 5, 5, 0.5))


# -- martingale drift ------------------------------------------------------------


def test_martingale_drift_values():
    assert martingale_drift(LevyMeasureSpec.zero()) == 0.0
    assert martingale_drift(LevyMeasureSpec.compound_poisson(1.5, atom=math.log(2.0))) == pytest.approx(-1.5)
    assert martingale_drift(LevyMeasureSpec.cgmy(1, 5, 5, 0.5)) == pytest.approx(GAMMA_STAR, rel=1e-13)


def test_martingale_drift_matches_quadrature():
    # closed forms against direct integration of (e^y - 1) nu(dy)
    for m in (LevyMeasureSpec.cgmy(1, 3, 8, 0.5), LevyMeasureSpec.variance_gamma(0.8, 4, 6),
              LevyMeasureSpec.compound_poisson(2.0, -0.1, 0.3)):
        assert martingale_drift(m) == pytest.approx(-m.integrate(math.expm1), rel=1e-8)


def test_martingale_drift_needs_exponential_moment():
    with pytest.raises(DomainError, match="martingale correction impossible"):
        martingale_drift(LevyMeasureSpec.cgmy(1, 5, 0.8, 0.5))


# -- martingale diagnostic ------------------------------------------------------------


def test_diagnostic_without_jumps():
    est = martingale_diagnostic(LevyModel(LevyMeasureSpec.zero()), 1.0, 1000, 0.0, seed=1)
    assert est.mean == 1.0 and est.std_error == 0.0


def test_diagnostic_poisson_atom():
    model = risk_neutral_model(LevyMeasureSpec.compound_poisson(1.0, atom=math.log(2.0)))
    assert model.gamma == pytest.approx(-1.0)
    est = martingale_diagnostic(model, 1.0, 20_000, 0.0, seed=2)
    assert abs(est.mean - 1.0) <= 3 * est.std_error


# -- barrier prices -----------------------------------------------------------------


def test_at_or_above_barrier_is_zero(desk):
    for S in (130.0, 150.0):
        est = price_barrier_mc(desk, 0.05, 0.5, 100, 130, S, n_paths=1000, delta=1e-2, seed=1)
        assert est.mean == 0.0 and est.std_error == 0.0


def test_forward_without_barrier(desk):
    # K = 0 and an unreachable barrier: the price is E[S_T] = spot when r = 0
    est = price_barrier_mc(desk, 0.0, 1.0, 0.0, 1e12, 100.0, n_paths=20_000, delta=1e-2, seed=3)
    assert abs(est.mean - 100.0) <= 3 * est.std_error


def test_continuous_monitoring_below_discrete(desk):
    cont = barrier_payoffs(desk, 0.05, 0.5, 100, 130, 110, 20_000, 1e-2, seed=4)
    disc = barrier_payoffs(desk, 0.05, 0.5, 100, 130, 110, 20_000, 1e-2, seed=4, discrete=True)
    assert np.all(cont <= disc)
    # with positive drift the path can creep over the barrier between jumps
    assert np.any(cont < disc) or desk.gamma + 0.05 <= 0


def test_monotone_in_barrier(desk):
    low = barrier_payoffs(desk, 0.05, 0.5, 100, 130, 110, 20_000, 1e-2, seed=5)
    high = barrier_payoffs(desk, 0.05, 0.5, 100, 1.2 * 130, 110, 20_000, 1e-2, seed=5)
    assert np.all(low <= high)


@settings(max_examples=10, deadline=None)
@given(st.floats(60.0, 129.0), st.integers(0, 1000))
def test_price_bounds(spot, seed):
    model = risk_neutral_model(LevyMeasureSpec.cgmy(1, 5, 5, 0.5))
    est = price_barrier_mc(model, 0.05, 0.5, 100, 130, spot, n_paths=2000, delta=1e-2, seed=seed)
    assert 0.0 <= est.mean <= spot


def test_deterministic_and_worker_independent(desk):
    a = price_barrier_mc(desk, 0.05, 0.5, 100, 130, 100, n_paths=10_000, delta=1e-2, seed=6, workers=1)
    b = price_barrier_mc(desk, 0.05, 0.5, 100, 130, 100, n_paths=10_000, delta=1e-2, seed=6, workers=1)
    c = price_barrier_mc(desk, 0.05, 0.5, 100, 130, 100, n_paths=10_000, delta=1e-2, seed=6, workers=2)
    assert a == b
    assert a.mean == c.mean and a.std_error == c.std_error


def test_curve_matches_single_spots(desk):
    curve = price_barrier_curve(desk, 0.05, 0.5, 100, 130, [90, 110, 140], n_paths=5000, delta=1e-2, seed=7)
    for S, est in zip([90, 110], curve):
        assert est == price_barrier_mc(desk, 0.05, 0.5, 100, 130, S, n_paths=5000, delta=1e-2, seed=7)
    assert curve[2].mean == 0.0


def test_rejects_non_martingale_drift():
    model = LevyModel(LevyMeasureSpec.cgmy(1, 5, 5, 0.5), 0.0)
    with pytest.raises(ConfigError, match="martingale"):
        price_barrier_mc(model, 0.05, 0.5, 100, 130, 100, n_paths=100, delta=1e-2, seed=0)


# -- first passage --------------------------------------------------------------------


def test_first_passage_by_drift_and_by_jump():
    p = SamplePath(0.0, 1.0, np.array([0.2]), np.array([0.5]), 0.0, 1.0)
    assert first_passage_time(p, 0.6) == pytest.approx(0.2)
    assert first_passage_time(p, 0.9) == pytest.approx(0.4)
    assert first_passage_time(p, 2.0) == math.inf
    assert first_passage_time(p, -1.0) == 0.0


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 10**6), st.floats(0.01, 0.5))
def test_first_passage_consistent_with_path(seed, level):
    model = LevyModel(LevyMeasureSpec.cgmy(1, 5, 5, 0.5), 0.2)
    p = simulate_path(model, 1e-2, 1.0, seed)
    tau = first_passage_time(p, level)
    grid = np.linspace(0.0, 1.0, 2001)
    before = grid[grid < tau - 1e-12]
    assert np.all(p.value(before) < level)
    if math.isfinite(tau):
        assert p.value(tau) >= level - 1e-12
