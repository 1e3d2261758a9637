import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from levyito.errors import ConfigError, DomainError
from levyito.weakfn import (
    BumpFunction,
    WeakFunction,
    abs_fn,
    affine,
    barrier_payoff,
    bundled_test_functions,
    call_payoff,
    constant,
    extend_reflect,
    integration_by_parts_check,
    integration_by_parts_check_2d,
    key_bound_check,
    mollifier_constant,
    mollifier_kernel,
    mollify,
    mollify_derivative,
    parse_function_spec,
    smooth_exp,
    xsq_sin_inv,
)

# mpmath references, see tests/oracles.py
C1 = 2.25228362104358101
C2 = 2.14356577579223660


def t_times_x():
    return WeakFunction("tx", lambda t, x: t * x, lambda t, x: x + 0.0 * t, lambda t, x: t + 0.0 * x)


# -- reflection ----------------------------------------------------------------


def test_reflection_values():
    g = extend_reflect(t_times_x())
    assert g(-1.0, 2.0) == 2.0
    assert g.dt(-1.0, 2.0) == -2.0
    assert g.dx(-1.0, 2.0) == 1.0
    assert 0.0 in g.t_breaks


@settings(max_examples=30, deadline=None)
@given(st.floats(0.01, 5.0), st.floats(-3.0, 3.0))
def test_reflection_symmetry(t, x):
    g = extend_reflect(smooth_exp())
    assert g(-t, x) == g(t, x)
    assert g.dt(-t, x) == -g.dt(t, x)
    assert g.dx(-t, x) == g.dx(t, x)


# -- mollifier kernel -------------------------------------------------------------


def test_mollifier_constants():
    assert mollifier_constant(1) == pytest.approx(C1, rel=1e-13)
    assert mollifier_constant(2) == pytest.approx(C2, rel=1e-13)


@pytest.mark.parametrize("d", [1, 2])
@pytest.mark.parametrize("eps", [1.0, 0.1, 0.01])
def test_mollifier_mass(d, eps):
    assert abs(mollifier_kernel(eps, d).mass() - 1.0) <= 1e-8


def test_mollifier_vanishes_flat_at_edge():
    eta = mollifier_kernel(1.0)
    assert eta(1.0) == 0.0 and eta(-1.0) == 0.0
    h = np.geomspace(1e-1, 1e-3, 5)
    # one-sided difference quotients from inside the ball
    q = np.abs((eta(1.0) - eta(1.0 - h)) / h)
    assert np.all(np.diff(q) < 0) and q[-1] < 1e-100


def test_mollifier_rejects_bad_epsilon():
    with pytest.raises(ConfigError):
        mollifier_kernel(0.0)


# -- mollification ---------------------------------------------------------------


@settings(max_examples=30, deadline=None)
@given(st.floats(1e-3, 1.0), st.floats(-5.0, 5.0))
def test_constant_is_fixed(eps, x):
    assert mollify(constant(3.0), eps, (0.0, x)) == pytest.approx(3.0, abs=1e-13)


@settings(max_examples=30, deadline=None)
@given(st.floats(1e-3, 0.5), st.floats(-5.0, 5.0), st.floats(0.6, 2.0))
def test_affine_is_fixed(eps, x, t):
    f = affine(0.5, -1.5, 2.0)
    assert mollify(f, eps, (t, x)) == pytest.approx(float(f(t, x)), abs=1e-12)
    assert mollify(f, eps, (t, x), d=2) == pytest.approx(float(f(t, x)), abs=1e-12)


def test_xsq_value_convergence():
    f = xsq_sin_inv()
    err = [abs(mollify(f, e, (0.0, 0.3)) - float(f(0.0, 0.3))) for e in (0.1, 0.01, 0.001)]
    assert err[0] > err[1] > err[2]


def test_xsq_derivative_convergence():
    f = xsq_sin_inv()
    exact = 2 * 0.3 * math.sin(1 / 0.3) - math.cos(1 / 0.3)
    err = [abs(mollify_derivative(f, e, (0.0, 0.3)) - exact) for e in (0.1, 0.01, 0.001)]
    assert err[0] > err[1] > err[2]
    assert err[2] < 1e-4


def test_abs_derivative_at_kink():
    for eps in (1.0, 0.1, 0.01):
        v = mollify_derivative(abs_fn(), eps, (0.0, 0.0))
        assert -1.0 <= v <= 1.0
        assert abs(v) < 1e-12


@settings(max_examples=20, deadline=None)
@given(st.floats(-1.0, 1.0), st.sampled_from([0.1, 0.05, 0.02]))
def test_derivative_commutes_with_smoothing(x, eps):
    f = call_payoff(0.2)
    h = 1e-4
    fd = (mollify(f, eps, (0.0, x + h)) - mollify(f, eps, (0.0, x - h))) / (2 * h)
    # f^eps'' = eta^eps(x - K), at most c1 e^{-1} / eps^2 in size
    curvature = C1 / eps ** 2
    assert abs(mollify_derivative(f, eps, (0.0, x)) - fd) <= max(1e-6, h * h * curvature)


def test_two_dimensional_mollification_near_zero_needs_reflection():
    f = smooth_exp()
    with pytest.raises(DomainError, match="domain violation"):
        mollify(f, 0.1, (0.05, 1.0), d=2)
    g = extend_reflect(f)
    v = mollify(g, 0.1, (0.05, 1.0), d=2)
    assert v == pytest.approx(float(f(0.05, 1.0)), rel=1e-2)


def test_barrier_domain_violation():
    f = barrier_payoff(1.0, 2.0)
    with pytest.raises(DomainError, match="domain violation"):
        mollify(f, 0.1, (0.0, 1.95))
    assert mollify(f, 0.1, (0.0, 1.5)) == pytest.approx(0.5, abs=1e-12)


# -- key bound ---------------------------------------------------------------------


@settings(max_examples=30, deadline=None)
@given(st.floats(-2.0, 2.0), st.floats(1e-3, 1.0))
def test_key_bound_abs(x, eps):
    kb = key_bound_check(abs_fn(), eps, (0.0, x))
    assert kb.holds and kb.lhs <= 1.0 + kb.slack


def test_key_bound_constant():
    kb = key_bound_check(constant(2.0), 0.1, (0.0, 0.3))
    assert kb.lhs == 0.0 and kb.rhs == 0.0 and kb.holds


def test_key_bound_xsq_random_points():
    rng = np.random.default_rng(2024)
    f = xsq_sin_inv()
    for x in rng.uniform(-1.0, 1.0, 100):
        assert key_bound_check(f, 0.05, (0.0, x)).holds


# -- weak derivative -------------------------------------------------------------


@pytest.mark.parametrize("f, around", [(abs_fn(), 0.0), (xsq_sin_inv(), 0.0), (call_payoff(1.0), 1.0)],
                         ids=["abs", "xsq_sin_inv", "call_payoff"])
def test_integration_by_parts(f, around):
    for phi in bundled_test_functions(20, seed=7, around=around):
        assert integration_by_parts_check(f, phi).error <= 1e-6


def test_integration_by_parts_domain():
    with pytest.raises(DomainError):
        integration_by_parts_check(barrier_payoff(1.0, 2.0), BumpFunction(1.8, 0.5))


@pytest.mark.parametrize("which", ["t", "x"])
def test_integration_by_parts_2d(which):
    g = extend_reflect(smooth_exp())
    k = call_payoff(0.0)
    phis = bundled_test_functions(5, seed=3, spread=0.8)
    for phi_t, phi_x in zip(phis, phis[::-1]):
        assert integration_by_parts_check_2d(g, phi_t, phi_x, which).error <= 1e-5
        assert integration_by_parts_check_2d(k, BumpFunction(1.0, 0.5), phi_x, which).error <= 1e-5


def test_parse_function_spec():
    assert parse_function_spec("call_payoff(100)")(0.0, 120.0) == 20.0
    assert parse_function_spec("affine(1, 2, 3)")(1.0, 1.0) == 6.0
    assert parse_function_spec("xsq_sin_inv").name == "xsq_sin_inv"
    with pytest.raises(ConfigError):
        parse_function_spec("nope(1)")
    with pytest.raises(ConfigError):
        parse_function_spec("call_payoff(a)")
