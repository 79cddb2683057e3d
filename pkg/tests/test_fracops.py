import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from fracwave.errors import DomainError, PoleError
from fracwave.fracops import (Order, PowerTerm, TimeGrid, caputo_l1, caputo_power, gamma_fn, inversion_check,
                              l1_weights, rgamma, rl_integral_num, rl_integral_power)

mpmath.mp.dps = 40


def slope(hs, errs):
    return np.polyfit(np.log(hs), np.log(errs), 1)[0]


# ---------------------------------------------------------------- Gamma

def test_gamma_known_values():
    assert gamma_fn(1.0) == 1.0
    assert gamma_fn(0.5) == pytest.approx(math.sqrt(math.pi), rel=1e-15)
    assert gamma_fn(-0.5) == pytest.approx(-2 * math.sqrt(math.pi), rel=1e-14)
    assert gamma_fn(5.0) == 24.0


@pytest.mark.parametrize("x", np.concatenate([np.linspace(-20.5, 0.95, 211), np.linspace(1.01, 171.5, 400)]))
def test_gamma_against_mpmath(x):
    if abs(x - round(x)) < 1e-9 and x <= 0:
        pytest.skip("pole")
    ref = mpmath.gamma(mpmath.mpf(float(x)))
    assert abs(gamma_fn(x) - float(ref)) <= 1e-13 * abs(float(ref))


@pytest.mark.parametrize("k", [0, -1, -2, -7])
def test_gamma_poles(k):
    with pytest.raises(PoleError):
        gamma_fn(k)
    with pytest.raises(PoleError):
        gamma_fn(k + 5e-13)
    assert rgamma(k) == 0.0


def test_gamma_non_finite():
    with pytest.raises(DomainError):
        gamma_fn(float("nan"))


@settings(max_examples=300, deadline=None)
@given(st.floats(-5.5, 10.0))
def test_gamma_recurrence(x):
    if abs(x - round(x)) < 1e-6 and round(x) <= 0:
        return
    if abs(x + 1 - round(x + 1)) < 1e-6 and round(x + 1) <= 0:
        return
    lhs = gamma_fn(x + 1)
    assert lhs == pytest.approx(x * gamma_fn(x), rel=1e-12, abs=1e-300)


def test_rgamma_large_argument():
    assert rgamma(200.5) == pytest.approx(float(mpmath.rgamma(200.5)), rel=1e-12)


# ---------------------------------------------------------------- types

def test_order_flags():
    assert Order(1.0).is_integer
    assert not Order(0.75).is_integer
    assert Order(0.5 + 1e-13).near_half
    for bad in (0.0, -1.0, float("inf")):
        with pytest.raises(DomainError):
            Order(bad)


def test_time_grid():
    g = TimeGrid.span(1.0, 0.25)
    assert g.n == 4 and g.T == 1.0
    assert np.all(np.diff(g.nodes) > 0)
    assert g.refine(2).n == 8
    with pytest.raises(DomainError):
        TimeGrid(0.0, -0.1, 3)
    with pytest.raises(DomainError):
        TimeGrid(-1.0, 0.1, 3)


# ---------------------------------------------------------------- exact power rules

def test_rl_integral_power_examples():
    r = rl_integral_power(PowerTerm(1.0, 0.0), 0.5)
    assert r.exponent == 0.5 and r.coeff == pytest.approx(1 / float(mpmath.gamma(1.5)), rel=1e-14)
    r = rl_integral_power(PowerTerm(1.0, 1.0), 1.0)
    assert (r.coeff, r.exponent) == (pytest.approx(0.5), 2.0)
    r = rl_integral_power(PowerTerm(2.0, -0.25), 0.25)
    assert r.exponent == 0.0 and r.coeff == pytest.approx(2 * float(mpmath.gamma(0.75)), rel=1e-14)
    assert r.coeff == pytest.approx(2.4508, abs=1e-4)
    with pytest.raises(DomainError):
        rl_integral_power(PowerTerm(1.0, -1.0), 0.5)


@pytest.mark.parametrize("delta,gam", [(0.0, 0.5), (0.5, 0.3), (2.0, 0.7), (-0.25, 0.25), (1.0, 1.6)])
def test_rl_integral_power_against_quadrature(delta, gam):
    t = 1.7
    ref = mpmath.quad(lambda s: (t - s) ** (gam - 1) * s**delta, [0, t]) / mpmath.gamma(gam)
    r = rl_integral_power(PowerTerm(1.0, delta), gam)
    assert r(t) == pytest.approx(float(ref), rel=1e-10)


def test_caputo_power_examples():
    r = caputo_power(PowerTerm(1.0, 1.0), 0.5)
    assert r.exponent == 0.5 and r.coeff == pytest.approx(1 / float(mpmath.gamma(1.5)), rel=1e-14)
    alpha, C3 = 0.25, 0.0115
    r = caputo_power(PowerTerm(C3, -alpha), alpha)
    assert r.exponent == -2 * alpha
    assert r.coeff == pytest.approx(C3 * float(mpmath.gamma(1 - alpha) / mpmath.gamma(1 - 2 * alpha)), rel=1e-14)


def test_caputo_power_special_cases():
    # constants and integer powers below the order are annihilated
    assert caputo_power(PowerTerm(3.0, 0.0), 0.5).coeff == 0.0
    assert caputo_power(PowerTerm(3.0, 1.0), 1.5).coeff == 0.0
    # delta == gamma gives the constant Gamma(delta + 1)
    r = caputo_power(PowerTerm(1.0, 0.5), 0.5)
    assert r.exponent == 0.0 and r.coeff == pytest.approx(float(mpmath.gamma(1.5)))
    # removable pole: delta - gamma + 1 = -1
    assert caputo_power(PowerTerm(1.0, 0.5), 2.5).coeff == 0.0
    with pytest.raises(DomainError):
        caputo_power(PowerTerm(1.0, -1.5), 0.5)


@pytest.mark.parametrize("delta,alpha", [(1.0, 0.5), (2.0, 0.3), (0.7, 0.8), (0.2, 0.4)])
def test_caputo_power_against_definition(delta, alpha):
    # D^a t^d = 1/Gamma(1-a) int_0^t (t-s)^-a d s^(d-1) ds for 0 < a < 1; with s = t u
    # the integral is split at 1/2 and reflected so both singular endpoints sit at 0,
    # then w**10 substitution smooths the algebraic singularity there
    t = mpmath.mpf(1.3)
    k = 10

    def kernel(u, v):
        return v ** (-alpha) * delta * u ** (delta - 1)

    def smooth(fn):
        return mpmath.quad(lambda w: fn(w**k) * k * w ** (k - 1), [0, mpmath.mpf(0.5) ** (1 / mpmath.mpf(k))])

    integral = smooth(lambda u: kernel(u, 1 - u)) + smooth(lambda v: kernel(1 - v, v))
    ref = integral * t ** (delta - alpha) / mpmath.gamma(1 - alpha)
    assert caputo_power(PowerTerm(1.0, delta), alpha)(float(t)) == pytest.approx(float(ref), rel=1e-13)


# ---------------------------------------------------------------- product-integration RL

def test_rl_num_examples():
    g = TimeGrid.span(1.0, 1 / 64)
    out = rl_integral_num(np.ones(g.n + 1), 0.5, g)
    assert out[-1] == pytest.approx(1 / float(mpmath.gamma(1.5)), rel=1e-13)
    out = rl_integral_num(g.nodes, 1.0, g)
    assert out[-1] == pytest.approx(0.5, rel=1e-13)


def test_rl_num_near_zero_order_is_identity():
    g = TimeGrid.span(2.0, 0.01)
    f = np.cos(g.nodes) + g.nodes**2
    out = rl_integral_num(f, 1e-8, g)
    # t = 0 is the lower terminal, where J f vanishes for every order > 0
    assert np.max(np.abs(out[1:] - f[1:])) <= 1e-5


@pytest.mark.parametrize("gam", [0.3, 0.5, 1.0, 1.7])
def test_rl_num_exact_for_linear(gam):
    g = TimeGrid.span(3.0, 0.1)
    f = 2.0 - 0.5 * g.nodes
    exact = (rl_integral_power(PowerTerm(2.0, 0.0), gam)(g.nodes)
             + rl_integral_power(PowerTerm(-0.5, 1.0), gam)(g.nodes))
    assert np.max(np.abs(rl_integral_num(f, gam, g) - exact)) < 1e-12


@pytest.mark.parametrize("delta,expected", [(0.0, None), (0.5, 1.5), (1.0, None), (2.0, 2.0)])
@pytest.mark.parametrize("gam", [0.3, 0.7])
def test_rl_num_matches_power_rule(delta, expected, gam):
    # error at t = 1: second order for smooth data, 1 + delta for t**delta
    errs, hs = [], []
    for n in (32, 64, 128, 256):
        g = TimeGrid.span(1.0, 1.0 / n)
        exact = rl_integral_power(PowerTerm(1.0, delta), gam)(g.nodes)
        errs.append(abs(rl_integral_num(g.nodes**delta, gam, g) - exact)[-1])
        hs.append(g.h)
    if expected is None:  # piecewise-linear data: exact
        assert max(errs) < 1e-12
    else:
        assert slope(hs, errs) == pytest.approx(expected, abs=0.2)


@pytest.mark.parametrize("g1", [0.3, 0.5, 0.7])
@pytest.mark.parametrize("g2", [0.3, 0.5, 0.7])
def test_rl_num_semigroup(g1, g2):
    g = TimeGrid.span(1.0, 1 / 256)
    t = g.nodes
    f = 1.0 + t - 3 * t**2 + t**3
    terms = ((1, 0), (1, 1), (-3, 2), (1, 3))
    inner = sum(rl_integral_power(PowerTerm(c, d), g2)(t) for c, d in terms)
    exact = sum(rl_integral_power(PowerTerm(c, d), g1 + g2)(t) for c, d in terms)
    direct = rl_integral_num(f, g1 + g2, g)
    composed = rl_integral_num(rl_integral_num(f, g2, g), g1, g)
    # quadrature tolerance: worst single-application error on the data each step sees;
    # the outer step integrates J^g2 f, which behaves like t**g2 near 0
    quad_tol = max(np.max(np.abs(direct - exact)),
                   np.max(np.abs(rl_integral_num(f, g2, g) - inner)),
                   np.max(np.abs(rl_integral_num(inner, g1, g) - exact)))
    assert quad_tol < 1e-2
    assert np.max(np.abs(composed - direct)) <= 10 * quad_tol
    assert np.max(np.abs(composed - exact)) <= 10 * quad_tol


# ---------------------------------------------------------------- L1 Caputo

def test_l1_weights():
    b = l1_weights(0.5, 4)
    assert b[0] == 1.0
    assert np.all(np.diff(b) < 0)


def test_l1_exact_for_linear():
    g = TimeGrid.span(2.0, 0.05)
    d = caputo_l1(3 * g.nodes + 1, 0.4, g)
    assert np.max(np.abs(d - caputo_power(PowerTerm(3.0, 1.0), 0.4)(g.nodes))) < 1e-12


@pytest.mark.parametrize("alpha", [0.25, 0.5, 0.75])
@pytest.mark.parametrize("delta", [2.0, 3.0])
def test_l1_order(alpha, delta):
    exact = caputo_power(PowerTerm(1.0, delta), alpha)
    hs, errs = [], []
    for n in (64, 128, 256, 512):
        g = TimeGrid.span(1.0, 1.0 / n)
        errs.append(np.max(np.abs(caputo_l1(g.nodes**delta, alpha, g) - exact(g.nodes))))
        hs.append(g.h)
    assert slope(hs, errs) == pytest.approx(2 - alpha, abs=0.2)


def test_l1_preconditions():
    g = TimeGrid.span(1.0, 0.1)
    with pytest.raises(DomainError):
        caputo_l1(g.nodes, 1.0, g)
    with pytest.raises(DomainError):
        caputo_l1(g.nodes, 0.5, TimeGrid(0.5, 0.1, 10))
    with pytest.raises(DomainError):
        caputo_l1(g.nodes[:-1], 0.5, g)
    with pytest.raises(DomainError):
        caputo_l1(np.full(g.n + 1, np.nan), 0.5, g)


@settings(max_examples=40, deadline=None)
@given(st.lists(st.floats(-10, 10), min_size=12, max_size=12), st.lists(st.floats(-10, 10), min_size=12, max_size=12),
       st.floats(-3, 3), st.floats(0.05, 0.95))
def test_linearity(f, g_, c, alpha):
    grid = TimeGrid(0.0, 0.1, 11)
    f, g_ = np.array(f), np.array(g_)
    for op in (lambda v: caputo_l1(v, alpha, grid), lambda v: rl_integral_num(v, alpha, grid)):
        lhs = op(f + c * g_)
        rhs = op(f) + c * op(g_)
        scale = 1 + np.max(np.abs(op(np.abs(f) + abs(c) * np.abs(g_))))
        assert np.max(np.abs(lhs - rhs)) <= 1e-13 * scale


# ---------------------------------------------------------------- inversion

def test_inversion_t_squared_converges():
    reps = [inversion_check(TimeGrid.span(1.0, 1 / n).nodes ** 2, 0.5, TimeGrid.span(1.0, 1 / n))
            for n in (32, 64, 128, 256)]
    dj = [r.dj_max for r in reps]
    jd = [r.jd_max for r in reps]
    assert all(b < a for a, b in zip(dj, dj[1:]))
    assert all(b < a for a, b in zip(jd, jd[1:]))
    assert dj[-1] < 5e-3 and jd[-1] < 5e-3


def test_inversion_constant_and_linear():
    g = TimeGrid.span(1.0, 1 / 64)
    r = inversion_check(np.ones(g.n + 1), 0.5, g)
    assert r.jd_max == 0.0
    # D^a t is exact under L1, J of the resulting t**(1-a) converges at first order
    errs = [inversion_check(TimeGrid.span(1.0, 1 / n).nodes, 0.5, TimeGrid.span(1.0, 1 / n)).jd_max
            for n in (64, 128, 256)]
    assert errs[-1] < 1e-3
    assert slope([1 / 64, 1 / 128, 1 / 256], errs) == pytest.approx(1.0, abs=0.2)
