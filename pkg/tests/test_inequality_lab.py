import math

import numpy as np
import pytest
from scipy.special import erf

from acsheet.errors import BoundaryConditionViolated, NonpositiveTime
from acsheet.inequality_lab import (SampleFunction, absolute, check_derivative_bound, check_lp_poincare,
                                    check_odd_power, constant, derivative_integral, identity, proof_constant,
                                    random_lipschitz, random_sine, random_xpoly, run_suite)

SIN = SampleFunction("sine", (1.0,), 1.0)
ZERO = SampleFunction("sine", (0.0,), 1.0)


def test_poincare_examples():
    r = check_lp_poincare(SIN, 2)
    assert r.lhs == pytest.approx(math.sqrt(0.5), rel=1e-9)
    assert r.rhs == pytest.approx(math.pi * math.sqrt(0.5), rel=1e-9)
    assert r.passed
    lin = check_lp_poincare(SampleFunction("xpoly", (1.0,), 1.0), 1)
    assert (lin.lhs, lin.rhs) == (pytest.approx(0.5, rel=1e-12), pytest.approx(1.0, rel=1e-12))
    z = check_lp_poincare(ZERO, 3)
    assert z.lhs == 0.0 and z.rhs == 0.0 and z.passed


def test_odd_power_examples():
    r1 = check_odd_power(SIN, 1)
    assert r1.lhs == pytest.approx(-math.pi**2 / 2, rel=1e-9)
    assert r1.rhs == pytest.approx(-0.5, rel=1e-9)
    assert r1.passed
    r2 = check_odd_power(SIN, 2)
    # |sin|_4^4 = 3/8, bound -(3/4)(3/8)
    assert r2.rhs == pytest.approx(-0.28125, rel=1e-9)
    # -3 pi^2 int sin^2 cos^2 = -3 pi^2 / 8
    assert r2.lhs == pytest.approx(-3 * math.pi**2 / 8, rel=1e-9)
    assert r2.extra["gradient_form"] == pytest.approx(r2.lhs, rel=1e-9)
    assert r2.passed
    z = check_odd_power(ZERO, 2)
    assert z.lhs == 0.0 and z.rhs == 0.0 and z.passed


def test_odd_power_needs_both_ends():
    with pytest.raises(BoundaryConditionViolated):
        check_odd_power(SampleFunction("xpoly", (1.0,), 1.0), 1)
    with pytest.raises(ValueError):
        check_odd_power(SIN, 1.5)


def test_odd_power_long_interval_fails():
    # the 1/L constant only holds for L up to pi^2; sin(pi x / 12) on (0, 12) violates it
    r = check_odd_power(SampleFunction("sine", (1.0,), 12.0), 1)
    assert not r.passed
    assert r.lhs == pytest.approx(-(math.pi / 12) ** 2 * 6, rel=1e-9)


def test_poincare_small_and_large_p(rng):
    for _ in range(30):
        v = random_sine(rng) if rng.random() < 0.5 else random_xpoly(rng)
        assert check_lp_poincare(v, 1.0).passed
        assert check_lp_poincare(v, 12.0).passed


def test_derivative_identity_and_constant():
    xs = np.linspace(-5, 5, 50)
    for t in (0.01, 1.0, 100.0):
        assert np.allclose(derivative_integral(identity(), t, xs), 1.0, atol=1e-12)
        assert np.max(np.abs(derivative_integral(constant(3.0), t, xs))) < 1e-12
        # u0 = |y|: erf(x / 2 sqrt(t))
        assert np.allclose(derivative_integral(absolute(), t, xs), erf(xs / (2 * math.sqrt(t))), atol=1e-12)


def test_derivative_bound_uniform():
    r = check_derivative_bound(absolute(), [0.01, 1.0, 100.0])
    assert r.passed and r.extra["t_uniform"]
    assert r.extra["C"] == pytest.approx(1.0, abs=1e-12)
    assert proof_constant(0.5) == pytest.approx(1.0, abs=1e-13)
    with pytest.raises(NonpositiveTime):
        check_derivative_bound(absolute(), [0.0])
    with pytest.raises(NonpositiveTime):
        derivative_integral(absolute(), -1.0, 0.0)


def test_random_lipschitz_constant(rng):
    u = random_lipschitz(rng)
    y = np.linspace(-10, 10, 20001)
    slopes = np.abs(np.diff(u(y)) / np.diff(y))
    assert slopes.max() == pytest.approx(u.lipschitz, rel=1e-9)


def test_suite_small():
    res = run_suite(60, seed=3)
    assert len(res) == 180
    assert all(c.passed for _, c in res)
    assert {c.lemma for _, c in res} == {"lp_poincare", "odd_power", "derivative_bound"}
