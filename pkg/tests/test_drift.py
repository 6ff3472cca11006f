import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from acsheet.drift import allen_cahn, eval, eval_prime, make_drift, parse_coeffs
from acsheet.errors import EvenDegree, NonnegativeLeadingCoefficient


def test_allen_cahn_constants():
    f = allen_cahn()
    assert f.p == 2 and f.degree == 3
    assert f.K == pytest.approx(1.0)
    # max_v (v^2 - v^4 / 2) = 1/2 at v^2 = 1
    assert (f.c1, f.c0) == (0.5, pytest.approx(0.5, abs=1e-12))
    assert f.k1 == 2.0 and f.k0 == 1.0


def test_linear_constants():
    f = make_drift([0.0, -1.0])
    assert f.is_linear and f.p == 1
    assert f.K == 0.0 and f.c1 == 1.0 and f.c0 == 0.0


def test_rejects():
    with pytest.raises(NonnegativeLeadingCoefficient):
        make_drift([0, 0, 0, 1])
    with pytest.raises(EvenDegree):
        make_drift([0, 1, -1])
    with pytest.raises(EvenDegree):
        make_drift([1.0])
    # trailing zeros do not count towards the degree
    assert make_drift([0, 1, 0, -1, 0, 0]).degree == 3


def test_eval():
    f = allen_cahn()
    assert eval(f, 2.0) == -6.0
    assert eval(make_drift([0.7, 1, 0, -1]), 0.0) == 0.7
    assert parse_coeffs("0, 1,0 ,-1") == [0.0, 1.0, 0.0, -1.0]


def test_prime_vs_central_difference(rng):
    f = make_drift([0.3, 1.0, -0.5, -2.0, 0.1, -1.0])
    v = rng.uniform(-3, 3, 100)
    h = 1e-6
    fd = (f(v + h) - f(v - h)) / (2 * h)
    d = eval_prime(f, v)
    assert np.max(np.abs(fd - d) / np.maximum(np.abs(d), 1.0)) < 1e-6


def test_difference_accurate(rng):
    f = allen_cahn()
    u = rng.uniform(-2, 2, 50)
    y = rng.uniform(-1, 1, 50) * 1e-9
    # exact: y (1 - 3u^2 - 3uy - y^2)
    exact = y * (1 - 3 * u**2 - 3 * u * y - y**2)
    assert np.allclose(f.difference(u, y), exact, rtol=1e-13, atol=0)


odd_drifts = st.integers(1, 3).flatmap(
    lambda p: st.tuples(
        st.lists(st.floats(-3, 3, allow_nan=False), min_size=2 * p - 1, max_size=2 * p - 1),
        st.floats(-3, -0.1),
    )
)


@settings(max_examples=40, deadline=None)
@given(odd_drifts)
def test_certified_constants_hold(spec):
    lower, lead = spec
    f = make_drift(list(lower) + [lead])
    p = f.p
    R = f.radius + 1
    v = np.random.default_rng(0).uniform(-R, R, 10_000)
    scale = 1 + np.abs(v) ** (2 * p)
    assert np.all(f(v) * v + f.c1 * v ** (2 * p) <= f.c0 + 1e-9 * scale)
    assert np.all(f.prime(v) <= f.K + 1e-9 * scale)
    assert np.all(np.abs(f(v)) <= f.k1 * np.abs(v) ** (2 * p - 1) + f.k0 + 1e-9 * scale)
    assert f.c1 > 0 and f.K >= 0 and f.c0 >= 0
