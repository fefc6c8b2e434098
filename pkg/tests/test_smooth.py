import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from sdgkit import algebra as alg
from sdgkit.algebra import Jet, SquareZeroElement
from sdgkit.battery import battery
from sdgkit.errors import DimensionError, SDGError
from sdgkit.parser import parse_function
from sdgkit.smooth import (
    TestFunction, bump_function, derivative, gaussian, hadamard_quotient, laplacian_fn, partial,
    taylor,
)


def f(src, dim=None):
    return parse_function(src, dim=dim)


def test_eval_generic_examples():
    sq = f("x^2")
    assert sq(3) == 9
    assert sq(Jet([1, 1], var=1)) == Jet([1, 2], var=1)
    d1, d2 = SquareZeroElement.generators(2, var=1)
    assert f("x*y")(d1, d2).coefficient((1, 2)) == 1


def test_scalar_and_order0_jet_agree():
    for phi in battery(2):
        x, y = 0.3, -0.4
        assert phi(x, y) == phi(Jet([x], var=1), Jet([y], var=1)).coeffs[0]


def test_derivative_examples():
    assert derivative(f("x^3"), (1,), (2,)) == pytest.approx(12)
    assert derivative(f("sin(x)"), (2,), (0.0,)) == pytest.approx(0, abs=1e-15)
    assert derivative(f("x^2*y"), (1, 1), (1, 1)) == 2


def test_derivative_order_limit():
    with pytest.raises(SDGError):
        derivative(f("x"), (9,), (0,), max_order=8)


def test_laplacian_examples():
    assert laplacian_fn(f("x^2 + y^2"))(0.3, 0.1) == 4
    assert laplacian_fn(f("x"))(1.7) == 0
    assert laplacian_fn(f("x^2*y", dim=3))(1, 2, 0) == 4


def test_dimension_errors():
    with pytest.raises(DimensionError):
        TestFunction(4, lambda *x: 0)
    with pytest.raises(DimensionError):
        partial(f("x*y"), (1,))


def test_taylor_coefficients():
    j = taylor(f("exp(x)"), (0.5,), order=4)
    assert np.allclose(j.coeffs, [math.exp(0.5) / math.factorial(k) for k in range(5)], rtol=1e-14)


@pytest.mark.parametrize("dim", [1, 2, 3])
def test_jet_derivatives_vs_central_differences(dim):
    h = 1e-4
    rng = np.random.default_rng(7)
    for phi in battery(dim):
        x0 = rng.uniform(-0.6, 0.6, dim)
        for axis in range(dim):
            e = np.eye(dim)[axis]
            alpha = [0] * dim
            alpha[axis] = 1
            exact = derivative(phi, alpha, x0)
            fd = (phi(*(x0 + h * e)) - phi(*(x0 - h * e))) / (2 * h)
            assert abs(exact - fd) <= 1e-6 * max(1.0, abs(exact)), (phi, axis)
            alpha[axis] = 2
            exact2 = derivative(phi, alpha, x0)
            fd2 = (phi(*(x0 + h * e)) - 2 * phi(*x0) + phi(*(x0 - h * e))) / h**2
            assert abs(exact2 - fd2) <= 1e-4 * max(1.0, abs(exact2)), (phi, axis)


@settings(max_examples=40, deadline=None)
@given(st.floats(-1.5, 1.5), st.floats(-1.5, 1.5), st.floats(-1.5, 1.5))
def test_projection_commutes_with_laplacian(x, y, z):
    for src in ("sin(x)*cos(y) + x^3*y", "exp(-x^2 - y^2)*(1 + x*y)"):
        phi2 = f(src, dim=2)
        lifted = f(src, dim=3)
        assert laplacian_fn(lifted)(x, y, z) == pytest.approx(laplacian_fn(phi2)(x, y), abs=1e-12)


@given(st.lists(st.integers(-9, 9), min_size=1, max_size=6), st.floats(-3, 3))
def test_hadamard_quotient(coeffs, x):
    phi = np.polynomial.Polynomial(coeffs)
    psi = np.polynomial.Polynomial(hadamard_quotient(coeffs))
    assert phi(x) - phi(0) - x * psi(x) == pytest.approx(0, abs=1e-9 * max(1, abs(phi(x))))


def test_bump_support_and_smoothness():
    b = bump_function(1, radius=1.0)
    assert b(1.0) == 0.0 and b(1.5) == 0.0
    assert b(0.0) == pytest.approx(math.exp(-1))
    # all derivatives vanish outside the support
    j = b(Jet.variable(4, at=1.2))
    assert all(c == 0 for c in j.coeffs)


def test_gaussian_builtin():
    g = gaussian(2, a=0.5)
    assert g(1.0, 1.0) == pytest.approx(math.exp(-1))
    assert laplacian_fn(g)(0.0, 0.0) == pytest.approx(-2.0)


def test_arithmetic_on_test_functions():
    a, b = f("x^2"), f("sin(x)")
    assert (a + b)(0.7) == pytest.approx(0.49 + math.sin(0.7))
    assert (a * b)(0.7) == pytest.approx(0.49 * math.sin(0.7))
    assert (2 * a - 1)(3.0) == 17
    assert (-a)(2.0) == -4


def test_array_evaluation_matches_pointwise():
    phi = battery(3)[2]
    pts = np.random.default_rng(1).uniform(-1, 1, (3, 10))
    vec = phi(*pts)
    assert np.allclose(vec, [phi(*pts[:, i]) for i in range(10)], rtol=1e-14)
    lap = laplacian_fn(phi)
    assert np.allclose(lap(*pts), [lap(*pts[:, i]) for i in range(10)], rtol=1e-13)


def test_partial_is_exact_in_rational_mode():
    phi = parse_function("x^3*y^2 - 2*x*y", exact=True)
    assert alg.is_zero(partial(phi, (2, 1))(2, 3) - 6 * 2 * 2 * 3)
