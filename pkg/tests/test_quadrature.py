import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from sdgkit.algebra import Jet
from sdgkit.battery import battery, planar_fields
from sdgkit.errors import DimensionError
from sdgkit.parser import parse_function
from sdgkit.quadrature import (
    PlanarVectorField, ball_rule, change_of_variables_sides, circle_rule, flux_vs_divergence,
    gauss_legendre, integrate, interval_rule, littlediv_sides, poisson_disk_rule, sphere2_rule,
    sphere_rule,
)

MEASURES = {
    "interval": (lambda m: interval_rule(m), 2.0),
    "circle": (lambda m: circle_rule(m), 2 * math.pi),
    "sphere2": (lambda m: sphere2_rule(m), 4 * math.pi),
    "ball1": (lambda m: ball_rule(1, m), 2.0),
    "ball2": (lambda m: ball_rule(2, m), math.pi),
    "ball3": (lambda m: ball_rule(3, m), 4 * math.pi / 3),
}


@pytest.mark.parametrize("kind", sorted(MEASURES))
@pytest.mark.parametrize("m", [4, 16, 32])
def test_weights_positive_and_sum_to_measure(kind, m):
    make, measure = MEASURES[kind]
    rule = make(m)
    assert np.all(rule.weights > 0)
    assert rule.weights.sum() == pytest.approx(measure, abs=1e-12)


def test_integrate_examples():
    one = lambda *x: np.ones_like(x[0])
    assert integrate(interval_rule(8), one) == pytest.approx(2.0, abs=1e-14)
    assert integrate(circle_rule(8), one) == pytest.approx(2 * math.pi, abs=1e-14)
    assert integrate(sphere2_rule(8), lambda x, y, z: z * z) == pytest.approx(4 * math.pi / 3, abs=1e-13)


@given(st.integers(1, 20), st.lists(st.integers(-5, 5), min_size=40, max_size=40))
def test_gauss_legendre_polynomial_exactness(m, coeffs):
    # degree <= 2m - 1 integrates exactly; oracle from numpy's polynomial antiderivative
    p = np.polynomial.Polynomial(coeffs[: 2 * m])
    x, w = gauss_legendre(m, -0.5, 1.5)
    exact = p.integ()(1.5) - p.integ()(-0.5)
    assert np.dot(w, p(x)) == pytest.approx(exact, rel=1e-12, abs=1e-9)


def test_sphere_monomial_moments():
    # int_{S^2} x^2 y^2 = 4 pi / 15, int_{B^3} |x|^2 = 4 pi / 5
    assert integrate(sphere2_rule(16), lambda x, y, z: x * x * y * y) == pytest.approx(4 * math.pi / 15, rel=1e-13)
    assert integrate(ball_rule(3, 16), lambda x, y, z: x * x + y * y + z * z) == pytest.approx(4 * math.pi / 5, rel=1e-13)
    assert integrate(ball_rule(2, 16, 2.0), lambda x, y: x * x) == pytest.approx(4 * math.pi, rel=1e-13)


def test_sphere_rule_dims():
    assert sphere_rule(1, 5).weights.sum() == 2
    with pytest.raises(DimensionError):
        sphere_rule(4, 5)
    with pytest.raises(DimensionError):
        ball_rule(4, 5)


@pytest.mark.parametrize("t", [0.5, 1.0, 2.0])
def test_poisson_disk_rule_against_closed_forms(t):
    # int_{B_t} 2/sqrt(t^2-rho^2) dA = 4 pi t;  with rho^2 weight: 8 pi t^3 / 3
    rule = poisson_disk_rule(t, 24)
    assert integrate(rule, lambda x, y: np.ones_like(x)) == pytest.approx(4 * math.pi * t, rel=1e-13)
    assert integrate(rule, lambda x, y: x * x + y * y) == pytest.approx(8 * math.pi * t**3 / 3, rel=1e-13)


def test_poisson_disk_rule_converges():
    phi = lambda x, y: np.exp(x) * np.cos(y)
    errs = [abs(integrate(poisson_disk_rule(1.0, m), phi) - integrate(poisson_disk_rule(1.0, 40), phi))
            for m in (4, 8, 12)]
    assert errs[0] > errs[1] > errs[2]
    assert errs[2] < 1e-10


def _field(f, g):
    return PlanarVectorField(parse_function(f, dim=2), parse_function(g, dim=2))


def test_flux_examples():
    flux, div = flux_vs_divergence(_field("x", "y"))
    assert flux == pytest.approx(2 * math.pi) and div == pytest.approx(2 * math.pi)
    flux, div = flux_vs_divergence(_field("-y", "x"))
    assert flux == pytest.approx(0, abs=1e-13) and div == pytest.approx(0, abs=1e-13)
    flux, div = flux_vs_divergence(_field("x^2", "0"))
    assert flux == pytest.approx(0, abs=1e-13) and div == pytest.approx(0, abs=1e-13)


@pytest.mark.parametrize("quad_order", [16, 32])
def test_divergence_theorem_builtin_fields(quad_order):
    for F, G in planar_fields():
        flux, div = flux_vs_divergence(PlanarVectorField(F, G), quad_order)
        assert abs(flux - div) <= 1e-8


def test_planar_field_dimension_check():
    with pytest.raises(DimensionError):
        PlanarVectorField(parse_function("x", dim=1), parse_function("y", dim=2))


@settings(max_examples=25, deadline=None)
@given(st.floats(0.1, 3.0), st.floats(-1, 1), st.floats(-1, 1))
def test_littlediv(t, x, y):
    for F, G in planar_fields():
        lhs, rhs = littlediv_sides([F, G], t, (x, y))
        assert lhs == pytest.approx(rhs, rel=1e-10, abs=1e-10)


def test_littlediv_with_jet_t():
    F, G = planar_fields()[1]
    t = Jet.variable(2, at=0.7)
    lhs, rhs = littlediv_sides([F, G], t, (0.3, -0.2))
    assert np.allclose(lhs.coeffs, rhs.coeffs, atol=1e-12)


@pytest.mark.parametrize("dim", [1, 2, 3])
@pytest.mark.parametrize("t", [0.5, 1.0, 2.0])
def test_ball_change_of_variables(dim, t):
    for phi in battery(dim):
        lhs, rhs = change_of_variables_sides(phi, t)
        assert abs(lhs - rhs) <= 1e-8 * max(1.0, abs(rhs))
