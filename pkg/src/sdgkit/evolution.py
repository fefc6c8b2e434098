"""Fundamental solutions of the wave, heat and transport equations.

Wave solutions are time families built from sphere/ball nodes; the heat
kernel is a Gaussian node for t > 0 and a finite Laplacian series for
nilpotent t.  Everything is checked through pairings with test functions.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from . import algebra as alg
from .algebra import Jet, scalar_part
from .distributions import (
    XY_PROJECTION, Ball, Dirac, DiracDerivative, Distribution, HeatGaussian,
    Laplacian, LinComb, Pushforward, Sphere, TimeFamily, Zero, pair,
    pair_jet_time, poisson_kernel,
)
from .errors import DimensionError, DistributionError, SDGError
from .flows import DerivativeOperator, LaplacianOperator, exp_flow_linear, second_order_flow
from .quadrature import DEFAULT_QUAD_ORDER
from .smooth import DEFAULT_MAX_ORDER, TestFunction, laplacian_fn, partial

__all__ = [
    "FundamentalSolution",
    "wave_fundamental",
    "wave_residual",
    "wave_poisson_speed",
    "heat_state",
    "heat_time_derivative",
    "richardson",
    "heat_derivative_limit",
    "dirac_spread",
    "column_diagram",
    "column_diagram_numeric",
    "columns_to_distribution",
    "transport_state",
    "transport_residual",
    "maclaurin",
]

_INV_4PI = 1.0 / (4.0 * math.pi)


@dataclass(frozen=True)
class FundamentalSolution:
    equation: str
    dim: int
    kind: str
    family: TimeFamily
    initial_value: Distribution
    initial_speed: Distribution


def _origin(dim):
    return Dirac((0,) * dim)


def _wave3_speed(t):
    return LinComb(((t * _INV_4PI, Sphere(3, t)),))


def _wave3_position(t):
    return LinComb(((_INV_4PI, Sphere(3, t)), (t * t * _INV_4PI, Laplacian(Ball(3, t)))))


def wave_fundamental(dim: int, kind: str) -> FundamentalSolution:
    """Fundamental solution of d^2Q/dt^2 = Delta Q in dimension 1, 2 or 3.

    ``kind='position'`` starts at delta(0) with zero speed, ``kind='speed'``
    starts at 0 with speed delta(0).
    """
    if kind not in ("position", "speed"):
        raise ValueError(f"kind must be 'position' or 'speed', got {kind!r}")
    if dim == 1:
        if kind == "position":
            recipe, name = (lambda t: LinComb(((Fraction(1, 2), Sphere(1, t)),))), "1/2 S^t"
        else:
            recipe, name = (lambda t: LinComb(((Fraction(1, 2), Ball(1, t, normalized=False)),))), "1/2 B_t"
    elif dim == 3:
        if kind == "position":
            recipe, name = _wave3_position, "1/4pi (S^t + t^2 Delta B^t)"
        else:
            recipe, name = _wave3_speed, "1/4pi t S^t"
    elif dim == 2:
        inner = _wave3_position if kind == "position" else _wave3_speed
        recipe = lambda t: Pushforward(XY_PROJECTION, inner(t))
        name = "p(" + ("1/4pi (S^t + t^2 Delta B^t)" if kind == "position" else "1/4pi t S^t") + ")"
    else:
        raise DimensionError(f"wave fundamental solutions exist here for dims 1-3, got {dim}")
    origin = _origin(dim)
    value, speed = (origin, Zero(dim)) if kind == "position" else (Zero(dim), origin)
    return FundamentalSolution("wave", dim, kind, TimeFamily(recipe, name, dim), value, speed)


def wave_residual(sol: FundamentalSolution, t, phi: TestFunction,
                  quad_order: int = DEFAULT_QUAD_ORDER):
    """d^2/dt^2 <Q(t), phi> - <Q(t), Delta phi>, the first term from a jet in t."""
    jet = pair_jet_time(sol.family, t, 2, phi, quad_order)
    return 2 * jet.coeffs[2] - pair(sol.family(t), laplacian_fn(phi), quad_order)


def wave_poisson_speed(t) -> Distribution:
    """The dim-2 speed solution written with the Poisson density (scalar t > 0)."""
    return LinComb(((_INV_4PI, poisson_kernel(t)),))


def heat_state(t) -> Distribution:
    """K(t): Gaussian for t > 0, delta(0) at t = 0, Laplacian series for nilpotent t."""
    if isinstance(t, Jet):
        if alg.is_zero(t.coeffs[0]):
            return exp_flow_linear(LaplacianOperator(), Dirac((0,)), t)
        if float(scalar_part(t)) > 0:
            return HeatGaussian(t)
        raise DistributionError("heat evolution is undefined for negative time")
    if t < 0:
        raise DistributionError("heat evolution is undefined for negative time")
    if t == 0:
        return Dirac((0,))
    return HeatGaussian(t)


def heat_time_derivative(n: int, t, phi: TestFunction, quad_order: int = DEFAULT_QUAD_ORDER):
    """n-th t-derivative of <K_t, phi>, i.e. <K_t, phi^(2n)>."""
    if n < 0:
        raise ValueError("n must be non-negative")
    if not t > 0:
        raise DistributionError("heat time derivative needs t > 0")
    return pair(HeatGaussian(t), partial(phi, (2 * n,)), quad_order)


def richardson(values: Sequence[float], ratio: float = 2.0) -> float:
    """Extrapolate a(h_k) -> a(0) for h_k = h_0 / ratio^k and a smooth in h."""
    table = list(values)
    for j in range(1, len(values)):
        f = ratio ** j
        table = [(f * table[i + 1] - table[i]) / (f - 1) for i in range(len(table) - 1)]
    return table[0]


def heat_derivative_limit(phi: TestFunction, ks: Sequence[int] = range(8, 17),
                          quad_order: int = DEFAULT_QUAD_ORDER) -> tuple[float, list]:
    """Extrapolated limit of (1/t)(<K_t, phi> - phi(0)) over t = 2^-k; returns (limit, raw)."""
    phi0 = phi(0.0)
    raw = []
    for k in ks:
        t = 2.0 ** -k
        raw.append((pair(HeatGaussian(t), phi, quad_order) - phi0) / t)
    return richardson(raw), raw


def dirac_spread(n: int, symmetric: bool = False):
    """(h^n delta^(n)(0), binomial Dirac combination) with h the jet generator.

    The default form uses h^(n+1) = 0 and points 0, h, ..., n h; the
    symmetric form (n = 2 only) uses h^4 = 0 and points -h, 0, h.
    """
    if n < 1:
        raise ValueError("dirac spread needs n >= 1")
    if symmetric:
        if n != 2:
            raise ValueError("the symmetric spread is defined for n = 2")
        h = Jet.variable(3)
        lhs = LinComb(((h * h, DiracDerivative((0,), (2,))),))
        rhs = LinComb(((1, Dirac((-h,))), (-2, Dirac((0,))), (1, Dirac((h,)))))
        return lhs, rhs
    h = Jet.variable(n)
    lhs = LinComb(((alg.power(h, n), DiracDerivative((0,), (n,))),))
    rhs = LinComb(tuple(((-1) ** i * math.comb(n, i), Dirac((i * h,))) for i in range(n + 1)))
    return lhs, rhs


def column_diagram(h_order: int = 3) -> list:
    """K(d) with d = h^3 as columns (position, height): (-h, h), (0, 1-2h), (h, h)."""
    if h_order < 3:
        raise ValueError("the column diagram needs h with h^3 != 0")
    h = Jet.variable(h_order)
    return [(-h, h), (h * 0, 1 - 2 * h), (h, h)]


def column_diagram_numeric(eps: float) -> list:
    """The same columns with a small real eps standing in for h."""
    return [(-eps, eps), (0.0, 1.0 - 2.0 * eps), (eps, eps)]


def columns_to_distribution(columns) -> LinComb:
    return LinComb(tuple((height, Dirac((pos,))) for pos, height in columns))


def transport_state(t) -> Dirac:
    return Dirac((t,))


def transport_residual(t, phi: TestFunction, quad_order: int = DEFAULT_QUAD_ORDER):
    """d/dt <delta(t), phi> - <-D_{d/dx} delta(t), phi>."""
    s = Jet.variable(1, at=t)
    value = pair(transport_state(s), phi, quad_order)
    lhs = value.coeffs[1] if alg.is_algebra(value) and value.var == s.var else 0.0
    generator = DerivativeOperator(1)
    rhs = -pair(generator(transport_state(t)), phi, quad_order)
    return lhs - rhs


def maclaurin(equation: str, phi: TestFunction, order: int, nu: Distribution | None = None,
              mu: Distribution | None = None, max_order: int = DEFAULT_MAX_ORDER,
              quad_order: int = DEFAULT_QUAD_ORDER) -> list:
    """Maclaurin coefficients of t -> <F(t), phi> for the formal heat/wave solution.

    ``mu`` is the initial value (default delta(0)); ``nu`` the initial
    speed for the wave equation (default 0).
    """
    if order > max_order:
        raise SDGError(f"order {order} exceeds configured jet order {max_order}")
    mu = _origin(phi.dim) if mu is None else mu
    t = Jet.variable(order)
    if equation == "heat":
        F = exp_flow_linear(LaplacianOperator(), mu, t)
    elif equation == "wave":
        F = second_order_flow(LaplacianOperator(), mu, nu, t)
    else:
        raise ValueError(f"unknown equation {equation!r}")
    value = pair(F, phi, quad_order)
    if not (alg.is_algebra(value) and value.var == t.var):
        value = Jet.constant_jet(value, order, t.var)
    return list(value.coeffs)
