"""Deterministic quadrature on intervals, circles, the 2-sphere and balls.

All rules are tensor products of Gauss-Legendre rules (in the radial and
polar directions) with the periodic trapezoid rule (in the azimuth), which
is spectrally accurate for smooth periodic integrands.  Integrands are
called once with coordinate *arrays*, so the same code serves plain floats
and jet-valued evaluation.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Sequence

import numpy as np

from . import algebra as alg
from .errors import DimensionError
from .smooth import TestFunction, partial

__all__ = [
    "QuadratureRule",
    "gauss_legendre",
    "interval_rule",
    "circle_rule",
    "sphere2_rule",
    "sphere_rule",
    "ball_rule",
    "poisson_disk_rule",
    "weighted_sum",
    "integrate",
    "PlanarVectorField",
    "divergence",
    "flux_vs_divergence",
    "littlediv_sides",
    "change_of_variables_sides",
    "DEFAULT_QUAD_ORDER",
]

DEFAULT_QUAD_ORDER = 32


@dataclass(frozen=True, eq=False)
class QuadratureRule:
    domain_kind: str
    points: np.ndarray  # shape (N, dim)
    weights: np.ndarray  # shape (N,)
    order: int

    @property
    def dim(self) -> int:
        return self.points.shape[1]

    def coords(self):
        return [self.points[:, i] for i in range(self.dim)]

    def __len__(self):
        return len(self.weights)


@lru_cache(maxsize=None)
def _leggauss(m: int):
    x, w = np.polynomial.legendre.leggauss(m)
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


def gauss_legendre(m: int, a: float = -1.0, b: float = 1.0):
    """Nodes and weights of the m-point Gauss-Legendre rule on [a, b]."""
    if m < 1:
        raise ValueError("quadrature order must be positive")
    x, w = _leggauss(m)
    half = 0.5 * (b - a)
    return a + half * (x + 1.0), half * w


def interval_rule(m: int, a: float = -1.0, b: float = 1.0) -> QuadratureRule:
    x, w = gauss_legendre(m, a, b)
    return QuadratureRule("interval", x[:, None], w, m)


@lru_cache(maxsize=None)
def circle_rule(m: int) -> QuadratureRule:
    """Trapezoid rule with 2m equispaced nodes on the unit circle."""
    k = 2 * m
    theta = 2.0 * math.pi * np.arange(k) / k
    pts = np.column_stack([np.cos(theta), np.sin(theta)])
    return QuadratureRule("circle", pts, np.full(k, 2.0 * math.pi / k), m)


@lru_cache(maxsize=None)
def sphere2_rule(m: int) -> QuadratureRule:
    """Gauss-Legendre in cos(phi) times trapezoid in theta on S^2."""
    z, wz = gauss_legendre(m)
    k = 2 * m
    theta = 2.0 * math.pi * np.arange(k) / k
    Z, T = np.meshgrid(z, theta, indexing="ij")
    s = np.sqrt(1.0 - Z * Z)
    pts = np.column_stack([(s * np.cos(T)).ravel(), (s * np.sin(T)).ravel(), Z.ravel()])
    w = np.outer(wz, np.full(k, 2.0 * math.pi / k)).ravel()
    return QuadratureRule("sphere2", pts, w, m)


@lru_cache(maxsize=None)
def _sphere0() -> QuadratureRule:
    # the "sphere" in R^1 is the two-point set {-1, 1} with counting measure
    return QuadratureRule("sphere0", np.array([[-1.0], [1.0]]), np.array([1.0, 1.0]), 1)


def sphere_rule(dim: int, m: int) -> QuadratureRule:
    """Surface rule on the unit sphere in R^dim."""
    if dim == 1:
        return _sphere0()
    if dim == 2:
        return circle_rule(m)
    if dim == 3:
        return sphere2_rule(m)
    raise DimensionError(f"no sphere rule in dimension {dim}")


@lru_cache(maxsize=None)
def ball_rule(dim: int, m: int, radius: float = 1.0) -> QuadratureRule:
    """Volume rule on the ball of the given radius in R^dim.

    Radial Gauss-Legendre with the r^(dim-1) Jacobian folded into the
    weights, times the surface rule of the unit sphere.
    """
    if dim == 1:
        x, w = gauss_legendre(m, -radius, radius)
        return QuadratureRule("ball1", x[:, None], w, m)
    if dim not in (2, 3):
        raise DimensionError(f"no ball rule in dimension {dim}")
    r, wr = gauss_legendre(m, 0.0, radius)
    wr = wr * r ** (dim - 1)
    surf = sphere_rule(dim, m)
    pts = (r[:, None, None] * surf.points[None, :, :]).reshape(-1, dim)
    w = np.outer(wr, surf.weights).ravel()
    return QuadratureRule(f"ball{dim}", pts, w, m)


@lru_cache(maxsize=None)
def _poisson_unit(m: int):
    u, wu = gauss_legendre(m, 0.0, 0.5 * math.pi)
    circ = circle_rule(m)
    su = np.sin(u)
    pts = (su[:, None, None] * circ.points[None, :, :]).reshape(-1, 2)
    w = np.outer(2.0 * su * wu, circ.weights).ravel()
    return pts, w


def poisson_disk_rule(t: float, m: int) -> QuadratureRule:
    """Rule for psi -> integral over the disk of radius t of 2 psi / sqrt(t^2 - rho^2).

    The substitution rho = t sin(u) removes the endpoint singularity:
    rho d rho / sqrt(t^2 - rho^2) = t sin(u) du.
    """
    pts, w = _poisson_unit(m)
    return QuadratureRule("poisson_disk", t * pts, t * w, m)


def weighted_sum(weights: np.ndarray, values):
    """sum_i w_i v_i where ``values`` may be an algebra element over arrays."""

    def red(c):
        if isinstance(c, np.ndarray):
            return float(np.dot(weights, c))
        return c * float(np.sum(weights))

    if alg.is_algebra(values):
        return alg.map_coeffs(values, red)
    return red(values)


def integrate(rule: QuadratureRule, f: Callable):
    """sum_i w_i f(x_i); ``f`` receives one coordinate array per axis."""
    return weighted_sum(rule.weights, f(*rule.coords()))


# -- vector calculus checks ---------------------------------------------------

@dataclass(frozen=True)
class PlanarVectorField:
    """F(x, y) = (F(x, y), G(x, y)) on R^2."""

    F: TestFunction
    G: TestFunction

    def __post_init__(self):
        if self.F.dim != 2 or self.G.dim != 2:
            raise DimensionError("planar vector field components must have dim 2")

    def divergence(self) -> TestFunction:
        return divergence([self.F, self.G])


def divergence(components: Sequence[TestFunction]) -> TestFunction:
    n = len(components)
    parts = []
    for i, c in enumerate(components):
        if c.dim != n:
            raise DimensionError("vector field component dims must equal the field length")
        alpha = [0] * n
        alpha[i] = 1
        parts.append(partial(c, alpha))

    def fn(*x):
        total = 0
        for p in parts:
            total = total + p(*x)
        return total

    return TestFunction(n, fn)


def flux_vs_divergence(field: PlanarVectorField, quad_order: int = DEFAULT_QUAD_ORDER):
    """(flux of F over the unit circle, integral of div F over the unit disk)."""
    circ = circle_rule(quad_order)
    x, y = circ.coords()
    flux = weighted_sum(circ.weights, field.F(x, y) * x + field.G(x, y) * y)
    disk = ball_rule(2, quad_order)
    div_integral = integrate(disk, field.divergence())
    return flux, div_integral


def littlediv_sides(components: Sequence[TestFunction], t, x: Sequence):
    """(div(F o H_t)(x), t * (div F)(t x)) for the homothety H_t."""
    n = len(components)
    scaled = [TestFunction(n, (lambda c: lambda *y: c(*[t * yi for yi in y]))(c)) for c in components]
    lhs = divergence(scaled)(*x)
    rhs = t * divergence(components)(*[t * xi for xi in x])
    return lhs, rhs


def change_of_variables_sides(phi: TestFunction, t: float, quad_order: int = DEFAULT_QUAD_ORDER):
    """(t^n * int_{B_1} phi o H_t, int_{B_t} phi) with independent rules."""
    n = phi.dim
    unit = ball_rule(n, quad_order)
    lhs = t ** n * integrate(unit, lambda *u: phi(*[t * ui for ui in u]))
    direct = ball_rule(n, quad_order, float(t))
    rhs = integrate(direct, phi)
    return lhs, rhs
