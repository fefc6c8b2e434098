"""Compactly supported distributions on R^1..R^3 as expression trees.

Every node knows how to pair itself against a :class:`TestFunction`; the
operations (pushforward, multiplication by a function, directional
derivative, Laplacian, convolution with finite Dirac combinations) only
build new nodes.  Parameters such as the radius ``t`` of a sphere or the
endpoints of an interval may be jets, in which case the pairing is a jet
and its coefficients are exact time derivatives.

Sign convention: <D_X(mu), phi> = -<mu, D_X(phi)>, hence
<delta^(alpha)(a), phi> = (-1)^|alpha| d^alpha phi(a).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from . import algebra as alg
from .algebra import Jet, scalar_part
from .errors import DimensionError, DistributionError, ImproperMapError
from .quadrature import (
    DEFAULT_QUAD_ORDER,
    ball_rule,
    gauss_legendre,
    poisson_disk_rule,
    sphere_rule,
    weighted_sum,
)
from .smooth import TestFunction, directional, laplacian_fn, partial

__all__ = [
    "Distribution", "Dirac", "DiracDerivative", "Interval", "Sphere", "Ball",
    "HeatGaussian", "LinComb", "MultiplyByFunction", "DirectionalDerivative",
    "Laplacian", "Pushforward", "Convolution", "Zero",
    "Projection", "AffineMap", "Homothety", "PoissonDensity", "XY_PROJECTION",
    "TimeFamily",
    "pair", "pair_jet_time", "pairing_equal", "is_compact",
    "dirac", "dirac_derivative", "interval", "sphere", "ball", "heat_gaussian",
    "lincomb", "scale", "pushforward", "laplacian_dist", "directional_derivative",
    "multiply", "convolve", "interval_equal", "poisson_kernel",
]

# nodes beyond this many standard deviations of the heat kernel carry
# weight below exp(-36) ~ 2e-16
_HEAT_BOX_SIGMAS = 12.0


class Distribution:
    """Base class; subclasses are frozen dataclasses."""

    dim: int

    def _pair(self, phi: TestFunction, m: int):
        raise NotImplementedError

    def __add__(self, other):
        if not isinstance(other, Distribution):
            return NotImplemented
        return lincomb((1, self), (1, other))

    def __sub__(self, other):
        if not isinstance(other, Distribution):
            return NotImplemented
        return lincomb((1, self), (-1, other))

    def __rmul__(self, c):
        return scale(c, self)

    def __neg__(self):
        return scale(-1, self)


def _tuple(point) -> tuple:
    if isinstance(point, (list, tuple)):
        return tuple(point)
    return (point,)


@dataclass(frozen=True)
class Zero(Distribution):
    dim: int = 1

    def _pair(self, phi, m):
        return 0.0


@dataclass(frozen=True)
class Dirac(Distribution):
    point: tuple = (0,)

    @property
    def dim(self):
        return len(self.point)

    def _pair(self, phi, m):
        return phi(*self.point)


@dataclass(frozen=True)
class DiracDerivative(Distribution):
    point: tuple
    multi_index: tuple

    def __post_init__(self):
        if len(self.point) != len(self.multi_index):
            raise DimensionError("point and multi-index dimensions differ")

    @property
    def dim(self):
        return len(self.point)

    def _pair(self, phi, m):
        sign = -1 if sum(self.multi_index) % 2 else 1
        return sign * partial(phi, self.multi_index)(*self.point)


@dataclass(frozen=True)
class Interval(Distribution):
    """[a, b]: phi -> l * int_0^1 phi(a + s l) ds, l = b - a."""

    a: object
    b: object
    dim = 1

    def _pair(self, phi, m):
        s, w = gauss_legendre(m, 0.0, 1.0)
        length = self.b - self.a
        return length * weighted_sum(w, phi(self.a + length * s))


@dataclass(frozen=True)
class Sphere(Distribution):
    """S^t (normalized=True) or S_t = t^(n-1) S^t (normalized=False)."""

    dim: int
    t: object
    normalized: bool = True

    def _pair(self, phi, m):
        rule = sphere_rule(self.dim, m)
        t = self.t
        value = weighted_sum(rule.weights, phi(*[t * u for u in rule.coords()]))
        if self.normalized:
            return value
        return alg.power(t, self.dim - 1) * value


@dataclass(frozen=True)
class Ball(Distribution):
    """B^t (normalized=True) or B_t = t^n B^t (normalized=False)."""

    dim: int
    t: object
    normalized: bool = True

    def _pair(self, phi, m):
        rule = ball_rule(self.dim, m)
        t = self.t
        value = weighted_sum(rule.weights, phi(*[t * u for u in rule.coords()]))
        if self.normalized:
            return value
        return alg.power(t, self.dim) * value


@dataclass(frozen=True)
class HeatGaussian(Distribution):
    """The heat kernel (4 pi t)^(-1/2) exp(-x^2 / 4t) dx on R, t > 0."""

    t: object
    dim = 1

    def __post_init__(self):
        if not float(scalar_part(self.t)) > 0:
            raise DistributionError("heat kernel needs t > 0")

    def _pair(self, phi, m):
        t = self.t
        t0 = float(scalar_part(t))
        half = _HEAT_BOX_SIGMAS * math.sqrt(t0)
        if phi.support is not None:
            half = min(half, float(phi.support))
        x, w = gauss_legendre(max(4 * m, 96), -half, half)
        kernel = alg.power(4 * math.pi * t, -0.5) * alg.exp(-(x * x) / (4 * t))
        return weighted_sum(w, kernel * phi(x))


@dataclass(frozen=True)
class LinComb(Distribution):
    terms: tuple  # ((scalar, Distribution), ...)

    def __post_init__(self):
        if not self.terms:
            raise DistributionError("empty linear combination; use Zero(dim)")
        dims = {d.dim for _, d in self.terms}
        if len(dims) != 1:
            raise DimensionError(f"linear combination mixes dimensions {sorted(dims)}")

    @property
    def dim(self):
        return self.terms[0][1].dim

    def _pair(self, phi, m):
        total = 0
        for c, d in self.terms:
            total = total + c * d._pair(phi, m)
        return total


@dataclass(frozen=True)
class MultiplyByFunction(Distribution):
    g: TestFunction
    mu: Distribution

    @property
    def dim(self):
        return self.mu.dim

    def _pair(self, phi, m):
        g = self.g
        if isinstance(g, PoissonDensity) and isinstance(self.mu, Ball) \
                and self.mu.dim == 2 and not self.mu.normalized and self.mu.t == g.t:
            rule = poisson_disk_rule(float(g.t), m)
            return weighted_sum(rule.weights, phi(*rule.coords()))
        prod = TestFunction(phi.dim, lambda *x: g(*x) * phi(*x), phi.support)
        return self.mu._pair(prod, m)


@dataclass(frozen=True)
class DirectionalDerivative(Distribution):
    X: object  # anything with .dim and .principal_part
    mu: Distribution

    @property
    def dim(self):
        return self.mu.dim

    def _pair(self, phi, m):
        return -self.mu._pair(directional(phi, self.X.principal_part), m)


@dataclass(frozen=True)
class Laplacian(Distribution):
    mu: Distribution

    @property
    def dim(self):
        return self.mu.dim

    def _pair(self, phi, m):
        return self.mu._pair(laplacian_fn(phi), m)


@dataclass(frozen=True)
class Pushforward(Distribution):
    map: object
    mu: Distribution

    @property
    def dim(self):
        return self.map.target_dim

    def _pair(self, phi, m):
        f = self.map
        pulled = TestFunction(self.mu.dim, lambda *x: phi(*f.apply(x)))
        return self.mu._pair(pulled, m)


@dataclass(frozen=True)
class Convolution(Distribution):
    rho: Distribution
    mu: Distribution

    @property
    def dim(self):
        return self.mu.dim

    def _pair(self, phi, m):
        atoms = _dirac_atoms(self.rho)
        derivs = [(c, point, partial(phi, alpha), sum(alpha)) for c, point, alpha in atoms]

        def shifted(*x):
            total = 0
            for c, point, d, order in derivs:
                sign = -1 if order % 2 else 1
                total = total + sign * c * d(*[xi + ai for xi, ai in zip(x, point)])
            return total

        return self.mu._pair(TestFunction(self.mu.dim, shifted), m)


def _dirac_atoms(rho: Distribution, c=1):
    """Flatten a finite combination of Diracs into (coefficient, point, alpha)."""
    if isinstance(rho, Dirac):
        return [(c, rho.point, (0,) * rho.dim)]
    if isinstance(rho, DiracDerivative):
        return [(c, rho.point, rho.multi_index)]
    if isinstance(rho, LinComb):
        out = []
        for k, d in rho.terms:
            out.extend(_dirac_atoms(d, c * k))
        return out
    raise DistributionError("convolution kernel must be a finite combination of Diracs")


# -- maps ---------------------------------------------------------------------

@dataclass(frozen=True)
class Projection:
    """Coordinate projection R^src_dim -> R^len(axes)."""

    src_dim: int
    axes: tuple

    @property
    def target_dim(self):
        return len(self.axes)

    @property
    def proper(self):
        return sorted(self.axes) == list(range(self.src_dim))

    def apply(self, x):
        return [x[i] for i in self.axes]


XY_PROJECTION = Projection(3, (0, 1))


@dataclass(frozen=True)
class AffineMap:
    """x -> A x + b with A given row by row."""

    matrix: tuple
    offset: tuple = None

    @property
    def src_dim(self):
        return len(self.matrix[0])

    @property
    def target_dim(self):
        return len(self.matrix)

    @property
    def proper(self):
        if self.src_dim != self.target_dim:
            return False
        a = np.array([[float(scalar_part(v)) for v in row] for row in self.matrix])
        return abs(np.linalg.det(a)) > 0

    def apply(self, x):
        out = []
        for i, row in enumerate(self.matrix):
            acc = self.offset[i] if self.offset is not None else 0
            for a, xi in zip(row, x):
                acc = acc + a * xi
            out.append(acc)
        return out


@dataclass(frozen=True)
class Homothety:
    """H_t: x -> t x on R^dim (t may be nilpotent, then H_t is not proper)."""

    t: object
    dim: int

    @property
    def src_dim(self):
        return self.dim

    @property
    def target_dim(self):
        return self.dim

    @property
    def proper(self):
        return float(scalar_part(self.t)) != 0

    def apply(self, x):
        return [self.t * xi for xi in x]


class PoissonDensity(TestFunction):
    """2 / sqrt(t^2 - rho^2) on the disk of radius t (integrable, unbounded)."""

    def __init__(self, t):
        if not float(scalar_part(t)) > 0:
            raise DistributionError("Poisson density needs invertible (positive) t")
        self.t = t
        super().__init__(2, lambda x, y: 2 * alg.power(t * t - x * x - y * y, -0.5),
                         support=float(t), name=f"2/sqrt({t}^2-rho^2)")

    def _key(self):
        return ("poisson", self.t)


# -- constructors -------------------------------------------------------------

def dirac(point=0) -> Dirac:
    return Dirac(_tuple(point))


def dirac_derivative(point, multi_index) -> DiracDerivative:
    return DiracDerivative(_tuple(point), _tuple(multi_index))


def interval(a, b) -> Interval:
    return Interval(a, b)


def sphere(dim: int, t, normalized: bool = True) -> Sphere:
    if dim not in (1, 2, 3):
        raise DimensionError(f"spheres are supported in dims 1-3, got {dim}")
    return Sphere(dim, t, normalized)


def ball(dim: int, t, normalized: bool = True) -> Ball:
    if dim not in (1, 2, 3):
        raise DimensionError(f"balls are supported in dims 1-3, got {dim}")
    return Ball(dim, t, normalized)


def heat_gaussian(t) -> HeatGaussian:
    return HeatGaussian(t)


def lincomb(*terms) -> LinComb:
    return LinComb(tuple((c, d) for c, d in terms))


def scale(c, mu: Distribution) -> LinComb:
    return LinComb(((c, mu),))


def is_compact(mu: Distribution) -> bool:
    if isinstance(mu, HeatGaussian):
        return False
    if isinstance(mu, LinComb):
        return all(is_compact(d) for _, d in mu.terms)
    if isinstance(mu, Convolution):
        return is_compact(mu.mu)
    child = getattr(mu, "mu", None)
    return True if child is None else is_compact(child)


def pushforward(f, mu: Distribution) -> Pushforward:
    if f.src_dim != mu.dim:
        raise DimensionError(f"map from R^{f.src_dim} applied to a distribution on R^{mu.dim}")
    if not f.proper and not is_compact(mu):
        raise ImproperMapError("non-compact distributions push forward only along proper maps")
    return Pushforward(f, mu)


def laplacian_dist(mu: Distribution) -> Laplacian:
    return Laplacian(mu)


def directional_derivative(X, mu: Distribution) -> DirectionalDerivative:
    if X.dim != mu.dim:
        raise DimensionError("vector field and distribution dimensions differ")
    return DirectionalDerivative(X, mu)


def multiply(g, mu: Distribution) -> MultiplyByFunction:
    if not isinstance(g, TestFunction):
        g = TestFunction(mu.dim, lambda *x, c=g: c, name=str(g))
    if g.dim != mu.dim:
        raise DimensionError("function and distribution dimensions differ")
    return MultiplyByFunction(g, mu)


def convolve(rho: Distribution, mu: Distribution) -> Convolution:
    _dirac_atoms(rho)
    if rho.dim != mu.dim:
        raise DimensionError("convolution factors live in different dimensions")
    return Convolution(rho, mu)


def poisson_kernel(t) -> MultiplyByFunction:
    """2/sqrt(t^2 - rho^2) * B_t on R^2, for t > 0."""
    return MultiplyByFunction(PoissonDensity(t), Ball(2, t, normalized=False))


def interval_equal(a1, b1, a2, b2) -> bool:
    """[a1, b1] = [a2, b2] as distributions: equal lengths l and l*(a1 - a2) = 0."""
    l1 = b1 - a1
    l2 = b2 - a2
    return alg.is_zero(l1 - l2) and alg.is_zero(l1 * (a1 - a2))


# -- pairing ------------------------------------------------------------------

def pair(mu: Distribution, phi: TestFunction, quad_order: int = DEFAULT_QUAD_ORDER):
    """<mu, phi>: a float, or a jet when mu carries jet-valued parameters."""
    if mu.dim != phi.dim:
        raise DimensionError(f"distribution on R^{mu.dim} paired with function on R^{phi.dim}")
    return mu._pair(phi, quad_order)


@dataclass(frozen=True)
class TimeFamily:
    """t -> Distribution, with t a real number or a jet."""

    recipe: Callable
    name: str = ""
    dim: int = field(default=0)

    def __call__(self, t) -> Distribution:
        return self.recipe(t)


def pair_jet_time(fam, t0, order: int, phi: TestFunction,
                  quad_order: int = DEFAULT_QUAD_ORDER) -> Jet:
    """Jet whose k-th coefficient is (1/k!) d^k/dt^k <fam(t), phi> at t0."""
    t = Jet.variable(order, at=t0)
    value = pair(fam(t), phi, quad_order)
    if alg.is_algebra(value) and value.var == t.var:
        return value
    return Jet.constant_jet(value, order, t.var)


def pairing_equal(mu: Distribution, nu: Distribution, functions: Sequence[TestFunction],
                  tol: float = 1e-8, quad_order: int = DEFAULT_QUAD_ORDER) -> bool:
    """Extensional equality on a battery of test functions."""
    return all(alg.close(pair(mu, f, quad_order), pair(nu, f, quad_order), tol) for f in functions)
