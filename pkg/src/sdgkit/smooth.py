"""Test functions evaluable over scalars, arrays and nilpotent algebras.

A ``TestFunction`` wraps a Python callable built only from ring operations
and the primitives in :mod:`sdgkit.algebra`.  Evaluating such a callable at
``x + t*e`` with ``t`` a jet variable yields its Taylor expansion along
``e``, so every derivative in this package is exact up to float rounding.
"""
from __future__ import annotations

import math
from typing import Callable, Sequence

import numpy as np

from . import algebra as alg
from .algebra import Jet, fresh_var, scalar_part
from .errors import DimensionError, MixedAlgebraError, SDGError

__all__ = [
    "TestFunction",
    "eval_generic",
    "partial",
    "derivative",
    "laplacian_fn",
    "directional",
    "taylor",
    "compose",
    "bump",
    "gaussian",
    "bump_function",
    "hadamard_quotient",
    "DEFAULT_MAX_ORDER",
]

DEFAULT_MAX_ORDER = 8

# inside this radius (in the squared argument) the bump is evaluated; beyond
# it the value and all derivatives are below 1e-200
_BUMP_CUTOFF = 1.0 - 2e-3


class TestFunction:
    """A smooth function R^dim -> R with an algebra-generic body."""

    __test__ = False  # keep pytest from collecting this class

    def __init__(self, dim: int, fn: Callable, support: float | None = None,
                 expr=None, name: str | None = None):
        if not 1 <= dim <= 3:
            raise DimensionError(f"test functions live on R^1..R^3, got dim={dim}")
        self.dim = dim
        self.fn = fn
        self.support = support
        self.expr = expr
        self.name = name

    def __call__(self, *x):
        return self.fn(*x)

    def _key(self):
        # structural identity only for parsed functions; otherwise by object
        return None if self.expr is None else (self.dim, self.expr)

    def __eq__(self, other):
        if self is other:
            return True
        if type(other) is not type(self):
            return NotImplemented if not isinstance(other, TestFunction) else False
        key = self._key()
        return key is not None and key == other._key()

    def __hash__(self):
        key = self._key()
        return hash(key) if key is not None else id(self)

    def __repr__(self):
        if self.name:
            return f"TestFunction({self.name!r}, dim={self.dim})"
        if self.expr is not None:
            from .parser import format_expr
            return f"TestFunction({format_expr(self.expr)!r}, dim={self.dim})"
        return f"TestFunction(<callable>, dim={self.dim})"

    # pointwise algebra; support of a product is the smaller one
    def _lift(self, other):
        if isinstance(other, TestFunction):
            if other.dim != self.dim:
                raise DimensionError(f"dimension mismatch {self.dim} vs {other.dim}")
            return other
        return TestFunction(self.dim, lambda *x, c=other: c)

    def __add__(self, other):
        g = self._lift(other)
        sup = None if self.support is None or g.support is None else max(self.support, g.support)
        return TestFunction(self.dim, lambda *x: self.fn(*x) + g.fn(*x), sup)

    __radd__ = __add__

    def __sub__(self, other):
        g = self._lift(other)
        sup = None if self.support is None or g.support is None else max(self.support, g.support)
        return TestFunction(self.dim, lambda *x: self.fn(*x) - g.fn(*x), sup)

    def __neg__(self):
        return TestFunction(self.dim, lambda *x: -self.fn(*x), self.support)

    def __mul__(self, other):
        g = self._lift(other)
        sups = [s for s in (self.support, g.support) if s is not None]
        if not isinstance(other, TestFunction):
            sups = [self.support] if self.support is not None else []
        return TestFunction(self.dim, lambda *x: self.fn(*x) * g.fn(*x), min(sups) if sups else None)

    __rmul__ = __mul__


def _outer_var(values) -> set:
    return {v.var for v in values if alg.is_algebra(v)}


def eval_generic(phi: TestFunction, x: Sequence):
    """Evaluate ``phi`` at a point whose coordinates share one algebra."""
    x = list(x)
    if len(x) != phi.dim:
        raise DimensionError(f"function of {phi.dim} variables evaluated at {len(x)} coordinates")
    kinds = {(type(v).__name__, v.var) for v in x if alg.is_algebra(v)}
    if len(kinds) > 1:
        raise MixedAlgebraError(f"coordinates live in different algebras: {sorted(kinds)}")
    return phi(*x)


def _layer(value, var: int, k: int):
    """Coefficient of s^k in ``value``, s the jet variable tagged ``var``."""
    if alg.is_algebra(value) and value.var == var:
        return value.coeffs[k]
    if alg.is_algebra(value) and value.var > var:
        raise SDGError("unexpected outer variable while extracting a derivative")
    return value if k == 0 else 0


def partial(phi: TestFunction, alpha: Sequence[int]) -> TestFunction:
    """The mixed partial derivative d^alpha phi as a new test function."""
    alpha = tuple(int(a) for a in alpha)
    if len(alpha) != phi.dim:
        raise DimensionError(f"multi-index {alpha} does not match dim {phi.dim}")
    if any(a < 0 for a in alpha):
        raise ValueError("multi-index entries must be non-negative")
    if not any(alpha):
        return phi

    def fn(*x):
        x = list(x)
        tags = []
        for i, a in enumerate(alpha):
            if a:
                s = Jet.variable(a, at=x[i])
                x[i] = s
                tags.append((s.var, a))
        value = phi(*x)
        for var, a in reversed(tags):
            value = _layer(value, var, a) * math.factorial(a)
        return value

    return TestFunction(phi.dim, fn, phi.support)


def derivative(phi: TestFunction, multi_index: Sequence[int], x0: Sequence,
               max_order: int = DEFAULT_MAX_ORDER):
    if sum(multi_index) > max_order:
        raise SDGError(f"derivative order {sum(multi_index)} exceeds configured jet order {max_order}")
    return partial(phi, multi_index)(*x0)


def laplacian_fn(phi: TestFunction) -> TestFunction:
    """Delta phi = sum_i d^2 phi / dx_i^2, each term from an order-2 jet."""

    def fn(*x):
        total = 0
        for i in range(phi.dim):
            y = list(x)
            s = Jet.variable(2, at=y[i])
            y[i] = s
            total = total + 2 * _layer(phi(*y), s.var, 2)
        return total

    return TestFunction(phi.dim, fn, phi.support)


def directional(phi: TestFunction, xi: Callable) -> TestFunction:
    """D_xi phi: the first-order part of phi(x + d*xi(x)) for d^2 = 0."""

    def fn(*x):
        v = xi(*x)
        if phi.dim == 1 and not isinstance(v, (list, tuple)):
            v = [v]
        var = fresh_var()
        y = [Jet([xi_, vi], var) for xi_, vi in zip(x, v)]
        return _layer(phi(*y), var, 1)

    return TestFunction(phi.dim, fn, phi.support)


def taylor(phi: TestFunction, x0: Sequence, direction: Sequence | None = None,
           order: int = 4) -> Jet:
    """Jet of t -> phi(x0 + t*direction) at t = 0."""
    if direction is None:
        direction = [1] + [0] * (phi.dim - 1)
    t = Jet.variable(order, var=fresh_var())
    value = phi(*[a + t * e for a, e in zip(x0, direction)])
    if not (alg.is_algebra(value) and value.var == t.var):
        return Jet.constant_jet(value, order, t.var)
    return value


def compose(phi: TestFunction, f: Callable, src_dim: int) -> TestFunction:
    """phi o f for a map f: R^src_dim -> R^phi.dim."""

    def fn(*x):
        return phi(*f(*x))

    return TestFunction(src_dim, fn)


def bump(s):
    """exp(-1/(1-s)) for s < 1, identically zero beyond.

    Called with s = |x|^2 this is the standard compactly supported bump;
    all derivatives vanish on the boundary, so truncating is exact up to
    values below 1e-200.
    """
    s0 = scalar_part(s)
    if isinstance(s0, np.ndarray):
        mask = s0 < _BUMP_CUTOFF
        safe = s - np.where(mask, 0.0, s0)
        value = alg.exp(-alg.reciprocal(1 - safe))
        return alg.map_coeffs(value, lambda c: np.where(mask, c, 0.0))
    if float(s0) >= _BUMP_CUTOFF:
        return alg.map_coeffs(s, lambda c: 0.0) if alg.is_algebra(s) else 0.0
    return alg.exp(-alg.reciprocal(1 - s))


def gaussian(dim: int, a: float = 1.0) -> TestFunction:
    def fn(*x):
        r2 = sum(xi * xi for xi in x)
        return alg.exp(-a * r2)

    return TestFunction(dim, fn, name=f"exp(-{a}|x|^2)")


def bump_function(dim: int, radius: float = 1.0) -> TestFunction:
    def fn(*x):
        return bump(sum(xi * xi for xi in x) / (radius * radius))

    return TestFunction(dim, fn, support=radius, name=f"bump(|x|^2/{radius}^2)")


def hadamard_quotient(coeffs: Sequence) -> list:
    """psi with phi(x) = phi(0) + x*psi(x), phi given by polynomial coefficients."""
    return list(coeffs[1:]) or [0]
