"""Vector fields as actions of square-zero elements, and their formal flows.

A vector field with principal part xi acts by X_d(m) = m + d*xi(m).  The
formal flow F_t(m), t nilpotent of order n, is obtained by composing the
actions of n independent square-zero generators and collapsing the
resulting symmetric polynomial to a polynomial in t = d_1 + ... + d_n.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Sequence

import numpy as np

from . import algebra as alg
from .algebra import Jet, SquareZeroElement, collapse_symmetric, fresh_var
from .distributions import Distribution, Laplacian, LinComb, DirectionalDerivative
from .errors import DimensionError, FlowError, NotNilpotentError, NotSymmetricError

__all__ = [
    "VectorField",
    "Flow",
    "LinearOperator",
    "MatrixOperator",
    "LaplacianOperator",
    "DerivativeOperator",
    "as_operator",
    "infinitesimal_action",
    "formal_flow",
    "flow_at",
    "zero_sum_composite",
    "zero_sum_identity_holds",
    "series_coefficients",
    "exp_flow_linear",
    "second_order_flow",
    "conjugate_solution",
    "translation_flow",
    "linear_flow",
    "identity_flow",
    "time_derivative",
    "directional_derivative_fn",
    "pde_residual",
    "change_of_variables",
    "undo_change_of_variables",
    "chain_rule_sides",
    "naturality_sides",
    "group_law_sides",
    "action_law_sides",
    "commutation_sides",
]


def _as_list(v):
    return list(v) if isinstance(v, (list, tuple)) else [v]


@dataclass(frozen=True, eq=False)
class VectorField:
    """Vector field on R^dim given by its principal part xi.

    ``expr`` holds the component expression trees of parsed fields; two
    fields compare equal when those agree (otherwise only by identity).
    """

    dim: int
    principal_part: Callable
    name: str = ""
    expr: tuple | None = None

    def __eq__(self, other):
        if self is other:
            return True
        if not isinstance(other, VectorField):
            return NotImplemented
        return self.expr is not None and (self.dim, self.expr) == (other.dim, other.expr)

    def __hash__(self):
        return hash((self.dim, self.expr)) if self.expr is not None else id(self)

    def xi(self, point) -> list:
        return _as_list(self.principal_part(*point))

    def act(self, d, point) -> list:
        return [m + d * v for m, v in zip(point, self.xi(point))]

    @classmethod
    def constant(cls, *c):
        return cls(len(c), lambda *x: list(c), name=f"const{c}")


def infinitesimal_action(X: VectorField, d, m):
    """X_d(m) = m + d*xi(m) for a first-order nilpotent d."""
    if not alg.is_algebra(d) or not alg.is_zero(d.coeffs[0]) or not alg.is_zero(d * d):
        raise NotNilpotentError("infinitesimal action needs d with d^2 = 0 and zero real part")
    scalar = not isinstance(m, (list, tuple))
    out = X.act(d, _as_list(m))
    return out[0] if scalar else out


def formal_flow(X: VectorField, m, order: int, tol: float = 1e-12, var: int | None = None):
    """Taylor jet in t of the flow of X starting at m, to the given order.

    Composes X_{d_1} o ... o X_{d_n}(m) over n fresh square-zero generators,
    checks the symmetry of the coefficients and collapses.  Returns one jet
    per coordinate (a single jet when ``m`` is a scalar).
    """
    scalar = not isinstance(m, (list, tuple))
    point = _as_list(m)
    if len(point) != X.dim:
        raise DimensionError(f"point of dim {len(point)} for a field of dim {X.dim}")
    var = fresh_var() if var is None else var
    if order == 0:
        jets = [Jet([c], var) for c in point]
        return jets[0] if scalar else jets
    gens = SquareZeroElement.generators(order)
    x = point
    for d in reversed(gens):
        x = X.act(d, x)
    try:
        jets = [collapse_symmetric(gens[0]._coerce(c), tol, var) for c in x]
    except NotSymmetricError as exc:
        raise FlowError(f"composite action is not symmetric: {exc}") from exc
    return jets[0] if scalar else jets


def flow_at(jets, t):
    """Evaluate flow jets at a nilpotent (or jet) time t."""
    if isinstance(jets, Jet):
        return jets.substitute(t)
    return [j.substitute(t) for j in jets]


def zero_sum_composite(X: VectorField, m, n: int):
    """X_{d_1} o ... o X_{d_n}(m) with d_n := -(d_1 + ... + d_{n-1}).

    Computed in the square-zero algebra on d_1..d_{n-1}; the relation
    d_n^2 = 0 then reads sigma_2(d_1..d_{n-1}) = 0, so the result is only
    meaningful modulo that ideal (see :func:`zero_sum_identity_holds`).
    """
    if n < 2:
        raise ValueError("need at least two generators")
    gens = SquareZeroElement.generators(n - 1)
    last = -sum(gens[1:], gens[0])
    x = _as_list(m)
    for d in [*gens, last][::-1]:
        x = X.act(d, x)
    return [gens[0]._coerce(c) for c in x], gens


def _sigma2_ideal(gens) -> list:
    n = gens[0].n
    sigma2 = 0
    for i in range(n):
        for j in range(i + 1, n):
            sigma2 = sigma2 + gens[i] * gens[j]
    if not alg.is_algebra(sigma2):
        return []
    out = []
    for mask in range(1 << n):
        mono = SquareZeroElement(n, var=gens[0].var)
        mono.coeffs[mask] = 1
        out.append((sigma2 * mono).coeffs)
    return out


def zero_sum_identity_holds(X: VectorField, m, n: int, tol: float = 1e-12) -> bool:
    """True iff the zero-sum composite equals m modulo d_n^2 = 0.

    Exact (sympy rationals) when all coefficients are ints/Fractions,
    otherwise a least-squares membership test with tolerance ``tol``.
    """
    composite, gens = zero_sum_composite(X, m, n)
    ideal = _sigma2_ideal(gens)
    for value, m0 in zip(composite, _as_list(m)):
        residue = list((value - m0).coeffs)
        if all(isinstance(c, (int, Fraction)) for c in residue):
            import sympy
            if not any(residue):
                continue
            if not ideal:
                return False
            A = sympy.Matrix([[sympy.Rational(c.numerator, c.denominator) if isinstance(c, Fraction) else c
                               for c in col] for col in ideal]).T
            v = sympy.Matrix([sympy.Rational(c.numerator, c.denominator) if isinstance(c, Fraction) else c
                              for c in residue])
            if A.rank() != A.row_join(v).rank():
                return False
        else:
            v = np.array([float(c) for c in residue])
            if not ideal:
                if np.max(np.abs(v)) > tol:
                    return False
                continue
            A = np.array(ideal, dtype=float).T
            coef, *_ = np.linalg.lstsq(A, v, rcond=None)
            if np.max(np.abs(A @ coef - v)) > tol * max(1.0, np.max(np.abs(v))):
                return False
    return True


# -- linear fields ------------------------------------------------------------

class LinearOperator:
    """A linear map, applied by calling it."""

    name = "linear"

    def __call__(self, v):
        raise NotImplementedError

    def check_linearity(self, u, v, a, b, compare: Callable | None = None, tol: float = 1e-12) -> bool:
        """L(a u + b v) == a L(u) + b L(v), compared by ``compare`` when given."""
        lhs = self(_combine(a, u, b, v))
        rhs = _combine(a, self(u), b, self(v))
        if compare is not None:
            return compare(lhs, rhs, tol)
        return all(alg.close(x, y, tol) for x, y in zip(_as_list(lhs), _as_list(rhs)))


def _combine(a, u, b, v):
    if isinstance(u, Distribution):
        return LinComb(((a, u), (b, v)))
    if isinstance(u, (list, tuple)):
        return [a * x + b * y for x, y in zip(u, v)]
    return a * u + b * v


class MatrixOperator(LinearOperator):
    """Dense matrix acting on coordinate vectors (entries may be Fractions)."""

    def __init__(self, matrix):
        self.matrix = [list(row) for row in matrix]
        self.name = f"matrix{self.matrix}"

    def __call__(self, v):
        scalar = not isinstance(v, (list, tuple))
        v = _as_list(v)
        if len(v) != len(self.matrix[0]):
            raise DimensionError("matrix and vector sizes differ")
        out = []
        for row in self.matrix:
            acc = 0
            for a, x in zip(row, v):
                acc = acc + a * x
            out.append(acc)
        return out[0] if scalar else out


class LaplacianOperator(LinearOperator):
    name = "laplacian"

    def __call__(self, mu):
        return Laplacian(mu)


@dataclass(frozen=True)
class _Axis:
    dim: int
    axis: int

    def principal_part(self, *x):
        return [1 if i == self.axis else 0 for i in range(self.dim)]


class DerivativeOperator(LinearOperator):
    """mu -> D_{d/dx_axis}(mu) on distributions."""

    def __init__(self, dim: int = 1, axis: int = 0):
        self.field = _Axis(dim, axis)
        self.name = f"d/dx{axis}"

    def __call__(self, mu):
        return DirectionalDerivative(self.field, mu)


def as_operator(op) -> LinearOperator:
    if isinstance(op, LinearOperator):
        return op
    if isinstance(op, str):
        if op.lower() in ("laplacian", "delta"):
            return LaplacianOperator()
        if op.lower() in ("d/dx", "ddx"):
            return DerivativeOperator()
        raise ValueError(f"unknown operator {op!r}")
    if isinstance(op, (int, float, Fraction)):
        return MatrixOperator([[op]])
    return MatrixOperator(op)


def _factorial_scale(c, k):
    return alg._div_int(c, math.factorial(k))


def series_coefficients(op, v, order: int) -> list:
    """c_k = L^k(v) / k!, k = 0..order (trees for distributions)."""
    op = as_operator(op)
    out = []
    cur = v
    for k in range(order + 1):
        if isinstance(v, Distribution):
            out.append(LinComb(((Fraction(1, math.factorial(k)), cur),)))
        else:
            out.append([_factorial_scale(c, k) for c in _as_list(cur)])
        cur = op(cur)
    return out


def _time_powers(t, order):
    return [alg.power(t, k) for k in range(order + 1)]


def _resolve_order(t, order):
    if order is None:
        if not isinstance(t, Jet):
            raise ValueError("a scalar time needs an explicit truncation order")
        return t.order
    return order


def exp_flow_linear(op, v, t, order: int | None = None):
    """sum_{k<=order} t^k/k! L^k(v): the formal solution of F' = L(F), F(0) = v."""
    op = as_operator(op)
    order = _resolve_order(t, order)
    tp = _time_powers(t, order)
    if isinstance(v, Distribution):
        terms = []
        cur = v
        for k in range(order + 1):
            terms.append((_factorial_scale(tp[k], k), cur))
            cur = op(cur)
        return LinComb(tuple(terms))
    scalar = not isinstance(v, (list, tuple))
    cur = _as_list(v)
    total = [0] * len(cur)
    for k in range(order + 1):
        c = _factorial_scale(tp[k], k)
        total = [s + c * x for s, x in zip(total, cur)]
        cur = _as_list(op(cur))
    return total[0] if scalar else total


def second_order_flow(op, v, w, t, order: int | None = None):
    """v + t w + t^2/2! L v + t^3/3! L w + ...: solves F'' = L(F), F(0)=v, F'(0)=w."""
    op = as_operator(op)
    order = _resolve_order(t, order)
    tp = _time_powers(t, order)
    powers_v, powers_w = [v], [w]
    for _ in range(order // 2 + 1):
        powers_v.append(op(powers_v[-1]))
        powers_w.append(op(powers_w[-1]) if w is not None else None)
    if isinstance(v, Distribution):
        terms = []
        for k in range(order + 1):
            src = powers_v[k // 2] if k % 2 == 0 else powers_w[k // 2]
            if src is None:
                continue
            terms.append((_factorial_scale(tp[k], k), src))
        return LinComb(tuple(terms))
    scalar = not isinstance(v, (list, tuple))
    total = [0] * len(_as_list(v))
    for k in range(order + 1):
        src = powers_v[k // 2] if k % 2 == 0 else powers_w[k // 2]
        if src is None:
            continue
        c = _factorial_scale(tp[k], k)
        total = [s + c * x for s, x in zip(total, _as_list(src))]
    return total[0] if scalar else total


# -- flows as maps ------------------------------------------------------------

@dataclass(frozen=True)
class Flow:
    """A complete solution (t, point) -> point, point a list of coordinates."""

    fn: Callable
    name: str = ""

    def __call__(self, t, point):
        return _as_list(self.fn(t, _as_list(point)))


def translation_flow(*c) -> Flow:
    c = c or (1,)
    return Flow(lambda t, p: [x + ci * t for x, ci in zip(p, c)], name=f"translation{c}")


def linear_flow(a=1) -> Flow:
    """F_t(x) = e^(a t) x, the flow of xi(x) = a x."""
    return Flow(lambda t, p: [alg.exp(a * t) * x for x in p], name=f"exp({a}t)")


def identity_flow() -> Flow:
    """Flow of the zero vector field."""
    return Flow(lambda t, p: list(p), name="identity")


def conjugate_solution(G: Flow, F: Flow, beta: Callable, t) -> Callable:
    """H_t(beta) = G_t o beta o F_t^{-1}, with F_t^{-1} = F_{-t}."""

    def h(*m):
        inner = F(-t, list(m))
        out = _as_list(beta(*inner))
        res = G(t, out)
        return res[0] if len(res) == 1 else res

    return h


def time_derivative(u: Callable, t, m: Sequence):
    """du/dt at (t, m) from an order-1 jet in t."""
    s = Jet.variable(1, at=t)
    value = u(s, *m)
    if alg.is_algebra(value) and value.var == s.var:
        return value.coeffs[1]
    return 0.0


def directional_derivative_fn(u: Callable, X: VectorField, t, m: Sequence):
    """D_X(u_t)(m): the d-coefficient of u(t, m + d*xi(m))."""
    var = fresh_var()
    y = [Jet([mi, vi], var) for mi, vi in zip(m, X.xi(list(m)))]
    value = u(t, *y)
    if alg.is_algebra(value) and value.var == var:
        return value.coeffs[1]
    return 0.0


def pde_residual(u: Callable, X: VectorField, eta: Callable, t, m):
    """du/dt + D_X(u) - eta(u) at (t, m)."""
    m = _as_list(m)
    return time_derivative(u, t, m) + directional_derivative_fn(u, X, t, m) - eta(u(t, *m))


def _check_inverse(F: Flow, samples, tol):
    for t, m in samples:
        back = F(t, F(-t, m))
        if not all(alg.close(a, b, tol) for a, b in zip(back, _as_list(m))):
            raise FlowError(f"F_t o F_-t is not the identity at t={t}, m={m}")


def change_of_variables(u: Callable, F: Flow, samples=None, tol: float = 1e-12) -> Callable:
    """U(t, m) = u(t, F_t(m)): straightens the transport term of u's PDE."""
    if samples:
        _check_inverse(F, samples, tol)

    def U(t, *m):
        return u(t, *F(t, list(m)))

    return U


def undo_change_of_variables(U: Callable, F: Flow, samples=None, tol: float = 1e-12) -> Callable:
    """u(t, m) = U(t, F_{-t}(m)), inverse of :func:`change_of_variables`."""
    if samples:
        _check_inverse(F, samples, tol)

    def u(t, *m):
        return U(t, *F(-t, list(m)))

    return u


def chain_rule_sides(U: Callable, X: VectorField, F: Flow, t, m):
    """(d/dt U(t, F_t(m)), dU/dt + D_{Z x X} U evaluated at (t, F_t(m)))."""
    m = _as_list(m)
    s = Jet.variable(1, at=t)
    value = U(s, *F(s, m))
    lhs = value.coeffs[1] if alg.is_algebra(value) and value.var == s.var else 0.0
    y = F(t, m)
    rhs = time_derivative(U, t, y) + directional_derivative_fn(U, X, t, y)
    return lhs, rhs


def naturality_sides(u: Callable, X1: VectorField, X2: VectorField, H: Callable, m):
    """(D_{X1}(u o H)(m), D_{X2}(u)(H(m))) for a homomorphism H: X1 -> X2."""
    m = _as_list(m)
    uH = lambda _t, *x: u(*_as_list(H(*x)))
    uu = lambda _t, *x: u(*x)
    lhs = directional_derivative_fn(uH, X1, 0, m)
    rhs = directional_derivative_fn(uu, X2, 0, _as_list(H(*m)))
    return lhs, rhs


# -- flow conditions ------------------------------------------------------------

def group_law_sides(X: VectorField, m, n: int):
    """(F_{t+s}(m), F_t(F_s(m))) as jets in t with jet-in-s coefficients."""
    s = Jet.variable(n)
    Fs = flow_at(formal_flow(X, _as_list(m), n), s)
    rhs = formal_flow(X, Fs, n)
    tv = rhs[0].var
    lhs = flow_at(formal_flow(X, _as_list(m), 2 * n), Jet.variable(n, at=s, var=tv))
    return lhs, rhs


def action_law_sides(X: VectorField, m, n: int):
    """(F_{t+d}(m), X_d(F_t(m))) for t of order n and d^2 = 0."""
    t = Jet.variable(n)
    d = Jet.variable(1)
    lhs = flow_at(formal_flow(X, _as_list(m), n + 1), Jet([t, 1], d.var))
    rhs = X.act(d, flow_at(formal_flow(X, _as_list(m), n), t))
    return lhs, rhs


def commutation_sides(X: VectorField, m, n: int):
    """(F_t(X_d(m)), X_d(F_t(m))): each F_t is an endomorphism of the action."""
    t = Jet.variable(n)
    d = Jet.variable(1)
    lhs = flow_at(formal_flow(X, X.act(d, _as_list(m)), n), t)
    rhs = X.act(d, flow_at(formal_flow(X, _as_list(m), n), t))
    return lhs, rhs
