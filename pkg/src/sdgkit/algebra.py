"""Truncated nilpotent algebras.

Two concrete algebras are provided:

``Jet``
    R[t]/(t^(k+1)), the truncated univariate polynomials.  A jet with zero
    constant term is nilpotent; it is the computational model of an element
    of D_k (and of D when k = 1).

``SquareZeroElement``
    R[d_1, ..., d_n]/(d_1^2, ..., d_n^2), with coefficients indexed by the
    bitmask of the subset Q of generators in the monomial d^Q.

Coefficients may be Python floats, ``fractions.Fraction`` (exact mode),
numpy arrays (vectorised evaluation over many points at once) or elements
of *another* algebra.  Nesting is controlled by the ``var`` tag carried by
every element: two elements with the same tag belong to the same algebra,
and an element with a smaller tag behaves as a constant with respect to an
element with a larger tag.  ``fresh_var`` hands out tags that are larger
than every tag issued before, so derivative operators can always wrap
their arguments in a new outermost variable.

The module also provides the analytic primitives (``exp``, ``sin``,
``cos``, ``power``, ...) that work uniformly on scalars, arrays and algebra
elements; on an algebra element they expand the function in its Taylor
series about the constant part, which is exact to the truncation order.
"""
from __future__ import annotations

import itertools
import math
from fractions import Fraction
from numbers import Number

import numpy as np

from .errors import (
    GeneratorMismatchError,
    MixedAlgebraError,
    NotNilpotentError,
    NotSymmetricError,
    OrderMismatchError,
)

__all__ = [
    "Jet",
    "SquareZeroElement",
    "fresh_var",
    "var_of",
    "scalar_part",
    "is_algebra",
    "is_zero",
    "close",
    "jet_mul",
    "jet_exp_nilpotent",
    "sz_mul",
    "collapse_symmetric",
    "exp",
    "sin",
    "cos",
    "power",
    "sqrt",
    "reciprocal",
    "map_coeffs",
]

_vars = itertools.count(1)


def fresh_var() -> int:
    """Return a variable tag larger than every tag handed out so far."""
    return next(_vars)


def is_algebra(x) -> bool:
    return isinstance(x, _NilpotentElement)


def var_of(x) -> int:
    return x.var if isinstance(x, _NilpotentElement) else -1


def scalar_part(x):
    """Strip every nilpotent layer and return the underlying real part."""
    while isinstance(x, _NilpotentElement):
        x = x.coeffs[0]
    return x


def is_zero(x) -> bool:
    """Exact zero test, recursive through algebra layers and arrays."""
    if isinstance(x, _NilpotentElement):
        return all(is_zero(c) for c in x.coeffs)
    if isinstance(x, np.ndarray):
        return bool(np.all(x == 0))
    return x == 0


def _is_literal_zero(c) -> bool:
    # cheap test used to skip work in products; arrays never count
    return isinstance(c, (int, float, Fraction)) and c == 0


def _coeff_equal(a, b) -> bool:
    if isinstance(a, np.ndarray) or isinstance(b, np.ndarray):
        return bool(np.array_equal(np.broadcast_to(a, np.shape(b) or np.shape(a)), b))
    return bool(a == b)


def close(a, b, tol: float = 1e-12) -> bool:
    """Equality up to ``tol`` (relative to max(1, |a|, |b|)).

    Two exact values (int / Fraction) are compared exactly.
    """
    if isinstance(a, _NilpotentElement) or isinstance(b, _NilpotentElement):
        ref = a if isinstance(a, _NilpotentElement) else b
        a = ref._coerce(a)
        b = ref._coerce(b)
        return all(close(x, y, tol) for x, y in zip(a.coeffs, b.coeffs))
    exact = (int, Fraction)
    if isinstance(a, exact) and isinstance(b, exact):
        return a == b
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    scale = np.maximum(1.0, np.maximum(np.abs(a), np.abs(b)))
    return bool(np.all(np.abs(a - b) <= tol * scale))


def _div_int(a, n: int):
    """a / n, staying exact when ``a`` is an int or Fraction."""
    if n == 1:
        return a
    if isinstance(a, (int, Fraction)) and not isinstance(a, bool):
        return Fraction(a) / n
    return a / n


def _is_exact(x) -> bool:
    """True when every innermost coefficient is an int or Fraction."""
    if isinstance(x, _NilpotentElement):
        return all(_is_exact(c) for c in x.coeffs)
    return isinstance(x, (int, Fraction))


def map_coeffs(x, fn):
    """Apply ``fn`` to every innermost coefficient of ``x``."""
    if isinstance(x, _NilpotentElement):
        return x._new([map_coeffs(c, fn) for c in x.coeffs])
    return fn(x)


def _is_outer(a, b) -> bool:
    return isinstance(b, _NilpotentElement) and b.var > a.var


class _NilpotentElement:
    """Shared arithmetic for the truncated algebras.

    Subclasses implement ``_new``, ``_check_compatible``, ``_mul_same`` and
    ``nil_degree`` (largest power of a nilpotent element that can be
    nonzero).
    """

    __slots__ = ("coeffs", "var")
    __array_ufunc__ = None  # make numpy defer to our reflected operators
    __hash__ = None

    # -- construction helpers -------------------------------------------------
    def _new(self, coeffs):
        raise NotImplementedError

    def _zero_like(self):
        return self._new([0] * len(self.coeffs))

    def _coerce(self, other):
        """Turn a constant (or same-algebra element) into this algebra."""
        if isinstance(other, _NilpotentElement) and other.var == self.var:
            self._check_compatible(other)
            return other
        coeffs = [0] * len(self.coeffs)
        coeffs[0] = other
        return self._new(coeffs)

    def _classify(self, other):
        """'same', 'const' or None (let the other operand handle it)."""
        v = var_of(other)
        if v == self.var:
            if type(other) is not type(self):
                raise MixedAlgebraError(
                    f"cannot combine {type(self).__name__} and {type(other).__name__} "
                    f"in the same variable {self.var}")
            self._check_compatible(other)
            return "same"
        if v < self.var:
            if not isinstance(other, (_NilpotentElement, Number, np.ndarray, np.generic)):
                return None
            return "const"
        return None

    def constant(self):
        return self.coeffs[0]

    def nilpotent_part(self):
        return self._new([0] + list(self.coeffs[1:]))

    # -- ring operations ------------------------------------------------------
    def __neg__(self):
        return self._new([-c for c in self.coeffs])

    def __pos__(self):
        return self

    def __add__(self, other):
        kind = self._classify(other)
        if kind == "same":
            return self._new([a + b for a, b in zip(self.coeffs, other.coeffs)])
        if kind == "const":
            coeffs = list(self.coeffs)
            coeffs[0] = coeffs[0] + other
            return self._new(coeffs)
        if _is_outer(self, other):
            # same Python type: the reflected method is never tried automatically
            return other.__radd__(self)
        return NotImplemented

    __radd__ = __add__

    def __sub__(self, other):
        kind = self._classify(other)
        if kind == "same":
            return self._new([a - b for a, b in zip(self.coeffs, other.coeffs)])
        if kind == "const":
            coeffs = list(self.coeffs)
            coeffs[0] = coeffs[0] - other
            return self._new(coeffs)
        if _is_outer(self, other):
            return other.__rsub__(self)
        return NotImplemented

    def __rsub__(self, other):
        kind = self._classify(other)
        if kind == "const":
            coeffs = [-c for c in self.coeffs]
            coeffs[0] = other + coeffs[0]
            return self._new(coeffs)
        return NotImplemented

    def __mul__(self, other):
        kind = self._classify(other)
        if kind == "same":
            return self._mul_same(other)
        if kind == "const":
            if _is_literal_zero(other):
                return self._zero_like()
            return self._new([c if _is_literal_zero(c) else c * other for c in self.coeffs])
        if _is_outer(self, other):
            return other.__rmul__(self)
        return NotImplemented

    __rmul__ = __mul__

    def __truediv__(self, other):
        kind = self._classify(other)
        if kind == "same":
            return self._mul_same(reciprocal(other))
        if kind == "const":
            if isinstance(other, int) and not isinstance(other, bool) and _is_exact(self):
                return self._new([_div_int(c, other) for c in self.coeffs])
            return self._new([c / other for c in self.coeffs])
        if _is_outer(self, other):
            return other.__rtruediv__(self)
        return NotImplemented

    def __rtruediv__(self, other):
        kind = self._classify(other)
        if kind == "const":
            return reciprocal(self) * other
        return NotImplemented

    def __pow__(self, p):
        return power(self, p)

    def __eq__(self, other):
        if isinstance(other, _NilpotentElement):
            if type(other) is not type(self) or len(other.coeffs) != len(self.coeffs):
                return False
            return all(_coeff_equal(a, b) for a, b in zip(self.coeffs, other.coeffs))
        if isinstance(other, (Number, np.ndarray)):
            return _coeff_equal(self.coeffs[0], other) and all(is_zero(c) for c in self.coeffs[1:])
        return NotImplemented

    # -- Taylor machinery -----------------------------------------------------
    def apply_taylor(self, derivs):
        """Sum_k derivs[k]/k! * n^k, n the nilpotent part of ``self``.

        ``derivs[k]`` is the k-th derivative of the function at the constant
        part; only the first ``nil_degree + 1`` entries are used.
        """
        n = self.nilpotent_part()
        K = min(self.nil_degree, len(derivs) - 1)
        # exact Taylor weights only for exact arguments (Fractions would turn arrays into object arrays)
        div = _div_int if _is_exact(self) else (lambda a, k: a / k)
        acc = self._coerce(div(derivs[K], math.factorial(K)))
        for k in range(K - 1, -1, -1):
            acc = n._mul_same(acc) + div(derivs[k], math.factorial(k))
        return acc


class Jet(_NilpotentElement):
    """Element c0 + c1 t + ... + ck t^k of R[t]/(t^(k+1)).

    >>> Jet([1, 1]) * Jet([1, 1])
    Jet([1, 2])
    """

    __slots__ = ()

    def __init__(self, coeffs, var: int = 0):
        coeffs = list(coeffs)
        if not coeffs:
            raise ValueError("a jet needs at least one coefficient")
        self.coeffs = coeffs
        self.var = var

    @classmethod
    def variable(cls, order: int, at=0, var: int | None = None) -> "Jet":
        """The jet ``at + t`` of the given order."""
        coeffs = [at, 1] + [0] * (order - 1) if order >= 1 else [at]
        return cls(coeffs, fresh_var() if var is None else var)

    @classmethod
    def constant_jet(cls, value, order: int, var: int = 0) -> "Jet":
        return cls([value] + [0] * order, var)

    def _new(self, coeffs):
        return Jet(coeffs, self.var)

    @property
    def order(self) -> int:
        return len(self.coeffs) - 1

    @property
    def nil_degree(self) -> int:
        return self.order

    def _check_compatible(self, other):
        if other.order != self.order:
            raise OrderMismatchError(
                f"jet orders differ: {self.order} vs {other.order}")

    def _mul_same(self, other):
        a, b = self.coeffs, other.coeffs
        k = len(a)
        out = [0] * k
        for i, ai in enumerate(a):
            if _is_literal_zero(ai):
                continue
            for j in range(k - i):
                bj = b[j]
                if _is_literal_zero(bj):
                    continue
                out[i + j] = out[i + j] + ai * bj
        return Jet(out, self.var)

    def derivatives(self):
        """k! * c_k, i.e. the derivatives the jet encodes."""
        return [c * math.factorial(k) for k, c in enumerate(self.coeffs)]

    def substitute(self, x):
        """Evaluate the polynomial sum c_k x^k at ``x`` (Horner)."""
        acc = self.coeffs[-1]
        for c in reversed(self.coeffs[:-1]):
            acc = acc * x + c
        return acc

    def truncate(self, order: int) -> "Jet":
        return Jet(self.coeffs[: order + 1], self.var)

    def __repr__(self):
        return f"Jet({self.coeffs!r})"

    def __str__(self):
        return format_jet(self)


def format_jet(jet: Jet, symbol: str = "t") -> str:
    """Render as ``c0 + c1*t + ... (mod t^{k+1})``."""
    parts = []
    for k, c in enumerate(jet.coeffs):
        s = str(c)
        if k == 0:
            parts.append(s)
        elif k == 1:
            parts.append(f"{s}*{symbol}")
        else:
            parts.append(f"{s}*{symbol}^{k}")
    return " + ".join(parts) + f" (mod {symbol}^{{{jet.order + 1}}})"


def _popcount(m: int) -> int:
    return bin(m).count("1")


class SquareZeroElement(_NilpotentElement):
    """Element sum_Q a_Q d^Q with d_i^2 = 0, Q a subset of {1..n}.

    ``coeffs[mask]`` holds a_Q where bit i of ``mask`` is set iff d_{i+1}
    divides the monomial.
    """

    __slots__ = ("n",)

    def __init__(self, n: int, coeffs=None, var: int = 0):
        if n < 0:
            raise ValueError("generator count must be non-negative")
        size = 1 << n
        coeffs = [0] * size if coeffs is None else list(coeffs)
        if len(coeffs) != size:
            raise ValueError(f"expected {size} coefficients, got {len(coeffs)}")
        self.n = n
        self.coeffs = coeffs
        self.var = var

    @classmethod
    def generator(cls, n: int, i: int, var: int = 0) -> "SquareZeroElement":
        """d_i for 1 <= i <= n."""
        if not 1 <= i <= n:
            raise ValueError(f"generator index {i} outside 1..{n}")
        el = cls(n, var=var)
        el.coeffs[1 << (i - 1)] = 1
        return el

    @classmethod
    def generators(cls, n: int, var: int | None = None):
        var = fresh_var() if var is None else var
        return [cls.generator(n, i, var) for i in range(1, n + 1)]

    @classmethod
    def from_subsets(cls, n: int, terms: dict, var: int = 0) -> "SquareZeroElement":
        """Build from ``{subset_of_1..n: coefficient}``."""
        el = cls(n, var=var)
        for subset, value in terms.items():
            mask = 0
            for i in subset:
                mask |= 1 << (i - 1)
            el.coeffs[mask] = el.coeffs[mask] + value
        return el

    def coefficient(self, subset) -> object:
        mask = 0
        for i in subset:
            mask |= 1 << (i - 1)
        return self.coeffs[mask]

    def _new(self, coeffs):
        return SquareZeroElement(self.n, coeffs, self.var)

    @property
    def nil_degree(self) -> int:
        return self.n

    def _check_compatible(self, other):
        if other.n != self.n:
            raise GeneratorMismatchError(
                f"generator counts differ: {self.n} vs {other.n}")

    def _mul_same(self, other):
        a = [(m, c) for m, c in enumerate(self.coeffs) if not _is_literal_zero(c)]
        b = [(m, c) for m, c in enumerate(other.coeffs) if not _is_literal_zero(c)]
        out = [0] * len(self.coeffs)
        for ma, ca in a:
            for mb, cb in b:
                if ma & mb:
                    continue
                out[ma | mb] = out[ma | mb] + ca * cb
        return SquareZeroElement(self.n, out, self.var)

    def terms(self):
        """Yield ``(subset, coefficient)`` for the nonzero coefficients."""
        for mask, c in enumerate(self.coeffs):
            if not _is_literal_zero(c):
                yield tuple(i + 1 for i in range(self.n) if mask >> i & 1), c

    def __repr__(self):
        body = ", ".join(f"{set(q) or '{}'}: {c!r}" for q, c in self.terms())
        return f"SquareZeroElement(n={self.n}, {{{body}}})"


# -- operations with the names used throughout the docs ----------------------

def jet_mul(a: Jet, b: Jet) -> Jet:
    if not (isinstance(a, Jet) and isinstance(b, Jet)):
        raise TypeError("jet_mul expects two jets")
    if a.order != b.order:
        raise OrderMismatchError(f"jet orders differ: {a.order} vs {b.order}")
    return a._mul_same(b)


def sz_mul(a: SquareZeroElement, b: SquareZeroElement) -> SquareZeroElement:
    if a.n != b.n:
        raise GeneratorMismatchError(f"generator counts differ: {a.n} vs {b.n}")
    return a._mul_same(b)


def jet_exp_nilpotent(a: Jet) -> Jet:
    """exp(a) = sum_{k<=order} a^k / k! for a jet with zero constant term."""
    if not is_zero(a.coeffs[0]):
        raise NotNilpotentError("exp of a jet requires a zero constant term")
    result = Jet.constant_jet(1, a.order, a.var)
    term = result
    for k in range(1, a.order + 1):
        term = term._mul_same(a) / k
        result = result + term
    return result


def collapse_symmetric(p: SquareZeroElement, tol: float = 1e-12, var: int | None = None) -> Jet:
    """Rewrite a symmetric element of the square-zero algebra as a jet in t.

    With t = d_1 + ... + d_n we have t^k = k! sigma_k, so a symmetric
    element sum_k a_k sigma_k equals sum_k (a_k / k!) t^k.  The returned jet
    has order n and coefficients a_k / k!.
    """
    by_size: dict[int, int] = {}
    for mask in range(len(p.coeffs)):
        k = _popcount(mask)
        if k not in by_size:
            by_size[k] = mask
            continue
        ref = by_size[k]
        if not close(p.coeffs[ref], p.coeffs[mask], tol):
            q1 = tuple(i + 1 for i in range(p.n) if ref >> i & 1)
            q2 = tuple(i + 1 for i in range(p.n) if mask >> i & 1)
            raise NotSymmetricError(
                f"coefficients of d^{set(q1)} and d^{set(q2)} differ", witness=(q1, q2))
    div = _div_int if _is_exact(p) else (lambda a, k: a / k)
    coeffs = [div(p.coeffs[by_size[k]], math.factorial(k)) for k in range(p.n + 1)]
    return Jet(coeffs, fresh_var() if var is None else var)


# -- analytic primitives ------------------------------------------------------

_EXACT_SPECIAL = {
    "exp": {0: 1},
    "sin": {0: 0},
    "cos": {0: 1},
}


def _scalar_fn(name: str, x):
    if isinstance(x, np.ndarray):
        return getattr(np, name)(x)
    if isinstance(x, (int, Fraction)) and not isinstance(x, bool):
        special = _EXACT_SPECIAL.get(name, {})
        if x in special:
            return special[x]
        x = float(x)
    return getattr(math, name)(x)


def exp(x):
    if isinstance(x, _NilpotentElement):
        e = exp(x.coeffs[0])
        return x.apply_taylor([e] * (x.nil_degree + 1))
    return _scalar_fn("exp", x)


def _trig(x, first: str):
    s, c = sin(x.coeffs[0]), cos(x.coeffs[0])
    cycle = [s, c, -s, -c] if first == "sin" else [c, -s, -c, s]
    derivs = [cycle[k % 4] for k in range(x.nil_degree + 1)]
    return x.apply_taylor(derivs)


def sin(x):
    if isinstance(x, _NilpotentElement):
        return _trig(x, "sin")
    return _scalar_fn("sin", x)


def cos(x):
    if isinstance(x, _NilpotentElement):
        return _trig(x, "cos")
    return _scalar_fn("cos", x)


def _is_int(p) -> bool:
    if isinstance(p, bool):
        return False
    if isinstance(p, int):
        return True
    if isinstance(p, Fraction):
        return p.denominator == 1
    return isinstance(p, float) and p.is_integer()


def power(x, p):
    """x ** p for scalars, arrays and algebra elements.

    Non-negative integer powers use repeated multiplication (exact in
    rational mode); other exponents expand (c + n)^p about the constant
    part c, which must then be nonzero.
    """
    if _is_int(p) and int(p) >= 0:
        p = int(p)
        if not isinstance(x, _NilpotentElement):
            return x ** p
        result = x._coerce(1)
        base = x
        while p:
            if p & 1:
                result = result._mul_same(base)
            p >>= 1
            if p:
                base = base._mul_same(base)
        return result
    if isinstance(x, _NilpotentElement):
        c = x.coeffs[0]
        if is_zero(scalar_part(c)):
            raise NotNilpotentError(f"power {p} of an element with zero real part")
        if _is_int(p):
            p = int(p)
        derivs = []
        falling = 1
        for k in range(x.nil_degree + 1):
            derivs.append(falling * power(c, p - k))
            falling = falling * (p - k)
        return x.apply_taylor(derivs)
    if isinstance(x, np.ndarray):
        return np.power(x.astype(float), float(p))
    if isinstance(x, (int, Fraction)) and _is_int(p):
        return Fraction(x) ** int(p)
    return float(x) ** float(p)


def reciprocal(x):
    return power(x, -1)


def sqrt(x):
    if isinstance(x, np.ndarray):
        return np.sqrt(x)
    if not isinstance(x, _NilpotentElement):
        return math.sqrt(x)
    return power(x, 0.5)
