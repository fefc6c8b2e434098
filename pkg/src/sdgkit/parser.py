"""LL(1) parser and canonical printer for functions, vector fields and distributions.

Function grammar::

    expr   := term (('+' | '-') term)*
    term   := unary (('*' | '/') unary)*
    unary  := '-' unary | power
    power  := atom ('^' unary)?
    atom   := NUMBER | IDENT | IDENT '(' expr (',' expr)* ')' | '(' expr ')'

Distribution grammar::

    dist    := dterm (('+' | '-') dterm)*
    dterm   := '-' dterm | scalar ('*' | '/') ... '*' dprim | dprim
    dprim   := NAME '(' args ')'

See README for the list of distribution constructors.
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from . import algebra as alg
from . import distributions as D
from .errors import ParseError
from .smooth import TestFunction, bump

__all__ = [
    "Num", "Var", "Neg", "BinOp", "Call",
    "tokenize", "parse_ast", "parse_function", "parse_vector_field",
    "parse_distribution", "parse_expression", "parse_scalar",
    "format_expr", "format_distribution", "format_scalar", "format_expression", "evaluate",
    "DEFAULT_VARIABLES", "DISTRIBUTION_NAMES", "FUNCTION_NAMES",
]

DEFAULT_VARIABLES = ("x", "y", "z")
FUNCTION_NAMES = {"exp": 1, "sin": 1, "cos": 1, "sqrt": 1, "bump": 1}
CONSTANTS = {"pi": math.pi}
DISTRIBUTION_NAMES = (
    "zero", "dirac", "dirac_d", "interval", "sphere", "ball", "heat", "poisson",
    "lincomb", "mul", "lie", "laplacian", "push_p", "conv",
)


# -- lexer --------------------------------------------------------------------

_TOKEN_RE = re.compile(r"""
    (?P<ws>\s+)
  | (?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)
  | (?P<ident>[A-Za-z_][A-Za-z_0-9]*)
  | (?P<op>\*\*|[-+*/^(),=\[\]])
""", re.VERBOSE)


@dataclass(frozen=True)
class Token:
    kind: str  # num, ident, op, eof
    text: str
    pos: int


def tokenize(src: str) -> list[Token]:
    out, pos = [], 0
    while pos < len(src):
        m = _TOKEN_RE.match(src, pos)
        if not m:
            raise ParseError(f"unexpected character {src[pos]!r}", pos, src)
        kind = m.lastgroup
        if kind != "ws":
            text = "^" if m.group() == "**" else m.group()
            out.append(Token(kind, text, pos))
        pos = m.end()
    out.append(Token("eof", "", len(src)))
    return out


# -- AST ----------------------------------------------------------------------

@dataclass(frozen=True)
class Num:
    text: str


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class Neg:
    arg: object


@dataclass(frozen=True)
class BinOp:
    op: str
    left: object
    right: object


@dataclass(frozen=True)
class Call:
    fn: str
    args: tuple


class _Parser:
    def __init__(self, src: str, variables: Sequence[str]):
        self.src = src
        self.toks = tokenize(src)
        self.i = 0
        self.variables = tuple(variables)

    @property
    def tok(self) -> Token:
        return self.toks[self.i]

    def error(self, msg, tok=None):
        tok = tok or self.tok
        raise ParseError(msg, tok.pos, self.src)

    def accept(self, text) -> bool:
        if self.tok.kind == "op" and self.tok.text == text:
            self.i += 1
            return True
        return False

    def expect(self, text):
        if not self.accept(text):
            found = self.tok.text or "end of input"
            self.error(f"expected {text!r}, found {found!r}")

    def expect_eof(self):
        if self.tok.kind != "eof":
            self.error(f"unexpected {self.tok.text!r}")

    # functions
    def expr(self):
        node = self.term()
        while self.tok.kind == "op" and self.tok.text in "+-":
            op = self.tok.text
            self.i += 1
            node = BinOp(op, node, self.term())
        return node

    def term(self):
        node = self.unary()
        while self.tok.kind == "op" and self.tok.text in "*/":
            op = self.tok.text
            self.i += 1
            node = BinOp(op, node, self.unary())
        return node

    def unary(self):
        if self.accept("-"):
            return Neg(self.unary())
        return self.power()

    def power(self):
        node = self.atom()
        if self.accept("^"):
            return BinOp("^", node, self.unary())
        return node

    def atom(self):
        tok = self.tok
        if tok.kind == "num":
            self.i += 1
            return Num(tok.text)
        if tok.kind == "ident":
            self.i += 1
            if self.accept("("):
                if tok.text not in FUNCTION_NAMES:
                    self.error(f"unknown function {tok.text!r}", tok)
                args = [self.expr()]
                while self.accept(","):
                    args.append(self.expr())
                self.expect(")")
                if len(args) != FUNCTION_NAMES[tok.text]:
                    self.error(f"{tok.text} takes {FUNCTION_NAMES[tok.text]} argument(s), got {len(args)}", tok)
                return Call(tok.text, tuple(args))
            if tok.text in self.variables or tok.text in CONSTANTS:
                return Var(tok.text)
            self.error(f"unknown identifier {tok.text!r}", tok)
        if self.accept("("):
            node = self.expr()
            self.expect(")")
            return node
        self.error(f"unexpected {tok.text or 'end of input'!r}")


def parse_ast(src: str, variables: Sequence[str] = DEFAULT_VARIABLES):
    p = _Parser(src, variables)
    node = p.expr()
    p.expect_eof()
    return node


# -- evaluation ---------------------------------------------------------------

def _literal(text: str, exact: bool):
    if exact:
        return Fraction(text)
    if re.fullmatch(r"\d+", text):
        return int(text)
    return float(text)


def _inexact(v) -> bool:
    s = alg.scalar_part(v)
    return isinstance(s, (float, np.ndarray, np.floating))


def _harmonize(a, b):
    # Fraction meeting floats/arrays becomes float (numpy would build object arrays)
    if isinstance(a, Fraction) and _inexact(b):
        a = float(a)
    if isinstance(b, Fraction) and _inexact(a):
        b = float(b)
    return a, b


def _int_exponent(v):
    if isinstance(v, bool):
        return None
    if isinstance(v, int):
        return v
    if isinstance(v, Fraction) and v.denominator == 1:
        return int(v)
    if isinstance(v, float) and v.is_integer():
        return int(v)
    return None


_PRIMS = {"exp": alg.exp, "sin": alg.sin, "cos": alg.cos, "sqrt": alg.sqrt, "bump": bump}


def evaluate(node, env: dict, exact: bool = False):
    """Evaluate an AST with ``env`` mapping variable names to values."""
    if isinstance(node, Num):
        return _literal(node.text, exact)
    if isinstance(node, Var):
        if node.name in env:
            return env[node.name]
        return CONSTANTS[node.name]
    if isinstance(node, Neg):
        return -evaluate(node.arg, env, exact)
    if isinstance(node, Call):
        arg = evaluate(node.args[0], env, exact)
        if isinstance(arg, Fraction) and node.fn != "sqrt":
            arg = arg if arg == 0 else float(arg)
        return _PRIMS[node.fn](arg)
    a = evaluate(node.left, env, exact)
    b = evaluate(node.right, env, exact)
    if node.op == "^":
        k = _int_exponent(b)
        return alg.power(a, k if k is not None else float(b))
    a, b = _harmonize(a, b)
    if node.op == "+":
        return a + b
    if node.op == "-":
        return a - b
    if node.op == "*":
        return a * b
    return a / b


def _used(node, acc=None) -> set:
    acc = set() if acc is None else acc
    if isinstance(node, Var):
        acc.add(node.name)
    elif isinstance(node, Neg):
        _used(node.arg, acc)
    elif isinstance(node, BinOp):
        _used(node.left, acc)
        _used(node.right, acc)
    elif isinstance(node, Call):
        for a in node.args:
            _used(a, acc)
    return acc


def _function_from_ast(node, dim: int, variables: Sequence[str], exact: bool) -> TestFunction:
    names = tuple(variables[:dim])

    def fn(*x):
        return evaluate(node, dict(zip(names, x)), exact)

    return TestFunction(dim, fn, expr=node)


def _infer_dim(node, variables) -> int:
    used = _used(node)
    idx = [variables.index(v) for v in used if v in variables]
    return max(idx) + 1 if idx else 1


def parse_function(src: str, dim: int | None = None, variables: Sequence[str] = DEFAULT_VARIABLES,
                   exact: bool = False) -> TestFunction:
    """Parse a test function; ``dim`` defaults to the highest variable used."""
    allowed = tuple(variables) if dim is None else tuple(variables[:dim])
    node = parse_ast(src, allowed)
    if dim is None:
        dim = _infer_dim(node, tuple(variables))
    return _function_from_ast(node, dim, variables, exact)


def parse_vector_field(src: str, dim: int | None = None, exact: bool = False):
    """Comma-separated principal-part components, e.g. ``"y, -x"``."""
    from .flows import VectorField
    p = _Parser(src, DEFAULT_VARIABLES)
    comps = [p.expr()]
    while p.accept(","):
        comps.append(p.expr())
    p.expect_eof()
    return _field_from_asts(comps, dim, exact, src)


def _field_from_asts(comps, dim, exact, src=""):
    from .flows import VectorField
    n = len(comps) if dim is None else dim
    if len(comps) != n or not 1 <= n <= 3:
        raise ParseError(f"vector field needs {n} components, got {len(comps)}", 0, src)
    names = DEFAULT_VARIABLES[:n]
    for c in comps:
        extra = _used(c) - set(names) - set(CONSTANTS)
        if extra:
            raise ParseError(f"unknown identifier {sorted(extra)[0]!r} in a {n}-dim field", 0, src)

    def xi(*x):
        env = dict(zip(names, x))
        return [evaluate(c, env, exact) for c in comps]

    return VectorField(n, xi, name=", ".join(format_expr(c) for c in comps), expr=tuple(comps))


def parse_scalar(src: str, exact: bool = False):
    return evaluate(parse_ast(src, ()), {}, exact)


# -- canonical printer --------------------------------------------------------

_PREC = {"+": 1, "-": 1, "*": 2, "/": 2, "^": 4}


def _prec(node) -> int:
    if isinstance(node, BinOp):
        return _PREC[node.op]
    if isinstance(node, Neg):
        return 3
    return 5


def format_expr(node) -> str:
    """Canonical text with minimal parentheses; parse_ast(format_expr(n)) == n."""
    if isinstance(node, Num):
        return node.text
    if isinstance(node, Var):
        return node.name
    if isinstance(node, Call):
        return f"{node.fn}(" + ", ".join(format_expr(a) for a in node.args) + ")"
    if isinstance(node, Neg):
        inner = format_expr(node.arg)
        return "-" + (f"({inner})" if _prec(node.arg) < 3 else inner)
    p = _PREC[node.op]
    left, right = format_expr(node.left), format_expr(node.right)
    if node.op == "^":
        if _prec(node.left) <= 4:
            left = f"({left})"
        if _prec(node.right) < 3:
            right = f"({right})"
        return f"{left}^{right}"
    if _prec(node.left) < p:
        left = f"({left})"
    if _prec(node.right) <= p:
        right = f"({right})"
    sep = " " if p == 1 else ""
    return f"{left}{sep}{node.op}{sep}{right}"


def format_scalar(c) -> str:
    if isinstance(c, bool):
        raise ValueError("booleans are not scalars")
    if isinstance(c, Fraction):
        return str(c.numerator) if c.denominator == 1 else f"{c.numerator}/{c.denominator}"
    if isinstance(c, int):
        return str(c)
    if isinstance(c, (float, np.floating)):
        if not math.isfinite(c):
            raise ValueError(f"cannot print non-finite scalar {c}")
        return repr(float(c))
    raise ValueError(f"cannot print non-scalar parameter {c!r}")


def _fmt_point(point) -> str:
    return ",".join(format_scalar(c) for c in point)


def _fmt_tuple(values) -> str:
    if len(values) == 1:
        return format_scalar(values[0])
    return "(" + ",".join(format_scalar(v) for v in values) + ")"


def format_distribution(mu) -> str:
    """Canonical text for a distribution tree built from grammar nodes."""
    if isinstance(mu, D.Zero):
        return f"zero(dim={mu.dim})"
    if isinstance(mu, D.Dirac):
        return f"dirac({_fmt_point(mu.point)})"
    if isinstance(mu, D.DiracDerivative):
        return f"dirac_d({_fmt_tuple(mu.point)},{_fmt_tuple(mu.multi_index)})"
    if isinstance(mu, D.Interval):
        return f"interval({format_scalar(mu.a)},{format_scalar(mu.b)})"
    if isinstance(mu, (D.Sphere, D.Ball)):
        name = "sphere" if isinstance(mu, D.Sphere) else "ball"
        avg = ",avg" if mu.normalized else ""
        return f"{name}(dim={mu.dim},t={format_scalar(mu.t)}{avg})"
    if isinstance(mu, D.HeatGaussian):
        return f"heat(t={format_scalar(mu.t)})"
    if isinstance(mu, D.LinComb):
        return "lincomb(" + " + ".join(f"{format_scalar(c)}*{format_distribution(d)}"
                                       for c, d in mu.terms) + ")"
    if isinstance(mu, D.MultiplyByFunction):
        if isinstance(mu.g, D.PoissonDensity) and mu.mu == D.Ball(2, mu.g.t, normalized=False):
            return f"poisson(t={format_scalar(mu.g.t)})"
        if mu.g.expr is None:
            raise ValueError("cannot print a function without an expression tree")
        return f"mul({format_expr(mu.g.expr)}, {format_distribution(mu.mu)})"
    if isinstance(mu, D.DirectionalDerivative):
        expr = getattr(mu.X, "expr", None)
        if expr is None:
            raise ValueError("cannot print a vector field without an expression tree")
        return "lie([" + ", ".join(format_expr(c) for c in expr) + f"], {format_distribution(mu.mu)})"
    if isinstance(mu, D.Laplacian):
        return f"laplacian({format_distribution(mu.mu)})"
    if isinstance(mu, D.Pushforward):
        if mu.map != D.XY_PROJECTION:
            raise ValueError("only the xy-projection has a textual form")
        return f"push_p({format_distribution(mu.mu)})"
    if isinstance(mu, D.Convolution):
        return f"conv({format_distribution(mu.rho)}, {format_distribution(mu.mu)})"
    raise ValueError(f"no textual form for {type(mu).__name__}")


# -- distribution parser ------------------------------------------------------

class _DistParser(_Parser):
    def __init__(self, src, exact):
        super().__init__(src, ())
        self.exact = exact

    def scalar_atom(self):
        if self.accept("-"):
            return -self.scalar_atom()
        tok = self.tok
        if tok.kind == "num" or (tok.kind == "ident" and tok.text in CONSTANTS):
            return evaluate(self.power(), {}, self.exact)
        if tok.kind == "op" and tok.text == "(":
            return evaluate(self.power(), {}, self.exact)
        self.error(f"expected a number, found {tok.text or 'end of input'!r}")

    def scalar(self):
        """Scalar expression (no variables) as a parameter value."""
        return evaluate(self.expr(), {}, self.exact)

    def is_dist_start(self) -> bool:
        return self.tok.kind == "ident" and self.tok.text in DISTRIBUTION_NAMES

    def dsum(self):
        """Terms (c, mu); c is None when no coefficient was written."""
        terms = [self.dterm()]
        while self.tok.kind == "op" and self.tok.text in "+-":
            neg = self.tok.text == "-"
            self.i += 1
            c, d = self.dterm()
            terms.append((_negate(c) if neg else c, d))
        return terms

    def dterm(self):
        if self.accept("-"):
            c, d = self.dterm()
            return _negate(c), d
        if self.is_dist_start():
            return None, self.dprim()
        c = self.scalar_atom()
        while True:
            if self.accept("/"):
                c, b = _harmonize(c, self.scalar_atom())
                c = c / b
                continue
            self.expect("*")
            if self.is_dist_start():
                return c, self.dprim()
            c, b = _harmonize(c, self.scalar_atom())
            c = c * b

    def dist(self):
        terms = self.dsum()
        if len(terms) == 1 and terms[0][0] is None:
            return terms[0][1]
        return _lincomb(terms)

    def kwargs(self, allowed_flags=(), allowed_keys=()):
        out, flags = {}, set()
        while True:
            tok = self.tok
            if tok.kind != "ident":
                self.error("expected a parameter name")
            self.i += 1
            if self.accept("="):
                if tok.text not in allowed_keys:
                    self.error(f"unknown parameter {tok.text!r}", tok)
                out[tok.text] = self.scalar()
            else:
                if tok.text not in allowed_flags:
                    self.error(f"unknown flag {tok.text!r}", tok)
                flags.add(tok.text)
            if not self.accept(","):
                return out, flags

    def _require(self, kw, key, tok):
        if key not in kw:
            self.error(f"missing parameter {key!r}", tok)
        return kw[key]

    def tuple_or_scalar(self):
        if self.accept("("):
            vals = [self.scalar()]
            while self.accept(","):
                vals.append(self.scalar())
            self.expect(")")
            return tuple(vals)
        return (self.scalar(),)

    def dprim(self):
        from .errors import SDGError
        tok = self.tok
        self.i += 1
        self.expect("(")
        try:
            node = self._build(tok.text, tok)
        except (SDGError, ValueError, TypeError, ZeroDivisionError) as exc:
            if isinstance(exc, ParseError):
                raise
            self.error(f"{tok.text}: {exc}", tok)
        self.expect(")")
        return node

    def _dim_int(self, v, tok):
        if _int_exponent(v) is None or not 1 <= int(v) <= 3:
            self.error("dim must be 1, 2 or 3", tok)
        return int(v)

    def _build(self, name, tok):
        if name == "zero":
            kw, _ = self.kwargs(allowed_keys=("dim",))
            return D.Zero(self._dim_int(self._require(kw, "dim", tok), tok))
        if name == "dirac":
            point = [self.scalar()]
            while self.accept(","):
                point.append(self.scalar())
            return D.Dirac(tuple(point))
        if name == "dirac_d":
            point = self.tuple_or_scalar()
            self.expect(",")
            alpha = self.tuple_or_scalar()
            if any(_int_exponent(a) is None or a < 0 for a in alpha):
                self.error("multi-index entries must be non-negative integers", tok)
            if len(alpha) != len(point):
                self.error("point and multi-index dimensions differ", tok)
            return D.DiracDerivative(point, tuple(int(a) for a in alpha))
        if name == "interval":
            a = self.scalar()
            self.expect(",")
            return D.Interval(a, self.scalar())
        if name in ("sphere", "ball"):
            kw, flags = self.kwargs(("avg",), ("dim", "t"))
            dim = self._dim_int(self._require(kw, "dim", tok), tok)
            cls = D.Sphere if name == "sphere" else D.Ball
            return cls(dim, self._require(kw, "t", tok), "avg" in flags)
        if name == "heat":
            kw, _ = self.kwargs(allowed_keys=("t",))
            return D.HeatGaussian(self._require(kw, "t", tok))
        if name == "poisson":
            kw, _ = self.kwargs(allowed_keys=("t",))
            return D.poisson_kernel(self._require(kw, "t", tok))
        if name == "lincomb":
            return _lincomb(self.dsum())
        if name == "mul":
            g = self.expr_vars(DEFAULT_VARIABLES)
            self.expect(",")
            mu = self.dist()
            self._check_vars(g, mu.dim, tok)
            return D.MultiplyByFunction(_function_from_ast(g, mu.dim, DEFAULT_VARIABLES, self.exact), mu)
        if name == "lie":
            self.expect("[")
            comps = [self.expr_vars(DEFAULT_VARIABLES)]
            while self.accept(","):
                comps.append(self.expr_vars(DEFAULT_VARIABLES))
            self.expect("]")
            self.expect(",")
            mu = self.dist()
            if len(comps) != mu.dim:
                self.error(f"vector field has {len(comps)} components for a dim-{mu.dim} distribution", tok)
            return D.DirectionalDerivative(_field_from_asts(comps, mu.dim, self.exact, self.src), mu)
        if name == "laplacian":
            return D.Laplacian(self.dist())
        if name == "push_p":
            mu = self.dist()
            if mu.dim != 3:
                self.error("push_p projects 3-dim distributions", tok)
            return D.Pushforward(D.XY_PROJECTION, mu)
        if name == "conv":
            rho = self.dist()
            self.expect(",")
            return D.convolve(rho, self.dist())
        self.error(f"unknown distribution {name!r}", tok)

    def expr_vars(self, variables):
        saved = self.variables
        self.variables = tuple(variables)
        try:
            return self.expr()
        finally:
            self.variables = saved

    def _check_vars(self, node, dim, tok):
        extra = _used(node) - set(DEFAULT_VARIABLES[:dim]) - set(CONSTANTS)
        if extra:
            self.error(f"variable {sorted(extra)[0]!r} not available in dimension {dim}", tok)


def _negate(c):
    return -1 if c is None else -c


def _lincomb(terms):
    return D.LinComb(tuple((1 if c is None else c, d) for c, d in terms))


def parse_distribution(src: str, exact: bool = False):
    from .errors import SDGError
    p = _DistParser(src, exact)
    try:
        mu = p.dist()
    except ParseError:
        raise
    except SDGError as exc:
        raise ParseError(str(exc), 0, src) from exc
    p.expect_eof()
    return mu


def parse_expression(src: str, exact: bool = False):
    """Distribution, vector field (top-level commas) or test function."""
    toks = tokenize(src)
    if any(t.kind == "ident" and t.text in DISTRIBUTION_NAMES for t in toks):
        return parse_distribution(src, exact)
    depth = 0
    for t in toks:
        if t.kind == "op" and t.text in "([":
            depth += 1
        elif t.kind == "op" and t.text in ")]":
            depth -= 1
        elif t.kind == "op" and t.text == "," and depth == 0:
            return parse_vector_field(src, exact=exact)
    return parse_function(src, exact=exact)


def format_expression(obj) -> str:
    """Canonical text of anything :func:`parse_expression` returns."""
    if isinstance(obj, D.Distribution):
        return format_distribution(obj)
    if isinstance(obj, TestFunction) and obj.expr is not None:
        return format_expr(obj.expr)
    expr = getattr(obj, "expr", None)
    if isinstance(expr, tuple):
        return ", ".join(format_expr(c) for c in expr)
    raise TypeError(f"no canonical text for {obj!r}")
