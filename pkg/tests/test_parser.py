from fractions import Fraction as F
import math

import pytest
from hypothesis import given, settings, strategies as st

from _corpus import ROUNDTRIP_CORPUS
from sdgkit.battery import battery
from sdgkit.distributions import (
    XY_PROJECTION, Ball, Dirac, DiracDerivative, HeatGaussian, Laplacian, LinComb,
    MultiplyByFunction, Pushforward, Sphere, pair,
)
from sdgkit.errors import ParseError
from sdgkit.flows import VectorField
from sdgkit.parser import (
    BinOp, Call, Neg, Num, Var, format_distribution, format_expr, format_expression,
    parse_ast, parse_distribution, parse_expression, parse_function, parse_scalar,
    parse_vector_field, tokenize,
)
from sdgkit.smooth import TestFunction


def test_spec_examples():
    assert parse_expression("laplacian(ball(dim=3,t=0.5,avg))") == Laplacian(Ball(3, 0.5, True))
    phi = parse_expression("x^2 * exp(-x^2)")
    assert isinstance(phi, TestFunction) and phi(1.0) == pytest.approx(math.exp(-1))
    mu = parse_expression("lincomb(0.5*sphere(dim=1,t=0.3,avg))")
    assert mu == LinComb(((0.5, Sphere(1, 0.3, True)),))
    assert parse_expression(format_expression(mu)) == mu


@pytest.mark.parametrize("src", ROUNDTRIP_CORPUS)
def test_round_trip(src):
    obj = parse_expression(src)
    text = format_expression(obj)
    again = parse_expression(text)
    assert format_expression(again) == text
    assert again == obj


@pytest.mark.parametrize("src", ROUNDTRIP_CORPUS)
def test_round_trip_exact_mode(src):
    obj = parse_expression(src, exact=True)
    text = format_expression(obj)
    assert format_expression(parse_expression(text, exact=True)) == text


def test_round_trip_preserves_pairings():
    for src in ROUNDTRIP_CORPUS:
        obj = parse_expression(src)
        if not hasattr(obj, "_pair"):
            continue
        again = parse_expression(format_expression(obj))
        for phi in battery(obj.dim)[:3]:
            assert pair(again, phi) == pair(obj, phi)


def test_kinds():
    assert isinstance(parse_expression("x*y, x + y^2"), VectorField)
    assert isinstance(parse_expression("2*dirac(0)"), LinComb)
    assert isinstance(parse_expression("-sin(x)"), TestFunction)


def test_constructor_mapping():
    assert parse_distribution("dirac(1, 2)") == Dirac((1, 2))
    assert parse_distribution("dirac_d((0, 1), (1, 2))") == DiracDerivative((0, 1), (1, 2))
    assert parse_distribution("sphere(dim=2, t=1.5)") == Sphere(2, 1.5, False)
    assert parse_distribution("heat(t=0.5)") == HeatGaussian(0.5)
    push = parse_distribution("push_p(sphere(dim=3, t=1, avg))")
    assert push == Pushforward(XY_PROJECTION, Sphere(3, 1, True))
    m = parse_distribution("mul(x + y, ball(dim=2, t=1, avg))")
    assert isinstance(m, MultiplyByFunction) and m.g(1.0, 2.0) == 3.0


def test_exact_coefficients():
    mu = parse_distribution("1/3*dirac(0) - 2/3*dirac(1/2)", exact=True)
    assert mu.terms[0][0] == F(1, 3) and mu.terms[1][0] == F(-2, 3)
    assert mu.terms[1][1].point == (F(1, 2),)
    assert format_distribution(mu) == "lincomb(1/3*dirac(0) + -2/3*dirac(1/2))"


def test_ast_and_precedence():
    node = parse_ast("-x^2 + 2*y/3")
    assert node == BinOp("+", Neg(BinOp("^", Var("x"), Num("2"))),
                         BinOp("/", BinOp("*", Num("2"), Var("y")), Num("3")))
    assert parse_ast("2^3^2") == BinOp("^", Num("2"), BinOp("^", Num("3"), Num("2")))
    assert parse_function("2^3^2")(0.0) == 512
    assert parse_function("(1 - x) - (2 - x)")(5.0) == -1
    assert parse_function("8/2/2")(0.0) == 2
    assert parse_function("2*pi")(0.0) == pytest.approx(2 * math.pi)
    assert parse_ast("exp(x)") == Call("exp", (Var("x"),))


def test_tokenizer():
    kinds = [t.kind for t in tokenize("x**2 + 1.5e-3")]
    assert kinds == ["ident", "op", "num", "op", "num", "eof"]
    assert parse_function("x**2")(3.0) == 9


def test_dimension_inference():
    assert parse_function("x + 1").dim == 1
    assert parse_function("y").dim == 2
    assert parse_function("z*x").dim == 3
    assert parse_function("x", dim=3).dim == 3


def test_parse_scalar():
    assert parse_scalar("1/3", exact=True) == F(1, 3)
    assert parse_scalar("2^-1") == 0.5


@pytest.mark.parametrize("src,pos", [
    ("x^2 +", 5),
    ("foo(x)", 0),
    ("exp(x, y)", 0),
    ("x + w", 4),
    ("(x + 1", 6),
    ("x $ 2", 2),
])
def test_function_errors_have_positions(src, pos):
    with pytest.raises(ParseError) as err:
        parse_function(src)
    assert err.value.position == pos


@pytest.mark.parametrize("src", [
    "sphere(dim=4, t=1)",
    "sphere(t=1)",
    "sphere(dim=2, t=1, radius=3)",
    "ball(dim=2, t=1, huge)",
    "dirac_d(0, -1)",
    "dirac_d((0, 1), 2)",
    "push_p(sphere(dim=2, t=1))",
    "lie([1], sphere(dim=2, t=1))",
    "mul(z, sphere(dim=2, t=1))",
    "heat(t=-1)",
    "laplacian(dirac(0)",
    "dirac(0) + sphere(dim=2, t=1)",
    "conv(sphere(dim=1, t=1), dirac(0))",
    "nonsense(1)",
])
def test_distribution_errors(src):
    with pytest.raises(ParseError):
        parse_expression(src)


def test_error_message_shows_caret():
    with pytest.raises(ParseError) as err:
        parse_function("x + * 2")
    assert err.value.position == 4
    assert "position 4" in str(err.value)


_atoms = st.sampled_from(["x", "y", "2", "0.5", "pi"])


def _exprs():
    return st.recursive(
        _atoms,
        lambda sub: st.one_of(
            st.tuples(sub, st.sampled_from(["+", "-", "*", "/"]), sub).map(lambda t: f"({t[0]} {t[1]} {t[2]})"),
            sub.map(lambda s: f"-{s}"),
            sub.map(lambda s: f"sin({s})"),
            st.tuples(sub, st.sampled_from(["2", "3"])).map(lambda t: f"({t[0]})^{t[1]}"),
        ),
        max_leaves=8,
    )


@settings(max_examples=150, deadline=None)
@given(_exprs())
def test_printer_round_trip_property(src):
    node = parse_ast(src)
    text = format_expr(node)
    assert parse_ast(text) == node
    assert format_expr(parse_ast(text)) == text


def test_vector_field_parse():
    X = parse_vector_field("y, -x")
    assert X.dim == 2 and X.xi([1.0, 2.0]) == [2.0, -1.0]
    with pytest.raises(ParseError):
        parse_vector_field("x, y, z, x")
