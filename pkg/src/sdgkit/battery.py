"""Built-in test functions and vector fields used by the verification suite.

Each dimension has six functions: a compact bump (support radius 2, so
balls up to radius 1.2 stay well inside its analytic region), a gaussian,
a damped polynomial, a plain polynomial, a trigonometric mix and a
weighted moment.
"""
from __future__ import annotations

from .parser import parse_function, parse_vector_field
from .smooth import TestFunction

__all__ = ["FUNCTIONS", "PLANAR_FIELDS", "FLOW_FIELDS", "battery", "function", "planar_fields", "flow_fields"]

FUNCTIONS = {
    1: (
        "bump(x^2/4)",
        "exp(-x^2)",
        "(1 + x + x^2)*exp(-x^2/2)",
        "1 - 2*x + 3*x^2 - x^3 + x^4/2",
        "sin(x) + cos(2*x)",
        "x^2*exp(-x^2)",
    ),
    2: (
        "bump((x^2 + y^2)/4)",
        "exp(-x^2 - y^2)",
        "(1 + x*y + y^2)*exp(-(x^2 + y^2)/2)",
        "1 + x - y^2 + x^2*y + x^4/3",
        "sin(x)*cos(y) + cos(x + 2*y)",
        "x^2*exp(-x^2 - 2*y^2)",
    ),
    3: (
        "bump((x^2 + y^2 + z^2)/4)",
        "exp(-x^2 - y^2 - z^2)",
        "(1 + x*z + y^2)*exp(-(x^2 + y^2 + z^2)/2)",
        "1 + x - y^2 + x*y*z + z^4/3",
        "sin(x)*cos(y) + cos(x + 2*z)",
        "x^2*exp(-x^2 - 2*y^2 - z^2/2)",
    ),
}

# polynomial planar fields (F, G) for the divergence theorem
PLANAR_FIELDS = (
    ("x", "y"),
    ("x^2*y", "x - y^3"),
    ("1 + x*y", "x^2 + y^2"),
    ("x^3 - 3*x*y^2", "3*x^2*y - y^3"),
    ("y^4", "x^4 + x*y"),
    ("2*x - x^2*y^2", "x*y^3 + 5"),
)

# principal parts for the formal-flow checks, polynomial so rational mode is exact
FLOW_FIELDS = ("1", "x", "x^2", "1 + x^2", "y, -x", "x*y, x + y^2", "y, z, x*y")


def function(src: str, dim: int, exact: bool = False) -> TestFunction:
    phi = parse_function(src, dim=dim, exact=exact)
    if src.startswith("bump("):
        phi.support = 2.0
    phi.name = src
    return phi


def battery(dim: int, exact: bool = False) -> list[TestFunction]:
    return [function(s, dim, exact) for s in FUNCTIONS[dim]]


def planar_fields():
    return [tuple(function(s, 2) for s in pair) for pair in PLANAR_FIELDS]


def flow_fields(exact: bool = True):
    return [parse_vector_field(s, exact=exact) for s in FLOW_FIELDS]
