"""The identity-verification suite behind ``sdgkit verify``.

Every check is a (lhs, rhs) pair computed by two independent routes;
``run_suite`` evaluates them (in a thread pool) and assembles a report
whose entries appear in a fixed order, so the JSON is byte-deterministic
for a given configuration.
"""
from __future__ import annotations

import fnmatch
import hashlib
import json
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable

import numpy as np

from . import algebra as alg
from .algebra import Jet
from .battery import FLOW_FIELDS, FUNCTIONS, PLANAR_FIELDS, function
from .distributions import (
    XY_PROJECTION, Ball, Convolution, Dirac, DiracDerivative, Homothety, Laplacian,
    LinComb, MultiplyByFunction, Pushforward, Sphere, TimeFamily, DirectionalDerivative,
    pair, pair_jet_time, poisson_kernel,
)
from .evolution import (
    column_diagram, columns_to_distribution, dirac_spread, heat_state, maclaurin,
    richardson, transport_residual, wave_fundamental, wave_residual,
)
from .flows import (
    LaplacianOperator, MatrixOperator, VectorField, action_law_sides, chain_rule_sides,
    change_of_variables, commutation_sides, directional_derivative_fn, exp_flow_linear,
    formal_flow, group_law_sides, linear_flow, naturality_sides, pde_residual,
    second_order_flow, series_coefficients, time_derivative, translation_flow,
    undo_change_of_variables, zero_sum_identity_holds,
)
from .parser import parse_function, parse_vector_field
from .quadrature import (
    PlanarVectorField, change_of_variables_sides, flux_vs_divergence, littlediv_sides,
)
from .smooth import TestFunction, directional, laplacian_fn, partial

__all__ = ["SuiteConfig", "Check", "build_checks", "run_suite", "report_to_json",
           "report_to_csv", "DEFAULT_TOLERANCES", "T_GRID"]

T_GRID = (0.3, 0.7, 1.2)

# default tolerance per check kind
DEFAULT_TOLERANCES = {
    "quad": 1e-8,      # quadrature-backed identities
    "wave": 1e-6,      # wave-equation residuals
    "init": 1e-10,     # initial values/speeds, identities at t = 0
    "poisson": 1e-6,   # singular-quadrature route
    "limit": 1e-3,     # small-t heat limits
    "cov": 1e-9,       # change-of-variables residual transfer
    "chain": 1e-10,    # chain rule / naturality via jets
    "jet": 1e-12,      # float jet identities
    "series": 1e-15,   # float truncated series
    "rational": 1e-12, # exact (0) in rational mode
}


@dataclass
class SuiteConfig:
    quad_order: int = 32
    jet_order: int = 8
    exact: bool = False
    tol_global: float | None = None
    tol_overrides: dict = field(default_factory=dict)
    only: str | None = None
    dims: tuple | None = None
    threads: int | None = None

    def as_dict(self):
        return {
            "quad_order": self.quad_order,
            "jet_order": self.jet_order,
            "arithmetic": "rational" if self.exact else "float",
            "tolerance_global": self.tol_global,
            "tolerance_overrides": dict(sorted(self.tol_overrides.items())),
            "only": self.only,
            "dims": list(self.dims) if self.dims else None,
        }


@dataclass
class Check:
    identity: str
    dim: int | None
    statement: str
    inputs: dict
    compute: Callable
    kind: str
    measure: str = "rel"  # "rel" or "abs"

    @property
    def identity_id(self) -> str:
        return self.identity if self.dim is None else f"{self.identity}-dim{self.dim}"

    def tolerance(self, cfg: SuiteConfig) -> float:
        for pattern, value in sorted(cfg.tol_overrides.items()):
            if fnmatch.fnmatchcase(self.identity, pattern) or fnmatch.fnmatchcase(self.identity_id, pattern):
                return value
        if cfg.tol_global is not None:
            return cfg.tol_global
        if self.kind == "rational" and cfg.exact:
            return 0.0
        return DEFAULT_TOLERANCES[self.kind]


# -- value helpers ------------------------------------------------------------

def _flatten(v) -> list:
    if alg.is_algebra(v):
        out = []
        for c in v.coeffs:
            out.extend(_flatten(c))
        return out
    if isinstance(v, (list, tuple)):
        out = []
        for c in v:
            out.extend(_flatten(c))
        return out
    if isinstance(v, np.ndarray):
        return [float(c) for c in v.ravel()]
    if isinstance(v, (bool, np.bool_)):
        return [int(v)]
    if isinstance(v, (int, Fraction)):
        return [v]
    return [float(v)]


def jsonable(v):
    if v is None:
        return None
    if alg.is_algebra(v):
        return [jsonable(c) for c in v.coeffs]
    if isinstance(v, (list, tuple)):
        return [jsonable(c) for c in v]
    if isinstance(v, (bool, np.bool_)):
        return bool(v)
    if isinstance(v, Fraction):
        return v.numerator if v.denominator == 1 else f"{v.numerator}/{v.denominator}"
    if isinstance(v, (int, np.integer)):
        return int(v)
    if isinstance(v, (float, np.floating)):
        f = float(v)
        return f if math.isfinite(f) else str(f)
    if isinstance(v, dict):
        return {str(k): jsonable(x) for k, x in v.items()}
    return str(v)


def errors(lhs, rhs) -> tuple[float, float]:
    a, b = _flatten(lhs), _flatten(rhs)
    if len(a) != len(b):
        return math.inf, math.inf
    if not a:
        return 0.0, 0.0
    diff = max(abs(x - y) for x, y in zip(a, b))
    scale = max(1, max(abs(x) for x in a), max(abs(y) for y in b))
    return float(diff), float(diff / scale)


# -- check builders -----------------------------------------------------------

def _fam(fn, name="", dim=0):
    return TimeFamily(fn, name, dim)


def _d1(fam, t, phi, m):
    return pair_jet_time(fam, t, 1, phi, m).coeffs[1]


def _derivative_identities(cfg) -> list[Check]:
    checks = []
    for n in (1, 2, 3):
        for src in FUNCTIONS[n]:
            phi = function(src, n)
            for t in T_GRID:
                inputs = {"t": t, "phi": src}

                def a1(m, n=n, t=t, phi=phi):
                    lhs = _d1(_fam(lambda s: Ball(n, s, False)), t, phi, m)
                    return lhs, pair(Sphere(n, t, False), phi, m)

                def a2(m, n=n, t=t, phi=phi):
                    lhs = t * _d1(_fam(lambda s: Sphere(n, s, False)), t, phi, m)
                    rhs = (n - 1) * pair(Sphere(n, t, False), phi, m) + t * pair(Laplacian(Ball(n, t, False)), phi, m)
                    return lhs, rhs

                def a3(m, n=n, t=t, phi=phi):
                    lhs = t * _d1(_fam(lambda s: Ball(n, s)), t, phi, m)
                    return lhs, pair(Sphere(n, t), phi, m) - n * pair(Ball(n, t), phi, m)

                def a4(m, n=n, t=t, phi=phi):
                    lhs = _d1(_fam(lambda s: Sphere(n, s)), t, phi, m)
                    return lhs, t * pair(Laplacian(Ball(n, t)), phi, m)

                checks += [
                    Check("a1", n, "d/dt B_t = S_t", inputs, a1, "quad"),
                    Check("a2", n, "t d/dt S_t = (n-1) S_t + t Delta(B_t)", inputs, a2, "quad"),
                    Check("a3", n, "t d/dt B^t = S^t - n B^t", inputs, a3, "quad"),
                    Check("a4", n, "d/dt S^t = t Delta(B^t)", inputs, a4, "quad"),
                ]
                if n == 1:
                    def a5(m, t=t, phi=phi):
                        lhs = _d1(_fam(lambda s: Sphere(1, s, False)), t, phi, m)
                        return lhs, pair(Laplacian(Ball(1, t, False)), phi, m)

                    checks.append(Check("a5", 1, "d/dt S_t = Delta(B_t) (n = 1)", inputs, a5, "quad"))

            def a4_zero(m, n=n, phi=phi):
                lhs = _d1(_fam(lambda s: Sphere(n, s)), 0.0, phi, m)
                return lhs, 0.0 * pair(Laplacian(Ball(n, 0.0)), phi, m)

            checks.append(Check("a4-t0", n, "d/dt S^t = t Delta(B^t) = 0 at t = 0",
                                {"t": 0.0, "phi": src}, a4_zero, "init", "abs"))
    return checks


def _scaling_identities(cfg) -> list[Check]:
    checks = []
    area = {1: 2.0, 2: 2 * math.pi, 3: 4 * math.pi}
    vol = {1: 2.0, 2: math.pi, 3: 4 * math.pi / 3}
    for n in (1, 2, 3):
        for src in FUNCTIONS[n][:3]:
            phi = function(src, n)
            for t in T_GRID:
                inputs = {"t": t, "phi": src}
                checks.append(Check("scaling-sphere", n, "S_t = t^(n-1) S^t", inputs,
                                    lambda m, n=n, t=t, phi=phi: (pair(Sphere(n, t, False), phi, m),
                                                                  t ** (n - 1) * pair(Sphere(n, t), phi, m)), "quad"))
                checks.append(Check("scaling-ball", n, "B_t = t^n B^t", inputs,
                                    lambda m, n=n, t=t, phi=phi: (pair(Ball(n, t, False), phi, m),
                                                                  t ** n * pair(Ball(n, t), phi, m)), "quad"))
                checks.append(Check("homothety", n, "S^t = H_t(S_1), B^t = H_t(B_1)", inputs,
                                    lambda m, n=n, t=t, phi=phi: (
                                        [pair(Sphere(n, t), phi, m), pair(Ball(n, t), phi, m)],
                                        [pair(Pushforward(Homothety(t, n), Sphere(n, 1.0, False)), phi, m),
                                         pair(Pushforward(Homothety(t, n), Ball(n, 1.0, False)), phi, m)]), "quad"))
            inputs = {"phi": src}
            checks.append(Check("sphere-zero", n, "S^0 = |S^(n-1)| delta(0), B^0 = |B^n| delta(0), S_0 = B_0 = 0",
                                inputs,
                                lambda m, n=n, phi=phi: (
                                    [pair(Sphere(n, 0.0), phi, m), pair(Ball(n, 0.0), phi, m),
                                     pair(Sphere(n, 0.0, False), phi, m) if n > 1 else 0.0,
                                     pair(Ball(n, 0.0, False), phi, m)],
                                    [area[n] * phi(*[0.0] * n), vol[n] * phi(*[0.0] * n), 0.0, 0.0]),
                                "init", "abs"))
    return checks


def _distribution_rules(cfg) -> list[Check]:
    checks = []
    fields = {1: ("1",), 2: ("1, 0", "y, -x"), 3: ("y, -x, 1", "x, y, z")}
    for n in (1, 2, 3):
        g = function(FUNCTIONS[n][2], n)
        for fsrc in fields[n]:
            X = parse_vector_field(fsrc, dim=n)
            for src in FUNCTIONS[n][:3]:
                phi = function(src, n)
                for mu_name, mu in (("sphere", Sphere(n, 0.7)), ("ball", Ball(n, 0.7, False))):
                    def leibniz(m, X=X, mu=mu, phi=phi, g=g):
                        lhs = pair(DirectionalDerivative(X, MultiplyByFunction(g, mu)), phi, m)
                        Xg = directional(g, X.principal_part)
                        rhs = pair(LinComb(((1, MultiplyByFunction(Xg, mu)),
                                            (1, MultiplyByFunction(g, DirectionalDerivative(X, mu))))), phi, m)
                        return lhs, rhs

                    checks.append(Check("leibniz", n, "D_X(g mu) = D_X(g) mu + g D_X(mu)",
                                        {"X": fsrc, "g": FUNCTIONS[n][2], "mu": mu_name + "(t=0.7)", "phi": src},
                                        leibniz, "quad"))
    for src in FUNCTIONS[2]:
        psi = function(src, 2)
        for t in T_GRID:
            def proj(m, t=t, psi=psi):
                S = Sphere(3, t)
                return (pair(Pushforward(XY_PROJECTION, Laplacian(S)), psi, m),
                        pair(Laplacian(Pushforward(XY_PROJECTION, S)), psi, m))

            checks.append(Check("proj-laplacian", 2, "p(Delta S) = Delta p(S)", {"t": t, "psi": src}, proj, "quad"))
    return checks


def _wave_checks(cfg) -> list[Check]:
    checks = []
    for n in (1, 2, 3):
        for kind in ("position", "speed"):
            sol = wave_fundamental(n, kind)
            for src in FUNCTIONS[n]:
                phi = function(src, n)
                for t in T_GRID:
                    checks.append(Check(f"wave-{kind}", n, "d^2/dt^2 <Q(t),phi> = <Q(t), Delta phi>",
                                        {"t": t, "phi": src},
                                        lambda m, sol=sol, t=t, phi=phi: (
                                            2 * pair_jet_time(sol.family, t, 2, phi, m).coeffs[2],
                                            pair(sol.family(t), laplacian_fn(phi), m)),
                                        "wave", "abs"))
                checks.append(Check(f"wave-{kind}-initial", n, "Q(0) and dQ/dt(0) are the declared initial data",
                                    {"phi": src},
                                    lambda m, sol=sol, phi=phi: (
                                        list(pair_jet_time(sol.family, 0.0, 1, phi, m).coeffs),
                                        [pair(sol.initial_value, phi, m), pair(sol.initial_speed, phi, m)]),
                                    "init", "abs"))
    # time-derivative closure in dimension 3
    speed, position = wave_fundamental(3, "speed"), wave_fundamental(3, "position")
    for src in FUNCTIONS[3]:
        phi = function(src, 3)
        for t in T_GRID:
            checks.append(Check("wave-closure", 3, "d/dt (t S^t) = S^t + t^2 Delta(B^t)", {"t": t, "phi": src},
                                lambda m, t=t, phi=phi: (_d1(speed.family, t, phi, m),
                                                         pair(position.family(t), phi, m)), "quad"))
    return checks


def _poisson_checks(cfg) -> list[Check]:
    checks = []
    for t in (0.5, 1.0):
        for src in FUNCTIONS[2][:4]:
            psi = function(src, 2)
            checks.append(Check("poisson", 2, "p(t S^t) = 2/sqrt(t^2 - rho^2) B_t", {"t": t, "psi": src},
                                lambda m, t=t, psi=psi: (
                                    pair(Pushforward(XY_PROJECTION, LinComb(((t, Sphere(3, t)),))), psi, m),
                                    pair(poisson_kernel(t), psi, m)), "poisson"))
        one = TestFunction(2, lambda x, y: 1.0 + 0 * x)
        checks.append(Check("poisson-mass", 2, "<p(t S^t), 1> = <2/sqrt(t^2 - rho^2) B_t, 1> = 4 pi t",
                            {"t": t, "psi": "1"},
                            lambda m, t=t, one=one: (
                                [pair(Pushforward(XY_PROJECTION, LinComb(((t, Sphere(3, t)),))), one, m),
                                 pair(poisson_kernel(t), one, m)],
                                [4 * math.pi * t, 4 * math.pi * t]), "quad"))
    return checks


def _heat_checks(cfg) -> list[Check]:
    checks = []
    x2 = parse_function("x^2")
    for t in (0.25, 1.0):
        checks.append(Check("heat-moment", 1, "<K(t), x^2> = 2t", {"t": t, "phi": "x^2"},
                            lambda m, t=t: (pair(heat_state(t), x2, m), 2 * t), "quad"))
    ks = range(8, 17)
    for src in FUNCTIONS[1]:
        phi = function(src, 1)
        for t in T_GRID:
            checks.append(Check("heat-equation", 1, "d/dt <K_t, phi> = <K_t, phi''>", {"t": t, "phi": src},
                                lambda m, t=t, phi=phi: (_d1(_fam(heat_state), t, phi, m),
                                                         pair(heat_state(t), partial(phi, (2,)), m)), "quad"))
        for n in (0, 1, 2):
            def limit(m, n=n, phi=phi):
                deriv = partial(phi, (2 * n,))
                vals = [pair(heat_state(2.0 ** -k), deriv, m) for k in ks]
                return richardson(vals), deriv(0.0)

            checks.append(Check(f"heat-limit-n{n}", 1, "lim_{t->0+} d^n/dt^n <K_t, phi> = phi^(2n)(0)",
                                {"phi": src, "t": "2^-k, k=8..16"}, limit, "limit", "abs"))

        def smooth(m, phi=phi):
            p0 = phi(0.0)
            vals = [(pair(heat_state(2.0 ** -k), phi, m) - p0) * 2.0 ** k for k in ks]
            return richardson(vals), partial(phi, (2,))(0.0)

        checks.append(Check("heat-smooth", 1, "lim_{t->0+} (<K_t,phi> - phi(0))/t = phi''(0)",
                            {"phi": src, "t": "2^-k, k=8..16"}, smooth, "limit", "abs"))
        checks.append(Check("column-diagram", 1, "delta(0) + h(delta(-h) - 2 delta(0) + delta(h)) = K(h^3), h^4 = 0",
                            {"phi": src},
                            lambda m, phi=phi: _column_sides(phi, m), "jet"))
        checks.append(Check("heat-maclaurin", 1, "<K(t), phi> = sum_k t^k/k! phi^(2k)(0)", {"phi": src, "order": 3},
                            lambda m, phi=phi: (maclaurin("heat", phi, 3, quad_order=m),
                                                [partial(phi, (2 * k,))(0.0) / math.factorial(k) for k in range(4)]),
                            "jet"))
    for order in range(1, 5):
        def tree(m, order=order):
            t = Jet.variable(order)
            return float(heat_state(t) == exp_flow_linear(LaplacianOperator(), Dirac((0,)), t)), 1.0

        checks.append(Check("heat-nilpotent", 1, "K(t) = sum t^k/k! Delta^k delta(0) for nilpotent t",
                            {"order": order}, tree, "rational"))
    polys = ("1 - 2*x + 3*x^2 - x^3 + x^4/2", "x^5 - x + 7", "(1 + x)^6")
    for src in polys + ("sin(x) + cos(2*x)",):
        exact_poly = src in polys
        for n in (1, 2, 3, 4):
            checks.append(Check("dirac-spread", 1, "h^n delta^(n)(0) = sum_i (-1)^i C(n,i) delta(i h), h^(n+1) = 0",
                                {"n": n, "phi": src},
                                lambda m, n=n, src=src, exact_poly=exact_poly: _spread_sides(n, False, src, exact_poly and cfg.exact, m),
                                "rational" if exact_poly else "jet"))
        checks.append(Check("dirac-spread-sym", 1, "h^2 delta''(0) = delta(-h) - 2 delta(0) + delta(h), h^4 = 0",
                            {"phi": src},
                            lambda m, src=src, exact_poly=exact_poly: _spread_sides(2, True, src, exact_poly and cfg.exact, m),
                            "rational" if exact_poly else "jet"))
    # convolution principle for a Dirac combination
    rho = LinComb(((1, Dirac((0.3,))), (-2, DiracDerivative((-0.2,), (1,))), (0.5, Dirac((0.0,)))))
    for src in FUNCTIONS[1]:
        phi = function(src, 1)
        for order in (1, 2, 3):
            def conv(m, order=order, phi=phi):
                t = Jet.variable(order)
                return (pair(exp_flow_linear(LaplacianOperator(), rho, t), phi, m),
                        pair(Convolution(rho, heat_state(t)), phi, m))

            checks.append(Check("convolution-principle", 1, "exp(t Delta) rho = rho * K(t)",
                                {"order": order, "phi": src,
                                 "rho": "delta(0.3) - 2 delta'(-0.2) + 0.5 delta(0)"}, conv, "jet"))
    return checks


def _column_sides(phi, m):
    cols = column_diagram(3)
    h = cols[0][1]
    return pair(columns_to_distribution(cols), phi, m), pair(heat_state(h * h * h), phi, m)


def _spread_sides(n, symmetric, src, exact, m):
    phi = parse_function(src, dim=1, exact=exact)
    lhs, rhs = dirac_spread(n, symmetric)
    return pair(lhs, phi, m), pair(rhs, phi, m)


def _transport_checks(cfg) -> list[Check]:
    samples = ((0.7, "sin(x)"), (0.0, "exp(-x^2)"), (-0.4, "bump(x^2/4)"),
               (1.1, "1 - 2*x + 3*x^2 - x^3 + x^4/2"), (0.25, "x^2*exp(-x^2)"))
    checks = []
    for t, src in samples:
        phi = function(src, 1)
        checks.append(Check("transport", 1, "d/dt delta(t) = -D_{d/dx} delta(t)", {"t": t, "phi": src},
                            lambda m, t=t, phi=phi: (transport_residual(t, phi, m), 0.0), "jet", "abs"))
    for src in ("1 - 2*x + 3*x^2 - x^3 + x^4/2", "x^5 - x + 7"):
        phi = function(src, 1)
        checks.append(Check("maclaurin-wave", 1, "<1/2 S^t, phi> = phi(0) + t^2/2! phi''(0) + t^4/4! phi''''(0) + ...",
                            {"phi": src, "order": 6},
                            lambda m, phi=phi: (list(pair_jet_time(wave_fundamental(1, "position").family, 0.0, 6, phi, m).coeffs),
                                                maclaurin("wave", phi, 6, quad_order=m)), "jet"))
    return checks


def _oracle_coeffs(kind, order, m0):
    import sympy
    t = sympy.Symbol("t")
    expr = {"exp": m0 * sympy.exp(t), "geom": m0 / (1 - m0 * t), "tan": sympy.tan(t + sympy.atan(m0))}[kind]
    poly = sympy.series(expr, t, 0, order + 1).removeO()
    out = []
    for k in range(order + 1):
        c = sympy.Rational(poly.coeff(t, k))
        out.append(Fraction(int(c.p), int(c.q)))
    return out


def _flow_checks(cfg) -> list[Check]:
    checks = []
    num = (lambda a, b=1: Fraction(a, b)) if cfg.exact else (lambda a, b=1: a / b)
    oracles = (("x", "exp", 1), ("x", "exp", 2), ("x^2", "geom", 1), ("x^2", "geom", Fraction(1, 2)),
               ("1 + x^2", "tan", 0), ("1 + x^2", "tan", 1))
    for src, kind, m0 in oracles:
        X = parse_vector_field(src, exact=cfg.exact)
        for order in range(1, 7):
            def oracle(m, X=X, kind=kind, m0=m0, order=order):
                start = Fraction(m0) if cfg.exact else float(m0)
                jet = formal_flow(X, start, order)
                return list(jet.coeffs), _oracle_coeffs(kind, order, Fraction(m0))

            checks.append(Check("flow-oracle", 1, "F_t(m) = X_{d_1} o ... o X_{d_n}(m) collapsed to t = sum d_i",
                                {"xi": src, "m": jsonable(Fraction(m0)), "order": order, "oracle": kind},
                                oracle, "rational"))
    for src in FLOW_FIELDS:
        X = parse_vector_field(src, exact=cfg.exact)
        m0 = [num(1, k + 2) for k in range(X.dim)]
        for n in range(2, 6):
            checks.append(Check("flow-lemma", X.dim, "X_{d_1} o ... o X_{d_n} = identity when sum d_i = 0",
                                {"xi": src, "m": jsonable(m0), "n": n},
                                lambda m, X=X, m0=m0, n=n: (float(zero_sum_identity_holds(X, m0, n)), 1.0),
                                "rational"))
        for name, fn, stmt in (("flow-group-law", group_law_sides, "F_{t+s} = F_t o F_s"),
                               ("flow-action-law", action_law_sides, "F_{t+d} = X_d o F_t"),
                               ("flow-commute", commutation_sides, "F_t(X_d m) = X_d(F_t m)")):
            checks.append(Check(name, X.dim, stmt, {"xi": src, "m": jsonable(m0), "order": 3},
                                lambda m, fn=fn, X=X, m0=m0: fn(X, m0, 3), "rational"))
    return checks


def _linear_checks(cfg) -> list[Check]:
    checks = []
    num = (lambda a, b=1: Fraction(a, b)) if cfg.exact else (lambda a, b=1: a / b)
    mats = (((0, 1), (-1, 0)), ((1, 2), (0, 3)), ((0, 1), (0, 0)), ((2, -1, 0), (1, 0, 1), (0, 3, -1)))
    for mat in mats:
        op = MatrixOperator([[num(a) for a in row] for row in mat])
        v = [num(k + 1, 2) for k in range(len(mat))]
        order = 6
        inputs = {"matrix": [list(r) for r in mat], "v": jsonable(v), "order": order}

        def recurrence(m, op=op, v=v):
            c = series_coefficients(op, v, order)
            return [[(k + 1) * x for x in c[k + 1]] for k in range(order)], [op(c[k]) for k in range(order)]

        def matches(m, op=op, v=v):
            t = Jet.variable(order)
            F = exp_flow_linear(op, v, t)
            return [[comp.coeffs[k] for comp in F] for k in range(order + 1)], series_coefficients(op, v, order)

        def recurrence2(m, op=op, v=v):
            w = [num(1)] + [num(0)] * (len(v) - 1)
            t = Jet.variable(order)
            F = second_order_flow(op, v, w, t)
            c = [[comp.coeffs[k] for comp in F] for k in range(order + 1)]
            return ([[(k + 2) * (k + 1) * x for x in c[k + 2]] for k in range(order - 1)] + [c[0], c[1]],
                    [op(c[k]) for k in range(order - 1)] + [v, w])

        checks += [
            Check("exp-recurrence", len(mat), "(k+1) c_{k+1} = L(c_k) for exp(tL) v", inputs, recurrence, "rational"),
            Check("exp-series", len(mat), "exp_flow_linear = sum t^k/k! L^k v", inputs, matches, "rational"),
            Check("exp2-recurrence", len(mat), "(k+2)(k+1) c_{k+2} = L(c_k), c_0 = v, c_1 = w", inputs,
                  recurrence2, "rational"),
        ]

    def cos_series(m):
        F = second_order_flow(MatrixOperator([[-1.0]]), 1.0, 0.0, Jet.variable(4))
        return list(F.coeffs), [1.0, 0.0, -0.5, 0.0, 1.0 / 24.0]

    checks.append(Check("cos-series", 1, "F'' = -F, F(0) = 1, F'(0) = 0 gives cos t", {"order": 4},
                        cos_series, "series", "abs"))

    def exp_vs_flow(m):
        F = exp_flow_linear(MatrixOperator([[num(1)]]), num(1), Jet.variable(3))
        return list(F.coeffs), list(formal_flow(VectorField(1, lambda x: x), num(1), 3).coeffs)

    checks.append(Check("exp-vs-flow", 1, "exp(t) from the linear series equals the flow of xi(x) = x",
                        {"order": 3}, exp_vs_flow, "rational"))
    return checks


def _vector_calculus_checks(cfg) -> list[Check]:
    checks = []
    for F, G in PLANAR_FIELDS:
        field = PlanarVectorField(function(F, 2), function(G, 2))
        checks.append(Check("divergence", 2, "flux through the unit circle = integral of div over the disk",
                            {"F": F, "G": G}, lambda m, field=field: flux_vs_divergence(field, m), "quad", "abs"))
        for t in T_GRID:
            checks.append(Check("littlediv", 2, "div(F o H_t) = t (div F) o H_t", {"F": F, "G": G, "t": t,
                                                                                  "x": [0.3, -0.2]},
                                lambda m, field=field, t=t: littlediv_sides([field.F, field.G], t, [0.3, -0.2]),
                                "quad"))
    for n in (1, 2, 3):
        for src in FUNCTIONS[n]:
            phi = function(src, n)
            for t in T_GRID:
                checks.append(Check("ch-var", n, "integral over B_t of phi = t^n integral over B_1 of phi o H_t",
                                    {"t": t, "phi": src},
                                    lambda m, phi=phi, t=t: change_of_variables_sides(phi, t, m), "quad"))
    return checks


def _cov_checks(cfg) -> list[Check]:
    ts = (-0.5, -0.2, 0.0, 0.3, 0.6)
    xs = (-1.0, -0.4, 0.1, 0.5, 1.2)
    grid = [(t, x) for t in ts for x in xs]
    phi = function("exp(-x^2)", 1)
    Z = VectorField(1, lambda x: 0)
    ident = lambda u: u
    zero = lambda u: 0
    examples = {
        "translation": (VectorField(1, lambda x: 1), translation_flow(1),
                        lambda t, x: alg.exp(t) * phi(x - t), lambda t, x: alg.exp(t) * phi(x), ident),
        "translation-eta0": (VectorField(1, lambda x: 1), translation_flow(1),
                             lambda t, x: phi(x - t), lambda t, x: phi(x), zero),
        "liouville": (VectorField(1, lambda x: x), linear_flow(1),
                      lambda t, x: alg.exp(t) * phi(alg.exp(-t) * x), lambda t, x: alg.exp(t) * phi(x), ident),
    }
    checks = []
    for name, (X, F, u, U0, eta) in examples.items():
        inputs = {"example": name, "grid": "5x5", "phi": "exp(-x^2)"}

        def forward(m, X=X, F=F, u=u, eta=eta):
            U = change_of_variables(u, F, samples=[(t, [x]) for t, x in grid])
            return [pde_residual(U, Z, eta, t, [x]) for t, x in grid], [0.0] * len(grid)

        def backward(m, X=X, F=F, U0=U0, eta=eta):
            u2 = undo_change_of_variables(U0, F, samples=[(t, [x]) for t, x in grid])
            return [pde_residual(u2, X, eta, t, [x]) for t, x in grid], [0.0] * len(grid)

        def transfer(m, X=X, F=F, eta=eta):
            # a non-solution: residuals must still correspond point by point
            v = lambda t, x: alg.cos(t) * phi(x) + t * x
            V = change_of_variables(v, F)
            lhs = [pde_residual(v, X, eta, t, [x]) for t, x in grid]
            rhs = [pde_residual(V, Z, eta, t, F(-t, [x])) for t, x in grid]
            return lhs, rhs

        checks += [
            Check("cov-forward", 1, "u solves du/dt + D_X u = eta(u)  =>  U = u(t, F_t m) solves dU/dt = eta(U)",
                  inputs, forward, "cov", "abs"),
            Check("cov-backward", 1, "U solves dU/dt = eta(U)  =>  u = U(t, F_-t m) solves du/dt + D_X u = eta(u)",
                  inputs, backward, "cov", "abs"),
            Check("cov-transfer", 1, "residual of u at (t, m) = residual of U at (t, F_-t m)",
                  inputs, transfer, "cov", "abs"),
        ]
        checks.append(Check("chain-rule", 1, "d/dt U(t, F_t m) = dU/dt + D_{Z x X} U at (t, F_t m)", inputs,
                            lambda m, X=X, F=F: tuple(map(list, zip(*[
                                chain_rule_sides(lambda t, x: alg.sin(t) * phi(x) + t * x, X, F, t, [x])
                                for t, x in grid]))), "chain", "abs"))
    # naturality: flow maps are homomorphisms X -> X; x -> x^2 maps (xi = x) to (xi = 2y)
    u = function("sin(x) + cos(2*x)", 1)
    X1 = VectorField(1, lambda x: x)
    X2 = VectorField(1, lambda y: 2 * y)
    for s in (-0.5, 0.3, 1.0):
        H = lambda x, s=s: alg.exp(s) * x
        checks.append(Check("naturality", 1, "D_{X1}(u o H) = D_{X2}(u) o H", {"H": f"exp({s}) x", "u": "sin(x) + cos(2*x)"},
                            lambda m, H=H: tuple(map(list, zip(*[naturality_sides(u, X1, X1, H, [x]) for x in xs]))),
                            "chain", "abs"))
    checks.append(Check("naturality", 1, "D_{X1}(u o H) = D_{X2}(u) o H", {"H": "x^2", "u": "sin(x) + cos(2*x)"},
                        lambda m: tuple(map(list, zip(*[naturality_sides(u, X1, X2, lambda x: x * x, [x]) for x in xs]))),
                        "chain", "abs"))
    return checks


BUILDERS = (
    _derivative_identities, _scaling_identities, _distribution_rules, _wave_checks, _poisson_checks,
    _heat_checks, _transport_checks, _flow_checks, _linear_checks, _vector_calculus_checks, _cov_checks,
)


def build_checks(cfg: SuiteConfig) -> list[Check]:
    checks = []
    for b in BUILDERS:
        checks.extend(b(cfg))
    if cfg.only:
        checks = [c for c in checks if fnmatch.fnmatchcase(c.identity, cfg.only)
                  or fnmatch.fnmatchcase(c.identity_id, cfg.only)]
    if cfg.dims:
        checks = [c for c in checks if c.dim in cfg.dims]
    return checks


def _digest(inputs) -> str:
    return hashlib.sha256(json.dumps(jsonable(inputs), sort_keys=True).encode()).hexdigest()[:16]


def _flags(inputs: dict) -> list[str]:
    """Report flags; only the bump functions are compactly supported, the other
    built-in test functions are stand-ins that are exact on compact supports."""
    srcs = [inputs.get(k) for k in ("phi", "psi")]
    if any(isinstance(s, str) and not s.startswith("bump(") for s in srcs):
        return ["noncompact-test-function"]
    return []


def _evaluate(check: Check, cfg: SuiteConfig) -> dict:
    tol = check.tolerance(cfg)
    entry = {
        "identity_id": check.identity_id,
        "identity": check.identity,
        "dim": check.dim,
        "statement": check.statement,
        "inputs": jsonable(check.inputs),
        "inputs_digest": _digest(check.inputs),
        "tolerance": tol,
        "flags": _flags(check.inputs),
    }
    try:
        lhs, rhs = check.compute(cfg.quad_order)
        abs_err, rel_err = errors(lhs, rhs)
        err = rel_err if check.measure == "rel" else abs_err
        entry.update(lhs=jsonable(lhs), rhs=jsonable(rhs), abs_err=abs_err, rel_err=rel_err,
                     error_measure=check.measure, **{"pass": bool(err <= tol)})
    except Exception as exc:  # a crashing identity is a failing entry, not a crashed suite
        entry.update(lhs=None, rhs=None, abs_err=None, rel_err=None, error_measure=check.measure,
                     error=f"{type(exc).__name__}: {exc}", **{"pass": False})
    return entry


def _thread_count(cfg) -> int:
    if cfg.threads:
        return max(1, cfg.threads)
    env = os.environ.get("SDG_KERNEL_THREADS")
    if env:
        return max(1, int(env))
    return min(8, os.cpu_count() or 1)


def run_suite(cfg: SuiteConfig | None = None) -> dict:
    """Evaluate all selected checks; the report is ordered like the check list."""
    cfg = cfg or SuiteConfig()
    checks = build_checks(cfg)
    workers = _thread_count(cfg)
    if workers == 1:
        entries = [_evaluate(c, cfg) for c in checks]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            entries = list(pool.map(lambda c: _evaluate(c, cfg), checks))
    failed = sum(1 for e in entries if not e["pass"])
    return {
        "config": cfg.as_dict(),
        "summary": {"total": len(entries), "passed": len(entries) - failed, "failed": failed,
                    "all_pass": failed == 0},
        "entries": entries,
    }


def report_to_json(report: dict) -> str:
    return json.dumps(report, sort_keys=True, indent=2)


CSV_COLUMNS = ("identity_id", "statement", "inputs_digest", "lhs", "rhs", "abs_err", "rel_err",
               "error_measure", "tolerance", "pass")


def report_to_csv(report: dict) -> str:
    import csv
    import io
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for e in report["entries"]:
        row = []
        for col in CSV_COLUMNS:
            v = e.get(col)
            row.append(json.dumps(v) if isinstance(v, (list, dict)) else v)
        w.writerow(row)
    return buf.getvalue()
