from __future__ import annotations

import os
import random

import pytest
import sympy

ROOT = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
FIXTURES = os.path.join(ROOT, "fixtures")
SCHEMAS = os.path.join(ROOT, "schema")


def xs(n):
    return sympy.symbols(" ".join(f"x{i + 1}" for i in range(n)))


def sym_apply(P, f):
    """Apply ``P`` to a sympy expression with sympy's own differentiation."""
    X = xs(P.ctx.n) if P.ctx.n > 1 else (sympy.Symbol("x1"),)
    dom = P.ctx.dom
    total = 0
    for mu, a in P.terms.items():
        g = f
        for i, e in enumerate(mu):
            if e:
                g = sympy.diff(g, X[i], e)
        total += dom.to_expr(a) * g
    return sympy.expand(total)


def sym_adjoint_apply(P, f):
    """sum (-1)^|mu| d^mu (a_mu f), computed with sympy."""
    X = xs(P.ctx.n) if P.ctx.n > 1 else (sympy.Symbol("x1"),)
    dom = P.ctx.dom
    total = 0
    for mu, a in P.terms.items():
        g = dom.to_expr(a) * f
        for i, e in enumerate(mu):
            if e:
                g = sympy.diff(g, X[i], e)
        total += (-1) ** sum(mu) * g
    return sympy.expand(total)


def fixture_path(name):
    return os.path.join(FIXTURES, name)


@pytest.fixture
def rng():
    return random.Random(12345)
