"""Named operators of linear elasticity and gravitation, plus small fixtures.

Symmetric tensors are stored once, with components ordered ``(i, j)``,
``i <= j`` lexicographically.  With that storage ``mat_adjoint(killing)``
is ``cauchy`` with its columns scaled by -2 (diagonal pairs) and -1 (the
others), so the two present isomorphic modules; no hidden weighting is applied.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import List

import sympy

from . import rows as R
from .coeff import Context
from .opmat import OpMatrix
from .ore import DiffOp

__all__ = [
    "MetricSpec",
    "sym_pairs",
    "pair_weights",
    "killing",
    "cauchy",
    "einstein",
    "riemann_linearized",
    "bianchi",
    "conformal_killing",
    "stress_functions",
    "intro_example",
    "grad",
    "curl",
    "div",
    "NAMES",
    "build",
]


@dataclass(frozen=True)
class MetricSpec:
    """A constant metric; ``kind`` is euclidean, minkowski or matrix.

    Minkowski uses the signature (-,+,+,+) with the time coordinate first.
    """

    n: int
    kind: str = "euclidean"
    matrix: tuple | None = None

    def omega(self) -> List[List[Fraction]]:
        n = self.n
        if self.kind == "euclidean":
            return [[Fraction(int(i == j)) for j in range(n)] for i in range(n)]
        if self.kind == "minkowski":
            return [[Fraction(0 if i != j else (-1 if i == 0 else 1)) for j in range(n)] for i in range(n)]
        if self.kind == "matrix":
            w = [[Fraction(a) for a in row] for row in self.matrix]
            if any(w[i][j] != w[j][i] for i in range(n) for j in range(n)):
                raise ValueError("metric must be symmetric")
            if sympy.Matrix(w).det() == 0:
                raise ValueError("metric must be invertible")
            return w
        raise ValueError(f"unknown metric kind {self.kind!r}")

    def inverse(self) -> List[List[Fraction]]:
        Mi = sympy.Matrix(self.omega()).inv()
        return [[Fraction(int(Mi[i, j].p), int(Mi[i, j].q)) for j in range(self.n)] for i in range(self.n)]


def sym_pairs(n: int) -> list[tuple[int, int]]:
    return [(i, j) for i in range(n) for j in range(i, n)]


def pair_weights(metric) -> list[Fraction]:
    """Weights of the stored components in the full contraction
    ``w^ir w^js S_ij T_rs`` for a diagonal metric: 1 on the diagonal and
    ``2 w^ii w^jj`` for ``i < j``."""
    metric = _metric(metric)
    wi = metric.inverse()
    n = metric.n
    if any(wi[i][j] for i in range(n) for j in range(n) if i != j):
        raise ValueError("pair weights need a diagonal metric")
    return [Fraction(1) if i == j else 2 * wi[i][i] * wi[j][j] for i, j in sym_pairs(n)]


def sym_labels(prefix: str, n: int) -> list[str]:
    return [f"{prefix}{i + 1}{j + 1}" for i, j in sym_pairs(n)]


def _q(dom, x: Fraction):
    return dom.from_int(x.numerator, x.denominator)


def _mono(n, *axes):
    mu = [0] * n
    for a in axes:
        mu[a] += 1
    return tuple(mu)


def _matrix(ctx: Context, rows: List[R.Row], m: int, **labels) -> OpMatrix:
    return OpMatrix.from_rows(ctx, rows, m, **labels)


def _metric(metric) -> MetricSpec:
    if isinstance(metric, int):
        return MetricSpec(metric)
    return metric


def killing(metric) -> OpMatrix:
    """``Omega_ij = w_rj d_i xi^r + w_ir d_j xi^r`` for a constant metric."""
    metric = _metric(metric)
    n = metric.n
    ctx = Context(n)
    dom = ctx.dom
    w = metric.omega()
    rows = []
    for i, j in sym_pairs(n):
        row: R.Row = {}
        for r in range(n):
            R.axpy(row, _q(dom, w[r][j]), {(r, _mono(n, i)): dom.one})
            R.axpy(row, _q(dom, w[i][r]), {(r, _mono(n, j)): dom.one})
        rows.append(row)
    return _matrix(ctx, rows, n, row_labels=sym_labels("O", n), col_labels=[f"xi{r + 1}" for r in range(n)])


def cauchy(metric) -> OpMatrix:
    """Stress equations ``d_r sigma^{ir}`` on the stored components of sigma."""
    metric = _metric(metric)
    n = metric.n
    ctx = Context(n)
    dom = ctx.dom
    pairs = sym_pairs(n)
    idx = {p: c for c, p in enumerate(pairs)}
    rows = []
    for i in range(n):
        row: R.Row = {}
        for r in range(n):
            c = idx[(min(i, r), max(i, r))]
            R.axpy(row, dom.one, {(c, _mono(n, r)): dom.one})
        rows.append(row)
    return _matrix(ctx, rows, len(pairs), row_labels=[f"f{i + 1}" for i in range(n)],
                   col_labels=sym_labels("s", n))


def einstein(metric=None) -> OpMatrix:
    """Linearized vacuum Einstein operator on ``Omega`` (10 x 10 for n=4)."""
    metric = metric or MetricSpec(4, "minkowski")
    metric = _metric(metric)
    n = metric.n
    ctx = Context(n)
    dom = ctx.dom
    w, wi = metric.omega(), metric.inverse()
    pairs = sym_pairs(n)
    idx = {p: c for c, p in enumerate(pairs)}

    def comp(a, b):
        return idx[(min(a, b), max(a, b))]

    rows = []
    for i, j in pairs:
        row: R.Row = {}

        def put(coef, a, b, ax1, ax2):
            if coef:
                R.axpy(row, _q(dom, Fraction(coef)), {(comp(a, b), _mono(n, ax1, ax2)): dom.one})

        for r in range(n):
            for s in range(n):
                c = wi[r][s]
                if not c:
                    continue
                put(c, r, s, i, j)
                put(c, i, j, r, s)
                put(-c, s, j, r, i)
                put(-c, r, i, s, j)
        if w[i][j]:
            for r in range(n):
                for s in range(n):
                    for u in range(n):
                        for v in range(n):
                            c = wi[r][s] * wi[u][v] - wi[r][u] * wi[s][v]
                            put(-w[i][j] * c, u, v, r, s)
        rows.append(row)
    return _matrix(ctx, rows, len(pairs), row_labels=sym_labels("E", n), col_labels=sym_labels("O", n))


def conformal_killing(metric) -> OpMatrix:
    """Trace-free part of the Killing operator, one diagonal row dropped."""
    metric = _metric(metric)
    n = metric.n
    if n < 3:
        raise ValueError("conformal Killing system is only supported for n >= 3")
    K = killing(metric)
    ctx = K.ctx
    dom = ctx.dom
    w = metric.omega()
    trace: R.Row = {(r, _mono(n, r)): dom.one for r in range(n)}
    rows = []
    labels = []
    for (i, j), row, lab in zip(sym_pairs(n), K.row_dicts(), K.row_labels):
        row = dict(row)
        R.axpy(row, _q(dom, Fraction(-2, n) * w[i][j]), trace)
        rows.append(row)
        labels.append(lab)
    # the n diagonal rows sum (with the inverse metric) to zero: drop the last one
    last = max(c for c, (i, j) in enumerate(sym_pairs(n)) if i == j)
    keep = [c for c in range(len(rows)) if c != last]
    return _matrix(ctx, [rows[c] for c in keep], n, row_labels=[labels[c] for c in keep], col_labels=K.col_labels)


@lru_cache(maxsize=None)
def _riemann(metric: MetricSpec) -> OpMatrix:
    from .cc import generating_cc

    K = killing(metric)
    C = generating_cc(K)
    return C.relabel(row_labels=[f"R{c + 1}" for c in range(C.rows)], col_labels=list(K.row_labels))


def riemann_linearized(metric) -> OpMatrix:
    """Generating compatibility conditions of the Killing operator."""
    return _riemann(_metric(metric))


@lru_cache(maxsize=None)
def _bianchi(metric: MetricSpec) -> OpMatrix:
    from .cc import generating_cc

    Rm = riemann_linearized(metric)
    C = generating_cc(Rm)
    return C.relabel(row_labels=[f"B{c + 1}" for c in range(C.rows)], col_labels=list(Rm.row_labels))


def bianchi(metric) -> OpMatrix:
    """Generating compatibility conditions of the linearized Riemann operator."""
    return _bianchi(_metric(metric))


def stress_functions(kind: str) -> OpMatrix:
    """Airy (n=2) and the Beltrami, Maxwell, Morera potentials (n=3).

    Rows follow the stored stress components (s11, s12, s22) or
    (s11, s12, s13, s22, s23, s33).
    """
    if kind == "airy":
        ctx = Context(2)
        d = lambda a, b: DiffOp.monomial(ctx, _mono(2, a, b))
        return OpMatrix(ctx, [[d(1, 1)], [-d(0, 1)], [d(0, 0)]], row_labels=sym_labels("s", 2),
                        col_labels=["phi"])
    ctx = Context(3)
    n = 3
    dom = ctx.dom
    pairs = sym_pairs(3)
    pidx = {p: c for c, p in enumerate(pairs)}

    def P(a, b):
        return pidx[(min(a, b), max(a, b))]

    def beltrami_rows():
        rows = {}
        for i, j, k in ((0, 1, 2), (1, 2, 0), (2, 0, 1)):
            # s_ii = d_kk phi_jj + d_jj phi_kk - 2 d_jk phi_jk
            row: R.Row = {}
            R.axpy(row, dom.one, {(P(j, j), _mono(n, k, k)): dom.one})
            R.axpy(row, dom.one, {(P(k, k), _mono(n, j, j)): dom.one})
            R.axpy(row, dom.from_int(-2), {(P(j, k), _mono(n, j, k)): dom.one})
            rows[P(i, i)] = row
            # s_ij = d_ik phi_jk + d_jk phi_ik - d_kk phi_ij - d_ij phi_kk
            row = {}
            R.axpy(row, dom.one, {(P(j, k), _mono(n, i, k)): dom.one})
            R.axpy(row, dom.one, {(P(i, k), _mono(n, j, k)): dom.one})
            R.axpy(row, -dom.one, {(P(i, j), _mono(n, k, k)): dom.one})
            R.axpy(row, -dom.one, {(P(k, k), _mono(n, i, j)): dom.one})
            rows[P(i, j)] = row
        return [rows[c] for c in range(6)]

    if kind not in ("beltrami", "maxwell", "morera"):
        raise ValueError(f"unknown stress function kind {kind!r}")
    B = _matrix(ctx, beltrami_rows(), 6, row_labels=sym_labels("s", 3), col_labels=sym_labels("phi", 3))
    if kind == "beltrami":
        return B
    if kind == "maxwell":
        M = B.select_columns([P(0, 0), P(1, 1), P(2, 2)])
        return M.relabel(col_labels=["A", "B", "C"])
    M = B.select_columns([P(1, 2), P(0, 2), P(0, 1)])
    return M.relabel(col_labels=["L", "M", "N"])


def grad(n: int = 3) -> OpMatrix:
    ctx = Context(n)
    return OpMatrix(ctx, [[DiffOp.d(ctx, i + 1)] for i in range(n)], row_labels=[f"g{i + 1}" for i in range(n)],
                    col_labels=["f"])


def curl() -> OpMatrix:
    ctx = Context(3)
    z = DiffOp.zero(ctx)
    d = [DiffOp.d(ctx, i + 1) for i in range(3)]
    return OpMatrix(ctx, [[z, -d[2], d[1]], [d[2], z, -d[0]], [-d[1], d[0], z]])


def div(n: int = 3) -> OpMatrix:
    ctx = Context(n)
    return OpMatrix(ctx, [[DiffOp.d(ctx, i + 1) for i in range(n)]])


def intro_example(ident: str, a=None) -> OpMatrix:
    """Fixture systems.

    ``1.1``: the first order OD system in (y1, y2, y3) with coefficient ``a``;
    ``1.1b``: its second order reduction (d^2+d) y1 - (d^2-a) y2;
    ``1.2``: y1' + y1 - y2' - a y2; ``1.4``: d2 eta1 - d1 eta2 + x2 eta2;
    ``4.14``: y33, y23 - y11, y22; ``4.15``: y11, y13 - y2.

    ``a`` may be a rational number, a coefficient string in x1, or omitted for
    a generic parameter named ``a``.
    """
    from .dsl import parse_one

    def ctx_a():
        if a is None:
            return "param a;", "a"
        text = str(a)
        return "", text

    if ident in ("1.1", "1.1b", "1.2"):
        decl, coef = ctx_a()
        body = {
            "1.1": f"dep y1, y2, y3; eq y3[1] - ({coef})*y2 - y1[1]; eq y3 - y2[1] + y1[1];",
            "1.1b": f"dep y1, y2; eq y1[1,1] + y1[1] - y2[1,1] + ({coef})*y2;",
            "1.2": f"dep y1, y2; eq y1[1] + y1 - y2[1] - ({coef})*y2;",
        }[ident]
        doc = parse_one(f"system ex {{ indep x1; {decl} {body} }}")
        return doc.matrix()
    text = {
        "1.4": "system ex14 { indep x1, x2; dep eta1, eta2; eq eta1[2] - eta2[1] + x2*eta2; }",
        "4.14": "system ex414 { indep x1, x2, x3; dep y; eq y[3,3]; eq y[2,3] - y[1,1]; eq y[2,2]; }",
        "4.15": "system ex415 { indep x1, x2, x3; dep y; eq y[1,1]; eq y[1,3] - y[2]; }",
    }.get(ident)
    if text is None:
        raise ValueError(f"unknown example {ident!r}")
    return parse_one(text).matrix()


NAMES = ("killing", "cauchy", "einstein", "riemann", "bianchi", "conformal_killing", "airy", "beltrami",
         "maxwell", "morera", "grad", "curl", "div", "ex1.1", "ex1.2", "ex1.4", "ex4.14", "ex4.15")


def build(name: str, n: int | None = None, metric: str | None = None, a=None) -> OpMatrix:
    """Catalog lookup used by the command line.

    The metric defaults to Minkowski for ``einstein`` and to Euclidean
    otherwise; ``a`` is passed to the introductory examples.
    """
    if name in ("airy", "beltrami", "maxwell", "morera"):
        return stress_functions(name)
    if name.startswith("ex"):
        return intro_example(name[2:], a=a)
    if name == "grad":
        return grad(n or 3)
    if name == "div":
        return div(n or 3)
    if name == "curl":
        return curl()
    table = {
        "killing": killing,
        "cauchy": cauchy,
        "einstein": einstein,
        "riemann": riemann_linearized,
        "bianchi": bianchi,
        "conformal_killing": conformal_killing,
    }
    if name not in table:
        raise ValueError(f"unknown catalog entry {name!r}")
    if name == "einstein":
        spec = MetricSpec(n or 4, metric or "minkowski")
    else:
        spec = MetricSpec(n or 3, metric or "euclidean")
    return table[name](spec)
