"""Text syntax for operators and linear systems (``.das`` files).

Grammar::

    doc      := system*
    system   := "system" NAME "{" decl* "}"
    decl     := "indep" names ";" | "param" names ";" | "dep" names ";"
              | "eq" expr ["=" expr] ";"
    names    := NAME ("," NAME)*
    expr     := term (("+" | "-") term)*
    term     := unary (("*" | "/") unary)*
    unary    := ("+" | "-") unary | power
    power    := atom ["^" INT]
    atom     := INT | NAME | NAME "[" INT ("," INT)* "]" | "(" expr ")"

``d1..dn`` are the derivations, ``u[1,2]`` is the jet d1 d2 u, and ``*``
between an operator and anything to its right means application, so
``d1*(x1*u)`` is ``x1*u[1] + u``.  Only linear homogeneous equations are
accepted.  Independent variables may carry any names; they are mapped in
order onto the internal coordinates x1..xn.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Dict, List, Sequence

import sympy

from . import rows as R
from .coeff import Context
from .ore import DiffOp, op_add, op_mul

__all__ = [
    "DSLError",
    "SystemDoc",
    "parse",
    "parse_one",
    "print_doc",
    "parse_operator",
    "format_operator",
    "format_row",
]


class DSLError(ValueError):
    def __init__(self, msg: str, line: int = 0, col: int = 0):
        self.line, self.col = line, col
        where = f"line {line}, column {col}: " if line else ""
        super().__init__(where + msg)


_TOKEN = re.compile(r"\s*(?:(?P<num>\d+)|(?P<name>[A-Za-z_][A-Za-z_0-9]*)|(?P<op>[-+*/^()\[\],;{}=])|(?P<bad>\S))")
_COMMENT = re.compile(r"#[^\n]*")


@dataclass
class _Tok:
    kind: str
    text: str
    line: int
    col: int


def _tokenize(text: str) -> list[_Tok]:
    toks: list[_Tok] = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = _COMMENT.sub("", line)
        pos = 0
        while pos < len(line):
            m = _TOKEN.match(line, pos)
            if not m or m.end() == pos:
                break
            kind = m.lastgroup
            col = m.start(kind) + 1
            if kind == "bad":
                raise DSLError(f"unexpected character {m.group(kind)!r}", lineno, col)
            toks.append(_Tok(kind, m.group(kind), lineno, col))
            pos = m.end()
    toks.append(_Tok("eof", "", len(text.splitlines()) + 1, 1))
    return toks


# values produced while evaluating expressions
class _Coef:
    __slots__ = ("expr",)

    def __init__(self, expr):
        self.expr = expr


class _Op:
    __slots__ = ("op",)

    def __init__(self, op: DiffOp):
        self.op = op


class _Row:
    __slots__ = ("row",)

    def __init__(self, row: R.Row):
        self.row = row


class _Evaluator:
    def __init__(self, ctx: Context, indep: Sequence[str], params: Sequence[str], dep: Sequence[str]):
        self.ctx = ctx
        self.dom = ctx.dom
        self.sym = {name: sympy.Symbol(f"x{i + 1}") for i, name in enumerate(indep)}
        self.sym.update({p: sympy.Symbol(p) for p in params})
        self.dep = {name: k for k, name in enumerate(dep)}
        self.derivs = {f"d{i + 1}": i for i in range(ctx.n)}
        self.zero_mu = (0,) * ctx.n

    def coef_raw(self, expr, tok):
        try:
            return self.dom.from_expr(expr)
        except ValueError as exc:
            raise DSLError(str(exc), tok.line, tok.col) from None

    def as_op(self, v, tok) -> DiffOp:
        if isinstance(v, _Op):
            return v.op
        if isinstance(v, _Coef):
            return DiffOp(self.ctx, {self.zero_mu: self.coef_raw(v.expr, tok)})
        raise DSLError("expected an operator or coefficient", tok.line, tok.col)

    def add(self, a, b, tok, sign=1):
        if sign < 0:
            b = self.neg(b)
        if isinstance(a, _Coef) and isinstance(b, _Coef):
            return _Coef(a.expr + b.expr)
        if isinstance(a, _Row) and isinstance(b, _Row):
            return _Row(R.add(a.row, b.row))
        if isinstance(a, _Row) or isinstance(b, _Row):
            raise DSLError("inhomogeneous or mixed term: equations must be linear in the unknowns",
                           tok.line, tok.col)
        return _Op(op_add(self.as_op(a, tok), self.as_op(b, tok)))

    def neg(self, a):
        if isinstance(a, _Coef):
            return _Coef(-a.expr)
        if isinstance(a, _Op):
            return _Op(-a.op)
        return _Row(R.scale(-self.dom.one, a.row))

    def mul(self, a, b, tok):
        if isinstance(a, _Coef) and isinstance(b, _Coef):
            return _Coef(a.expr * b.expr)
        if isinstance(a, _Row) and isinstance(b, _Row):
            raise DSLError("non-linear term: product of unknowns", tok.line, tok.col)
        if isinstance(b, _Row):
            if isinstance(a, _Coef):
                return _Row(R.scale(self.coef_raw(a.expr, tok), b.row))
            return _Row(R.op_times_row(self.dom, a.op.terms, b.row))
        if isinstance(a, _Row):
            if isinstance(b, _Coef):
                return _Row(R.scale(self.coef_raw(b.expr, tok), a.row))
            raise DSLError("an operator cannot act from the right of an unknown", tok.line, tok.col)
        return _Op(op_mul(self.as_op(a, tok), self.as_op(b, tok)))

    def div(self, a, b, tok):
        if not isinstance(b, _Coef):
            raise DSLError("division only by coefficients", tok.line, tok.col)
        if sympy.simplify(b.expr) == 0:
            raise DSLError("division by zero", tok.line, tok.col)
        return self.mul(a, _Coef(1 / b.expr), tok)

    def power(self, a, k: int, tok):
        if isinstance(a, _Coef):
            return _Coef(a.expr**k)
        if isinstance(a, _Row):
            if k == 1:
                return a
            raise DSLError("non-linear term: power of an unknown", tok.line, tok.col)
        out = DiffOp.one(self.ctx)
        for _ in range(k):
            out = op_mul(out, a.op)
        return _Op(out)

    def name(self, tok, index=None):
        name = tok.text
        if index is not None:
            if name not in self.dep:
                raise DSLError(f"jet index on {name!r}, which is not an unknown", tok.line, tok.col)
            mu = [0] * self.ctx.n
            for i in index:
                if not 1 <= i <= self.ctx.n:
                    raise DSLError(f"derivation index {i} out of range", tok.line, tok.col)
                mu[i - 1] += 1
            return _Row({(self.dep[name], tuple(mu)): self.dom.one})
        if name in self.dep:
            return _Row({(self.dep[name], self.zero_mu): self.dom.one})
        if name in self.derivs:
            return _Op(DiffOp.d(self.ctx, self.derivs[name] + 1))
        if name in self.sym:
            return _Coef(self.sym[name])
        raise DSLError(f"undeclared symbol {name!r}", tok.line, tok.col)


class _Parser:
    def __init__(self, toks: list[_Tok]):
        self.toks = toks
        self.i = 0

    @property
    def tok(self) -> _Tok:
        return self.toks[self.i]

    def take(self, text=None, kind=None) -> _Tok:
        t = self.tok
        if text is not None and t.text != text:
            raise DSLError(f"expected {text!r}, found {t.text or 'end of input'!r}", t.line, t.col)
        if kind is not None and t.kind != kind:
            raise DSLError(f"expected {kind}, found {t.text or 'end of input'!r}", t.line, t.col)
        self.i += 1
        return t

    def at(self, text) -> bool:
        return self.tok.text == text and self.tok.kind in ("op", "name")

    # expressions are parsed to a small tree, evaluated later once the context is known
    def expr(self):
        node = self.term()
        while self.tok.kind == "op" and self.tok.text in "+-":
            t = self.take()
            node = ("add" if t.text == "+" else "sub", t, node, self.term())
        return node

    def term(self):
        node = self.unary()
        while self.tok.kind == "op" and self.tok.text in "*/":
            t = self.take()
            node = ("mul" if t.text == "*" else "div", t, node, self.unary())
        return node

    def unary(self):
        if self.tok.kind == "op" and self.tok.text in "+-":
            t = self.take()
            inner = self.unary()
            return inner if t.text == "+" else ("neg", t, inner)
        return self.power()

    def power(self):
        node = self.atom()
        if self.tok.kind == "op" and self.tok.text == "^":
            t = self.take()
            k = int(self.take(kind="num").text)
            node = ("pow", t, node, k)
        return node

    def atom(self):
        t = self.tok
        if t.kind == "num":
            self.take()
            return ("num", t, int(t.text))
        if t.kind == "name":
            self.take()
            if self.tok.text == "[":
                self.take("[")
                idx = [int(self.take(kind="num").text)]
                while self.tok.text == ",":
                    self.take(",")
                    idx.append(int(self.take(kind="num").text))
                self.take("]")
                return ("jet", t, idx)
            return ("name", t)
        if t.text == "(":
            self.take("(")
            node = self.expr()
            self.take(")")
            return node
        raise DSLError(f"unexpected {t.text or 'end of input'!r}", t.line, t.col)

    def names(self) -> list[str]:
        out = [self.take(kind="name").text]
        while self.tok.text == ",":
            self.take(",")
            out.append(self.take(kind="name").text)
        return out


def _uses_coords(node, indep: set) -> bool:
    kind = node[0]
    if kind == "name":
        return node[1].text in indep
    if kind in ("num", "jet"):
        return False
    return any(_uses_coords(c, indep) for c in node[2:] if isinstance(c, tuple))


def _evaluate(node, ev: _Evaluator):
    kind, tok = node[0], node[1]
    if kind == "num":
        return _Coef(sympy.Integer(node[2]))
    if kind == "name":
        return ev.name(tok)
    if kind == "jet":
        return ev.name(tok, node[2])
    if kind == "neg":
        return ev.neg(_evaluate(node[2], ev))
    if kind == "pow":
        return ev.power(_evaluate(node[2], ev), node[3], tok)
    a, b = _evaluate(node[2], ev), _evaluate(node[3], ev)
    if kind == "add":
        return ev.add(a, b, tok)
    if kind == "sub":
        return ev.add(a, b, tok, sign=-1)
    if kind == "mul":
        return ev.mul(a, b, tok)
    return ev.div(a, b, tok)


@dataclass
class SystemDoc:
    """A parsed system: declarations plus equations as module rows."""

    name: str
    indep: List[str]
    params: List[str]
    dep: List[str]
    equations: List[R.Row] = field(default_factory=list)
    ctx: Context | None = None
    spans: List[tuple] = field(default_factory=list)

    def matrix(self):
        from .opmat import OpMatrix

        return OpMatrix.from_rows(self.ctx, self.equations, len(self.dep), col_labels=self.dep)

    @classmethod
    def from_matrix(cls, name: str, A, indep=None, dep=None) -> "SystemDoc":
        indep = list(indep or A.ctx.coords)
        dep = list(dep or A.col_labels)
        return cls(name, indep, list(A.ctx.params), dep, A.row_dicts(), A.ctx)

    def __eq__(self, other):
        if not isinstance(other, SystemDoc):
            return NotImplemented
        return (self.name, self.indep, self.params, self.dep, self.ctx, self.equations) == (
            other.name, other.indep, other.params, other.dep, other.ctx, other.equations)


def _parse_system(p: _Parser) -> SystemDoc:
    p.take("system")
    name = p.take(kind="name").text
    p.take("{")
    indep: list[str] = []
    params: list[str] = []
    dep: list[str] = []
    trees = []
    while not p.at("}"):
        t = p.tok
        if t.text == "indep":
            p.take()
            indep += p.names()
        elif t.text == "param":
            p.take()
            params += p.names()
        elif t.text == "dep":
            p.take()
            dep += p.names()
        elif t.text == "eq":
            p.take()
            lhs = p.expr()
            if p.tok.text == "=":
                eq = p.take()
                lhs = ("sub", eq, lhs, p.expr())
            trees.append((t, lhs))
        else:
            raise DSLError(f"unknown declaration {t.text!r}", t.line, t.col)
        p.take(";")
    p.take("}")
    if not indep:
        raise DSLError(f"system {name!r} declares no independent variables")
    names = indep + params + dep
    dup = {x for x in names if names.count(x) > 1}
    reserved = {f"d{i + 1}" for i in range(len(indep))} & set(names)
    if dup or reserved:
        raise DSLError(f"duplicate or reserved names in system {name!r}: {sorted(dup | reserved)}")
    constant = not any(_uses_coords(tree, set(indep)) for _, tree in trees)
    ctx = Context(len(indep), tuple(params), constant)
    ev = _Evaluator(ctx, indep, params, dep)
    eqs, spans = [], []
    for t, tree in trees:
        v = _evaluate(tree, ev)
        if not isinstance(v, _Row):
            if isinstance(v, _Coef) and sympy.simplify(v.expr) == 0:
                v = _Row({})
            else:
                raise DSLError("equation does not involve the unknowns linearly", t.line, t.col)
        eqs.append(v.row)
        spans.append((t.line, t.col))
    return SystemDoc(name, indep, params, dep, eqs, ctx, spans)


def parse(text: str) -> list[SystemDoc]:
    """Parse every system in a document."""
    p = _Parser(_tokenize(text))
    docs = []
    while p.tok.kind != "eof":
        docs.append(_parse_system(p))
    return docs


def parse_one(text: str) -> SystemDoc:
    docs = parse(text)
    if len(docs) != 1:
        raise DSLError(f"expected exactly one system, found {len(docs)}")
    return docs[0]


def parse_operator(ctx: Context, text: str) -> DiffOp:
    """Parse an operator expression such as ``x2*d1*d2 + x1`` in ``ctx``."""
    p = _Parser(_tokenize(text))
    tree = p.expr()
    if p.tok.kind != "eof":
        raise DSLError(f"trailing input {p.tok.text!r}", p.tok.line, p.tok.col)
    ev = _Evaluator(ctx, ctx.coords, ctx.params, ())
    return ev.as_op(_evaluate(tree, ev), p.toks[0])


# printing

def _coef_text(dom, a, names: Dict[str, str] | None = None) -> str:
    s = dom.to_str(a)
    if names:
        s = re.sub(r"\bx(\d+)\b", lambda m: names.get(m.group(0), m.group(0)), s)
    return s


def _wrap(s: str) -> str:
    if re.fullmatch(r"-?[A-Za-z_0-9]+([*^][A-Za-z_0-9]+)*", s):
        return s
    return f"({s})"


def _join_terms(parts: list[tuple[str, str]]) -> str:
    """Join ``(coef, body)`` pairs into a sum, ``body`` may be empty."""
    if not parts:
        return "0"
    out = []
    for idx, (c, body) in enumerate(parts):
        sign = "+"
        if c.startswith("-") and not re.search(r"[-+]", c[1:]):
            sign, c = "-", c[1:]
        if body:
            term = body if c == "1" else f"{_wrap(c)}*{body}"
        else:
            term = c if not re.search(r"[-+]", c) else f"({c})"
        if idx == 0:
            out.append(term if sign == "+" else f"-{term}")
        else:
            out.append(f" {sign} {term}")
    return "".join(out)


def _sort_key(mu):
    return (-sum(mu), tuple(-e for e in reversed(mu)))


def format_operator(P: DiffOp, names: Dict[str, str] | None = None) -> str:
    dom = P.ctx.dom
    parts = []
    for mu in sorted(P.terms, key=_sort_key):
        mono = "*".join(f"d{i + 1}" + (f"^{e}" if e > 1 else "") for i, e in enumerate(mu) if e)
        parts.append((_coef_text(dom, P.terms[mu], names), mono))
    return _join_terms(parts)


def format_row(ctx: Context, row: R.Row, labels: Sequence[str], names: Dict[str, str] | None = None) -> str:
    dom = ctx.dom
    parts = []
    for k, mu in sorted(row, key=lambda km: (_sort_key(km[1]), km[0])):
        idx = [str(i + 1) for i, e in enumerate(mu) for _ in range(e)]
        jet = labels[k] + (f"[{','.join(idx)}]" if idx else "")
        parts.append((_coef_text(dom, row[(k, mu)], names), jet))
    return _join_terms(parts)


def print_doc(doc: SystemDoc) -> str:
    names = {f"x{i + 1}": v for i, v in enumerate(doc.indep)}
    lines = [f"system {doc.name} {{", f"  indep {', '.join(doc.indep)};"]
    if doc.params:
        lines.append(f"  param {', '.join(doc.params)};")
    if doc.dep:
        lines.append(f"  dep {', '.join(doc.dep)};")
    for row in doc.equations:
        lines.append(f"  eq {format_row(doc.ctx, row, doc.dep, names)};")
    lines.append("}")
    return "\n".join(lines) + "\n"
