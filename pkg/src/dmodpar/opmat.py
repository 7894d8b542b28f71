"""Matrices of operators and linear jet expressions.

Convention: an operator matrix acts on the left of a column of unknowns, and
the module it presents is generated by its rows, the ring acting on rows by
left multiplication.
"""

from __future__ import annotations

import json
from fractions import Fraction
from typing import Iterable, List, Sequence

from . import rows as R
from .coeff import Context, ContextError, RatFunc, specialize_raw
from .ore import DiffOp, adjoint_terms, op_scale

__all__ = [
    "OpMatrix",
    "JetExpr",
    "compose",
    "mat_adjoint",
    "weighted_adjoint",
    "apply_matrix",
    "identity",
    "specialize_matrix",
]


def _default_labels(prefix: str, k: int) -> tuple[str, ...]:
    return tuple(f"{prefix}{i + 1}" for i in range(k))


class OpMatrix:
    """A ``p x m`` matrix of :class:`DiffOp` over one context."""

    __slots__ = ("ctx", "entries", "row_labels", "col_labels")

    def __init__(self, ctx: Context, entries: Sequence[Sequence[DiffOp]], cols: int | None = None,
                 row_labels: Sequence[str] | None = None, col_labels: Sequence[str] | None = None):
        entries = [list(r) for r in entries]
        if cols is None:
            if not entries:
                raise ValueError("column count required for an empty matrix")
            cols = len(entries[0])
        for r in entries:
            if len(r) != cols:
                raise ValueError("ragged operator matrix")
            for P in r:
                if P.ctx != ctx:
                    raise ContextError("all entries must share the matrix context")
        self.ctx = ctx
        self.entries = [tuple(r) for r in entries]
        self.row_labels = tuple(row_labels) if row_labels else _default_labels("e", len(entries))
        self.col_labels = tuple(col_labels) if col_labels else _default_labels("u", cols)
        if len(self.row_labels) != len(entries) or len(self.col_labels) != cols:
            raise ValueError("labels must match the matrix shape")

    @property
    def rows(self) -> int:
        return len(self.entries)

    @property
    def cols(self) -> int:
        return len(self.col_labels)

    @property
    def shape(self) -> tuple[int, int]:
        return self.rows, self.cols

    def __getitem__(self, ij) -> DiffOp:
        i, j = ij
        return self.entries[i][j]

    @classmethod
    def from_rows(cls, ctx: Context, rows: Iterable[R.Row], cols: int, **labels) -> "OpMatrix":
        entries = []
        for row in rows:
            line = [dict() for _ in range(cols)]
            for (k, mu), a in row.items():
                line[k][mu] = a
            entries.append([DiffOp(ctx, t) for t in line])
        return cls(ctx, entries, cols=cols, **labels)

    def row_dict(self, i: int) -> R.Row:
        out: R.Row = {}
        for k, P in enumerate(self.entries[i]):
            for mu, a in P.terms.items():
                out[(k, mu)] = a
        return out

    def row_dicts(self) -> list[R.Row]:
        return [self.row_dict(i) for i in range(self.rows)]

    def to_context(self, ctx: Context) -> "OpMatrix":
        if ctx == self.ctx:
            return self
        return OpMatrix(ctx, [[P.to_context(ctx) for P in r] for r in self.entries], cols=self.cols,
                        row_labels=self.row_labels, col_labels=self.col_labels)

    def relabel(self, row_labels=None, col_labels=None) -> "OpMatrix":
        return OpMatrix(self.ctx, self.entries, cols=self.cols,
                        row_labels=row_labels or self.row_labels, col_labels=col_labels or self.col_labels)

    def transpose_entries(self) -> list[list[DiffOp]]:
        return [[self.entries[i][j] for i in range(self.rows)] for j in range(self.cols)]

    def select_columns(self, idx: Sequence[int]) -> "OpMatrix":
        return OpMatrix(self.ctx, [[r[j] for j in idx] for r in self.entries], cols=len(idx),
                        row_labels=self.row_labels, col_labels=[self.col_labels[j] for j in idx])

    def select_rows(self, idx: Sequence[int]) -> "OpMatrix":
        return OpMatrix(self.ctx, [self.entries[i] for i in idx], cols=self.cols,
                        row_labels=[self.row_labels[i] for i in idx], col_labels=self.col_labels)

    def stack(self, other: "OpMatrix") -> "OpMatrix":
        if other.cols != self.cols:
            raise ValueError("column mismatch")
        ctx = self.ctx.join(other.ctx)
        a, b = self.to_context(ctx), other.to_context(ctx)
        labels = list(a.row_labels) + [f"e{a.rows + i + 1}" for i in range(b.rows)]
        return OpMatrix(ctx, list(a.entries) + list(b.entries), cols=self.cols,
                        row_labels=labels, col_labels=self.col_labels)

    def is_zero(self) -> bool:
        return all(P.is_zero() for r in self.entries for P in r)

    @property
    def order(self) -> int:
        return max((P.order for r in self.entries for P in r), default=-1)

    def __eq__(self, other):
        if not isinstance(other, OpMatrix):
            return NotImplemented
        return self.ctx == other.ctx and self.shape == other.shape and self.entries == other.entries

    def __hash__(self):
        return hash((self.ctx, self.shape, tuple(str(P) for r in self.entries for P in r)))

    def __neg__(self):
        return OpMatrix(self.ctx, [[-P for P in r] for r in self.entries], cols=self.cols,
                        row_labels=self.row_labels, col_labels=self.col_labels)

    def __str__(self):
        lines = []
        for i, r in enumerate(self.entries):
            lines.append(f"{self.row_labels[i]}: [" + ", ".join(str(P) for P in r) + "]")
        return "\n".join(lines) if lines else f"<empty 0x{self.cols} matrix>"

    def __repr__(self):
        return f"OpMatrix({self.rows}x{self.cols})"

    # serialization
    def to_json_obj(self) -> dict:
        dom = self.ctx.dom
        entries = []
        for r in self.entries:
            line = []
            for P in r:
                terms = sorted(P.terms.items(), key=lambda t: (-sum(t[0]), tuple(-e for e in t[0])))
                line.append([{"mu": list(mu), "coeff": dom.to_str(a)} for mu, a in terms])
            entries.append(line)
        return {
            "rows": self.rows,
            "cols": self.cols,
            "context": {"n": self.ctx.n, "params": list(self.ctx.params), "constant": self.ctx.constant},
            "row_labels": list(self.row_labels),
            "col_labels": list(self.col_labels),
            "entries": entries,
        }

    def to_json(self, **kw) -> str:
        return json.dumps(self.to_json_obj(), **kw)

    @classmethod
    def from_json_obj(cls, obj: dict) -> "OpMatrix":
        c = obj["context"]
        ctx = Context(int(c["n"]), tuple(c.get("params", ())), bool(c.get("constant", True)))
        dom = ctx.dom
        entries = []
        for line in obj["entries"]:
            row = []
            for terms in line:
                row.append(DiffOp(ctx, {tuple(t["mu"]): dom.parse(t["coeff"]) for t in terms}))
            entries.append(row)
        if len(entries) != obj["rows"]:
            raise ValueError("row count does not match entries")
        return cls(ctx, entries, cols=int(obj["cols"]), row_labels=obj.get("row_labels"),
                   col_labels=obj.get("col_labels"))

    @classmethod
    def from_json(cls, text: str) -> "OpMatrix":
        return cls.from_json_obj(json.loads(text))


def identity(ctx: Context, m: int) -> OpMatrix:
    return OpMatrix(ctx, [[DiffOp.one(ctx) if i == j else DiffOp.zero(ctx) for j in range(m)] for i in range(m)],
                    cols=m)


def compose(B: OpMatrix, A: OpMatrix) -> OpMatrix:
    """``B o A``: first apply ``A``, then ``B``."""
    if B.cols != A.rows:
        raise ValueError(f"cannot compose {B.shape} with {A.shape}")
    ctx = B.ctx.join(A.ctx)
    B, A = B.to_context(ctx), A.to_context(ctx)
    dom = ctx.dom
    arows = A.row_dicts()
    pros = [R.Prolonger(dom, r) for r in arows]
    out = []
    for i in range(B.rows):
        acc: R.Row = {}
        for j, P in enumerate(B.entries[i]):
            if P.terms:
                R.axpy(acc, dom.one, R.op_times_row(dom, P.terms, arows[j], pros[j]))
        out.append(acc)
    return OpMatrix.from_rows(ctx, out, A.cols, row_labels=B.row_labels, col_labels=A.col_labels)


def mat_adjoint(A: OpMatrix) -> OpMatrix:
    """Transpose with entrywise formal adjoint."""
    dom = A.ctx.dom
    entries = [[DiffOp(A.ctx, adjoint_terms(dom, A.entries[i][j].terms)) for i in range(A.rows)]
               for j in range(A.cols)]
    return OpMatrix(A.ctx, entries, cols=A.rows, row_labels=A.col_labels, col_labels=A.row_labels)


def weighted_adjoint(A: OpMatrix, row_weights, col_weights) -> OpMatrix:
    """Adjoint for the pairings ``sum w_k u_k v_k`` on the target and source.

    ``row_weights`` weight the rows of ``A``, ``col_weights`` its columns.
    Entry ``(a, b)`` is ``ad(A)[a][b] * row_weights[b] / col_weights[a]``;
    constant weights only.
    """
    if len(row_weights) != A.rows or len(col_weights) != A.cols:
        raise ValueError("one weight per row and per column is needed")
    ctx = A.ctx
    ad = mat_adjoint(A)
    w = lambda a, b: RatFunc.from_value(ctx, str(Fraction(row_weights[b]) / Fraction(col_weights[a])))
    entries = [[op_scale(w(a, b), ad.entries[a][b]) if ad.entries[a][b].terms else ad.entries[a][b]
                for b in range(ad.cols)] for a in range(ad.rows)]
    return OpMatrix(ctx, entries, cols=ad.cols, row_labels=ad.row_labels, col_labels=ad.col_labels)


class JetExpr:
    """A finite K-linear combination of jet symbols ``y^k_mu``."""

    __slots__ = ("ctx", "terms", "labels")

    def __init__(self, ctx: Context, terms: R.Row, labels: Sequence[str] | None = None):
        self.ctx = ctx
        self.terms = {key: a for key, a in terms.items() if a}
        self.labels = tuple(labels) if labels else None

    @classmethod
    def unknown(cls, ctx: Context, k: int, labels: Sequence[str] | None = None) -> "JetExpr":
        return cls(ctx, {(k, (0,) * ctx.n): ctx.dom.one}, labels)

    @classmethod
    def unknowns(cls, ctx: Context, m: int, labels: Sequence[str] | None = None) -> List["JetExpr"]:
        return [cls.unknown(ctx, k, labels) for k in range(m)]

    @classmethod
    def from_row(cls, ctx: Context, row: R.Row, labels=None) -> "JetExpr":
        return cls(ctx, dict(row), labels)

    def is_zero(self) -> bool:
        return not self.terms

    def __add__(self, other: "JetExpr") -> "JetExpr":
        return JetExpr(self.ctx, R.add(self.terms, other.terms), self.labels or other.labels)

    def __sub__(self, other: "JetExpr") -> "JetExpr":
        return self + (-other)

    def __neg__(self) -> "JetExpr":
        return JetExpr(self.ctx, R.scale(-self.ctx.dom.one, self.terms), self.labels)

    def scaled(self, f: RatFunc) -> "JetExpr":
        return JetExpr(self.ctx, R.scale(f.raw, self.terms), self.labels)

    def apply(self, P: DiffOp) -> "JetExpr":
        """``P`` applied to this expression (jets are differentiated, coefficients too)."""
        return JetExpr(self.ctx, R.op_times_row(self.ctx.dom, P.terms, self.terms), self.labels)

    def __eq__(self, other):
        if not isinstance(other, JetExpr):
            return NotImplemented
        return self.ctx == other.ctx and self.terms == other.terms

    def __hash__(self):
        return hash(str(self))

    def __str__(self):
        from .dsl import format_row

        labels = self.labels or _default_labels("y", 1 + max((k for k, _ in self.terms), default=0))
        return format_row(self.ctx, self.terms, labels)

    def __repr__(self):
        return f"JetExpr({self})"


def apply_matrix(A: OpMatrix, v: Sequence[JetExpr]) -> list[JetExpr]:
    if len(v) != A.cols:
        raise ValueError(f"expected {A.cols} expressions, got {len(v)}")
    ctx = A.ctx
    for e in v:
        ctx = ctx.join(e.ctx)
    A = A.to_context(ctx)
    dom = ctx.dom
    out = []
    labels = next((e.labels for e in v if e.labels), None)
    vs = [e.terms if e.ctx == ctx else R.convert_row(e.terms, e.ctx.dom, dom) for e in v]
    pros = [R.Prolonger(dom, t) for t in vs]
    for i in range(A.rows):
        acc: R.Row = {}
        for j, P in enumerate(A.entries[i]):
            if P.terms:
                R.axpy(acc, dom.one, R.op_times_row(dom, P.terms, vs[j], pros[j]))
        out.append(JetExpr(ctx, acc, labels))
    return out


def specialize_matrix(A: OpMatrix, bindings) -> OpMatrix:
    """Substitute rational values for some parameters of ``A``."""
    unknown = set(bindings) - set(A.ctx.params)
    if unknown:
        raise KeyError(f"not parameters of this system: {sorted(unknown)}")
    ctx = Context(A.ctx.n, tuple(p for p in A.ctx.params if p not in bindings), A.ctx.constant)
    src, dom = A.ctx.dom, ctx.dom
    entries = []
    for r in A.entries:
        line = []
        for P in r:
            terms = {mu: specialize_raw(src, a, bindings, dom) for mu, a in P.terms.items()}
            line.append(DiffOp(ctx, {mu: a for mu, a in terms.items() if a}))
        entries.append(line)
    return OpMatrix(ctx, entries, A.cols, A.row_labels, A.col_labels)
