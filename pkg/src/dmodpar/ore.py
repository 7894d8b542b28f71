"""The operator ring D = K[d_1..d_n] with d_i a = a d_i + d_i(a).

Operators are stored in normal order: coefficients to the left of the
monomials ``d^mu``.
"""

from __future__ import annotations

from typing import Dict, Iterable, Mapping

from . import rows as R
from .coeff import Context, ContextError, RatFunc

__all__ = [
    "DiffOp",
    "op_add",
    "op_scale",
    "op_mul",
    "adjoint",
    "apply",
    "order",
    "mono_class",
]

mono_class = R.mono_class


class DiffOp:
    """A scalar differential operator ``sum a^mu d^mu``."""

    __slots__ = ("ctx", "terms")

    def __init__(self, ctx: Context, terms: Mapping[tuple, object] | None = None):
        self.ctx = ctx
        self.terms: Dict[tuple, object] = {mu: a for mu, a in (terms or {}).items() if a}

    # constructors
    @classmethod
    def zero(cls, ctx: Context) -> "DiffOp":
        return cls(ctx)

    @classmethod
    def one(cls, ctx: Context) -> "DiffOp":
        return cls.const(ctx, 1)

    @classmethod
    def const(cls, ctx: Context, value) -> "DiffOp":
        f = value if isinstance(value, RatFunc) else RatFunc.from_value(ctx, value)
        f = f.to_context(ctx)
        return cls(ctx, {(0,) * ctx.n: f.raw})

    @classmethod
    def d(cls, ctx: Context, i: int, power: int = 1) -> "DiffOp":
        """``d_i^power`` with 1-based axis."""
        mu = [0] * ctx.n
        mu[i - 1] = power
        return cls(ctx, {tuple(mu): ctx.dom.one})

    @classmethod
    def monomial(cls, ctx: Context, mu, coeff=1) -> "DiffOp":
        c = coeff if isinstance(coeff, RatFunc) else RatFunc.from_value(ctx, coeff)
        return cls(ctx, {tuple(mu): c.to_context(ctx).raw})

    @classmethod
    def parse(cls, ctx: Context, text: str) -> "DiffOp":
        from .dsl import parse_operator

        return parse_operator(ctx, text)

    # structure
    @property
    def order(self) -> int:
        """Order; -1 stands for the zero operator."""
        return max((sum(mu) for mu in self.terms), default=-1)

    def is_zero(self) -> bool:
        return not self.terms

    def coeff(self, mu) -> RatFunc:
        return RatFunc(self.ctx, self.terms.get(tuple(mu), self.ctx.dom.zero))

    def items(self):
        for mu in sorted(self.terms, key=lambda m: (-sum(m), tuple(-e for e in m))):
            yield mu, RatFunc(self.ctx, self.terms[mu])

    def to_context(self, ctx: Context) -> "DiffOp":
        if ctx == self.ctx:
            return self
        dom, src = ctx.dom, self.ctx.dom
        return DiffOp(ctx, {mu: dom.from_raw(a, src) for mu, a in self.terms.items()})

    # arithmetic
    def _same(self, other: "DiffOp"):
        if other.ctx != self.ctx:
            raise ContextError(f"context mismatch: {self.ctx} vs {other.ctx}")

    def _lift(self, other):
        if isinstance(other, DiffOp):
            self._same(other)
            return other
        if isinstance(other, (int, RatFunc)):
            return DiffOp.const(self.ctx, other)
        return NotImplemented

    def __add__(self, other):
        other = self._lift(other)
        if other is NotImplemented:
            return other
        return op_add(self, other)

    __radd__ = __add__

    def __neg__(self):
        return DiffOp(self.ctx, {mu: -a for mu, a in self.terms.items()})

    def __sub__(self, other):
        other = self._lift(other)
        if other is NotImplemented:
            return other
        return op_add(self, -other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, (int, RatFunc)) and not isinstance(other, bool):
            other = DiffOp.const(self.ctx, other)
        if not isinstance(other, DiffOp):
            return NotImplemented
        return op_mul(self, other)

    def __rmul__(self, other):
        if isinstance(other, (int, RatFunc)):
            return op_scale(other if isinstance(other, RatFunc) else RatFunc.from_value(self.ctx, other), self)
        return NotImplemented

    def __pow__(self, k: int):
        out = DiffOp.one(self.ctx)
        for _ in range(k):
            out = op_mul(out, self)
        return out

    def __eq__(self, other):
        if isinstance(other, int):
            other = DiffOp.const(self.ctx, other)
        if not isinstance(other, DiffOp):
            return NotImplemented
        return self.ctx == other.ctx and self.terms == other.terms

    def __hash__(self):
        return hash((self.ctx, str(self)))

    def __str__(self):
        from .dsl import format_operator

        return format_operator(self)

    def __repr__(self):
        return f"DiffOp({self})"


def op_add(P: DiffOp, Q: DiffOp) -> DiffOp:
    P._same(Q)
    out = dict(P.terms)
    for mu, a in Q.terms.items():
        b = out.get(mu)
        b = a if b is None else b + a
        if b:
            out[mu] = b
        else:
            out.pop(mu, None)
    return DiffOp(P.ctx, out)


def op_scale(f: RatFunc, P: DiffOp) -> DiffOp:
    if f.ctx != P.ctx:
        raise ContextError(f"context mismatch: {f.ctx} vs {P.ctx}")
    return DiffOp(P.ctx, {mu: f.raw * a for mu, a in P.terms.items()})


def _as_row(P: DiffOp) -> R.Row:
    return {(0, mu): a for mu, a in P.terms.items()}


def _from_row(ctx: Context, row: R.Row) -> DiffOp:
    return DiffOp(ctx, {mu: a for (_, mu), a in row.items()})


def op_mul(P: DiffOp, Q: DiffOp) -> DiffOp:
    P._same(Q)
    return _from_row(P.ctx, R.op_times_row(P.ctx.dom, P.terms, _as_row(Q)))


def adjoint_terms(dom, terms: Mapping[tuple, object]) -> Dict[tuple, object]:
    """Raw adjoint: ``sum (-1)^|mu| d^mu a^mu`` in normal order."""
    out: R.Row = {}
    for mu, a in terms.items():
        pushed = R.dmu_row(dom, {(0, (0,) * len(mu)): a}, mu)
        R.axpy(out, dom.from_int(-1 if sum(mu) % 2 else 1), pushed)
    return {mu: a for (_, mu), a in out.items()}


def adjoint(P: DiffOp) -> DiffOp:
    return DiffOp(P.ctx, adjoint_terms(P.ctx.dom, P.terms))


def apply(P: DiffOp, f: RatFunc) -> RatFunc:
    """The action of ``P`` on a coefficient function."""
    if f.ctx != P.ctx:
        raise ContextError(f"context mismatch: {f.ctx} vs {P.ctx}")
    dom = P.ctx.dom
    cache = {(0,) * P.ctx.n: f.raw}

    def deriv(mu):
        got = cache.get(mu)
        if got is None:
            i = max(j for j, e in enumerate(mu) if e)
            got = dom.diff(deriv(R.bump(mu, i, -1)), i)
            cache[mu] = got
        return got

    total = dom.zero
    for mu, a in P.terms.items():
        total = total + a * deriv(mu)
    return RatFunc(P.ctx, total)


def order(P: DiffOp) -> int:
    return P.order


def lift_all(ops: Iterable[DiffOp]) -> Context:
    """Smallest context containing all operators."""
    ctx = None
    for P in ops:
        ctx = P.ctx if ctx is None else ctx.join(P.ctx)
    return ctx
