"""Kernel arithmetic on rows of free modules over the operator ring.

A row is a dict ``{(k, mu): a}`` meaning ``sum a * d^mu e_k`` with raw
coefficients of one :class:`~dmodpar.coeff.Domain`; zero coefficients are
never stored.  Everything here is left-module arithmetic: ``d_i`` acts on the
left and is pushed through coefficients with the Leibniz rule.
"""

from __future__ import annotations

from math import comb
from typing import Dict, Iterable, Tuple

Mono = Tuple[int, ...]
Key = Tuple[int, Mono]
Row = Dict[Key, object]


def bump(mu: Mono, i: int, by: int = 1) -> Mono:
    return mu[:i] + (mu[i] + by,) + mu[i + 1 :]


def madd(mu: Mono, nu: Mono) -> Mono:
    return tuple(a + b for a, b in zip(mu, nu))


def msub(mu: Mono, nu: Mono) -> Mono:
    return tuple(a - b for a, b in zip(mu, nu))


def divides(nu: Mono, mu: Mono) -> bool:
    return all(a <= b for a, b in zip(nu, mu))


def monomials(n: int, q: int) -> list[Mono]:
    """All exponent tuples of length n and total degree q."""
    if n == 1:
        return [(q,)]
    out = []
    for first in range(q, -1, -1):
        for rest in monomials(n - 1, q - first):
            out.append((first,) + rest)
    return out


def mono_class(mu: Mono) -> int:
    """1-based index of the first nonzero exponent (n+1 for the unit)."""
    for i, e in enumerate(mu):
        if e:
            return i + 1
    return len(mu) + 1


def row_order(row: Row, shifts=None) -> int:
    if not row:
        return -1
    if shifts is None:
        return max(sum(mu) for _, mu in row)
    return max(sum(mu) + shifts[k] for k, mu in row)


def d_row(dom, row: Row, i: int) -> Row:
    """``d_i * row`` (0-based axis)."""
    out: Row = {}
    const = dom.ctx.constant
    for (k, mu), a in row.items():
        key = (k, bump(mu, i))
        if key in out:
            v = out[key] + a
            if v:
                out[key] = v
            else:
                del out[key]
        else:
            out[key] = a
        if not const:
            da = dom.diff(a, i)
            if da:
                key = (k, mu)
                v = out.get(key)
                v = da if v is None else v + da
                if v:
                    out[key] = v
                else:
                    del out[key]
    return out


def dmu_row(dom, row: Row, nu: Mono) -> Row:
    """``d^nu * row``."""
    if dom.ctx.constant:
        return {(k, madd(mu, nu)): a for (k, mu), a in row.items()}
    out = row
    for i, e in enumerate(nu):
        for _ in range(e):
            out = d_row(dom, out, i)
    return out


def scale(c, row: Row) -> Row:
    if not c:
        return {}
    return {key: c * a for key, a in row.items()}


def axpy(dst: Row, c, src: Row) -> None:
    """In place ``dst += c * src``."""
    if not c:
        return
    for key, a in src.items():
        v = dst.get(key)
        v = c * a if v is None else v + c * a
        if v:
            dst[key] = v
        else:
            dst.pop(key, None)


def add(a: Row, b: Row) -> Row:
    out = dict(a)
    for key, v in b.items():
        w = out.get(key)
        w = v if w is None else w + v
        if w:
            out[key] = w
        else:
            out.pop(key, None)
    return out


class Prolonger:
    """Memoised ``d^nu * row`` for a fixed row."""

    __slots__ = ("dom", "cache")

    def __init__(self, dom, row: Row):
        self.dom = dom
        n = dom.ctx.n
        self.cache = {(0,) * n: row}

    def __call__(self, nu: Mono) -> Row:
        got = self.cache.get(nu)
        if got is not None:
            return got
        if self.dom.ctx.constant:
            base = self.cache[(0,) * len(nu)]
            got = {(k, madd(mu, nu)): a for (k, mu), a in base.items()}
        else:
            i = max(j for j, e in enumerate(nu) if e)
            got = d_row(self.dom, self(bump(nu, i, -1)), i)
        self.cache[nu] = got
        return got


def op_times_row(dom, op: Dict[Mono, object], row: Row, prolonger: Prolonger | None = None) -> Row:
    """``P * row`` for an operator given as ``{mu: a}``."""
    pr = prolonger or Prolonger(dom, row)
    out: Row = {}
    for nu, a in op.items():
        axpy(out, a, pr(nu))
    return out


def leibniz_coefficient_push(dom, a, nu: Mono) -> Dict[Mono, object]:
    """``d^nu * a`` as an operator ``{lam: b}`` with coefficients on the left."""
    n = len(nu)
    row = dmu_row(dom, {(0, (0,) * n): a}, nu)
    return {mu: b for (_, mu), b in row.items()}


def binomial_multi(nu: Mono, lam: Mono) -> int:
    out = 1
    for a, b in zip(nu, lam):
        out *= comb(a, b)
    return out


def convert_row(row: Row, src, dst) -> Row:
    if src is dst:
        return dict(row)
    out = {}
    for key, a in row.items():
        b = dst.from_raw(a, src)
        if b:
            out[key] = b
    return out


def components(row: Row) -> set:
    return {k for k, _ in row}


def restrict_iter(rows: Iterable[Row]):
    return [r for r in rows if r]
