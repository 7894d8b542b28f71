"""Symbols, their prolongations and Spencer delta-cohomology.

A symbol ``g_q`` is a subspace of ``S_q T* (x) E``, cut out by linear equations
on the variables ``v^k_mu`` (``|mu| = q``).  Its prolongations ``g_{q+r}`` are
cut out by the same equations shifted by every ``nu`` with ``|nu| = r``; for
``r < 0`` the convention ``g_{q+r} = S_{q+r} T* (x) E`` is used.

The delta map sends ``v^k_{mu+1_i} dx^I`` to ``dx^i ^ dx^I`` component
``v^k_mu``.  ``H^s_{q+r}`` is the cohomology at ``wedge^s T* (x) g_{q+r}`` of

    wedge^{s-1} (x) g_{q+r+1} -> wedge^s (x) g_{q+r} -> wedge^{s+1} (x) g_{q+r-1}.

Cocycles do not depend on whether the last space is ``g_{q-1}`` or the full
``S_{q-1} T* (x) E``, so ``H`` of a prolonged symbol is read off from the
levels of the original one.
"""

from __future__ import annotations

import itertools
import logging
import random
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence

from . import rows as R
from .coeff import Context, PoleError, specialize_raw
from .janet import TermOrder
from .linalg import Echelon, rank
from .opmat import JetExpr, OpMatrix

log = logging.getLogger(__name__)

__all__ = [
    "SymbolSpace",
    "DeltaComplexSlot",
    "Acyclicity",
    "FIVerdict",
    "symbol_of",
    "prolong",
    "delta_map",
    "cohomology",
    "is_s_acyclic",
    "is_finite_type",
    "fi_criterion",
]


def _var_key(v):
    k, mu = v
    return (k,) + tuple(mu)


class _Level:
    """RREF of the equations of ``g_{q+r}`` and the induced coordinates."""

    def __init__(self, dom, n: int, m: int, d: int, equations: List[dict]):
        self.d = d
        self.vars = [(k, mu) for k in range(m) for mu in R.monomials(n, d)] if d >= 0 else []
        E = Echelon(dom, _var_key)
        for e in equations:
            if e:
                E.add(e)
        self.rref = E.rref()
        self.pivots = {max(r, key=_var_key): r for r in self.rref}
        self.free = [v for v in self.vars if v not in self.pivots]
        self.index = {v: i for i, v in enumerate(self.free)}
        self.dom = dom

    @property
    def dim(self) -> int:
        return len(self.free)

    def basis_vector(self, i: int) -> dict:
        f = self.free[i]
        v = {f: self.dom.one}
        for c, r in self.pivots.items():
            a = r.get(f)
            if a:
                v[c] = -a
        return v

    def coords(self, v: dict) -> dict:
        return {self.index[x]: a for x, a in v.items() if x in self.index and a}


class SymbolSpace:
    """``g_q`` given by equations on ``v^k_mu``, ``|mu| = q``, with a cache of levels."""

    def __init__(self, dom, n: int, m: int, q: int, equations: Sequence[dict]):
        self.dom = dom
        self.n = n
        self.m = m
        self.q = q
        self.equations = [dict(e) for e in equations if e]
        for e in self.equations:
            if any(sum(mu) != q for _, mu in e):
                raise ValueError("symbol equations must be homogeneous of order q")
        self._levels: Dict[int, _Level] = {}
        self._slots: Dict[tuple, "DeltaComplexSlot"] = {}

    @classmethod
    def full(cls, dom, n: int, m: int, q: int) -> "SymbolSpace":
        return cls(dom, n, m, q, [])

    def level(self, r: int) -> _Level:
        lv = self._levels.get(r)
        if lv is None:
            d = self.q + r
            eqs = []
            if r >= 0:
                for e in self.equations:
                    for nu in R.monomials(self.n, r):
                        eqs.append({(k, R.madd(mu, nu)): a for (k, mu), a in e.items()})
            lv = _Level(self.dom, self.n, self.m, d, eqs)
            self._levels[r] = lv
        return lv

    def dim(self, r: int = 0) -> int:
        return self.level(r).dim

    def prolonged(self, r: int) -> "SymbolSpace":
        """``g_{q+r}`` as a symbol of order ``q + r`` in its own right."""
        return SymbolSpace(self.dom, self.n, self.m, self.q + r, self.level(r).rref)

    def __repr__(self):
        return f"SymbolSpace(n={self.n}, m={self.m}, q={self.q}, dim={self.dim(0)})"


@dataclass
class DeltaComplexSlot:
    """``delta: wedge^s T* (x) g_{q+r+1} -> wedge^{s+1} T* (x) g_{q+r}``."""

    s: int
    r: int
    source_dim: int
    target_dim: int
    columns: List[dict] = field(repr=False)
    rank: int = 0

    @property
    def kernel_dim(self) -> int:
        return self.source_dim - self.rank

    def dense(self) -> List[List]:
        """Matrix with one row per target coordinate."""
        return [[c.get(i, 0) for c in self.columns] for i in range(self.target_dim)]


def _wedge_basis(n: int, s: int) -> List[tuple]:
    if s < 0 or s > n:
        return []
    return list(itertools.combinations(range(n), s))


def _delta_image(dom, n: int, v: dict, I: tuple) -> Dict[tuple, dict]:
    """delta(v dx^I) as ``{J: vector in S_{d-1}}``."""
    out: Dict[tuple, dict] = {}
    for i in range(n):
        if i in I:
            continue
        sign = -1 if sum(1 for j in I if j < i) % 2 else 1
        J = tuple(sorted(I + (i,)))
        w = out.setdefault(J, {})
        for (k, mu), a in v.items():
            if mu[i]:
                key = (k, R.bump(mu, i, -1))
                b = w.get(key, dom.zero) + (a if sign > 0 else -a)
                if b:
                    w[key] = b
                else:
                    w.pop(key, None)
    return out


def delta_map(g: SymbolSpace, s: int, r: int) -> DeltaComplexSlot:
    """The slot ``delta: wedge^s (x) g_{q+r+1} -> wedge^{s+1} (x) g_{q+r}``.

    Coordinates on each space are the free variables of its equations.
    """
    key = (s, r)
    slot = g._slots.get(key)
    if slot is not None:
        return slot
    src = g.level(r + 1)
    tgt = g.level(r)
    n = g.n
    dom = g.dom
    Js = {J: t for t, J in enumerate(_wedge_basis(n, s + 1))}
    columns = []
    for I in _wedge_basis(n, s):
        for b in range(src.dim):
            img = _delta_image(dom, n, src.basis_vector(b), I)
            col = {}
            for J, w in img.items():
                off = Js[J] * tgt.dim
                for i, a in tgt.coords(w).items():
                    col[off + i] = a
            columns.append(col)
    src_dim = len(_wedge_basis(n, s)) * src.dim
    tgt_dim = len(Js) * tgt.dim
    slot = DeltaComplexSlot(s, r, src_dim, tgt_dim, columns, rank(dom, columns))
    g._slots[key] = slot
    return slot


def prolong(g: SymbolSpace, r: int) -> int:
    """``dim g_{q+r}``."""
    return g.dim(r)


def cohomology(g: SymbolSpace, s: int, r: int) -> int:
    """``dim H^s_{q+r}(g_q)``."""
    n = g.n
    space = len(_wedge_basis(n, s)) * g.dim(r)
    if space == 0:
        return 0
    z = space - delta_map(g, s, r - 1).rank
    b = delta_map(g, s - 1, r).rank if s >= 1 else 0
    return z - b


def finite_type_level(g: SymbolSpace, r_max: int) -> Optional[int]:
    for r in range(r_max + 1):
        if g.dim(r) == 0:
            return r
    return None


def is_finite_type(g: SymbolSpace, r_max: int = 4) -> bool:
    """True when ``g_{q+r} = 0`` for some ``r <= r_max``."""
    return finite_type_level(g, r_max) is not None


@dataclass
class Acyclicity:
    ok: bool
    s: int
    certified_r: Optional[int]  # None: every r (finite type reached)
    failure: Optional[tuple] = None  # (degree, r, dim H)

    def __bool__(self) -> bool:
        return self.ok

    def describe(self) -> str:
        if not self.ok:
            j, r, h = self.failure
            return f"not {self.s}-acyclic: dim H^{j} at level r={r} is {h}"
        if self.certified_r is None:
            return f"{self.s}-acyclic for every r (finite type)"
        return f"{self.s}-acyclic, certified up to r={self.certified_r}"


def is_s_acyclic(g: SymbolSpace, s: int, r_max: int = 4) -> Acyclicity:
    """Check ``H^1..H^s`` at every level ``q + r``, ``0 <= r <= r_max``.

    Once some ``g_{q+r}`` vanishes all later groups vanish too and the verdict
    holds for every ``r``.
    """
    for r in range(r_max + 1):
        if g.dim(r) == 0:
            return Acyclicity(True, s, None)
        for j in range(1, min(s, g.n) + 1):
            h = cohomology(g, j, r)
            if h:
                return Acyclicity(False, s, r, (j, r, h))
    return Acyclicity(True, s, r_max)


# ----------------------------------------------------------------------------
# symbols of operators


def _top_rows(rows: List[R.Row], n: int, dom) -> tuple[int, List[dict]]:
    """Order ``q`` and the order-``q`` parts of all order-``q`` consequences
    ``d^nu row`` with ``|nu| = q - ord(row)``."""
    q = max((R.row_order(r) for r in rows if r), default=-1)
    eqs = []
    for row in rows:
        if not row:
            continue
        o = R.row_order(row)
        top = {(k, mu): a for (k, mu), a in row.items() if sum(mu) == o}
        for nu in R.monomials(n, q - o):
            eqs.append({(k, R.madd(mu, nu)): a for (k, mu), a in top.items()})
    return q, eqs


def _specialize_rows(A: OpMatrix, point: Dict[str, int]) -> List[R.Row]:
    ctx = A.ctx
    tgt = _point_context(ctx).dom
    out = []
    for row in A.row_dicts():
        new = {}
        for key, a in row.items():
            b = specialize_raw(ctx.dom, a, point, tgt)
            if b:
                new[key] = b
        out.append(new)
    return out


def _point_context(ctx: Context) -> Context:
    return Context(ctx.n, ctx.params, True)


def symbol_of(A: OpMatrix, at=None, seed: int = 0, tries: int = 20) -> SymbolSpace:
    """Symbol of the system ``A y = 0`` at its top order.

    Coefficients stay in the coefficient field by default, which gives the
    generic ranks exactly.  ``at`` may be a dict ``{"x1": 2, ...}`` or
    ``"auto"`` to evaluate at a pole-free integer point; ``"auto"`` compares
    the symbol dimension with a second random point and resamples when the
    two disagree.
    """
    ctx = A.ctx
    if at is None or ctx.constant:
        q, eqs = _top_rows(A.row_dicts(), ctx.n, ctx.dom)
        return SymbolSpace(ctx.dom, ctx.n, A.cols, q, eqs)
    if isinstance(at, dict):
        rows = _specialize_rows(A, {k: v for k, v in at.items()})
        dom = _point_context(ctx).dom
        q, eqs = _top_rows(rows, ctx.n, dom)
        return SymbolSpace(dom, ctx.n, A.cols, q, eqs)
    if at != "auto":
        raise ValueError(f"unsupported evaluation point {at!r}")
    rng = random.Random(seed)
    found = []
    for _ in range(tries):
        point = {c: rng.randint(-5, 5) for c in ctx.coords}
        try:
            g = symbol_of(A, at=point)
        except PoleError:
            continue
        found.append(g)
        if len(found) == 2:
            a, b = found
            if a.dim(0) == b.dim(0):
                return a
            log.warning("symbol rank drops at a special point; resampling")
            found = [a if a.dim(0) > b.dim(0) else b]
    raise PoleError("no pole-free generic point found")


# ----------------------------------------------------------------------------
# formal integrability


def _span_upto(A: OpMatrix, order: int, key) -> Echelon:
    ctx = A.ctx
    dom = ctx.dom
    E = Echelon(dom, key)
    for row in A.row_dicts():
        if not row:
            continue
        o = R.row_order(row)
        pr = R.Prolonger(dom, row)
        for s in range(0, order - o + 1):
            for mu in R.monomials(ctx.n, s):
                E.add(pr(mu))
    return E


def _projection_defect(A: OpMatrix, level: int, key) -> List[R.Row]:
    """Equations of order <= level implied at order level+1 but absent at order level."""
    E0 = _span_upto(A, level, key)
    E1 = _span_upto(A, level + 1, key)
    new = []
    for r in E1.rref():
        if R.row_order(r) <= level:
            res = E0.reduce(r, full=True)
            if res:
                added = E0.add(res)
                if added is not None:
                    new.append(res)
    return _canonical(E0.dom, new, key)


def _canonical(dom, rows: List[R.Row], key) -> List[R.Row]:
    F = Echelon(dom, key)
    for r in rows:
        F.add(r)
    return F.rref()


@dataclass
class FIVerdict:
    status: str  # formally-integrable | adds-new-equations | not-certified
    rounds: List[List[JetExpr]]
    acyclic_level: Optional[int]
    system: OpMatrix
    note: str = ""

    @property
    def new_equations(self) -> List[JetExpr]:
        return [e for rnd in self.rounds for e in rnd]

    def to_json_obj(self) -> dict:
        return {
            "status": self.status,
            "rounds": [[str(e) for e in rnd] for rnd in self.rounds],
            "acyclic_level": self.acyclic_level,
            "note": self.note,
        }


def fi_criterion(A: OpMatrix, r_max: int = 4, max_rounds: int = 10) -> FIVerdict:
    """Formal integrability through the symbol and the projections.

    Let ``r0`` be the least ``r`` for which the prolonged symbol ``g_{q+r}`` is
    2-acyclic.  ``R_q`` is formally integrable when the projections
    ``R_{q+s+1} -> R_q+s`` are onto for ``s = 0..r0``.  When a projection is
    not onto, the equations of lower order it reveals are appended and the
    test is repeated; each such batch is one round.
    """
    ctx = A.ctx
    order = TermOrder(ctx.n, A.cols)
    key = order.key
    labels = list(A.col_labels)
    rounds: List[List[JetExpr]] = []
    cur = A
    for _ in range(max_rounds):
        q = cur.order
        g = symbol_of(cur)
        r0 = None
        for r in range(r_max + 1):
            if is_s_acyclic(g.prolonged(r), 2, r_max):
                r0 = r
                break
        levels = range(q, q + (r0 if r0 is not None else r_max) + 1)
        new: List[R.Row] = []
        for lv in levels:
            new = _projection_defect(cur, lv, key)
            if new:
                break
        if new:
            rounds.append([JetExpr(ctx, r, labels) for r in new])
            cur = cur.stack(OpMatrix.from_rows(ctx, new, cur.cols, col_labels=cur.col_labels))
            continue
        if r0 is None:
            return FIVerdict("not-certified", rounds, None, cur,
                             f"no prolonged symbol is 2-acyclic up to r={r_max}")
        status = "adds-new-equations" if rounds else "formally-integrable"
        return FIVerdict(status, rounds, r0, cur)
    return FIVerdict("not-certified", rounds, None, cur, f"stopped after {max_rounds} rounds")
