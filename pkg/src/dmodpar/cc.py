"""Compatibility conditions (left syzygies of rows) and free resolutions.

Syzygies come from a Janet basis computed with cofactors: every
non-multiplicative prolongation of a generator reduces to zero, and the
quotients of that reduction, pulled back through the cofactors, give a
syzygy of the input rows.  Together with the relations expressing each input
row through the basis they generate all syzygies.

That generating set is redundant, so it is pruned by weight, the weight of
``s`` being ``max_j ord(s_j) + ord(A_j)``.  Candidates are processed by
increasing weight and kept only when they are not in the K-span of the
derivatives of the rows already kept; at each weight the new rows are put in
reduced echelon form, which makes the output canonical for a given input.
For homogeneous constant coefficient operators the counts are graded Betti
numbers.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, List, Optional

from . import rows as R
from .janet import TermOrder, complete
from .linalg import Echelon, kernel
from .opmat import OpMatrix, compose

__all__ = [
    "generating_cc",
    "free_resolution",
    "check_cc_generation",
    "integrable_completion",
    "bounded_cc",
    "Resolution",
    "CCVerdict",
    "syzygy_candidates",
]


def _shifts(rows: List[R.Row]) -> List[int]:
    return [max(R.row_order(r), 0) for r in rows]


def syzygy_candidates(A: OpMatrix) -> List[R.Row]:
    """Janet-Schreyer generating set of the syzygies of the rows of ``A``."""
    ctx = A.ctx
    dom = ctx.dom
    n = ctx.n
    rows = A.row_dicts()
    p = len(rows)
    B = complete(rows, ctx, A.cols, track=True)
    cofs = B.cofactors
    pros = [R.Prolonger(dom, c) for c in cofs]
    zero = (0,) * n
    out = []

    def pull_back(s: R.Row, quots) -> R.Row:
        for b, Q in enumerate(quots):
            if Q:
                R.axpy(s, -dom.one, R.op_times_row(dom, Q, cofs[b], pros[b]))
        return s

    for j in range(p):
        rem, quots = B.reduce_with_quotients(rows[j])
        if rem:
            raise AssertionError("input row not reduced by its own Janet basis")
        s = pull_back({(j, zero): dom.one}, quots)
        if s:
            out.append(s)
    for a, i in B.nonmultiplicative():
        rem, quots = B.reduce_with_quotients(R.d_row(dom, B.rows[a], i))
        if rem:
            raise AssertionError("Janet basis is not involutive")
        s = pull_back(R.d_row(dom, cofs[a], i), quots)
        if s:
            out.append(s)
    return out


def _weight(s: R.Row, shifts) -> int:
    return max(sum(mu) + shifts[j] for j, mu in s)


def _weighted_key(shifts, p):
    def key(jm):
        j, mu = jm
        return (sum(mu) + shifts[j], sum(mu)) + tuple(-e for e in mu) + (-j,)

    return key


def prune_by_weight(dom, n: int, cands: List[R.Row], shifts: List[int], p: int) -> List[R.Row]:
    """Weight-minimal canonical subset spanning the same module."""
    key = _weighted_key(shifts, p)
    E = Echelon(dom, key)
    by_w: Dict[int, list] = {}
    for s in cands:
        if s:
            by_w.setdefault(_weight(s, shifts), []).append(s)
    kept: List[list] = []  # [row, weight, prolonger, level reached]

    def extend(entry, upto: int):
        row, w, pr, level = entry
        for s in range(level + 1, upto - w + 1):
            for mu in R.monomials(n, s):
                v = pr(mu)
                if v:
                    E.add(v)
        entry[3] = max(level, upto - w)

    for w in sorted(by_w):
        for entry in kept:
            extend(entry, w)
        batch = []
        for s in by_w[w]:
            r = E.reduce(s, full=True)
            if r:
                E.add(r)
                batch.append(r)
        # reduced echelon form of the new rows, modulo what was already there
        batch.sort(key=lambda r: key(max(r, key=key)), reverse=True)
        done: List[R.Row] = []
        for r in batch:
            for prev in done:
                c = max(prev, key=key)
                if c in r:
                    R.axpy(r, -r[c], prev)
            if not r:
                continue
            c = max(r, key=key)
            r = R.scale(dom.one / r[c], r)
            for t, prev in enumerate(done):
                if c in prev:
                    R.axpy(prev, -prev[c], r)
            done.append(r)
        done.sort(key=lambda r: key(max(r, key=key)), reverse=True)
        for r in done:
            wr = _weight(r, shifts)
            entry = [r, wr, R.Prolonger(dom, r), 0]
            kept.append(entry)
            extend(entry, w)
    return [e[0] for e in kept]


def generating_cc(A: OpMatrix, prune: bool = True) -> OpMatrix:
    """Rows generating every ``C`` with ``C o A = 0``."""
    ctx = A.ctx
    rows = A.row_dicts()
    cands = syzygy_candidates(A)
    if prune:
        cands = prune_by_weight(ctx.dom, ctx.n, cands, _shifts(rows), A.rows)
    labels = [f"c{i + 1}" for i in range(len(cands))]
    return OpMatrix.from_rows(ctx, cands, A.rows, row_labels=labels, col_labels=A.row_labels)


def integrable_completion(A: OpMatrix) -> OpMatrix:
    """Append the equations of order <= q that the system implies.

    ``q`` is the order of ``A``.  A Janet basis element of order <= q is
    appended when one of its derivatives up to order q is not already a
    K-combination of derivatives of the current rows up to order q.  The
    module is unchanged and the order-q part of the result is formally
    integrable.
    """
    ctx = A.ctx
    dom = ctx.dom
    n = ctx.n
    rows = A.row_dicts()
    q = A.order
    if q < 0:
        return A
    order = TermOrder(n, A.cols)
    E = Echelon(dom, order.key)

    def absorb(r):
        pr = R.Prolonger(dom, r)
        for s in range(0, q - R.row_order(r) + 1):
            for mu in R.monomials(n, s):
                E.add(pr(mu))

    for r in rows:
        if r:
            absorb(r)
    B = complete(rows, ctx, A.cols)
    extra = []
    for g in sorted(B.rows, key=lambda r: order.key(max(r, key=order.key))):
        o = R.row_order(g)
        if o > q:
            continue
        pr = R.Prolonger(dom, g)
        if any(not E.contains(pr(mu)) for s in range(0, q - o + 1) for mu in R.monomials(n, s)):
            extra.append(g)
            absorb(g)
    if not extra:
        return A
    return A.stack(OpMatrix.from_rows(ctx, extra, A.cols, col_labels=A.col_labels))


@dataclass
class Resolution:
    ops: List[OpMatrix]
    dims: List[int]
    complete: bool
    presentation_changed: bool = False

    def check_exact_compositions(self) -> bool:
        return all(compose(self.ops[k + 1], self.ops[k]).is_zero() for k in range(len(self.ops) - 1))

    def to_json_obj(self) -> dict:
        return {"dims": self.dims, "complete": self.complete, "ops": [M.to_json_obj() for M in self.ops]}


def free_resolution(A: OpMatrix, max_steps: int | None = None, integrable: bool = True) -> Resolution:
    """Iterate compatibility conditions until none remain.

    The first operator is ``A`` extended by its lower-order consequences (see
    :func:`integrable_completion`), which leaves the module unchanged.
    """
    max_steps = A.ctx.n + 1 if max_steps is None else max_steps
    if max_steps < 1:
        raise ValueError("max_steps must be at least 1")
    A0 = integrable_completion(A) if integrable else A
    ops = [A0]
    dims = [A0.cols, A0.rows]
    cur = A0
    done = False
    for _ in range(max_steps):
        C = generating_cc(cur)
        if C.rows == 0:
            done = True
            break
        ops.append(C)
        dims.append(C.rows)
        cur = C
    return Resolution(ops, dims, done, A0.rows != A.rows)


@dataclass
class CCVerdict:
    status: str  # equal-modules | claimed-too-small | claimed-not-CC
    witness: Optional[R.Row] = None
    composition: Optional[OpMatrix] = None

    @property
    def ok(self) -> bool:
        return self.status == "equal-modules"


def check_cc_generation(C: OpMatrix, A: OpMatrix) -> CCVerdict:
    """Do the rows of ``C`` generate exactly the compatibility conditions of ``A``?"""
    if C.cols != A.rows:
        raise ValueError(f"shapes do not compose: {C.shape} after {A.shape}")
    ctx = C.ctx.join(A.ctx)
    C, A = C.to_context(ctx), A.to_context(ctx)
    comp = compose(C, A)
    if not comp.is_zero():
        return CCVerdict("claimed-not-CC", composition=comp)
    G = generating_cc(A)
    BC = complete(C.row_dicts(), ctx, C.cols)
    for r in G.row_dicts():
        if BC.normal_form(r):
            return CCVerdict("claimed-too-small", witness=r)
    return CCVerdict("equal-modules")


def bounded_cc(A: OpMatrix, max_order: int) -> List[R.Row]:
    """All ``C`` of order <= ``max_order`` with ``C o A = 0``, by linear algebra.

    Undetermined coefficients: the K-linear relations among the rows
    ``d^mu A_j`` with ``|mu| <= max_order``.  Independent of Janet bases.
    """
    ctx = A.ctx
    dom = ctx.dom
    n = ctx.n
    labels = []
    vecs = []
    for j, r in enumerate(A.row_dicts()):
        pr = R.Prolonger(dom, r)
        for s in range(max_order + 1):
            for mu in R.monomials(n, s):
                labels.append((j, mu))
                vecs.append(pr(mu))
    ker = kernel(dom, vecs)
    return [{labels[i]: c for i, c in v.items()} for v in ker]
