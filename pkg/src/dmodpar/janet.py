"""Janet bases of row submodules of D^m.

The completion is the Gerdt-Blinkov involutive algorithm with Janet division
(multiplicative variables are assigned per component by the classical
grouping on exponents of x_n, then x_{n-1}, and so on), followed by a final
pass that re-checks every non-multiplicative prolongation.  Leading terms
under a degree-compatible order are unaffected by the Leibniz rule, so the
commutative combinatorics carries over verbatim.

Boards in the sense of solved systems (``is_involutive``) use the class of a
leading jet instead: an equation of order q and class i is prolonged only
along x_1..x_i.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass
from math import comb
from typing import Dict, List, Optional, Sequence

import sympy

from . import rows as R
from .coeff import Context
from .linalg import Echelon
from .opmat import OpMatrix

__all__ = [
    "TermOrder",
    "JanetBasis",
    "Characters",
    "Board",
    "complete",
    "normal_form",
    "is_involutive",
    "coordinate_change",
    "delta_regularize",
    "characters",
    "differential_rank",
    "dims_check",
    "janet_multiplicative",
]


class TermOrder:
    """Degree-reverse-lexicographic order on d-monomials of D^m.

    Among monomials of equal degree the one with the smaller exponent of d_1
    is larger, then d_2, and so on, so ``d_n^q`` is the largest and class n
    jets come first.  ``kind='top'`` compares monomials before positions,
    ``kind='pot'`` positions first.  ``positions[k]`` is the priority of
    component ``k`` (0 = most important).
    """

    def __init__(self, n: int, m: int, kind: str = "top", positions: Sequence[int] | None = None):
        if kind not in ("top", "pot"):
            raise ValueError(f"unknown order kind {kind!r}")
        self.n, self.m, self.kind = n, m, kind
        self.positions = tuple(positions) if positions is not None else tuple(range(m))
        if sorted(self.positions) != list(range(m)):
            raise ValueError("positions must be a permutation of the components")
        self._cache: Dict[tuple, tuple] = {}

    def key(self, km) -> tuple:
        got = self._cache.get(km)
        if got is None:
            k, mu = km
            rev = tuple(-e for e in mu)
            if self.kind == "top":
                got = (sum(mu),) + rev + (-self.positions[k],)
            else:
                got = (-self.positions[k], sum(mu)) + rev
            self._cache[km] = got
        return got

    def lead(self, row: R.Row):
        return max(row, key=self.key)

    def __eq__(self, other):
        return isinstance(other, TermOrder) and (self.n, self.m, self.kind, self.positions) == (
            other.n, other.m, other.kind, other.positions)

    def __hash__(self):
        return hash((self.n, self.m, self.kind, self.positions))

    def __repr__(self):
        return f"TermOrder({self.kind}, n={self.n}, m={self.m})"


def janet_multiplicative(monos: Sequence[tuple]) -> Dict[tuple, frozenset]:
    """Janet multiplicative variables (0-based) of a set of exponent tuples."""
    monos = list(dict.fromkeys(monos))
    if not monos:
        return {}
    n = len(monos[0])
    out: Dict[tuple, set] = {mu: set() for mu in monos}

    def rec(group, i):
        top = max(mu[i] for mu in group)
        for mu in group:
            if mu[i] == top:
                out[mu].add(i)
        if i == 0:
            return
        by: Dict[int, list] = {}
        for mu in group:
            by.setdefault(mu[i], []).append(mu)
        for sub in by.values():
            rec(sub, i - 1)

    rec(monos, n - 1)
    return {mu: frozenset(s) for mu, s in out.items()}


class _Gen:
    __slots__ = ("row", "lm", "cof", "nmp", "pro", "cpro", "mult")

    def __init__(self, dom, row, lm, cof=None):
        self.row = row
        self.lm = lm
        self.cof = cof
        self.nmp = set()
        self.pro = R.Prolonger(dom, row)
        self.cpro = R.Prolonger(dom, cof) if cof is not None else None
        self.mult = frozenset()


class _Division:
    """Janet divisors of the current set of leading terms."""

    def __init__(self, gens: List[_Gen]):
        self.by_comp: Dict[int, list] = {}
        for g in gens:
            self.by_comp.setdefault(g.lm[0], []).append(g)
        for comp, gs in self.by_comp.items():
            mult = janet_multiplicative([g.lm[1] for g in gs])
            for g in gs:
                g.mult = mult[g.lm[1]]

    def divisor(self, km) -> Optional[_Gen]:
        k, mu = km
        for g in self.by_comp.get(k, ()):
            nu = g.lm[1]
            ok = True
            for i, (a, b) in enumerate(zip(nu, mu)):
                if a > b or (a < b and i not in g.mult):
                    ok = False
                    break
            if ok:
                return g
        return None


def _reduce(dom, order, row, cof, division: _Division, full: bool, quot: Optional[dict] = None):
    """Involutive reduction of ``row`` (and its cofactor) modulo ``division``.

    ``quot`` collects the quotients ``{id(gen): {lam: coeff}}`` when given.
    """
    h = dict(row)
    c = dict(cof) if cof is not None else None
    done: R.Row = {}
    key = order.key
    while h:
        t = max(h, key=key)
        a = h[t]
        g = division.divisor(t)
        if g is None:
            if not full:
                done.update(h)
                break
            done[t] = a
            del h[t]
            continue
        lam = R.msub(t[1], g.lm[1])
        R.axpy(h, -a, g.pro(lam))
        if c is not None:
            R.axpy(c, -a, g.cpro(lam))
        if quot is not None:
            q = quot.setdefault(id(g), {})
            v = q.get(lam)
            v = a if v is None else v + a
            if v:
                q[lam] = v
            else:
                q.pop(lam, None)
    return done, c


@dataclass
class Characters:
    q: int
    n: int
    m: int
    beta: tuple
    alpha: tuple

    def __post_init__(self):
        self.beta = tuple(self.beta)
        self.alpha = tuple(self.alpha)


@dataclass
class Board:
    """Per-equation class and multiplicative variables (1-based)."""

    entries: List[tuple]  # (class, frozenset of multiplicative axes)
    n: int

    def counts(self) -> Dict[int, int]:
        out = {i: 0 for i in range(1, self.n + 1)}
        for cls, _ in self.entries:
            if cls in out:
                out[cls] += 1
        return out

    def render(self) -> str:
        lines = []
        for _, mult in self.entries:
            lines.append(" ".join(str(i) if i in mult else "." for i in range(1, self.n + 1)))
        return "\n".join(lines)

    def to_json_obj(self) -> list:
        return [{"class": c, "multiplicative": sorted(m)} for c, m in self.entries]


class JanetBasis:
    """An involutive basis together with its Janet board."""

    def __init__(self, ctx: Context, m: int, order: TermOrder, gens: List[_Gen], n_input: int = 0):
        self.ctx = ctx
        self.m = m
        self.term_order = order
        self._gens = gens
        self.n_input = n_input
        self._division = _Division(gens)

    @property
    def rows(self) -> List[R.Row]:
        return [g.row for g in self._gens]

    @property
    def leading_terms(self) -> List[tuple]:
        return [g.lm for g in self._gens]

    @property
    def cofactors(self) -> List[R.Row]:
        return [g.cof for g in self._gens]

    @property
    def multiplicative(self) -> List[frozenset]:
        return [frozenset(i + 1 for i in g.mult) for g in self._gens]

    def __len__(self):
        return len(self._gens)

    @property
    def q(self) -> int:
        return max((sum(g.lm[1]) for g in self._gens), default=0)

    def board(self) -> Board:
        return Board([(R.mono_class(g.lm[1]), fm) for g, fm in zip(self._gens, self.multiplicative)],
                     self.ctx.n)

    def matrix(self, col_labels=None) -> OpMatrix:
        return OpMatrix.from_rows(self.ctx, self.rows, self.m, col_labels=col_labels)

    def normal_form(self, row: R.Row, full: bool = True) -> R.Row:
        return _reduce(self.ctx.dom, self.term_order, row, None, self._division, full)[0]

    def reduce_with_quotients(self, row: R.Row):
        """Returns ``(remainder, quotients)`` with quotients a list of operators
        ``{lam: coeff}``, one per generator, so ``row = sum Q_a g_a + remainder``."""
        quot: dict = {}
        rem, _ = _reduce(self.ctx.dom, self.term_order, row, None, self._division, True, quot)
        return rem, [quot.get(id(g), {}) for g in self._gens]

    def contains(self, row: R.Row) -> bool:
        return not _reduce(self.ctx.dom, self.term_order, row, None, self._division, False)[0]

    def nonmultiplicative(self):
        """Pairs ``(index, axis)`` of non-multiplicative prolongations (0-based axis)."""
        for a, g in enumerate(self._gens):
            for i in range(self.ctx.n):
                if i not in g.mult:
                    yield a, i

    def is_involutive(self) -> bool:
        dom = self.ctx.dom
        return all(not self.normal_form(R.d_row(dom, self._gens[a].row, i), full=False)
                   for a, i in self.nonmultiplicative())

    def leading_module_count(self, q: int) -> Dict[int, int]:
        """Degree-q monomials of the leading module, counted by class."""
        out = {i: 0 for i in range(1, self.ctx.n + 1)}
        lms: Dict[int, list] = {}
        for g in self._gens:
            lms.setdefault(g.lm[0], []).append(g.lm[1])
        for k, nus in lms.items():
            for mu in R.monomials(self.ctx.n, q):
                if q > 0 and any(R.divides(nu, mu) for nu in nus):
                    out[R.mono_class(mu)] += 1
        return out

    def free_components(self) -> List[int]:
        used = {g.lm[0] for g in self._gens}
        return [k for k in range(self.m) if k not in used]


def complete(rows: Sequence[R.Row], ctx: Context, m: int, order: TermOrder | None = None,
             track: bool = False) -> JanetBasis:
    """Janet basis of the module generated by ``rows``.

    With ``track`` every generator carries a cofactor row in D^len(rows)
    expressing it through the input rows.
    """
    dom = ctx.dom
    order = order or TermOrder(ctx.n, m)
    key = order.key
    s = len(rows)
    queue = []

    def push(row, cof):
        if row:
            queue.append((key(max(row, key=key)), row, cof))

    for j, r in enumerate(rows):
        push(dict(r), {(j, (0,) * ctx.n): dom.one} if track else None)
    basis: List[_Gen] = []
    division = _Division(basis)

    def insert_prolongations():
        for g in basis:
            for i in range(ctx.n):
                if i not in g.mult and i not in g.nmp:
                    g.nmp.add(i)
                    push(R.d_row(dom, g.row, i), R.d_row(dom, g.cof, i) if track else None)

    def process():
        nonlocal division
        while queue:
            best = min(range(len(queue)), key=lambda t: queue[t][0])
            _, row, cof = queue.pop(best)
            h, hc = _reduce(dom, order, row, cof, division, full=False)
            if not h:
                continue
            lm = max(h, key=key)
            inv = dom.one / h[lm]
            h = R.scale(inv, h)
            if track:
                hc = R.scale(inv, hc)
            keep = []
            for g in basis:
                if g.lm[0] == lm[0] and g.lm[1] != lm[1] and R.divides(lm[1], g.lm[1]):
                    push(g.row, g.cof)
                else:
                    keep.append(g)
            basis[:] = keep
            basis.append(_Gen(dom, h, lm, hc))
            division = _Division(basis)
            insert_prolongations()

    process()
    # safety net: every non-multiplicative prolongation must reduce to zero
    while True:
        bad = []
        for g in basis:
            for i in range(ctx.n):
                if i in g.mult:
                    continue
                pr = R.d_row(dom, g.row, i)
                h, _ = _reduce(dom, order, pr, None, division, full=False)
                if h:
                    bad.append((pr, R.d_row(dom, g.cof, i) if track else None))
        if not bad:
            break
        for pr, pc in bad:
            push(pr, pc)
        process()
    # tail reduction for readable generators; the leading terms are unchanged
    basis.sort(key=lambda g: key(g.lm), reverse=True)
    for g in basis:
        others = _Division([x for x in basis if x is not g])
        tail = {t: a for t, a in g.row.items() if t != g.lm}
        red, rc = _reduce(dom, order, tail, {} if track else None, others, full=True)
        if red != tail:
            g.row = dict(red)
            g.row[g.lm] = dom.one
            if track:
                g.cof = R.add(g.cof, rc)
            g.pro = R.Prolonger(dom, g.row)
            g.cpro = R.Prolonger(dom, g.cof) if track else None
    return JanetBasis(ctx, m, order, basis, s)


def normal_form(row: R.Row, B: JanetBasis) -> R.Row:
    return B.normal_form(row)


def complete_matrix(A: OpMatrix, order: TermOrder | None = None, track: bool = False) -> JanetBasis:
    return complete(A.row_dicts(), A.ctx, A.cols, order, track)


# solved-form involution test with class-based multiplicative variables

def _echelon(dom, order: TermOrder, rows) -> Echelon:
    e = Echelon(dom, order.key)
    for r in rows:
        if r:
            e.add(r)
    return e


def solved_form(rows: Sequence[R.Row], ctx: Context, m: int, order: TermOrder | None = None) -> List[R.Row]:
    order = order or TermOrder(ctx.n, m)
    return _echelon(ctx.dom, order, rows).rref()


def is_involutive(rows: Sequence[R.Row], ctx: Context, m: int, order: TermOrder | None = None):
    """Involution of a system in solved form, with its board.

    The system is brought to reduced echelon form; an equation of maximal
    order q and class i gets x_1..x_i as multiplicative variables and lower
    order equations get none.  The system is involutive when prolonging only
    along multiplicative variables already spans the full first prolongation
    and that prolongation brings no new equation of order <= q.
    """
    order = order or TermOrder(ctx.n, m)
    dom = ctx.dom
    solved = solved_form(rows, ctx, m, order)
    if not solved:
        return True, Board([], ctx.n)
    q = max(R.row_order(r) for r in solved)
    entries = []
    full_rows = list(solved)
    mult_rows = list(solved)
    for r in solved:
        lm = order.lead(r)
        cls = R.mono_class(lm[1])
        top = sum(lm[1]) == q
        mult = frozenset(range(1, cls + 1)) if top else frozenset()
        entries.append((cls if top else 0, mult))
        for i in range(ctx.n):
            pr = R.d_row(dom, r, i)
            full_rows.append(pr)
            if i + 1 in mult:
                mult_rows.append(pr)
    board = Board([e for e in entries], ctx.n)
    e_full = _echelon(dom, order, full_rows)
    e_mult = _echelon(dom, order, mult_rows)
    low = sum(1 for c in e_full.pivots if sum(c[1]) <= q)
    ok = e_full.rank == e_mult.rank and low == len(solved)
    return ok, board


# coordinate changes

def _inverse_rational(M):
    Mi = sympy.Matrix(M).inv()
    return [[sympy.Rational(Mi[i, j]) for j in range(Mi.cols)] for i in range(Mi.rows)]


def coordinate_change(rows: Sequence[R.Row], ctx: Context, M) -> List[R.Row]:
    """Rewrite rows after the linear change of coordinates given by ``M``.

    ``M`` acts on the derivations, ``d_i -> sum_j M[i][j] d_j``; in terms of
    points this is ``y = M^T x``.  This reading of "x^1 -> x^1 + x^3" is the
    one under which the classical Maxwell example becomes involutive.
    Coefficients are rewritten through ``x = M^{-T} y``.  Two successive
    changes ``M1`` then ``M2`` compose to ``M1 M2``.
    """
    M = [[sympy.Rational(a) for a in row] for row in M]
    n = ctx.n
    if len(M) != n or any(len(r) != n for r in M):
        raise ValueError("change matrix must be n x n")
    if sympy.Matrix(M).det() == 0:
        raise ValueError("singular coordinate change")
    dom = ctx.dom
    Minv = _inverse_rational([list(r) for r in zip(*M)])
    # image of d_i as a linear form in the new derivations
    lin = [{j: dom.from_int(int(M[i][j].p), int(M[i][j].q)) for j in range(n) if M[i][j] != 0} for i in range(n)]
    cache: Dict[tuple, Dict[tuple, object]] = {(0,) * n: {(0,) * n: dom.one}}

    def power(mu):
        got = cache.get(mu)
        if got is None:
            i = max(t for t, e in enumerate(mu) if e)
            prev = power(R.bump(mu, i, -1))
            got = {}
            for nu, a in prev.items():
                for j, c in lin[i].items():
                    key = R.bump(nu, j)
                    v = got.get(key)
                    v = a * c if v is None else v + a * c
                    if v:
                        got[key] = v
                    else:
                        got.pop(key, None)
            cache[mu] = got
        return got

    subst = None
    if not ctx.constant:
        xs = sympy.symbols(" ".join(ctx.coords))
        xs = xs if isinstance(xs, tuple) else (xs,)
        subst = {xs[i]: sum(Minv[i][j] * xs[j] for j in range(n)) for i in range(n)}

    def coeff(a):
        if subst is None or dom.is_const(a):
            return a
        return dom.from_expr(sympy.cancel(dom.to_expr(a).xreplace(subst)))

    out = []
    for r in rows:
        acc: R.Row = {}
        for (k, mu), a in r.items():
            b = coeff(a)
            for nu, c in power(mu).items():
                key = (k, nu)
                v = acc.get(key)
                v = b * c if v is None else v + b * c
                if v:
                    acc[key] = v
                else:
                    acc.pop(key, None)
        out.append(acc)
    return out


def _symbol_classes(rows, ctx, m, order: TermOrder, q: int) -> tuple:
    dom = ctx.dom
    tops = []
    for r in rows:
        t = {key: a for key, a in r.items() if sum(key[1]) == q}
        if t:
            tops.append(t)
    e = _echelon(dom, order, tops)
    counts = [0] * (ctx.n + 1)
    for c in e.pivots:
        counts[R.mono_class(c[1])] += 1
    return tuple(counts[i] for i in range(ctx.n, 0, -1))


@dataclass
class Regularized:
    rows: List[R.Row]
    M: list
    board: Board
    score: tuple
    tied: bool = False


def delta_regularize(rows: Sequence[R.Row], ctx: Context, m: int, order: TermOrder | None = None,
                     max_tries: int = 20, seed: int = 0) -> Regularized:
    """Search for coordinates in which the order-q symbol has the best board.

    Candidates are the identity, the coordinate permutations, elementary
    shears and then ``max_tries`` seeded random invertible integer matrices;
    the score is the class-count vector (beta^n, beta^{n-1}, ...) of the
    solved symbol, compared lexicographically.  The first candidate reaching the best score
    wins, so a system that is already regular keeps its coordinates.
    """
    order = order or TermOrder(ctx.n, m)
    n = ctx.n
    rows = [r for r in rows if r]
    if not rows:
        I = [[int(i == j) for j in range(n)] for i in range(n)]
        return Regularized([], I, Board([], n), ())
    q = max(R.row_order(r) for r in rows)
    rng = random.Random(seed)
    cands = [[[int(i == j) for j in range(n)] for i in range(n)]]
    for perm in itertools.permutations(range(n)):
        P = [[int(perm[i] == j) for j in range(n)] for i in range(n)]
        if P not in cands:
            cands.append(P)
    # shears x_j -> x_j + x_i, single and summed into one column
    for j in range(n):
        others = [i for i in range(n) if i != j]
        for k in range(1, len(others) + 1):
            for sub in itertools.combinations(others, k):
                M = [[int(a == b) for b in range(n)] for a in range(n)]
                for i in sub:
                    M[i][j] = 1
                if M not in cands:
                    cands.append(M)
    tries = 0
    while tries < max_tries:
        M = [[int(i == j) for j in range(n)] for i in range(n)]
        for i in range(n):
            for j in range(n):
                if i != j:
                    M[i][j] = rng.randint(-2, 2)
        if sympy.Matrix(M).det() != 0:
            cands.append(M)
        tries += 1
    best = None
    scores = []
    for M in cands:
        new = coordinate_change(rows, ctx, M) if M != cands[0] else list(rows)
        sc = _symbol_classes(new, ctx, m, order, q)
        scores.append(sc)
        if best is None or sc > best[0]:
            best = (sc, M, new)
    sc, M, new = best
    solved = solved_form(new, ctx, m, order)
    _, board = is_involutive(solved, ctx, m, order)
    tied = all(s == sc for s in scores)
    return Regularized(solved, M, board, sc, tied)


# characters and dimensions

def characters(B: JanetBasis, q: int | None = None) -> Characters:
    n, m = B.ctx.n, B.m
    q = B.q if q is None else q
    if q < 1:
        raise ValueError("characters need a positive order")
    cnt = B.leading_module_count(q)
    beta = tuple(cnt[i] for i in range(1, n + 1))
    alpha = tuple(m * comb(q + n - i - 1, n - i) - beta[i - 1] for i in range(1, n + 1))
    return Characters(q, n, m, beta, alpha)


def differential_rank(A: OpMatrix, seed: int = 0, with_characters: bool = False):
    """Differential rank of the operator, i.e. beta^n_q of its involutive form.

    The system is moved to delta-regular coordinates, completed, and beta^n is
    read from the leading module at the top order.  The count of components
    carrying a leading term is coordinate free and is used as a cross-check.
    """
    rows = [r for r in A.row_dicts() if r]
    if not rows:
        return (0, None) if with_characters else 0
    reg = delta_regularize(rows, A.ctx, A.cols, seed=seed, max_tries=8)
    B = complete(reg.rows, A.ctx, A.cols)
    ch = characters(B)
    invariant = A.cols - len(B.free_components())
    if ch.beta[-1] != invariant:
        import warnings

        warnings.warn("coordinates are not delta-regular; using the coordinate-free count")
        val = invariant
    else:
        val = ch.beta[-1]
    return (val, ch) if with_characters else val


def _prolongation_rank(B: JanetBasis, total: int, top_only: bool) -> int:
    """Rank over K of the span of ``d^mu g`` with ``|mu| + ord g <= total``.

    With ``top_only`` only the parts of order exactly ``total`` are kept.
    """
    dom = B.ctx.dom
    order = B.term_order
    e = Echelon(dom, order.key)
    for g in B._gens:
        o = R.row_order(g.row)
        for s in range(0, total - o + 1):
            for mu in R.monomials(B.ctx.n, s):
                v = g.pro(mu)
                if top_only:
                    if s + o != total:
                        continue
                    v = {k: a for k, a in v.items() if sum(k[1]) == total}
                if v:
                    e.add(v)
    return e.rank


@dataclass
class DimsReport:
    r: int
    q: int
    g_formula: int
    g_direct: int
    R_formula: int
    R_direct: int

    @property
    def agree(self) -> bool:
        return self.g_formula == self.g_direct and self.R_formula == self.R_direct


def dims_check(B: JanetBasis, r: int) -> DimsReport:
    """Closed-form and brute-force dimensions of g_{q+r} and R_{q+r}."""
    n, m = B.ctx.n, B.m
    ch = characters(B)
    q = ch.q
    g_formula = sum(comb(r + i - 1, r) * ch.alpha[i - 1] for i in range(1, n + 1))
    jets = lambda s: m * comb(s + n - 1, n - 1)
    g_direct = jets(q + r) - _prolongation_rank(B, q + r, True)
    all_jets = lambda s: sum(jets(t) for t in range(s + 1))
    R_low = all_jets(q - 1) - _prolongation_rank(B, q - 1, False) if q >= 1 else 0
    R_formula = R_low + sum(comb(r + i, r) * ch.alpha[i - 1] for i in range(1, n + 1))
    R_direct = all_jets(q + r) - _prolongation_rank(B, q + r, False)
    return DimsReport(r, q, g_formula, g_direct, R_formula, R_direct)
