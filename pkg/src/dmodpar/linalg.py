"""Sparse exact Gaussian elimination over a coefficient domain.

Vectors are dicts ``{column: value}``; columns are compared through a key
function and the largest column of a vector is its pivot.
"""

from __future__ import annotations

from typing import Callable, Dict, Hashable, Iterable, List, Optional

from . import rows as R


class Echelon:
    """Incremental echelon form of a K-subspace.

    ``track=True`` records, for every stored row, the combination of the
    inserted vectors (by insertion counter) that produced it.
    """

    def __init__(self, dom, key: Callable[[Hashable], tuple], track: bool = False):
        self.dom = dom
        self._key = key
        self._cache: Dict[Hashable, tuple] = {}
        self.pivots: Dict[Hashable, dict] = {}
        self.track = track
        self.combos: Dict[Hashable, dict] = {}
        self.count = 0

    def key(self, col):
        k = self._cache.get(col)
        if k is None:
            k = self._key(col)
            self._cache[col] = k
        return k

    def lead(self, v: dict):
        return max(v, key=self.key)

    @property
    def rank(self) -> int:
        return len(self.pivots)

    def reduce(self, v: dict, full: bool = True, combo: Optional[dict] = None) -> dict:
        """Residual of ``v`` modulo the stored span.

        With ``full`` the residual contains no pivot column at all, which makes
        it a canonical representative of the class of ``v``.
        """
        v = dict(v)
        out = {}
        piv = self.pivots
        while v:
            c = max(v, key=self.key)
            a = v[c]
            row = piv.get(c)
            if row is None:
                if not full:
                    out.update(v)
                    return out
                out[c] = a
                del v[c]
                continue
            R.axpy(v, -a, row)
            if combo is not None:
                R.axpy(combo, -a, self.combos[c])
        return out

    def contains(self, v: dict) -> bool:
        return not self.reduce(v, full=False)

    def add(self, v: dict) -> Optional[dict]:
        """Insert ``v``; returns the new normalized pivot row or None if dependent."""
        idx = self.count
        self.count += 1
        combo = {idx: self.dom.one} if self.track else None
        r = self.reduce(v, full=False, combo=combo)
        if not r:
            self.last_combo = combo
            return None
        c = self.lead(r)
        inv = self.dom.one / r[c]
        r = R.scale(inv, r)
        self.pivots[c] = r
        if self.track:
            self.combos[c] = R.scale(inv, combo)
        self.last_combo = None
        return r

    def rows(self) -> List[dict]:
        return list(self.pivots.values())

    def rref(self) -> List[dict]:
        """Fully reduced basis, sorted by decreasing pivot."""
        cols = sorted(self.pivots, key=self.key, reverse=True)
        done: Dict[Hashable, dict] = {}
        for c in reversed(cols):
            row = dict(self.pivots[c])
            for d in [d for d in row if d != c and d in done]:
                if d in row:
                    R.axpy(row, -row[d], done[d])
            done[c] = row
        return [done[c] for c in cols]


def rank(dom, vectors: Iterable[dict], key=None) -> int:
    e = Echelon(dom, key or _generic_key)
    for v in vectors:
        if v:
            e.add(v)
    return e.rank


def kernel(dom, vectors: List[dict], key=None) -> List[dict]:
    """Basis of ``{c : sum c_i v_i = 0}`` as dicts ``{i: c_i}``."""
    e = Echelon(dom, key or _generic_key, track=True)
    out = []
    for v in vectors:
        if e.add(v) is None:
            out.append(e.last_combo)
    return out


def _generic_key(col):
    return col if isinstance(col, tuple) else (col,)


def dense_rank(dom, matrix: List[List]) -> int:
    return rank(dom, ({j: a for j, a in enumerate(row) if a} for row in matrix))
