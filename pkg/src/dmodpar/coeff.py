"""Exact coefficients: the differential field Q(c_1..c_k)(x_1..x_n).

Two raw representations are used behind one interface.  When no coefficient
depends on x and there are no parameters the raw elements are plain rationals
(``QQ``, gmpy2 ``mpq`` when available), which keeps constant-coefficient
computations fast.  Otherwise they are elements of a sympy ``FracField`` over
``QQ`` whose generators are the coordinates followed by the parameters.

Raw elements are what the algorithmic kernel manipulates; :class:`RatFunc` is
the public immutable wrapper.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Mapping

import sympy
from sympy.parsing.sympy_parser import (
    convert_xor,
    parse_expr,
    standard_transformations,
)
from sympy.polys.domains import QQ
from sympy.polys.fields import field

__all__ = [
    "Context",
    "RatFunc",
    "ContextError",
    "PoleError",
    "add",
    "mul",
    "inv",
    "derive",
    "specialize",
]


class ContextError(ValueError):
    """Operands live in different coefficient fields."""


class PoleError(ZeroDivisionError):
    """A substitution sent a denominator to zero."""


@dataclass(frozen=True)
class Context:
    """Coefficient context: number of coordinates, parameter names, and
    whether coefficients are allowed to depend on the coordinates.

    ``constant=True`` means the field is Q(c) and every derivative vanishes.
    """

    n: int
    params: tuple[str, ...] = ()
    constant: bool = True

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("need at least one independent variable")
        object.__setattr__(self, "params", tuple(self.params))
        clash = set(self.params) & set(self.coords)
        if clash:
            raise ValueError(f"parameter names clash with coordinates: {sorted(clash)}")

    @property
    def coords(self) -> tuple[str, ...]:
        return tuple(f"x{i + 1}" for i in range(self.n))

    @property
    def dom(self) -> "Domain":
        return _domain(self)

    def join(self, other: "Context") -> "Context":
        if self.n != other.n:
            raise ContextError(f"dimension mismatch: {self.n} vs {other.n}")
        params = self.params + tuple(p for p in other.params if p not in self.params)
        return Context(self.n, params, self.constant and other.constant)

    def variable(self) -> "Context":
        return Context(self.n, self.params, False)

    def __call__(self, value) -> "RatFunc":
        return RatFunc.from_value(self, value)


class Domain:
    """Raw arithmetic for one context."""

    def __init__(self, ctx: Context):
        self.ctx = ctx
        names = ([] if ctx.constant else list(ctx.coords)) + list(ctx.params)
        self.names = tuple(names)
        if names:
            K, *gens = field(",".join(names), QQ)
            if len(names) == 1:
                gens = [gens[0]] if not isinstance(gens[0], list) else gens[0]
            self.K = K
            self.gens = dict(zip(names, gens))
            self.zero = K.zero
            self.one = K.one
        else:
            self.K = None
            self.gens = {}
            self.zero = QQ(0)
            self.one = QQ(1)
        self.is_rational = self.K is None
        self._xgens = [self.gens[c] for c in ctx.coords] if not ctx.constant else []

    def from_int(self, k: int, den: int = 1):
        if self.K is None:
            return QQ(k, den)
        return self.K(QQ(k, den))

    def diff(self, a, i: int):
        """Partial derivative along coordinate ``i`` (0-based)."""
        if self.ctx.constant:
            return self.zero
        return a.diff(self._xgens[i])

    def is_const(self, a) -> bool:
        if self.ctx.constant:
            return True
        return all(not a.diff(g) for g in self._xgens)

    def from_expr(self, expr):
        expr = sympy.sympify(expr)
        if self.K is None:
            if not expr.is_Rational:
                raise ValueError(f"coefficient {expr} is not a rational number in this context")
            return QQ(int(expr.p), int(expr.q))
        free = {str(s) for s in expr.free_symbols}
        unknown = free - set(self.names)
        if unknown:
            raise ValueError(f"undeclared symbols in coefficient: {sorted(unknown)}")
        return self.K.from_expr(expr)

    def to_expr(self, a):
        if self.K is None:
            return sympy.Rational(int(a.numerator), int(a.denominator))
        return a.as_expr()

    def from_raw(self, a, src: "Domain"):
        """Convert a raw element of ``src`` into this domain."""
        if src is self:
            return a
        if src.K is None:
            return self.from_int(int(a.numerator), int(a.denominator))
        return self.from_expr(src.to_expr(a))

    def to_str(self, a) -> str:
        if self.K is None:
            return str(a)
        return str(a).replace("**", "^")

    def parse(self, text: str):
        return self.from_expr(parse_coeff(text, self.names))


@lru_cache(maxsize=None)
def _domain(ctx: Context) -> Domain:
    return Domain(ctx)


_TRANSFORMS = standard_transformations + (convert_xor,)


def parse_coeff(text: str, names) -> sympy.Expr:
    """Parse a coefficient expression with ``^`` or ``**`` for powers."""
    local = {name: sympy.Symbol(name) for name in names}
    try:
        expr = parse_expr(text, local_dict=local, transformations=_TRANSFORMS, evaluate=True)
    except Exception as exc:  # sympy raises a zoo of types here
        raise ValueError(f"cannot parse coefficient {text!r}: {exc}") from None
    return expr


class RatFunc:
    """Immutable element of the coefficient field of a :class:`Context`."""

    __slots__ = ("ctx", "raw")

    def __init__(self, ctx: Context, raw):
        self.ctx = ctx
        self.raw = raw

    @classmethod
    def from_value(cls, ctx: Context, value) -> "RatFunc":
        dom = ctx.dom
        if isinstance(value, RatFunc):
            return value.to_context(ctx)
        if isinstance(value, str):
            return cls(ctx, dom.parse(value))
        if isinstance(value, int):
            return cls(ctx, dom.from_int(value))
        return cls(ctx, dom.from_expr(value))

    @classmethod
    def coord(cls, ctx: Context, i: int) -> "RatFunc":
        if ctx.constant:
            raise ContextError("coordinates are not available in a constant context")
        return cls(ctx, ctx.dom.gens[f"x{i}"])

    @classmethod
    def param(cls, ctx: Context, name: str) -> "RatFunc":
        return cls(ctx, ctx.dom.gens[name])

    def to_context(self, ctx: Context) -> "RatFunc":
        if ctx == self.ctx:
            return self
        return RatFunc(ctx, ctx.dom.from_raw(self.raw, self.ctx.dom))

    def _check(self, other) -> "RatFunc":
        if isinstance(other, int):
            return RatFunc(self.ctx, self.ctx.dom.from_int(other))
        if not isinstance(other, RatFunc):
            return NotImplemented
        if other.ctx != self.ctx:
            raise ContextError(f"context mismatch: {self.ctx} vs {other.ctx}")
        return other

    def __add__(self, other):
        other = self._check(other)
        if other is NotImplemented:
            return other
        return RatFunc(self.ctx, self.raw + other.raw)

    __radd__ = __add__

    def __sub__(self, other):
        other = self._check(other)
        if other is NotImplemented:
            return other
        return RatFunc(self.ctx, self.raw - other.raw)

    def __rsub__(self, other):
        return (-self) + other

    def __neg__(self):
        return RatFunc(self.ctx, -self.raw)

    def __mul__(self, other):
        other = self._check(other)
        if other is NotImplemented:
            return other
        return RatFunc(self.ctx, self.raw * other.raw)

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = self._check(other)
        if other is NotImplemented:
            return other
        return self * inv(other)

    def __rtruediv__(self, other):
        other = self._check(other)
        if other is NotImplemented:
            return other
        return other * inv(self)

    def __pow__(self, k: int):
        if k < 0:
            return inv(self) ** (-k)
        return RatFunc(self.ctx, self.raw**k)

    def __eq__(self, other):
        if isinstance(other, int):
            other = RatFunc(self.ctx, self.ctx.dom.from_int(other))
        if not isinstance(other, RatFunc):
            return NotImplemented
        return self.ctx == other.ctx and self.raw == other.raw

    def __hash__(self):
        return hash((self.ctx, str(self)))

    def __bool__(self):
        return bool(self.raw)

    def is_zero(self) -> bool:
        return not self.raw

    def __str__(self):
        return self.ctx.dom.to_str(self.raw)

    def __repr__(self):
        return f"RatFunc({self})"

    def as_expr(self) -> sympy.Expr:
        return self.ctx.dom.to_expr(self.raw)

    @property
    def numerator(self) -> sympy.Expr:
        return sympy.fraction(sympy.cancel(self.as_expr()))[0]

    @property
    def denominator(self) -> sympy.Expr:
        return sympy.fraction(sympy.cancel(self.as_expr()))[1]


def _pair(f: RatFunc, g: RatFunc):
    if f.ctx != g.ctx:
        raise ContextError(f"context mismatch: {f.ctx} vs {g.ctx}")


def add(f: RatFunc, g: RatFunc) -> RatFunc:
    _pair(f, g)
    return RatFunc(f.ctx, f.raw + g.raw)


def mul(f: RatFunc, g: RatFunc) -> RatFunc:
    _pair(f, g)
    return RatFunc(f.ctx, f.raw * g.raw)


def inv(f: RatFunc) -> RatFunc:
    if not f.raw:
        raise ZeroDivisionError("inverse of zero")
    return RatFunc(f.ctx, f.ctx.dom.one / f.raw)


def derive(f: RatFunc, i: int) -> RatFunc:
    """Partial derivative along x_i, with ``i`` 1-based as in the notation."""
    if not 1 <= i <= f.ctx.n:
        raise IndexError(f"axis {i} outside 1..{f.ctx.n}")
    return RatFunc(f.ctx, f.ctx.dom.diff(f.raw, i - 1))


def specialize_raw(dom: Domain, a, bindings: Mapping[str, object], target: Domain):
    if dom.K is None:
        return target.from_raw(a, dom)
    subs = {sympy.Symbol(k): sympy.Rational(v) for k, v in bindings.items()}
    num = a.numer.as_expr().subs(subs)
    den = a.denom.as_expr().subs(subs)
    if sympy.expand(den) == 0:
        raise PoleError(f"denominator vanishes under {dict(bindings)}")
    return target.from_expr(sympy.cancel(num / den))


def specialize(f: RatFunc, bindings: Mapping[str, object]) -> RatFunc:
    """Substitute rational values for some parameters.

    The result lives in the context with those parameters removed.
    """
    unknown = set(bindings) - set(f.ctx.params)
    if unknown:
        raise KeyError(f"not parameters of this context: {sorted(unknown)}")
    ctx = Context(f.ctx.n, tuple(p for p in f.ctx.params if p not in bindings), f.ctx.constant)
    return RatFunc(ctx, specialize_raw(f.ctx.dom, f.raw, bindings, ctx.dom))
