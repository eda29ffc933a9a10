"""Denotational semantics: expression values, cashflow traces, horizons.

Values are plain Python ``float`` (Real) and ``bool`` (Bool). A trace is a
finitely supported map from day to a transfer, and a transfer is a finitely
supported map from ``(payer, payee, asset)`` to an amount.
"""

from __future__ import annotations

import math
from typing import Callable, Iterable, Iterator, Mapping, Union

from contractc.errors import (
    DivisionByZero, MissingObservable, SortMismatch, UnboundTemplateVar, UnboundVariable,
)
from contractc.syntax import (
    Acc, BLit, Both, Contr, Exp, IfWithin, Let, Obs, Op, OpCode, RLit, Scale,
    TExpr, TNum, Transfer, Translate, Ty, VarE, Zero,
)

Value = Union[float, bool]
TEnv = Mapping[str, int]
VarAssign = Mapping[str, Value]

REL_TOL = 1e-9
ABS_TOL = 1e-9


class ExtEnv:
    """External environment: ``(label, day) -> value``.

    Days are integers relative to the environment's origin; ``advance``
    moves the origin without copying the table. Partial and total
    environments share this type, a missing key raises ``MissingObservable``.
    """

    __slots__ = ("_entries", "_shift")

    def __init__(self, entries: Mapping[tuple[str, int], Value] | None = None):
        self._entries = dict(entries or {})
        self._shift = 0

    def lookup(self, label: str, day: int) -> Value:
        try:
            return self._entries[(label, day + self._shift)]
        except KeyError:
            raise MissingObservable(f"no value for observable {label} at day {day + self._shift}") from None

    def __contains__(self, key: tuple[str, int]) -> bool:
        label, day = key
        return (label, day + self._shift) in self._entries

    def advance(self, n: int) -> "ExtEnv":
        if n == 0:
            return self
        shifted = ExtEnv.__new__(ExtEnv)
        shifted._entries = self._entries
        shifted._shift = self._shift + n
        return shifted

    def items(self) -> Iterator[tuple[tuple[str, int], Value]]:
        for (label, day), v in self._entries.items():
            yield (label, day - self._shift), v

    def restrict(self, keep: Callable[[str, int], bool]) -> "ExtEnv":
        return ExtEnv({k: v for k, v in self.items() if keep(*k)})

    def up_to(self, last_day: int) -> "ExtEnv":
        """The historical part: entries at or before ``last_day``."""
        return self.restrict(lambda _label, day: day <= last_day)

    def union(self, other: "ExtEnv") -> "ExtEnv":
        """Combine two environments; entries of ``self`` win on collision."""
        merged = dict(other.items())
        merged.update(self.items())
        return ExtEnv(merged)

    def __len__(self) -> int:
        return len(self._entries)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, ExtEnv):
            return NotImplemented
        return dict(self.items()) == dict(other.items())

    def __repr__(self) -> str:
        return f"ExtEnv({dict(self.items())!r})"


def adv_env(rho: ExtEnv, n: int) -> ExtEnv:
    return rho.advance(n)


def tsem(t: TExpr, delta: TEnv) -> int:
    if isinstance(t, TNum):
        return t.n
    try:
        return delta[t.name]
    except KeyError:
        raise UnboundTemplateVar(f"template variable {t.name!r} is not bound") from None


# -- expressions ------------------------------------------------------------


def is_real(v: object) -> bool:
    return isinstance(v, (float, int)) and not isinstance(v, bool)


def _reals(op: OpCode, args: tuple) -> tuple:
    if not all(is_real(a) for a in args):
        raise SortMismatch(f"{op.value} expects Real arguments, got {args!r}")
    return args


def _bools(op: OpCode, args: tuple) -> tuple:
    if not all(isinstance(a, bool) for a in args):
        raise SortMismatch(f"{op.value} expects Bool arguments, got {args!r}")
    return args


def apply_op(op: OpCode, args: tuple) -> Value:
    """Semantics of an expression operator on evaluated arguments."""
    match op:
        case OpCode.ADD:
            a, b = _reals(op, args)
            return float(a + b)
        case OpCode.SUB:
            a, b = _reals(op, args)
            return float(a - b)
        case OpCode.MULT:
            a, b = _reals(op, args)
            return float(a * b)
        case OpCode.DIV:
            a, b = _reals(op, args)
            if b == 0:
                raise DivisionByZero("division by zero")
            return float(a / b)
        case OpCode.MAX:
            a, b = _reals(op, args)
            return float(max(a, b))
        case OpCode.MIN:
            a, b = _reals(op, args)
            return float(min(a, b))
        case OpCode.LT:
            a, b = _reals(op, args)
            return a < b
        case OpCode.LE:
            a, b = _reals(op, args)
            return a <= b
        case OpCode.EQ:
            a, b = _reals(op, args)
            return a == b
        case OpCode.GE:
            a, b = _reals(op, args)
            return a >= b
        case OpCode.GT:
            a, b = _reals(op, args)
            return a > b
        case OpCode.AND:
            a, b = _bools(op, args)
            return a and b
        case OpCode.OR:
            a, b = _bools(op, args)
            return a or b
        case OpCode.NOT:
            (a,) = _bools(op, args)
            return not a
        case OpCode.NEG:
            (a,) = _reals(op, args)
            return float(-a)
        case OpCode.COND:
            b, x, y = args
            if not isinstance(b, bool):
                raise SortMismatch(f"if expects a Bool condition, got {b!r}")
            if isinstance(x, bool) != isinstance(y, bool):
                raise SortMismatch("if branches have different sorts")
            return x if b else y
    raise SortMismatch(f"unknown operator {op!r}")


def esem(e: Exp, gamma: VarAssign, rho: ExtEnv) -> Value:
    match e:
        case RLit(value=v):
            return float(v)
        case BLit(value=b):
            return b
        case VarE(name=x):
            try:
                return gamma[x]
            except KeyError:
                raise UnboundVariable(f"variable {x!r} is not bound") from None
        case Obs(label=l, index=i):
            v = rho.lookup(l.name, i)
            if isinstance(v, bool) != (l.sort is Ty.BOOL):
                raise SortMismatch(f"observable {l.name} holds {v!r}, expected {l.sort}")
            return v
        case Op(op=op, args=args):
            return apply_op(op, tuple(esem(a, gamma, rho) for a in args))
        case Acc(var=x, body=body, days=d, init=init):
            # Unrolled: start from init d days back, fold the body forward.
            v = esem(init, gamma, rho.advance(-d))
            for k in range(d - 1, -1, -1):
                v = esem(body, {**gamma, x: v}, rho.advance(-k))
            return v
    raise TypeError(f"not an expression: {e!r}")


# -- transfers and traces ---------------------------------------------------

Key = tuple[str, str, str]


def _close(a: float, b: float, rel: float, abs_: float) -> bool:
    return math.isclose(a, b, rel_tol=rel, abs_tol=abs_)


class Trans:
    """One day's transfers. Zero entries are never stored."""

    __slots__ = ("_m",)

    def __init__(self, entries: Mapping[Key, float] | Iterable[tuple[Key, float]] = ()):
        items = entries.items() if isinstance(entries, Mapping) else entries
        self._m: dict[Key, float] = {k: float(v) for k, v in items if v != 0}

    @classmethod
    def unit(cls, payer: str, payee: str, asset: str) -> "Trans":
        if payer == payee:
            return cls()
        return cls({(payer, payee, asset): 1.0, (payee, payer, asset): -1.0})

    def __call__(self, payer: str, payee: str, asset: str) -> float:
        return self._m.get((payer, payee, asset), 0.0)

    def between(self, p1: str, p2: str) -> float:
        """Net amount from ``p1`` to ``p2`` summed over all assets."""
        return math.fsum(v for (p, q, _a), v in self._m.items() if p == p1 and q == p2)

    def items(self):
        return self._m.items()

    def is_zero(self) -> bool:
        return not self._m

    def __add__(self, other: "Trans") -> "Trans":
        out = dict(self._m)
        for k, v in other._m.items():
            out[k] = out.get(k, 0.0) + v
        return Trans(out)

    def __rmul__(self, r: float) -> "Trans":
        return Trans({k: r * v for k, v in self._m.items()})

    def __neg__(self) -> "Trans":
        return -1.0 * self

    def __sub__(self, other: "Trans") -> "Trans":
        return self + (-other)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Trans):
            return NotImplemented
        return self._m == other._m

    def close(self, other: "Trans", rel: float = REL_TOL, abs_: float = ABS_TOL) -> bool:
        keys = self._m.keys() | other._m.keys()
        return all(_close(self._m.get(k, 0.0), other._m.get(k, 0.0), rel, abs_) for k in keys)

    def is_antisymmetric(self, rel: float = REL_TOL, abs_: float = ABS_TOL) -> bool:
        return all(
            p != q and _close(v, -self(q, p, a), rel, abs_)
            for (p, q, a), v in self._m.items()
        )

    def __repr__(self) -> str:
        return f"Trans({self._m!r})"


T_ZERO = Trans()


class Trace:
    """A finitely supported map ``day -> Trans``."""

    __slots__ = ("_days",)

    def __init__(self, days: Mapping[int, Trans] | None = None):
        self._days: dict[int, Trans] = {n: t for n, t in (days or {}).items() if not t.is_zero()}

    @classmethod
    def zero(cls) -> "Trace":
        return cls()

    @classmethod
    def unit(cls, payer: str, payee: str, asset: str) -> "Trace":
        return cls({0: Trans.unit(payer, payee, asset)})

    def __call__(self, n: int) -> Trans:
        return self._days.get(n, T_ZERO)

    def support(self) -> list[int]:
        return sorted(self._days)

    def __add__(self, other: "Trace") -> "Trace":
        out = dict(self._days)
        for n, t in other._days.items():
            out[n] = out[n] + t if n in out else t
        return Trace(out)

    def __rmul__(self, r: float) -> "Trace":
        return Trace({n: r * t for n, t in self._days.items()})

    def __neg__(self) -> "Trace":
        return -1.0 * self

    def delay(self, d: int) -> "Trace":
        if d == 0:
            return self
        return Trace({n + d: t for n, t in self._days.items()})

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Trace):
            return NotImplemented
        return self._days == other._days

    def close(self, other: "Trace", rel: float = REL_TOL, abs_: float = ABS_TOL) -> bool:
        days = self._days.keys() | other._days.keys()
        return all(self(n).close(other(n), rel, abs_) for n in days)

    def __repr__(self) -> str:
        return f"Trace({self._days!r})"


def delay(d: int, tr: Trace) -> Trace:
    return tr.delay(d)


def trace_scale(s: float, tr: Trace) -> Trace:
    return s * tr


def trace_add(tr1: Trace, tr2: Trace) -> Trace:
    return tr1 + tr2


# -- contracts --------------------------------------------------------------


def _real_value(v: Value, what: str) -> float:
    if not is_real(v):
        raise SortMismatch(f"{what} must be Real, got {v!r}")
    return float(v)


def csem(c: Contr, gamma: VarAssign, rho: ExtEnv, delta: TEnv) -> Trace:
    """The cashflow trace of ``c``; ``translate`` and ``ifWithin`` advance ``rho``."""
    match c:
        case Zero():
            return Trace.zero()
        case Transfer(src=p, dst=q, asset=a):
            return Trace.unit(p, q, a)
        case Scale(exp=e, body=b):
            r = _real_value(esem(e, gamma, rho), "scale factor")
            return r * csem(b, gamma, rho, delta)
        case Both(left=l, right=r):
            return csem(l, gamma, rho, delta) + csem(r, gamma, rho, delta)
        case Translate(delay=t, body=b):
            n = tsem(t, delta)
            return csem(b, gamma, rho.advance(n), delta).delay(n)
        case Let(var=x, exp=e, body=b):
            return csem(b, {**gamma, x: esem(e, gamma, rho)}, rho, delta)
        case IfWithin(cond=e, within=t, then=c1, else_=c2):
            remaining = tsem(t, delta)
            waited = 0
            while True:
                here = rho.advance(waited)
                b = esem(e, gamma, here)
                if not isinstance(b, bool):
                    raise SortMismatch(f"ifWithin condition must be Bool, got {b!r}")
                if b:
                    return csem(c1, gamma, here, delta).delay(waited)
                if remaining == 0:
                    return csem(c2, gamma, here, delta).delay(waited)
                remaining -= 1
                waited += 1
    raise TypeError(f"not a contract: {c!r}")


def _oplus(a: int, b: int) -> int:
    return 0 if b == 0 else a + b


def horizon(c: Contr, delta: TEnv) -> int:
    """Conservative bound: the trace of ``c`` is zero from this day on."""
    match c:
        case Zero():
            return 0
        case Transfer():
            return 1
        case Scale(body=b) | Let(body=b):
            return horizon(b, delta)
        case Translate(delay=t, body=b):
            return _oplus(tsem(t, delta), horizon(b, delta))
        case Both(left=l, right=r):
            return max(horizon(l, delta), horizon(r, delta))
        case IfWithin(within=t, then=c1, else_=c2):
            return _oplus(tsem(t, delta), max(horizon(c1, delta), horizon(c2, delta)))
    raise TypeError(f"not a contract: {c!r}")


def instantiate(c: Contr, delta: TEnv) -> Contr:
    """Replace every template variable by its value in ``delta``.

    ``let`` and ``scale`` wrappers are kept, so the result has the same
    semantics as ``c`` under ``delta``.
    """
    match c:
        case Zero() | Transfer():
            return c
        case Let(var=x, exp=e, body=b):
            return Let(x, e, instantiate(b, delta))
        case Scale(exp=e, body=b):
            return Scale(e, instantiate(b, delta))
        case Translate(delay=t, body=b):
            return Translate(TNum(tsem(t, delta)), instantiate(b, delta))
        case Both(left=l, right=r):
            return Both(instantiate(l, delta), instantiate(r, delta))
        case IfWithin(cond=e, within=t, then=c1, else_=c2):
            return IfWithin(e, TNum(tsem(t, delta)), instantiate(c1, delta), instantiate(c2, delta))
    raise TypeError(f"not a contract: {c!r}")


def is_template_closed(c: Contr) -> bool:
    match c:
        case Zero() | Transfer():
            return True
        case Let(body=b) | Scale(body=b):
            return is_template_closed(b)
        case Translate(delay=t, body=b):
            return isinstance(t, TNum) and is_template_closed(b)
        case Both(left=l, right=r):
            return is_template_closed(l) and is_template_closed(r)
        case IfWithin(within=t, then=c1, else_=c2):
            return isinstance(t, TNum) and is_template_closed(c1) and is_template_closed(c2)
    raise TypeError(f"not a contract: {c!r}")

