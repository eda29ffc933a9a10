"""The payoff intermediate language.

Payoff expressions evaluate to a single discounted value. Time indices are
template sums (``ILTExpr``, naturals) or signed template sums (``ILTExprZ``,
used for observable lookups that may reach into the past). Evaluation takes
a loop clock ``t0`` that ``loopif`` advances and is added to every time index.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Callable, Iterable, Union

from contractc.errors import DivisionByZero, ParseError, SortMismatch
from contractc.lexer import TokenStream
from contractc.semantics import ExtEnv, TEnv, is_real, tsem
from contractc.syntax import TExpr, TNum, TVar

Disc = Callable[[int], float]
ILVal = Union[int, float, bool]


# -- template sums -------------------------------------------------------------


@dataclass(frozen=True)
class TE:
    t: TExpr


@dataclass(frozen=True)
class TPlus:
    left: "ILTExpr"
    right: "ILTExpr"


ILTExpr = Union[TE, TPlus]


@dataclass(frozen=True)
class TEZ:
    t: ILTExpr


@dataclass(frozen=True)
class NumZ:
    n: int


@dataclass(frozen=True)
class TPlusZ:
    left: "ILTExprZ"
    right: "ILTExprZ"


ILTExprZ = Union[TEZ, NumZ, TPlusZ]


def iltsem(t: ILTExpr, delta: TEnv) -> int:
    if isinstance(t, TE):
        return tsem(t.t, delta)
    return iltsem(t.left, delta) + iltsem(t.right, delta)


def iltsem_z(t: ILTExprZ, delta: TEnv) -> int:
    match t:
        case TEZ(t=inner):
            return iltsem(inner, delta)
        case NumZ(n=n):
            return n
        case TPlusZ(left=l, right=r):
            return iltsem_z(l, delta) + iltsem_z(r, delta)
    raise TypeError(f"not a template sum: {t!r}")


# -- expressions ----------------------------------------------------------------


class ILUnOp(enum.Enum):
    NEG = "neg"
    NOT = "not"


class ILBinOp(enum.Enum):
    ADD = "add"
    SUB = "sub"
    MULT = "mult"
    DIV = "div"
    MAX = "max"
    MIN = "min"
    LT = "lt"
    LE = "le"
    EQ = "eq"
    AND = "and"
    OR = "or"
    LTN = "ltn"  # on naturals: time indices and ``now``


@dataclass(frozen=True)
class If:
    cond: "ILExpr"
    then: "ILExpr"
    else_: "ILExpr"


@dataclass(frozen=True)
class FloatLit:
    value: float


@dataclass(frozen=True)
class NatLit:
    value: int


@dataclass(frozen=True)
class BoolLit:
    value: bool


@dataclass(frozen=True)
class TexprVal:
    t: ILTExpr


@dataclass(frozen=True)
class Now:
    pass


@dataclass(frozen=True)
class Model:
    label: str
    t: ILTExprZ


@dataclass(frozen=True)
class UnOp:
    op: ILUnOp
    arg: "ILExpr"


@dataclass(frozen=True)
class BinOp:
    op: ILBinOp
    left: "ILExpr"
    right: "ILExpr"


@dataclass(frozen=True)
class LoopIf:
    cond: "ILExpr"
    then: "ILExpr"
    else_: "ILExpr"
    bound: TExpr


@dataclass(frozen=True)
class Payoff:
    t: ILTExpr
    src: str
    dst: str


ILExpr = Union[If, FloatLit, NatLit, BoolLit, TexprVal, Now, Model, UnOp, BinOp, LoopIf, Payoff]


def _is_float(v: ILVal) -> bool:
    return isinstance(v, float)


def _is_nat(v: ILVal) -> bool:
    return isinstance(v, int) and not isinstance(v, bool)


_REAL_OPS = {
    ILBinOp.ADD: lambda a, b: a + b,
    ILBinOp.SUB: lambda a, b: a - b,
    ILBinOp.MULT: lambda a, b: a * b,
    ILBinOp.MAX: max,
    ILBinOp.MIN: min,
    ILBinOp.LT: lambda a, b: a < b,
    ILBinOp.LE: lambda a, b: a <= b,
    ILBinOp.EQ: lambda a, b: a == b,
}


def _binop(op: ILBinOp, a: ILVal, b: ILVal) -> ILVal:
    if op in _REAL_OPS:
        if not (_is_float(a) and _is_float(b)):
            raise SortMismatch(f"{op.value} expects reals, got {a!r}, {b!r}")
        return _REAL_OPS[op](a, b)
    if op is ILBinOp.DIV:
        if not (_is_float(a) and _is_float(b)):
            raise SortMismatch(f"div expects reals, got {a!r}, {b!r}")
        if b == 0:
            raise DivisionByZero("division by zero")
        return a / b
    if op in (ILBinOp.AND, ILBinOp.OR):
        if not (isinstance(a, bool) and isinstance(b, bool)):
            raise SortMismatch(f"{op.value} expects booleans, got {a!r}, {b!r}")
        return (a and b) if op is ILBinOp.AND else (a or b)
    if not (_is_nat(a) and _is_nat(b)):
        raise SortMismatch(f"ltn expects naturals, got {a!r}, {b!r}")
    return a < b


def _cond(v: ILVal) -> bool:
    if not isinstance(v, bool):
        raise SortMismatch(f"condition must be boolean, got {v!r}")
    return v


def il_sem(
    il: ILExpr,
    rho: ExtEnv,
    delta: TEnv,
    t0: int = 0,
    t_now: int = 0,
    disc: Disc = lambda _t: 1.0,
    p1: str = "",
    p2: str = "",
) -> ILVal:
    """Evaluate ``il``; failures raise an ``EvalError`` subclass."""

    def ev(e: ILExpr, t0: int) -> ILVal:
        match e:
            case FloatLit(value=v):
                return float(v)
            case NatLit(value=n):
                return n
            case BoolLit(value=b):
                return b
            case TexprVal(t=t):
                return iltsem(t, delta) + t0
            case Now():
                return t_now
            case Model(label=l, t=t):
                v = rho.lookup(l, iltsem_z(t, delta) + t0)
                return float(v) if is_real(v) else v
            case UnOp(op=ILUnOp.NEG, arg=a):
                v = ev(a, t0)
                if not _is_float(v):
                    raise SortMismatch(f"neg expects a real, got {v!r}")
                return -v
            case UnOp(op=ILUnOp.NOT, arg=a):
                return not _cond(ev(a, t0))
            case BinOp(op=op, left=a, right=b):
                return _binop(op, ev(a, t0), ev(b, t0))
            case If(cond=c, then=a, else_=b):
                return ev(a, t0) if _cond(ev(c, t0)) else ev(b, t0)
            case LoopIf(cond=c, then=a, else_=b, bound=bound):
                remaining = tsem(bound, delta)
                clock = t0
                while True:
                    if _cond(ev(c, clock)):
                        return ev(a, clock)
                    if remaining == 0:
                        return ev(b, clock)
                    remaining -= 1
                    clock += 1
            case Payoff(t=t, src=x, dst=y):
                if x == p1 and y == p2:
                    return float(disc(iltsem(t, delta) + t0))
                if x == p2 and y == p1:
                    return -float(disc(iltsem(t, delta) + t0))
                return 0.0
        raise TypeError(f"not a payoff expression: {e!r}")

    return ev(il, t0)


def cut_payoff(il: ILExpr) -> ILExpr:
    """Guard every payoff so that it contributes nothing before ``now``."""
    match il:
        case Payoff(t=t):
            return If(BinOp(ILBinOp.LTN, TexprVal(t), Now()), FloatLit(0.0), il)
        case If(cond=c, then=a, else_=b):
            return If(cut_payoff(c), cut_payoff(a), cut_payoff(b))
        case LoopIf(cond=c, then=a, else_=b, bound=n):
            return LoopIf(cut_payoff(c), cut_payoff(a), cut_payoff(b), n)
        case UnOp(op=op, arg=a):
            return UnOp(op, cut_payoff(a))
        case BinOp(op=op, left=a, right=b):
            return BinOp(op, cut_payoff(a), cut_payoff(b))
    return il


EvalCase = tuple  # (rho, delta, disc, p1, p2)


def il_equiv_at(il1: ILExpr, il2: ILExpr, t0: int, t_now: int, cases: Iterable[EvalCase]) -> bool:
    """Finite-sample check that ``il1`` and ``il2`` agree at ``(t0, t_now)``."""
    return all(
        il_sem(il1, rho, delta, t0, t_now, disc, p1, p2) == il_sem(il2, rho, delta, t0, t_now, disc, p1, p2)
        for rho, delta, disc, p1, p2 in cases
    )


def subterms(il: ILExpr):
    yield il
    match il:
        case If(cond=c, then=a, else_=b) | LoopIf(cond=c, then=a, else_=b):
            yield from subterms(c)
            yield from subterms(a)
            yield from subterms(b)
        case UnOp(arg=a):
            yield from subterms(a)
        case BinOp(left=a, right=b):
            yield from subterms(a)
            yield from subterms(b)


# -- canonical text -------------------------------------------------------------

_INFIX = {
    ILBinOp.OR: "||",
    ILBinOp.AND: "&&",
    ILBinOp.LT: "<",
    ILBinOp.LE: "<=",
    ILBinOp.EQ: "==",
    ILBinOp.ADD: "+",
    ILBinOp.SUB: "-",
    ILBinOp.MULT: "*",
    ILBinOp.DIV: "/",
}
_PREFIX = {ILBinOp.MAX: "max", ILBinOp.MIN: "min", ILBinOp.LTN: "ltn"}


def _texpr(t: TExpr) -> str:
    return str(t.n) if isinstance(t, TNum) else t.name


def print_iltexpr(t: ILTExpr) -> str:
    if isinstance(t, TE):
        return _texpr(t.t)
    right = print_iltexpr(t.right)
    return f"{print_iltexpr(t.left)}+{right if isinstance(t.right, TE) else f'({right})'}"


def print_iltexpr_z(t: ILTExprZ) -> str:
    match t:
        case TEZ(t=inner):
            return print_iltexpr(inner)
        case NumZ(n=n):
            return str(n)
        case TPlusZ(left=l, right=NumZ(n=n)) if n < 0:
            return f"{print_iltexpr_z(l)}-{-n}"
        case TPlusZ(left=l, right=r):
            right = print_iltexpr_z(r)
            simple = isinstance(r, NumZ) or (isinstance(r, TEZ) and isinstance(r.t, TE))
            return f"{print_iltexpr_z(l)}+{right if simple else f'({right})'}"
    raise TypeError(f"not a template sum: {t!r}")


def print_il(il: ILExpr, top: bool = True) -> str:
    """Canonical text, e.g. ``(100.0 * payoff(t0, you, me)) + ...``."""
    match il:
        case FloatLit(value=v):
            return repr(float(v))
        case NatLit(value=n):
            return str(n)
        case BoolLit(value=b):
            return "true" if b else "false"
        case TexprVal(t=t):
            return f"texpr({print_iltexpr(t)})"
        case Now():
            return "now"
        case Model(label=l, t=t):
            return f"model({l}, {print_iltexpr_z(t)})"
        case UnOp(op=op, arg=a):
            return f"{op.value}({print_il(a)})"
        case BinOp(op=op, left=a, right=b) if op in _INFIX:
            text = f"{print_il(a, False)} {_INFIX[op]} {print_il(b, False)}"
            return text if top else f"({text})"
        case BinOp(op=op, left=a, right=b):
            return f"{_PREFIX[op]}({print_il(a)}, {print_il(b)})"
        case If(cond=c, then=a, else_=b):
            return f"if({print_il(c)}, {print_il(a)}, {print_il(b)})"
        case LoopIf(cond=c, then=a, else_=b, bound=n):
            return f"loopif({print_il(c)}, {print_il(a)}, {print_il(b)}, {_texpr(n)})"
        case Payoff(t=t, src=x, dst=y):
            return f"payoff({print_iltexpr(t)}, {x}, {y})"
    raise TypeError(f"not a payoff expression: {il!r}")


_OR, _AND, _CMP, _ADD, _MUL = range(1, 6)
_PARSE_INFIX = {
    "||": (ILBinOp.OR, _OR, False),
    "&&": (ILBinOp.AND, _AND, False),
    "<": (ILBinOp.LT, _CMP, False),
    "<=": (ILBinOp.LE, _CMP, False),
    "==": (ILBinOp.EQ, _CMP, False),
    ">": (ILBinOp.LT, _CMP, True),
    ">=": (ILBinOp.LE, _CMP, True),
    "+": (ILBinOp.ADD, _ADD, False),
    "-": (ILBinOp.SUB, _ADD, False),
    "*": (ILBinOp.MULT, _MUL, False),
    "/": (ILBinOp.DIV, _MUL, False),
}
_PARSE_PREFIX = {"max": ILBinOp.MAX, "min": ILBinOp.MIN, "ltn": ILBinOp.LTN}


class _ILParser:
    def __init__(self, src: str):
        self.ts = TokenStream(src)

    def texpr(self) -> TExpr:
        if self.ts.peek.kind == "ident":
            return TVar(self.ts.next().text)
        return TNum(self.ts.natural("template expression"))

    def _terms(self) -> list[tuple[bool, object]]:
        """Signed terms of a template sum; a term is a TExpr, an int or a nested list."""
        terms = []
        negative = self.ts.accept("-")
        while True:
            if self.ts.accept("("):
                term = self._terms()
                self.ts.expect(")")
            elif self.ts.peek.kind == "num":
                term = self.ts.natural()
            else:
                term = TVar(self.ts.ident("template variable"))
            terms.append((negative, term))
            if self.ts.accept("+"):
                negative = False
            elif self.ts.accept("-"):
                negative = True
            else:
                return terms

    @staticmethod
    def _natural(terms) -> bool:
        return all(not neg and (not isinstance(t, list) or _ILParser._natural(t)) for neg, t in terms)

    @staticmethod
    def _to_nat(terms) -> ILTExpr:
        out = None
        for _neg, t in terms:
            if isinstance(t, list):
                leaf = _ILParser._to_nat(t)
            else:
                leaf = TE(TNum(t) if isinstance(t, int) else t)
            out = leaf if out is None else TPlus(out, leaf)
        return out

    @staticmethod
    def _to_z(terms) -> ILTExprZ:
        # Longest natural prefix becomes one ILTExpr; the rest is added signed.
        k = 0
        while k < len(terms) and _ILParser._natural(terms[k:k + 1]):
            k += 1
        out = TEZ(_ILParser._to_nat(terms[:k])) if k else None
        for neg, t in terms[k:]:
            if isinstance(t, list):
                leaf = _ILParser._to_z(t)
                if neg:
                    raise ParseError("cannot negate a parenthesised template sum")
            elif isinstance(t, int):
                leaf = NumZ(-t) if neg else TEZ(TE(TNum(t)))
            else:
                if neg:
                    raise ParseError(f"cannot negate template variable {t.name}")
                leaf = TEZ(TE(t))
            out = leaf if out is None else TPlusZ(out, leaf)
        return out

    def iltexpr(self) -> ILTExpr:
        tok = self.ts.peek
        terms = self._terms()
        if not self._natural(terms):
            raise ParseError("payoff times must be natural", tok.line, tok.col)
        return self._to_nat(terms)

    def iltexpr_z(self) -> ILTExprZ:
        return self._to_z(self._terms())

    def exp(self, min_prec: int = _OR) -> ILExpr:
        left = self.unary()
        while True:
            tok = self.ts.peek
            if tok.kind != "punct" or tok.text not in _PARSE_INFIX:
                return left
            op, prec, swap = _PARSE_INFIX[tok.text]
            if prec < min_prec:
                return left
            self.ts.next()
            right = self.exp(prec + 1)
            left = BinOp(op, right, left) if swap else BinOp(op, left, right)

    def unary(self) -> ILExpr:
        ts = self.ts
        if ts.accept("-"):
            if ts.peek.kind == "num":
                return FloatLit(-float(ts.next().text))
            return UnOp(ILUnOp.NEG, self.unary())
        if ts.accept("!"):
            return UnOp(ILUnOp.NOT, self.unary())
        return self.atom()

    def _args(self, n: int) -> list[ILExpr]:
        args = [self.exp()]
        for _ in range(n - 1):
            self.ts.expect(",")
            args.append(self.exp())
        return args

    def atom(self) -> ILExpr:
        ts = self.ts
        tok = ts.peek
        if tok.kind == "num":
            ts.next()
            return NatLit(int(tok.text)) if tok.text.isdigit() else FloatLit(float(tok.text))
        if ts.accept("("):
            e = self.exp()
            ts.expect(")")
            return e
        name = ts.ident("payoff expression")
        if name in ("true", "false"):
            return BoolLit(name == "true")
        if name == "now":
            return Now()
        ts.expect("(")
        match name:
            case "model":
                label = ts.ident("label")
                ts.expect(",")
                e = Model(label, self.iltexpr_z())
            case "payoff":
                t = self.iltexpr()
                ts.expect(",")
                x = ts.ident("party")
                ts.expect(",")
                e = Payoff(t, x, ts.ident("party"))
            case "texpr":
                e = TexprVal(self.iltexpr())
            case "if":
                e = If(*self._args(3))
            case "loopif":
                c, a, b = self._args(3)
                ts.expect(",")
                e = LoopIf(c, a, b, self.texpr())
            case "neg" | "not":
                e = UnOp(ILUnOp(name), self.exp())
            case _ if name in _PARSE_PREFIX:
                e = BinOp(_PARSE_PREFIX[name], *self._args(2))
            case _:
                raise ParseError(f"unknown payoff construct {name!r}", tok.line, tok.col)
        ts.expect(")")
        return e


def parse_il(src: str) -> ILExpr:
    """Parse payoff text. ``a > b`` and ``a >= b`` read as ``b < a`` and ``b <= a``."""
    p = _ILParser(src)
    e = p.exp()
    p.ts.expect_eof()
    return e
