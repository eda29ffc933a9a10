"""Compilation of contracts and contract expressions to payoff expressions.

All relative time shifts are accumulated into the starting time ``t0``, so
the output only contains absolute template sums.
"""

from __future__ import annotations

import math
from typing import Callable

from contractc.errors import CompileError
from contractc.payoff import (
    BinOp, BoolLit, FloatLit, If, ILBinOp, ILExpr, ILTExpr, ILTExprZ, ILUnOp,
    LoopIf, Model, NumZ, Payoff, TE, TEZ, TPlus, TPlusZ, UnOp,
)
from contractc.semantics import ExtEnv, TEnv, VarAssign, csem, horizon
from contractc.syntax import (
    Acc, BLit, Both, Contr, Exp, IfWithin, Let, Obs, Op, OpCode, RLit, Scale,
    TNum, Transfer, Translate, VarE, Zero,
)

_BINOPS = {
    OpCode.ADD: ILBinOp.ADD,
    OpCode.SUB: ILBinOp.SUB,
    OpCode.MULT: ILBinOp.MULT,
    OpCode.DIV: ILBinOp.DIV,
    OpCode.MAX: ILBinOp.MAX,
    OpCode.MIN: ILBinOp.MIN,
    OpCode.LT: ILBinOp.LT,
    OpCode.LE: ILBinOp.LE,
    OpCode.EQ: ILBinOp.EQ,
    OpCode.AND: ILBinOp.AND,
    OpCode.OR: ILBinOp.OR,
}
# a > b is emitted as b < a.
_SWAPPED = {OpCode.GT: ILBinOp.LT, OpCode.GE: ILBinOp.LE}
_UNOPS = {OpCode.NEG: ILUnOp.NEG, OpCode.NOT: ILUnOp.NOT}


def _numeral(t: ILTExpr) -> int | None:
    if isinstance(t, TE) and isinstance(t.t, TNum):
        return t.t.n
    return None


def smart_tplus(t1: ILTExpr, t2: ILTExpr) -> ILTExpr:
    """Template addition that folds numerals and drops a zero summand."""
    n1, n2 = _numeral(t1), _numeral(t2)
    if n1 is not None and n2 is not None:
        return TE(TNum(n1 + n2))
    if n1 == 0:
        return t2
    if n2 == 0:
        return t1
    return TPlus(t1, t2)


def smart_tplus_z(t0: ILTExprZ, i: int) -> ILTExprZ:
    """Signed shift of a template sum by ``i`` days."""
    if i == 0:
        return t0
    base = t0.n if isinstance(t0, NumZ) else _numeral(t0.t) if isinstance(t0, TEZ) else None
    if base is not None:
        k = base + i
        return TEZ(TE(TNum(k))) if k >= 0 else NumZ(k)
    if isinstance(t0, TEZ) and i > 0:
        return TEZ(smart_tplus(t0.t, TE(TNum(i))))
    return TPlusZ(t0, NumZ(i) if i < 0 else TEZ(TE(TNum(i))))


def compile_exp(e: Exp, t0: ILTExprZ, path: tuple = ()) -> ILExpr:
    match e:
        case RLit(value=v):
            return FloatLit(float(v))
        case BLit(value=b):
            return BoolLit(b)
        case Obs(label=l, index=i):
            return Model(l.name, smart_tplus_z(t0, i))
        case VarE():
            raise CompileError(CompileError.UNSUPPORTED_VAR, path)
        case Acc():
            raise CompileError(CompileError.UNSUPPORTED_ACC, path)
        case Op(op=OpCode.COND, args=(b, x, y)):
            return If(
                compile_exp(b, t0, path + ("if.0",)),
                compile_exp(x, t0, path + ("if.1",)),
                compile_exp(y, t0, path + ("if.2",)),
            )
        case Op(op=op, args=args):
            parts = [compile_exp(a, t0, path + (f"{op.value}.{k}",)) for k, a in enumerate(args)]
            if op in _BINOPS:
                return BinOp(_BINOPS[op], *parts)
            if op in _SWAPPED:
                return BinOp(_SWAPPED[op], parts[1], parts[0])
            if op in _UNOPS:
                return UnOp(_UNOPS[op], *parts)
            raise CompileError(CompileError.UNKNOWN_OP, path)
    raise CompileError(CompileError.UNKNOWN_OP, path)


def compile_contract(c: Contr, t0: ILTExpr = TE(TNum(0)), path: tuple = ()) -> ILExpr:
    match c:
        case Zero():
            return FloatLit(0.0)
        case Transfer(src=p, dst=q):
            return Payoff(t0, p, q)
        case Scale(exp=e, body=b):
            return BinOp(
                ILBinOp.MULT,
                compile_exp(e, TEZ(t0), path + ("scale.exp",)),
                compile_contract(b, t0, path + ("scale",)),
            )
        case Translate(delay=t, body=b):
            return compile_contract(b, smart_tplus(t0, TE(t)), path + ("translate",))
        case Both(left=l, right=r):
            return BinOp(
                ILBinOp.ADD,
                compile_contract(l, t0, path + ("both.0",)),
                compile_contract(r, t0, path + ("both.1",)),
            )
        case IfWithin(cond=e, within=t, then=c1, else_=c2):
            cond = compile_exp(e, TEZ(t0), path + ("if.cond",))
            then = compile_contract(c1, t0, path + ("if.then",))
            else_ = compile_contract(c2, t0, path + ("if.else",))
            # A zero-day window is a plain conditional.
            if t == TNum(0):
                return If(cond, then, else_)
            return LoopIf(cond, then, else_, t)
        case Let():
            raise CompileError(CompileError.UNSUPPORTED_LET, path)
    raise CompileError(CompileError.UNKNOWN_OP, path)


def aggregate_price(
    c: Contr,
    gamma: VarAssign,
    rho: ExtEnv,
    delta: TEnv,
    disc: Callable[[int], float],
    p1: str,
    p2: str,
    from_time: int = 0,
) -> float:
    """Discounted sum of the net ``p1 -> p2`` cashflows of ``c`` up to its horizon.

    This is the denotational reference price that compiled code must match.
    ``from_time`` drops the cashflows of earlier days.
    """
    trace = csem(c, gamma, rho, delta)
    return math.fsum(
        disc(t) * trace(t).between(p1, p2)
        for t in range(from_time, horizon(c, delta) + 1)
    )
