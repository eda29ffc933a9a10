"""Type system for contract expressions and contracts."""

from __future__ import annotations

from typing import Mapping

from contractc.errors import TypeCheckError
from contractc.syntax import (
    Acc, BLit, Both, Contr, Exp, IfWithin, Let, Obs, Op, OpCode, RLit, Scale,
    Transfer, Translate, Ty, VarE, Zero, labels_of,
)

REAL, BOOL = Ty.REAL, Ty.BOOL

# Stands for either sort in the conditional's signature.
TAU = "tau"

_SIGNATURES = {
    **{op: ((REAL, REAL), REAL) for op in (OpCode.ADD, OpCode.SUB, OpCode.MULT, OpCode.DIV, OpCode.MAX, OpCode.MIN)},
    **{op: ((REAL, REAL), BOOL) for op in (OpCode.LT, OpCode.LE, OpCode.EQ, OpCode.GE, OpCode.GT)},
    OpCode.AND: ((BOOL, BOOL), BOOL),
    OpCode.OR: ((BOOL, BOOL), BOOL),
    OpCode.NOT: ((BOOL,), BOOL),
    OpCode.NEG: ((REAL,), REAL),
    OpCode.COND: ((BOOL, TAU, TAU), TAU),
}


def op_signature(op: OpCode) -> tuple[tuple, Ty | str]:
    """Argument sorts and result sort of ``op``; ``TAU`` marks the polymorphic slot."""
    return _SIGNATURES[op]


def op_instances(op: OpCode) -> list[tuple[tuple[Ty, ...], Ty]]:
    args, res = _SIGNATURES[op]
    if res != TAU:
        return [(args, res)]
    return [
        (tuple(ty if a == TAU else a for a in args), ty)
        for ty in (REAL, BOOL)
    ]


def type_check_exp(ctx: Mapping[str, Ty], e: Exp) -> Ty:
    match e:
        case RLit():
            return REAL
        case BLit():
            return BOOL
        case VarE(name=x):
            if x not in ctx:
                raise TypeCheckError(f"unbound variable {x!r}")
            return ctx[x]
        case Obs(label=l):
            return l.sort
        case Op(op=op, args=args):
            got = tuple(type_check_exp(ctx, a) for a in args)
            for want, res in op_instances(op):
                if got == want:
                    return res
            shown = ", ".join(str(t) for t in got)
            raise TypeCheckError(f"operator {op.value} cannot be applied to ({shown})")
        case Acc(var=x, body=body, init=init):
            tau = type_check_exp(ctx, init)
            body_ty = type_check_exp({**ctx, x: tau}, body)
            if body_ty is not tau:
                raise TypeCheckError(f"acc body has sort {body_ty} but init has sort {tau}")
            return tau
    raise TypeError(f"not an expression: {e!r}")


def _check(ctx: Mapping[str, Ty], c: Contr, path: tuple) -> None:
    def exp(e: Exp, where: str) -> Ty:
        try:
            return type_check_exp(ctx, e)
        except TypeCheckError as err:
            raise TypeCheckError(str(err), path + (where,)) from None

    match c:
        case Zero() | Transfer():
            return
        case Scale(exp=e, body=b):
            if exp(e, "scale.exp") is not REAL:
                raise TypeCheckError("Scale expects Real", path + ("scale.exp",))
            _check(ctx, b, path + ("scale",))
        case Translate(body=b):
            _check(ctx, b, path + ("translate",))
        case Both(left=l, right=r):
            _check(ctx, l, path + ("both.0",))
            _check(ctx, r, path + ("both.1",))
        case Let(var=x, exp=e, body=b):
            tau = exp(e, "let.exp")
            _check({**ctx, x: tau}, b, path + ("let",))
        case IfWithin(cond=e, then=c1, else_=c2):
            if exp(e, "if.cond") is not BOOL:
                raise TypeCheckError("IfWithin expects a Bool condition", path + ("if.cond",))
            _check(ctx, c1, path + ("if.then",))
            _check(ctx, c2, path + ("if.else",))
        case _:
            raise TypeError(f"not a contract: {c!r}")


def type_check_contract(ctx: Mapping[str, Ty], c: Contr) -> None:
    """Succeed iff ``ctx |- c : Contr``; also rejects a label used at two sorts."""
    _check(ctx, c, ())
    seen: dict[str, Ty] = {}
    for label in labels_of(c):
        if seen.setdefault(label.name, label.sort) is not label.sort:
            raise TypeCheckError(f"label {label.name} used at both Real and Bool")
