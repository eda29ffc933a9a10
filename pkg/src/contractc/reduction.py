"""One-day contract reduction, expression specialisation, smart constructors."""

from __future__ import annotations

from contractc.errors import EvalError, MissingObservable, ReductionStuck, UnboundVariable
from contractc.semantics import ExtEnv, T_ZERO, Trans, Value, VarAssign, apply_op, esem
from contractc.syntax import (
    Acc, BLit, Both, Contr, Exp, IfWithin, Let, Obs, Op, RLit, Scale, TNum,
    Transfer, Translate, VarE, Zero, ZERO,
)


def literal(v: Value) -> Exp:
    return BLit(v) if isinstance(v, bool) else RLit(float(v))


def is_literal(e: Exp) -> bool:
    return isinstance(e, (RLit, BLit))


def specialize_exp(e: Exp, gamma: VarAssign, rho: ExtEnv) -> Exp:
    """Constant-fold ``e`` against a possibly partial environment.

    Observables present in ``rho`` and variables bound in ``gamma`` become
    literals; an operator folds once all its arguments have folded.
    """
    match e:
        case RLit() | BLit():
            return e
        case VarE(name=x):
            return literal(gamma[x]) if x in gamma else e
        case Obs(label=l, index=i):
            return literal(esem(e, gamma, rho)) if (l.name, i) in rho else e
        case Op(op=op, args=args):
            sargs = tuple(specialize_exp(a, gamma, rho) for a in args)
            if all(is_literal(a) for a in sargs):
                try:
                    return literal(apply_op(op, tuple(a.value for a in sargs)))
                except EvalError:
                    pass
            return Op(op, sargs)
        case Acc():
            try:
                return literal(esem(e, gamma, rho))
            except (MissingObservable, UnboundVariable):
                return e
    raise TypeError(f"not an expression: {e!r}")


def promote(n: int, e: Exp) -> Exp:
    """Shift every observable in ``e`` by ``n`` days."""
    match e:
        case Obs(label=l, index=i):
            return Obs(l, i + n) if n else e
        case Op(op=op, args=args):
            return Op(op, tuple(promote(n, a) for a in args))
        case Acc(var=x, body=body, days=d, init=init):
            return Acc(x, promote(n, body), d, promote(n, init))
    return e


# Smart constructors: each is semantically equal to the plain constructor.


def smart_translate(n: int, c: Contr) -> Contr:
    if n == 0:
        return c
    if isinstance(c, Zero):
        return ZERO
    return Translate(TNum(n), c)


def smart_scale(e: Exp, c: Contr) -> Contr:
    if isinstance(c, Zero):
        return ZERO
    if isinstance(e, RLit):
        if e.value == 0:
            return ZERO
        if e.value == 1:
            return c
    return Scale(e, c)


def smart_both(c1: Contr, c2: Contr) -> Contr:
    if isinstance(c1, Zero):
        return c2
    if isinstance(c2, Zero):
        return c1
    return Both(c1, c2)


def smart_let(x: str, e: Exp, c: Contr) -> Contr:
    # No substitution here; reduce binds x in gamma instead.
    if isinstance(c, Zero):
        return ZERO
    return Let(x, e, c)


def reduce(c: Contr, gamma: VarAssign, rho: ExtEnv) -> tuple[Contr, Trans]:
    """Advance a template-closed contract by one day.

    Returns the residual contract and the transfers due today. ``rho`` may
    be partial; the reduction is stuck (``ReductionStuck``) when it lacks
    data needed to decide a branch or to size a transfer due today.
    """
    match c:
        case Zero():
            return ZERO, T_ZERO
        case Transfer(src=p, dst=q, asset=a):
            return ZERO, Trans.unit(p, q, a)
        case Translate(delay=TNum(n=0), body=b):
            return reduce(b, gamma, rho)
        case Translate(delay=TNum(n=n), body=b):
            return smart_translate(n - 1, b), T_ZERO
        case Translate():
            raise ReductionStuck("contract is not template-closed; instantiate it first")
        case Scale(exp=e, body=b):
            rest, today = reduce(b, gamma, rho)
            factor = specialize_exp(e, gamma, rho)
            if isinstance(factor, RLit):
                return smart_scale(factor, rest), factor.value * today
            if not today.is_zero():
                raise ReductionStuck("scale factor of a transfer due today cannot be evaluated")
            return smart_scale(promote(-1, factor), rest), T_ZERO
        case Both(left=l, right=r):
            l2, t1 = reduce(l, gamma, rho)
            r2, t2 = reduce(r, gamma, rho)
            return smart_both(l2, r2), t1 + t2
        case Let(var=x, exp=e, body=b):
            bound = specialize_exp(e, gamma, rho)
            inner = {k: v for k, v in gamma.items() if k != x}
            if is_literal(bound):
                inner[x] = bound.value
            rest, today = reduce(b, inner, rho)
            return smart_let(x, promote(-1, bound), rest), today
        case IfWithin(cond=e, within=TNum(n=n), then=c1, else_=c2):
            decided = specialize_exp(e, gamma, rho)
            if not isinstance(decided, BLit):
                raise ReductionStuck("ifWithin condition cannot be decided today")
            if decided.value:
                return reduce(c1, gamma, rho)
            if n == 0:
                return reduce(c2, gamma, rho)
            return IfWithin(e, TNum(n - 1), c1, c2), T_ZERO
        case IfWithin():
            raise ReductionStuck("contract is not template-closed; instantiate it first")
    raise TypeError(f"not a contract: {c!r}")
