"""Abstract syntax of the contract language.

All nodes are frozen dataclasses, so structural equality and hashing come
for free and trees can be shared between threads.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Iterator, Union


class Ty(enum.Enum):
    REAL = "Real"
    BOOL = "Bool"

    def __str__(self) -> str:
        return self.value


@dataclass(frozen=True)
class Label:
    name: str
    sort: Ty = Ty.REAL

    def __post_init__(self):
        if not self.name:
            raise ValueError("label name must be nonempty")


# Template expressions: durations that are either numerals or variables.


@dataclass(frozen=True)
class TNum:
    n: int

    def __post_init__(self):
        if self.n < 0:
            raise ValueError(f"template numeral must be natural, got {self.n}")


@dataclass(frozen=True)
class TVar:
    name: str


TExpr = Union[TNum, TVar]


class OpCode(enum.Enum):
    ADD = "add"
    SUB = "sub"
    MULT = "mult"
    DIV = "div"
    MAX = "max"
    MIN = "min"
    LT = "lt"
    LE = "le"
    EQ = "eq"
    GE = "ge"
    GT = "gt"
    AND = "and"
    OR = "or"
    NOT = "not"
    NEG = "neg"
    COND = "if"


ARITY = {
    OpCode.NOT: 1,
    OpCode.NEG: 1,
    OpCode.COND: 3,
}


def arity(op: OpCode) -> int:
    return ARITY.get(op, 2)


# Expressions


@dataclass(frozen=True)
class RLit:
    value: float


@dataclass(frozen=True)
class BLit:
    value: bool


@dataclass(frozen=True)
class VarE:
    name: str


@dataclass(frozen=True)
class Obs:
    label: Label
    index: int


@dataclass(frozen=True)
class Op:
    op: OpCode
    args: tuple

    def __post_init__(self):
        # Lists would make the node unhashable.
        if not isinstance(self.args, tuple):
            object.__setattr__(self, "args", tuple(self.args))


@dataclass(frozen=True)
class Acc:
    """``acc(x -> body, days, init)``: fold ``body`` over the previous ``days`` days."""

    var: str
    body: "Exp"
    days: int
    init: "Exp"


Exp = Union[RLit, BLit, VarE, Obs, Op, Acc]


# Contracts


@dataclass(frozen=True)
class Zero:
    pass


@dataclass(frozen=True)
class Let:
    var: str
    exp: Exp
    body: "Contr"


@dataclass(frozen=True)
class Transfer:
    src: str
    dst: str
    asset: str = "USD"


@dataclass(frozen=True)
class Scale:
    exp: Exp
    body: "Contr"


@dataclass(frozen=True)
class Translate:
    delay: TExpr
    body: "Contr"


@dataclass(frozen=True)
class Both:
    left: "Contr"
    right: "Contr"


@dataclass(frozen=True)
class IfWithin:
    cond: Exp
    within: TExpr
    then: "Contr"
    else_: "Contr"


Contr = Union[Zero, Let, Transfer, Scale, Translate, Both, IfWithin]

ZERO = Zero()


def both_all(*contracts: Contr) -> Contr:
    """Right-nested ``both``, the meaning of ``all[c1, ..., cn]``."""
    if not contracts:
        return ZERO
    acc = contracts[-1]
    for c in reversed(contracts[:-1]):
        acc = Both(c, acc)
    return acc


def subexps(e: Exp) -> Iterator[Exp]:
    yield e
    match e:
        case Op(args=args):
            for a in args:
                yield from subexps(a)
        case Acc(body=body, init=init):
            yield from subexps(body)
            yield from subexps(init)


def contract_exps(c: Contr) -> Iterator[Exp]:
    """All expressions occurring directly in a contract tree."""
    match c:
        case Let(exp=e, body=b) | Scale(exp=e, body=b):
            yield e
            yield from contract_exps(b)
        case Translate(body=b):
            yield from contract_exps(b)
        case Both(left=l, right=r):
            yield from contract_exps(l)
            yield from contract_exps(r)
        case IfWithin(cond=e, then=c1, else_=c2):
            yield e
            yield from contract_exps(c1)
            yield from contract_exps(c2)


def labels_of(c: Contr) -> set[Label]:
    return {
        sub.label
        for e in contract_exps(c)
        for sub in subexps(e)
        if isinstance(sub, Obs)
    }


def template_vars(c: Contr) -> set[str]:
    match c:
        case Translate(delay=t, body=b):
            own = {t.name} if isinstance(t, TVar) else set()
            return own | template_vars(b)
        case IfWithin(within=t, then=c1, else_=c2):
            own = {t.name} if isinstance(t, TVar) else set()
            return own | template_vars(c1) | template_vars(c2)
        case Let(body=b) | Scale(body=b):
            return template_vars(b)
        case Both(left=l, right=r):
            return template_vars(l) | template_vars(r)
    return set()


def contract_size(c: Contr) -> int:
    match c:
        case Let(body=b) | Scale(body=b) | Translate(body=b):
            return 1 + contract_size(b)
        case Both(left=l, right=r):
            return 1 + contract_size(l) + contract_size(r)
        case IfWithin(then=c1, else_=c2):
            return 1 + contract_size(c1) + contract_size(c2)
    return 1
