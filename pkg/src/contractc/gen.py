"""Random well-typed contracts, environments and traces for property testing.

Everything is driven by one ``random.Random`` so a case is reproducible from
its seed; ``hypothesis`` strategies wrap these through ``st.randoms()``.
"""

from __future__ import annotations

import random
from dataclasses import dataclass

from contractc.pricing import Discount
from contractc.semantics import ExtEnv, Trace, Trans, horizon, instantiate
from contractc.syntax import (
    Acc, BLit, Both, Contr, Exp, IfWithin, Label, Let, Obs, Op, OpCode, RLit, Scale,
    TExpr, TNum, TVar, Transfer, Translate, Ty, VarE, ZERO,
)

REAL_LABELS = ("AAPL", "MSFT", "FX")
BOOL_LABELS = ("DEFAULT", "CALLED")
PARTIES = ("you", "me", "bank")
ASSETS = ("USD", "EUR", "DKK")
TEMPLATE_VARS = ("t0", "t1", "t2")
ENV_DAYS = range(-10, 61)


@dataclass
class Case:
    contract: Contr
    rho: ExtEnv
    tenv: dict[str, int]
    disc: Discount
    p1: str
    p2: str


class ContractGen:
    """Generator of random contracts and their inputs.

    ``compilable`` restricts output to constructs the compiler accepts (no
    ``let``, variables or ``acc``). Division only ever divides by a nonzero
    literal so that generated contracts have total semantics.
    """

    def __init__(self, rng: random.Random, *, compilable: bool = True, max_depth: int = 5,
                 max_horizon: int = 30, exp_depth: int = 2, templates: bool = True):
        self.rng = rng
        self.compilable = compilable
        self.max_depth = max_depth
        self.max_horizon = max_horizon
        self.exp_depth = exp_depth
        self.templates = templates
        self._fresh = 0

    # expressions

    def real_lit(self) -> RLit:
        return RLit(round(self.rng.uniform(-100, 100), 2))

    def obs_index(self) -> int:
        return self.rng.randint(-3, 3)

    def real_exp(self, depth: int | None = None, scope: tuple[str, ...] = ()) -> Exp:
        depth = self.exp_depth if depth is None else depth
        r = self.rng
        if depth <= 0 or r.random() < 0.3:
            k = r.random()
            if scope and k < 0.25:
                return VarE(r.choice(scope))
            if k < 0.6:
                return Obs(Label(r.choice(REAL_LABELS)), self.obs_index())
            return self.real_lit()
        choice = r.choice(["add", "sub", "mult", "div", "max", "min", "neg", "if", "acc"])
        sub = depth - 1
        if choice == "neg":
            return Op(OpCode.NEG, (self.real_exp(sub, scope),))
        if choice == "div":
            denom = self.real_lit()
            if denom.value == 0:
                denom = RLit(1.0)
            return Op(OpCode.DIV, (self.real_exp(sub, scope), denom))
        if choice == "if":
            return Op(OpCode.COND, (self.bool_exp(sub, scope), self.real_exp(sub, scope), self.real_exp(sub, scope)))
        if choice == "acc":
            if self.compilable:
                return self.real_exp(sub, scope)
            x = self.fresh("a")
            body = Op(OpCode.ADD, (VarE(x), self.real_exp(sub, scope)))
            return Acc(x, body, r.randint(0, 3), self.real_exp(sub, scope))
        op = OpCode(choice)
        return Op(op, (self.real_exp(sub, scope), self.real_exp(sub, scope)))

    def bool_exp(self, depth: int | None = None, scope: tuple[str, ...] = ()) -> Exp:
        depth = self.exp_depth if depth is None else depth
        r = self.rng
        if depth <= 0 or r.random() < 0.2:
            if r.random() < 0.7:
                return Obs(Label(r.choice(BOOL_LABELS), Ty.BOOL), self.obs_index())
            return BLit(r.random() < 0.5)
        choice = r.choice(["lt", "le", "ge", "gt", "eq", "and", "or", "not", "lt", "gt"])
        sub = depth - 1
        if choice == "not":
            return Op(OpCode.NOT, (self.bool_exp(sub, scope),))
        if choice in ("and", "or"):
            return Op(OpCode(choice), (self.bool_exp(sub, scope), self.bool_exp(sub, scope)))
        return Op(OpCode(choice), (self.real_exp(sub, scope), self.real_exp(sub, scope)))

    def fresh(self, prefix: str) -> str:
        self._fresh += 1
        return f"{prefix}{self._fresh}"

    # contracts

    def texpr(self, hi: int) -> TExpr:
        if self.templates and self.rng.random() < 0.3:
            return TVar(self.rng.choice(TEMPLATE_VARS))
        return TNum(self.rng.randint(0, hi))

    def transfer(self) -> Transfer:
        p, q = self.rng.sample(PARTIES, 2)
        return Transfer(p, q, self.rng.choice(ASSETS))

    def contract(self, depth: int | None = None, scope: tuple[str, ...] = ()) -> Contr:
        depth = self.max_depth if depth is None else depth
        r = self.rng
        if depth <= 1:
            return ZERO if r.random() < 0.15 else self.transfer()
        kinds = ["transfer", "scale", "scale", "translate", "both", "both", "ifwithin", "zero"]
        if not self.compilable:
            kinds.append("let")
        kind = r.choice(kinds)
        sub = depth - 1
        if kind == "zero":
            return ZERO
        if kind == "transfer":
            return self.transfer()
        if kind == "scale":
            return Scale(self.real_exp(scope=scope), self.contract(sub, scope))
        if kind == "translate":
            return Translate(self.texpr(5), self.contract(sub, scope))
        if kind == "both":
            return Both(self.contract(sub, scope), self.contract(sub, scope))
        if kind == "ifwithin":
            return IfWithin(self.bool_exp(scope=scope), self.texpr(3), self.contract(sub, scope), self.contract(sub, scope))
        x = self.fresh("x")
        return Let(x, self.real_exp(scope=scope), self.contract(sub, scope + (x,)))

    def tenv(self, hi: int = 10) -> dict[str, int]:
        return {v: self.rng.randint(0, hi) for v in TEMPLATE_VARS}

    def bounded(self) -> tuple[Contr, dict[str, int]]:
        """A contract and template environment with horizon at most ``max_horizon``."""
        while True:
            c = self.contract()
            delta = self.tenv()
            if horizon(c, delta) <= self.max_horizon:
                return c, delta

    # environments

    def env(self, days=ENV_DAYS) -> ExtEnv:
        # One draw seeds the bulk values; keeps hypothesis-driven generators fast.
        r = random.Random(self.rng.getrandbits(64))
        entries = {}
        for label in REAL_LABELS:
            for t in days:
                entries[(label, t)] = round(r.uniform(-100, 100), 2)
        for label in BOOL_LABELS:
            for t in days:
                entries[(label, t)] = r.random() < 0.5
        return ExtEnv(entries)

    def discount(self) -> Discount:
        return Discount.flat(round(self.rng.uniform(0.0, 0.1), 4))

    def parties(self) -> tuple[str, str]:
        p1, p2 = self.rng.sample(PARTIES, 2)
        return p1, p2

    def case(self, closed: bool = False) -> Case:
        c, delta = self.bounded()
        if closed:
            c = instantiate(c, delta)
        p1, p2 = self.parties()
        return Case(c, self.env(), delta, self.discount(), p1, p2)

    # traces

    def trans(self) -> Trans:
        out = Trans()
        for _ in range(self.rng.randint(0, 3)):
            p, q = self.rng.sample(PARTIES, 2)
            out = out + self.rng.uniform(-50, 50) * Trans.unit(p, q, self.rng.choice(ASSETS))
        return out

    def trace(self, max_day: int = 10) -> Trace:
        return Trace({d: self.trans() for d in range(max_day + 1) if self.rng.random() < 0.5})


def make_gen(seed: int, **kw) -> ContractGen:
    return ContractGen(random.Random(seed), **kw)
