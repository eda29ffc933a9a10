"""Randomised property suites run by ``contractc selftest``."""

from __future__ import annotations

import time
from dataclasses import dataclass
from typing import Callable

from contractc.codegen import simplify_loopif0
from contractc.compiler import aggregate_price, compile_contract
from contractc.errors import ReductionStuck
from contractc.gen import ContractGen, make_gen
from contractc.payoff import BinOp, If, ILExpr, LoopIf, UnOp, cut_payoff, il_sem
from contractc.pricing import PricingConfig, close_enough, commutation_check
from contractc.semantics import csem, horizon, instantiate
from contractc.syntax import TNum
from contractc.typecheck import type_check_contract


@dataclass
class SuiteResult:
    name: str
    passed: int
    total: int
    seconds: float
    first_failure: str | None = None

    @property
    def ok(self) -> bool:
        return self.passed == self.total

    def to_json(self) -> dict:
        return {
            "suite": self.name,
            "passed": self.passed,
            "total": self.total,
            "seconds": round(self.seconds, 3),
            "first_failure": self.first_failure,
        }


def _run(name: str, n: int, check: Callable[[int], bool]) -> SuiteResult:
    start = time.perf_counter()
    passed = 0
    failure = None
    for i in range(n):
        try:
            good = check(i)
        except Exception as exc:  # a crash counts as a failed case
            good = False
            failure = failure or f"case {i}: {type(exc).__name__}: {exc}"
        if good:
            passed += 1
        elif failure is None:
            failure = f"case {i}"
    return SuiteResult(name, passed, n, time.perf_counter() - start, failure)


def soundness(gen: ContractGen, n: int) -> SuiteResult:
    def check(_i):
        cs = gen.case()
        type_check_contract({}, cs.contract)
        oracle = aggregate_price(cs.contract, {}, cs.rho, cs.tenv, cs.disc, cs.p1, cs.p2)
        value = il_sem(compile_contract(cs.contract), cs.rho, cs.tenv, 0, 0, cs.disc, cs.p1, cs.p2)
        return close_enough(oracle, value)
    return _run("soundness", n, check)


def totality(gen: ContractGen, n: int, pairs: int = 10) -> SuiteResult:
    def check(_i):
        cs = gen.case()
        il = compile_contract(cs.contract)
        cut = cut_payoff(il)
        for _ in range(pairs):
            t0, t_now = gen.rng.randint(0, 20), gen.rng.randint(0, 40)
            il_sem(il, cs.rho, cs.tenv, t0, t_now, cs.disc, cs.p1, cs.p2)
            il_sem(cut, cs.rho, cs.tenv, t0, t_now, cs.disc, cs.p1, cs.p2)
        return True
    return _run("totality", n, check)


def cut_identity(gen: ContractGen, n: int, envs: int = 5) -> SuiteResult:
    def check(_i):
        cs = gen.case()
        il = compile_contract(cs.contract)
        cut = cut_payoff(il)
        for _ in range(envs):
            rho = gen.env()
            if il_sem(il, rho, cs.tenv, 0, 0, cs.disc, cs.p1, cs.p2) != il_sem(cut, rho, cs.tenv, 0, 0, cs.disc, cs.p1, cs.p2):
                return False
        return True
    return _run("cut-identity", n, check)


def horizon_bound(gen: ContractGen, n: int) -> SuiteResult:
    def check(_i):
        cs = gen.case()
        tr = csem(cs.contract, {}, cs.rho, cs.tenv)
        h = horizon(cs.contract, cs.tenv)
        return all(d < h for d in tr.support()) and all(tr(d).is_antisymmetric() for d in tr.support())
    return _run("horizon", n, check)


def instantiation(gen: ContractGen, n: int, others: int = 3) -> SuiteResult:
    def check(_i):
        cs = gen.case()
        closed = instantiate(cs.contract, cs.tenv)
        want = csem(cs.contract, {}, cs.rho, cs.tenv)
        return all(csem(closed, {}, cs.rho, gen.tenv()).close(want) for _ in range(others))
    return _run("instantiation", n, check)


def commutation(gen: ContractGen, n: int, max_attempts: int = 50) -> SuiteResult:
    def check(_i):
        for _ in range(max_attempts):
            cs = gen.case(closed=True)
            cfg = PricingConfig(cs.p1, cs.p2, cs.disc, 0, cs.tenv)
            try:
                return commutation_check(cs.contract, cs.rho, cfg).agree
            except ReductionStuck:
                continue
        return False
    return _run("commutation", n, check)


def as_loopif0(il: ILExpr) -> ILExpr:
    """Turn every ``if`` into the equivalent zero-bound ``loopif``."""
    match il:
        case If(cond=c, then=a, else_=b):
            return LoopIf(as_loopif0(c), as_loopif0(a), as_loopif0(b), TNum(0))
        case LoopIf(cond=c, then=a, else_=b, bound=t):
            return LoopIf(as_loopif0(c), as_loopif0(a), as_loopif0(b), t)
        case UnOp(op=op, arg=a):
            return UnOp(op, as_loopif0(a))
        case BinOp(op=op, left=a, right=b):
            return BinOp(op, as_loopif0(a), as_loopif0(b))
    return il


def loopif0(gen: ContractGen, n: int) -> SuiteResult:
    def check(_i):
        cs = gen.case()
        il = as_loopif0(cut_payoff(compile_contract(cs.contract)))
        t0, t_now = gen.rng.randint(0, 10), gen.rng.randint(0, 20)
        args = (cs.rho, cs.tenv, t0, t_now, cs.disc, cs.p1, cs.p2)
        return il_sem(il, *args) == il_sem(simplify_loopif0(il), *args)
    return _run("simplify-loopif0", n, check)


def run_all(seed: int = 0, scale: float = 1.0) -> list[SuiteResult]:
    def k(n):
        return max(1, int(n * scale))
    return [
        soundness(make_gen(seed), k(500)),
        totality(make_gen(seed + 1), k(500)),
        commutation(make_gen(seed + 2), k(200)),
        cut_identity(make_gen(seed + 3), k(200)),
        horizon_bound(make_gen(seed + 4, compilable=False), k(300)),
        instantiation(make_gen(seed + 5, compilable=False), k(200)),
        loopif0(make_gen(seed + 6), k(100)),
    ]
