import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from contract_examples import EUROPEAN, TEMPLATED, TEMPLATED_IL, gens
from contractc.compiler import aggregate_price, compile_contract, compile_exp, smart_tplus, smart_tplus_z
from contractc.errors import CompileError
from contractc.parser import parse_contract, parse_exp
from contractc.payoff import (
    BinOp, FloatLit, If, ILBinOp, LoopIf, Model, NumZ, Payoff, TE, TEZ, TPlus, TPlusZ,
    il_sem, iltsem, iltsem_z, parse_il,
)
from contractc.semantics import ExtEnv
from contractc.syntax import (
    Acc, Both, IfWithin, Label, Let, Obs, RLit, TNum, TVar, Transfer, Translate, VarE, ZERO,
)

T0 = TE(TVar("t0"))
ONE = lambda _t: 1.0


def test_smart_tplus():
    assert smart_tplus(TE(TNum(2)), TE(TNum(3))) == TE(TNum(5))
    assert smart_tplus(T0, TE(TNum(3))) == TPlus(T0, TE(TNum(3)))
    assert smart_tplus(TE(TNum(0)), T0) == T0
    assert smart_tplus(T0, TE(TNum(0))) == T0


def test_smart_tplus_z():
    assert smart_tplus_z(TEZ(TE(TNum(2))), -3) == NumZ(-1)
    assert smart_tplus_z(TEZ(T0), 0) == TEZ(T0)
    assert smart_tplus_z(TEZ(T0), 2) == TEZ(TPlus(T0, TE(TNum(2))))
    assert smart_tplus_z(TEZ(T0), -2) == TPlusZ(TEZ(T0), NumZ(-2))


naturals = st.integers(0, 50)
texprs = st.one_of(naturals.map(lambda n: TE(TNum(n))), st.sampled_from(["t0", "t1"]).map(lambda v: TE(TVar(v))))


@given(texprs, texprs, st.integers(-20, 20), st.integers(0, 9), st.integers(0, 9))
def test_smart_sums_preserve_meaning(a, b, i, x, y):
    delta = {"t0": x, "t1": y}
    assert iltsem(smart_tplus(a, b), delta) == iltsem(a, delta) + iltsem(b, delta)
    assert iltsem_z(smart_tplus_z(TEZ(a), i), delta) == iltsem(a, delta) + i


def test_compile_exp():
    assert compile_exp(RLit(100.0), TEZ(T0)) == FloatLit(100.0)
    assert compile_exp(Obs(Label("AAPL"), 0), TEZ(T0)) == Model("AAPL", TEZ(T0))
    assert compile_exp(Obs(Label("AAPL"), -1), TEZ(TE(TNum(0)))) == Model("AAPL", NumZ(-1))
    gt = compile_exp(parse_exp("obs(A,0) > 1"), TEZ(TE(TNum(0))))
    assert gt == BinOp(ILBinOp.LT, FloatLit(1.0), Model("A", TEZ(TE(TNum(0)))))


@pytest.mark.parametrize("e, kind", [
    (Acc("x", VarE("x"), 1, RLit(0.0)), CompileError.UNSUPPORTED_ACC),
    (VarE("x"), CompileError.UNSUPPORTED_VAR),
])
def test_compile_exp_unsupported(e, kind):
    with pytest.raises(CompileError) as info:
        compile_exp(e, TEZ(T0))
    assert info.value.kind == kind


def test_let_is_unsupported():
    with pytest.raises(CompileError) as info:
        compile_contract(Both(ZERO, Let("x", RLit(1.0), ZERO)))
    assert info.value.kind == CompileError.UNSUPPORTED_LET
    assert info.value.path == ("both.1",)


def test_compile_contract_leaves():
    assert compile_contract(ZERO) == FloatLit(0.0)
    assert compile_contract(Both(ZERO, ZERO)) == BinOp(ILBinOp.ADD, FloatLit(0.0), FloatLit(0.0))
    assert compile_contract(Transfer("a", "b")) == Payoff(TE(TNum(0)), "a", "b")


def test_compile_templated_example():
    il = compile_contract(parse_contract(TEMPLATED))
    assert il == parse_il(TEMPLATED_IL)


def test_compile_if_within():
    c = IfWithin(parse_exp("obs(A,0) > 1"), TNum(4), Transfer("a", "b"), ZERO)
    il = compile_contract(Translate(TNum(3), c))
    assert isinstance(il, LoopIf) and il.bound == TNum(4)
    assert il.then == Payoff(TE(TNum(3)), "a", "b")
    c0 = IfWithin(parse_exp("obs(A,0) > 1"), TNum(0), Transfer("a", "b"), ZERO)
    assert isinstance(compile_contract(c0), If)
    cv = IfWithin(parse_exp("obs(A,0) > 1"), TVar("w"), Transfer("a", "b"), ZERO)
    assert isinstance(compile_contract(cv), LoopIf)


def test_aggregate_price_examples():
    assert aggregate_price(ZERO, {}, ExtEnv(), {}, ONE, "you", "me") == 0.0
    assert aggregate_price(Transfer("you", "me"), {}, ExtEnv(), {}, ONE, "you", "me") == 1.0
    option = parse_contract(EUROPEAN.replace("90", "T"))
    rho = ExtEnv({("AAPL", 2): 110.0})
    assert aggregate_price(option, {}, rho, {"T": 2}, ONE, "you", "me") == 10.0


def test_aggregate_price_discounts_each_day():
    c = parse_contract("both(transfer(a,b), translate(2, scale(3, transfer(b,a))))")
    disc = lambda t: math.exp(-0.1 * t)
    want = 1.0 - 3.0 * math.exp(-0.2)
    assert aggregate_price(c, {}, ExtEnv(), {}, disc, "a", "b") == pytest.approx(want, rel=1e-15)
    assert aggregate_price(c, {}, ExtEnv(), {}, disc, "a", "b", from_time=1) == pytest.approx(-3.0 * math.exp(-0.2))


@given(gens())
def test_compilation_soundness(g):
    cs = g.case()
    oracle = aggregate_price(cs.contract, {}, cs.rho, cs.tenv, cs.disc, cs.p1, cs.p2)
    value = il_sem(compile_contract(cs.contract), cs.rho, cs.tenv, 0, 0, cs.disc, cs.p1, cs.p2)
    assert abs(oracle - value) <= 1e-7 * (1 + abs(oracle))


@given(gens(), st.integers(0, 8))
def test_compile_start_time_matches_translate(g, k):
    cs = g.case()
    args = (cs.rho, cs.tenv, 0, 0, cs.disc, cs.p1, cs.p2)
    shifted = il_sem(compile_contract(cs.contract, TE(TNum(k))), *args)
    translated = il_sem(compile_contract(Translate(TNum(k), cs.contract)), *args)
    assert shifted == translated
