import pytest
from hypothesis import given
from hypothesis import strategies as st

from contract_examples import TEMPLATED, TEMPLATED_CUT_IL, gens
from contractc.compiler import compile_contract, compile_exp
from contractc.errors import MissingObservable, SortMismatch
from contractc.parser import parse_contract
from contractc.payoff import (
    BinOp, FloatLit, If, ILBinOp, LoopIf, Model, NatLit, Now, NumZ, Payoff, TE, TEZ,
    TexprVal, TPlus, TPlusZ, cut_payoff, il_equiv_at, il_sem, iltsem, iltsem_z, parse_il,
    print_il, subterms,
)
from contractc.semantics import ExtEnv
from contractc.syntax import TNum, TVar

T0 = TE(TVar("t0"))
T1 = TE(TVar("t1"))


def test_iltsem():
    assert iltsem(TE(TNum(3)), {}) == 3
    assert iltsem(TPlus(T0, T1), {"t0": 2, "t1": 5}) == 7
    assert iltsem_z(TPlusZ(TEZ(T0), NumZ(-3)), {"t0": 2}) == -1


def test_time_offset_added_at_use():
    assert il_sem(TexprVal(TE(TNum(3))), ExtEnv(), {}, t0=4) == 7
    rho = ExtEnv({("A", 7): 1.5})
    assert il_sem(Model("A", TEZ(TE(TNum(3)))), rho, {}, t0=4) == 1.5


def test_literals():
    assert il_sem(FloatLit(0.0), ExtEnv(), {}) == 0.0
    assert il_sem(NatLit(3), ExtEnv(), {}) == 3
    assert il_sem(Now(), ExtEnv(), {}, t_now=9) == 9


def test_payoff_sign_and_discount():
    disc = {3: 0.9}.__getitem__
    p = Payoff(TE(TNum(3)), "me", "you")
    assert il_sem(p, ExtEnv(), {}, disc=disc, p1="you", p2="me") == -0.9
    assert il_sem(p, ExtEnv(), {}, disc=disc, p1="me", p2="you") == 0.9
    assert il_sem(p, ExtEnv(), {}, disc=disc, p1="me", p2="bank") == 0.0


def test_compiled_example_value():
    il = compile_contract(parse_contract(TEMPLATED))
    rho = ExtEnv({("AAPL", 7): 110.0})
    assert il_sem(il, rho, {"t0": 2, "t1": 5}, p1="you", p2="me") == 110.0


def test_loopif_advances_clock():
    # condition true first on day 2; the payoff happens then
    rho = ExtEnv({("A", 0): 0.0, ("A", 1): 0.0, ("A", 2): 1.0})
    cond = BinOp(ILBinOp.LT, FloatLit(0.5), Model("A", TEZ(TE(TNum(0)))))
    il = LoopIf(cond, Payoff(TE(TNum(0)), "a", "b"), FloatLit(-1.0), TNum(5))
    disc = lambda t: 10.0 ** -t
    assert il_sem(il, rho, {}, disc=disc, p1="a", p2="b") == 0.01


def test_loopif_exhausts_bound():
    rho = ExtEnv({("A", t): 0.0 for t in range(4)})
    cond = BinOp(ILBinOp.LT, FloatLit(0.5), Model("A", TEZ(TE(TNum(0)))))
    il = LoopIf(cond, FloatLit(1.0), TexprVal(TE(TNum(0))), TNum(3))
    assert il_sem(il, rho, {}) == 3


def test_errors():
    with pytest.raises(MissingObservable):
        il_sem(Model("A", TEZ(TE(TNum(0)))), ExtEnv(), {})
    with pytest.raises(SortMismatch):
        il_sem(If(FloatLit(1.0), FloatLit(1.0), FloatLit(2.0)), ExtEnv(), {})


def test_cut_payoff_leaves_model_alone():
    m = Model("AAPL", NumZ(0))
    assert cut_payoff(m) == m


def test_cut_payoff_of_example():
    il = compile_contract(parse_contract(TEMPLATED))
    assert cut_payoff(il) == parse_il(TEMPLATED_CUT_IL)
    guards = [s for s in subterms(cut_payoff(il)) if isinstance(s, BinOp) and s.op is ILBinOp.LTN]
    assert len(guards) == 2


def test_cut_payoff_guard_semantics():
    il = cut_payoff(Payoff(TE(TNum(2)), "a", "b"))
    kw = dict(p1="a", p2="b")
    assert il_sem(il, ExtEnv(), {}, t_now=2, **kw) == 1.0
    assert il_sem(il, ExtEnv(), {}, t_now=3, **kw) == 0.0
    assert il_sem(il, ExtEnv(), {}, t0=1, t_now=3, **kw) == 1.0


@given(gens())
def test_cut_payoff_ignores_expressions(g):
    e = compile_exp(g.real_exp(3), TEZ(TE(TNum(0))))
    assert cut_payoff(e) == e


def _cases(g, n=3):
    cs = g.case()
    return cs, [(g.env(), cs.tenv, cs.disc, cs.p1, cs.p2) for _ in range(n)]


@given(gens(), st.integers(0, 10))
def test_cut_payoff_equivalent_at_now_zero(g, t0):
    cs, cases = _cases(g)
    il = compile_contract(cs.contract)
    assert il_equiv_at(il, il, t0, 0, cases)
    assert il_equiv_at(cut_payoff(il), il, t0, 0, cases)


@given(gens(), st.integers(0, 10))
def test_cut_payoff_equivalent_before_start(g, k):
    cs, cases = _cases(g)
    start = TE(TNum(k))
    il = compile_contract(cs.contract, start)
    for t_now in range(k + 1):
        assert il_equiv_at(cut_payoff(il), il, 0, t_now, cases)


def test_print_il_example():
    il = compile_contract(parse_contract(TEMPLATED))
    assert print_il(il) == (
        "(100.0 * payoff(t0, you, me)) + if(100.0 < model(AAPL, t0+t1), "
        "(model(AAPL, t0+t1) - 100.0) * payoff(t0+t1, you, me), 0.0)"
    )


@pytest.mark.parametrize("src, want", [
    ("model(A, t0-2)", Model("A", TPlusZ(TEZ(T0), NumZ(-2)))),
    ("model(A, -2)", Model("A", NumZ(-2))),
    ("loopif(true, 1.0, 2.0, 3)", LoopIf(parse_il("true"), FloatLit(1.0), FloatLit(2.0), TNum(3))),
    ("2.0 > 1.0", BinOp(ILBinOp.LT, FloatLit(1.0), FloatLit(2.0))),
])
def test_parse_il(src, want):
    assert parse_il(src) == want


@given(gens())
def test_il_text_round_trip(g):
    cs = g.case()
    il = cut_payoff(compile_contract(cs.contract))
    assert parse_il(print_il(il)) == il
