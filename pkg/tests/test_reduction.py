import pytest
from hypothesis import assume, given

from contract_examples import gens
from contractc.errors import ReductionStuck
from contractc.parser import parse_contract, parse_exp
from contractc.reduction import (
    promote, reduce, smart_both, smart_let, smart_scale, smart_translate, specialize_exp,
)
from contractc.semantics import T_ZERO, ExtEnv, Trace, Trans, adv_env, csem, esem
from contractc.syntax import (
    BLit, Both, Label, Let, Obs, Op, OpCode, RLit, Scale, TNum, TVar, Transfer, Translate, ZERO,
)

AAPL = Obs(Label("AAPL"), 0)
YOU_ME = Transfer("you", "me", "USD")


def test_specialize_literal_untouched():
    assert specialize_exp(RLit(4.2), {}, ExtEnv()) == RLit(4.2)


def test_specialize_folds_known_observables():
    e = Op(OpCode.LT, (AAPL, RLit(100.0)))
    assert specialize_exp(e, {}, ExtEnv({("AAPL", 0): 110.0})) == BLit(False)


def test_specialize_leaves_unknown_residual():
    e = Op(OpCode.ADD, (Obs(Label("X"), 0), RLit(1.0)))
    assert specialize_exp(e, {}, ExtEnv()) == e


def test_specialize_folds_known_subterms_only():
    e = parse_exp("obs(X,0) * (obs(A,0) + 1)")
    got = specialize_exp(e, {}, ExtEnv({("A", 0): 2.0}))
    assert got == Op(OpCode.MULT, (Obs(Label("X"), 0), RLit(3.0)))


def test_specialize_keeps_division_by_zero_residual():
    e = parse_exp("1 / obs(A,0)")
    assert specialize_exp(e, {}, ExtEnv({("A", 0): 0.0})) == Op(OpCode.DIV, (RLit(1.0), RLit(0.0)))


def test_promote():
    assert promote(-1, AAPL) == Obs(Label("AAPL"), -1)
    e = parse_exp("obs(A, 2) + 1")
    assert promote(0, e) == e


@given(gens())
def test_promote_commutes_with_shift(g):
    e = g.real_exp(2)
    rho = g.env()
    assert esem(promote(-1, e), {}, rho) == esem(e, {}, adv_env(rho, -1))


def test_smart_constructors():
    assert smart_both(ZERO, smart_translate(0, YOU_ME)) == YOU_ME
    assert smart_scale(RLit(0.0), YOU_ME) == ZERO
    assert smart_scale(RLit(1.0), YOU_ME) == YOU_ME
    assert smart_scale(AAPL, ZERO) == ZERO
    assert smart_translate(3, ZERO) == ZERO
    assert smart_translate(3, YOU_ME) == Translate(TNum(3), YOU_ME)
    assert smart_both(YOU_ME, ZERO) == YOU_ME
    assert smart_let("x", RLit(1.0), ZERO) == ZERO


def test_one_step_example():
    c = Both(YOU_ME, Translate(TNum(1), YOU_ME))
    residual, today = reduce(c, {}, ExtEnv())
    assert residual == YOU_ME
    assert today == Trans.unit("you", "me", "USD")


def test_reduce_zero():
    assert reduce(ZERO, {}, ExtEnv()) == (ZERO, T_ZERO)


def test_reduce_scale_by_known_observable():
    c = Scale(AAPL, Both(YOU_ME, Translate(TNum(2), YOU_ME)))
    residual, today = reduce(c, {}, ExtEnv({("AAPL", 0): 3.0}))
    assert today == 3.0 * Trans.unit("you", "me", "USD")
    assert residual == Scale(RLit(3.0), Translate(TNum(1), YOU_ME))


def test_reduce_scale_residual_is_promoted():
    c = Scale(AAPL, Translate(TNum(2), YOU_ME))
    residual, today = reduce(c, {}, ExtEnv())
    assert today.is_zero()
    assert residual == Scale(Obs(Label("AAPL"), -1), Translate(TNum(1), YOU_ME))


def test_reduce_stuck_on_unknown_factor_due_today():
    with pytest.raises(ReductionStuck):
        reduce(Scale(AAPL, YOU_ME), {}, ExtEnv())


def test_reduce_if_within():
    c = parse_contract("ifWithin(obs(AAPL,0) > 100, 2, transfer(you,me), zero)")
    residual, today = reduce(c, {}, ExtEnv({("AAPL", 0): 90.0}))
    assert today.is_zero() and residual.within == TNum(1)
    residual, today = reduce(c, {}, ExtEnv({("AAPL", 0): 110.0}))
    assert residual == ZERO and today == Trans.unit("you", "me", "USD")
    with pytest.raises(ReductionStuck):
        reduce(c, {}, ExtEnv())


def test_reduce_let_binds_value():
    c = Let("x", AAPL, Scale(parse_exp("x"), YOU_ME))
    residual, today = reduce(c, {}, ExtEnv({("AAPL", 0): 4.0}))
    assert residual == ZERO
    assert today == 4.0 * Trans.unit("you", "me", "USD")


def test_reduce_let_residual_keeps_binding():
    c = Let("x", AAPL, Translate(TNum(1), Scale(parse_exp("x"), YOU_ME)))
    residual, _ = reduce(c, {}, ExtEnv())
    assert residual == Let("x", Obs(Label("AAPL"), -1), Scale(parse_exp("x"), YOU_ME))


def test_reduce_needs_template_closed_contract():
    with pytest.raises(ReductionStuck):
        reduce(Translate(TVar("t"), YOU_ME), {}, ExtEnv())


@given(gens(compilable=False))
def test_reduction_soundness(g):
    cs = g.case(closed=True)
    try:
        residual, today = reduce(cs.contract, {}, cs.rho.up_to(0))
    except ReductionStuck:
        assume(False)
    want = csem(cs.contract, {}, cs.rho, {})
    later = Trace({d: want(d) for d in want.support() if d > 0})
    assert today.close(want(0))
    assert csem(residual, {}, adv_env(cs.rho, 1), {}).delay(1).close(later)
