"""Acceptance criteria, one test each, with their tolerances and time budgets.

Each test prints a ``criterion N: PASS|FAIL`` line; the same lines are
repeated in the terminal summary.
"""

import math
import time
from pathlib import Path

import pytest

from contract_examples import EUROPEAN, TEMPLATED, TEMPLATED_IL
from contractc.codegen import emit, simplify_loopif0
from contractc.compiler import aggregate_price, compile_contract
from contractc.errors import ContractError, ReductionStuck
from contractc.gen import make_gen
from contractc.parser import parse_contract
from contractc.payoff import TE, cut_payoff, il_sem, parse_il
from contractc.pricing import (
    GBM, Discount, PricingConfig, ScenarioSpec, commutation_check, monte_carlo_price,
)
from contractc.reduction import reduce, smart_both, smart_translate
from contractc.selftest import as_loopif0
from contractc.semantics import ExtEnv, Trace, Trans, csem, delay, horizon, instantiate
from contractc.syntax import Both, TNum, Transfer, Translate, ZERO

GOLDEN = Path(__file__).parent / "golden" / "example_payoff.hs"
RESULTS: list[str] = []
SEED = 20240501


class Criterion:
    """Times a block and records a pass/fail line for it."""

    def __init__(self, number: int, budget: float, capsys):
        self.number = number
        self.budget = budget
        self.capsys = capsys
        self.failures: list[str] = []

    def __enter__(self):
        self.start = time.perf_counter()
        return self

    def check(self, ok: bool, what: str) -> None:
        if not ok and len(self.failures) < 5:
            self.failures.append(what)

    def __exit__(self, exc_type, exc, _tb):
        elapsed = time.perf_counter() - self.start
        if exc is not None:
            self.failures.append(f"{exc_type.__name__}: {exc}")
        if elapsed >= self.budget:
            self.failures.append(f"took {elapsed:.2f}s, budget {self.budget}s")
        status = "FAIL" if self.failures else "PASS"
        line = f"criterion {self.number:2d}: {status} ({elapsed:.2f}s / {self.budget}s)"
        if self.failures:
            line += " " + "; ".join(self.failures)
        RESULTS.append(line)
        with self.capsys.disabled():
            print("\n" + line)
        if exc is None:
            assert not self.failures, line
        return False


@pytest.fixture
def criterion(capsys):
    return lambda number, budget: Criterion(number, budget, capsys)


def _soundness_cases():
    gen = make_gen(SEED)
    return gen, [gen.case() for _ in range(500)]


def test_1_golden_compilation(criterion):
    with criterion(1, 1.0) as c:
        il = compile_contract(parse_contract(TEMPLATED), TE(TNum(0)))
        c.check(il == parse_il(TEMPLATED_IL), "compiled IL differs from the expected text")


def test_2_soundness(criterion):
    with criterion(2, 60.0) as c:
        _gen, cases = _soundness_cases()
        for i, cs in enumerate(cases):
            oracle = aggregate_price(cs.contract, {}, cs.rho, cs.tenv, cs.disc, cs.p1, cs.p2)
            value = il_sem(compile_contract(cs.contract), cs.rho, cs.tenv, 0, 0, cs.disc, cs.p1, cs.p2)
            c.check(abs(oracle - value) <= 1e-7 * (1 + abs(oracle)), f"case {i}: {oracle} vs {value}")


def test_3_totality(criterion):
    with criterion(3, 60.0) as c:
        gen, cases = _soundness_cases()
        for i, cs in enumerate(cases):
            il = compile_contract(cs.contract)
            cut = cut_payoff(il)
            for _ in range(10):
                t0, t_now = gen.rng.randint(0, 20), gen.rng.randint(0, 40)
                for expr in (il, cut):
                    try:
                        value = il_sem(expr, cs.rho, cs.tenv, t0, t_now, cs.disc, cs.p1, cs.p2)
                    except ContractError as exc:
                        c.check(False, f"case {i} at ({t0}, {t_now}): {exc}")
                    else:
                        c.check(math.isfinite(value), f"case {i} at ({t0}, {t_now}): {value}")


def test_4_reduction_commutation(criterion):
    with criterion(4, 60.0) as c:
        gen = make_gen(SEED + 1)
        done = attempts = 0
        while done < 200 and attempts < 10_000:
            attempts += 1
            cs = gen.case(closed=True)
            cfg = PricingConfig(cs.p1, cs.p2, cs.disc, 0, cs.tenv)
            try:
                result = commutation_check(cs.contract, cs.rho, cfg, tol=1e-7)
            except ReductionStuck:
                continue
            done += 1
            c.check(result.agree, f"case {done}: {result.cut_at_one} vs {result.reduced_at_zero}")
        c.check(done == 200, f"only {done} reducible cases in {attempts} attempts")


def test_5_cut_payoff_identity(criterion):
    with criterion(5, 30.0) as c:
        gen = make_gen(SEED + 2)
        for i in range(200):
            cs = gen.case()
            il = compile_contract(cs.contract)
            cut = cut_payoff(il)
            for _ in range(5):
                rho = gen.env()
                a = il_sem(il, rho, cs.tenv, 0, 0, cs.disc, cs.p1, cs.p2)
                b = il_sem(cut, rho, cs.tenv, 0, 0, cs.disc, cs.p1, cs.p2)
                c.check(a == b, f"case {i}: {a} != {b}")


def _horizon_cases():
    gen = make_gen(SEED + 3, compilable=False)
    return [gen.case() for _ in range(300)]


def test_6_horizon_soundness(criterion):
    with criterion(6, 30.0) as c:
        for n in (0, 1, 7):
            c.check(horizon(Translate(TNum(n), ZERO), {}) == 0, f"horizon of translate({n}, zero)")
        for i, cs in enumerate(_horizon_cases()):
            h = horizon(cs.contract, cs.tenv)
            support = csem(cs.contract, {}, cs.rho, cs.tenv).support()
            c.check(all(d < h for d in support), f"case {i}: support {support} vs horizon {h}")


def test_7_trace_algebra(criterion):
    with criterion(7, 10.0) as c:
        gen = make_gen(SEED + 4)
        traces = [gen.trace() for _ in range(100)]
        z = Trace.zero()
        for i in range(100):
            a, b, d = traces[i], traces[(i + 1) % 100], traces[(i + 2) % 100]
            r, s = gen.rng.uniform(-10, 10), gen.rng.uniform(-10, 10)
            t = gen.rng.randint(0, 40)
            laws = {
                "commutativity": (a + b).close(b + a),
                "associativity": ((a + b) + d).close(a + (b + d)),
                "identity": a + z == a,
                "inverse": (a + (-a)).close(z),
                "distributivity over traces": (r * (a + b)).close(r * a + r * b),
                "distributivity over scalars": ((r + s) * a).close(r * a + s * a),
                "scalar compatibility": ((r * s) * a).close(r * (s * a)),
                "unit scalar": 1.0 * a == a,
                "delay scale": delay(t, s * a).close(s * delay(t, a)),
                "delay add": delay(t, a + b).close(delay(t, a) + delay(t, b)),
            }
            for law, ok in laws.items():
                c.check(ok, f"trace {i}: {law}")
        for i, cs in enumerate(_horizon_cases()):
            tr = csem(cs.contract, {}, cs.rho, cs.tenv)
            c.check(all(tr(d).is_antisymmetric() for d in tr.support()), f"case {i}: not antisymmetric")


def test_8_instantiation_soundness(criterion):
    with criterion(8, 30.0) as c:
        gen = make_gen(SEED + 5, compilable=False)
        for i in range(200):
            cs = gen.case()
            want = csem(cs.contract, {}, cs.rho, cs.tenv)
            closed = instantiate(cs.contract, cs.tenv)
            for _ in range(3):
                c.check(csem(closed, {}, cs.rho, gen.tenv()).close(want), f"case {i}")


def test_9_reduction_example(criterion):
    with criterion(9, 1.0) as c:
        you_me = Transfer("you", "me", "USD")
        c.check(smart_both(ZERO, smart_translate(0, you_me)) == you_me, "smart constructors")
        residual, today = reduce(Both(you_me, Translate(TNum(1), you_me)), {}, ExtEnv())
        c.check(residual == you_me, f"residual {residual}")
        c.check(today == Trans.unit("you", "me", "USD"), f"transfer {today}")


def test_10_codegen_golden(criterion):
    with criterion(10, 5.0) as c:
        source = emit(compile_contract(parse_contract(TEMPLATED))).source
        c.check(source == GOLDEN.read_text(encoding="utf-8"), "emitted module differs from golden")
        gen = make_gen(SEED + 6)
        for i in range(100):
            cs = gen.case()
            il = as_loopif0(cut_payoff(compile_contract(cs.contract)))
            t0, t_now = gen.rng.randint(0, 10), gen.rng.randint(0, 20)
            args = (cs.rho, cs.tenv, t0, t_now, cs.disc, cs.p1, cs.p2)
            c.check(il_sem(il, *args) == il_sem(simplify_loopif0(il), *args), f"case {i}")


def test_11_monte_carlo_sanity(criterion):
    with criterion(11, 120.0) as c:
        option = parse_contract(EUROPEAN)
        cfg = PricingConfig("you", "me", Discount.flat(0.0))
        flat = monte_carlo_price(option, ScenarioSpec({"AAPL": GBM(110.0, 0.0, 0.0)}, n_paths=100, seed=1), cfg)
        c.check(flat.price == 10.0, f"vol-0 price {flat.price}")
        gbm = {"AAPL": GBM(110.0, 0.0, 0.01)}
        small = monte_carlo_price(option, ScenarioSpec(gbm, n_paths=10_000, seed=2), cfg)
        large = monte_carlo_price(option, ScenarioSpec(gbm, n_paths=100_000, seed=3), cfg)
        se = math.hypot(small.stderr_estimate, large.stderr_estimate)
        c.check(small.stderr_estimate > 0, "vol > 0 but zero standard error")
        c.check(abs(small.price - large.price) <= 4 * se,
                f"{small.price} vs {large.price}, 4 se = {4 * se}")
