"""``contractc`` command-line tool.

Every subcommand prints one JSON document on stdout (or plain text with
``--text``). Exit status: 0 success, 1 domain error, 2 usage error.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass
from pathlib import Path

from contractc.codegen import Backend, emit
from contractc.compiler import compile_contract
from contractc.errors import ContractError, EnvFormatError
from contractc.parser import Program, parse_program, print_contract
from contractc.payoff import TE, cut_payoff, print_il
from contractc.pricing import (
    GBM, Discount, Pipeline, PricingConfig, ScenarioSpec, Table, commutation_check,
    load_discount_table, load_env, load_tenv, monte_carlo_price, price, read_json,
)
from contractc.reduction import reduce
from contractc.semantics import ExtEnv, horizon, instantiate, is_template_closed
from contractc.syntax import TNum, labels_of, template_vars
from contractc.typecheck import type_check_contract


class _Usage(Exception):
    pass


@dataclass
class _Output:
    text: str
    data: dict
    failed: bool = False


def _read_program(path: str) -> Program:
    try:
        src = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise EnvFormatError(f"cannot read {path}: {exc.strerror}") from None
    prog = parse_program(src)
    type_check_contract({}, prog.contract)
    return prog


def _env(args, prog: Program) -> ExtEnv:
    return load_env(args.env, prog.labels) if args.env else ExtEnv()


def _tenv(args) -> dict[str, int]:
    return load_tenv(args.tenv) if args.tenv else {}


def _config(args) -> PricingConfig:
    if args.discount_table:
        disc = load_discount_table(args.discount_table)
    else:
        disc = Discount.flat(args.discount_rate)
    return PricingConfig(args.p1, args.p2, disc, args.t_now, _tenv(args))


def cmd_check(args) -> _Output:
    prog = _read_program(args.contract)
    data = {
        "ok": True,
        "labels": sorted(f"{l.name}:{l.sort.value}" for l in labels_of(prog.contract)),
        "template_vars": sorted(template_vars(prog.contract)),
        "template_closed": is_template_closed(prog.contract),
    }
    if args.tenv:
        data["horizon"] = horizon(prog.contract, _tenv(args))
    return _Output("ok", data)


def _compiled(args):
    prog = _read_program(args.contract)
    return compile_contract(prog.contract, TE(TNum(args.t0)))


def cmd_compile(args) -> _Output:
    text = print_il(_compiled(args))
    return _Output(text, {"il": text})


def cmd_cutpayoff(args) -> _Output:
    text = print_il(cut_payoff(_compiled(args)))
    return _Output(text, {"il": text})


def cmd_reduce(args) -> _Output:
    prog = _read_program(args.contract)
    tenv = _tenv(args)
    rho = _env(args, prog)
    closed = instantiate(prog.contract, tenv)
    residual, today = reduce(closed, {}, rho.up_to(0) if args.history_only else rho)
    transfers = [
        {"from": p, "to": q, "asset": a, "amount": v}
        for (p, q, a), v in sorted(today.items()) if v > 0
    ]
    data = {"residual": print_contract(residual), "transfers": transfers}
    if args.p1 and args.p2:
        data["commutation"] = commutation_check(prog.contract, rho, _config(args)).to_json()
    lines = [data["residual"]] + [f"{t['from']} -> {t['to']} {t['amount']} {t['asset']}" for t in transfers]
    return _Output("\n".join(lines), data)


def _need_parties(args):
    if not (args.p1 and args.p2):
        raise _Usage("--p1 and --p2 are required")


def cmd_price(args) -> _Output:
    _need_parties(args)
    prog = _read_program(args.contract)
    rho = _env(args, prog)
    cfg = _config(args)
    pipelines = list(Pipeline) if args.pipeline == "all" else [Pipeline(args.pipeline)]
    reports = [price(prog.contract, rho, cfg, p) for p in pipelines]
    if len(reports) == 1:
        return _Output(repr(reports[0].price), reports[0].to_json())
    text = "\n".join(f"{r.pipeline.value} {r.price!r}" for r in reports)
    return _Output(text, {"reports": [r.to_json() for r in reports]})


def scenario_from_json(data: object, seed: int, n_paths: int, history: ExtEnv | None) -> ScenarioSpec:
    """``{"labels": {L: {"gbm": {...}} | {"table": {...}}}, "horizon_hint": n}``."""
    if not isinstance(data, dict) or not isinstance(data.get("labels"), dict):
        raise EnvFormatError("scenario must be an object with a 'labels' object")
    gens = {}
    for label, g in data["labels"].items():
        if isinstance(g, dict) and isinstance(g.get("gbm"), dict):
            p = g["gbm"]
            try:
                gens[label] = GBM(float(p["spot"]), float(p.get("drift", 0.0)), float(p.get("vol", 0.0)), p.get("seed"))
            except (KeyError, TypeError, ValueError) as exc:
                raise EnvFormatError(f"scenario: bad gbm for {label!r}: {exc}") from None
        elif isinstance(g, dict) and isinstance(g.get("table"), dict):
            try:
                gens[label] = Table({int(k): v for k, v in g["table"].items()})
            except ValueError:
                raise EnvFormatError(f"scenario: bad table keys for {label!r}") from None
        else:
            raise EnvFormatError(f"scenario: label {label!r} needs a 'gbm' or 'table' generator")
    hint = data.get("horizon_hint", 0)
    if isinstance(hint, bool) or not isinstance(hint, int) or hint < 0:
        raise EnvFormatError("scenario: horizon_hint must be a natural number")
    return ScenarioSpec(gens, n_paths, hint, seed, history)


def cmd_mc_price(args) -> _Output:
    _need_parties(args)
    prog = _read_program(args.contract)
    history = load_env(args.env, prog.labels) if args.env else None
    spec = scenario_from_json(read_json(args.scenario), args.seed, args.paths, history)
    report = monte_carlo_price(prog.contract, spec, _config(args))
    return _Output(f"{report.price!r} +/- {report.stderr_estimate!r}", report.to_json())


def cmd_codegen(args) -> _Output:
    il = _compiled(args)
    if args.cut:
        il = cut_payoff(il)
    module = emit(il, Backend(module_name=args.module_name, emit_loopif_helper=not args.no_helper))
    data = {
        "source": module.source,
        "entry_point": module.entry_point,
        "helper_included": module.helper_included,
        "file_name": module.file_name,
    }
    return _Output(module.source, data)


def cmd_selftest(args) -> _Output:
    from contractc.selftest import run_all

    results = run_all(args.seed, args.scale)
    lines = [f"{r.name}: {r.passed}/{r.total} passed" for r in results]
    data = {"ok": all(r.ok for r in results), "suites": [r.to_json() for r in results]}
    return _Output("\n".join(lines), data, failed=not data["ok"])


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="contractc", description="Compile and price financial contracts.")
    fmt = argparse.ArgumentParser(add_help=False)
    g = fmt.add_mutually_exclusive_group()
    g.add_argument("--json", dest="text", action="store_false", default=False, help="JSON output (default)")
    g.add_argument("--text", dest="text", action="store_true", default=False, help="plain text output")
    fmt.add_argument("--out", metavar="PATH", help="write output to PATH instead of stdout")

    inputs = argparse.ArgumentParser(add_help=False)
    inputs.add_argument("--env", metavar="PATH", help="observable environment (JSON)")
    inputs.add_argument("--tenv", metavar="PATH", help="template environment (JSON)")
    disc = inputs.add_mutually_exclusive_group()
    disc.add_argument("--discount-rate", type=float, default=0.0, metavar="R", help="flat rate, d(t) = exp(-R t)")
    disc.add_argument("--discount-table", metavar="PATH", help="discount factors per day (JSON)")
    inputs.add_argument("--p1", metavar="NAME", help="party whose incoming cashflows are priced")
    inputs.add_argument("--p2", metavar="NAME", help="counterparty")
    inputs.add_argument("--t-now", type=int, default=0, metavar="N", help="current day")

    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, func, parents, help_):
        p = sub.add_parser(name, parents=parents, help=help_)
        p.add_argument("contract", help="contract source file")
        p.set_defaults(func=func)
        return p

    add("check", cmd_check, [fmt, inputs], "parse and type check")
    for name, func, help_ in (("compile", cmd_compile, "compile to a payoff expression"),
                              ("cutpayoff", cmd_cutpayoff, "compile and guard payoffs by the current time")):
        p = add(name, func, [fmt], help_)
        p.add_argument("--t0", type=int, default=0, metavar="N", help="starting day")
    p = add("reduce", cmd_reduce, [fmt, inputs], "advance the contract by one day")
    p.add_argument("--history-only", action="store_true", help="use only days <= 0 of the environment")
    p = add("price", cmd_price, [fmt, inputs], "price under one pipeline or all")
    p.add_argument("--pipeline", choices=[x.value for x in Pipeline] + ["all"], default="oracle")
    p = add("mc-price", cmd_mc_price, [fmt, inputs], "Monte Carlo price over simulated scenarios")
    p.add_argument("--scenario", required=True, metavar="PATH", help="scenario generators (JSON)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--paths", type=int, default=10000)
    p = add("codegen", cmd_codegen, [fmt], "emit a payoff function module")
    p.add_argument("--t0", type=int, default=0, metavar="N")
    p.add_argument("--cut", action="store_true", help="emit the time-guarded expression")
    p.add_argument("--module-name", default="Examples.PayoffFunction")
    p.add_argument("--no-helper", action="store_true", help="import loopif instead of defining it")

    p = sub.add_parser("selftest", parents=[fmt], help="run the randomised property suites")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--scale", type=float, default=1.0, help="fraction of the default case counts")
    p.set_defaults(func=cmd_selftest)
    return parser


def _emit(args, payload: str) -> None:
    if getattr(args, "out", None):
        Path(args.out).write_text(payload, encoding="utf-8")
    else:
        sys.stdout.write(payload)


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        out = args.func(args)
    except _Usage as exc:
        parser.print_usage(sys.stderr)
        print(f"contractc: error: {exc}", file=sys.stderr)
        return 2
    except ContractError as exc:
        sys.stdout.write(json.dumps({"error": exc.to_json()}) + "\n")
        return 1
    if args.text:
        _emit(args, out.text if out.text.endswith("\n") else out.text + "\n")
    else:
        _emit(args, json.dumps(out.data, indent=2) + "\n")
    return 1 if out.failed else 0


if __name__ == "__main__":
    sys.exit(main())
