"""Pricing pipelines, discounting, scenario generation and file ingestion."""

from __future__ import annotations

import enum
import json
import math
import os
import zlib
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Mapping, Union

import numpy as np

from contractc.compiler import aggregate_price, compile_contract
from contractc.errors import EnvFormatError, SortMismatch
from contractc.payoff import ILExpr, cut_payoff, il_sem
from contractc.reduction import reduce
from contractc.semantics import ExtEnv, TEnv, horizon, instantiate, is_real
from contractc.syntax import Contr, Obs, Ty, contract_exps, subexps
from contractc.typecheck import type_check_contract

DEFAULT_TOLERANCE = 1e-7


def tolerance() -> float:
    """Relative comparison tolerance, overridable with ``CONTRACTC_TOLERANCE``."""
    raw = os.environ.get("CONTRACTC_TOLERANCE")
    if raw is None:
        return DEFAULT_TOLERANCE
    try:
        tol = float(raw)
    except ValueError:
        raise EnvFormatError(f"CONTRACTC_TOLERANCE is not a number: {raw!r}") from None
    if not math.isfinite(tol) or tol < 0:
        raise EnvFormatError(f"CONTRACTC_TOLERANCE must be a finite non-negative number: {raw!r}")
    return tol


def close_enough(a: float, b: float, tol: float | None = None) -> bool:
    tol = tolerance() if tol is None else tol
    return abs(a - b) <= tol * (1 + abs(a))


@dataclass(frozen=True)
class Discount:
    """Discount factor per day: ``exp(-rate * t)`` or an explicit table."""

    rate: float = 0.0
    table: Mapping[int, float] | None = None
    offset: int = 0

    def __post_init__(self):
        if self.table is None and not math.isfinite(self.rate):
            raise EnvFormatError(f"discount rate must be finite, got {self.rate!r}")

    @classmethod
    def flat(cls, rate: float) -> "Discount":
        return cls(rate=float(rate))

    @classmethod
    def from_table(cls, table: Mapping[int, float]) -> "Discount":
        return cls(table=dict(table))

    def __call__(self, t: int) -> float:
        t += self.offset
        if self.table is None:
            return math.exp(-self.rate * t)
        try:
            return self.table[t]
        except KeyError:
            raise EnvFormatError(f"discount table has no entry for day {t}") from None

    def shift(self, n: int) -> "Discount":
        """``t -> d(t + n)``."""
        return replace(self, offset=self.offset + n)

    def check_covers(self, last_day: int) -> None:
        if self.table is None:
            return
        missing = [t for t in range(self.offset, last_day + self.offset + 1) if t not in self.table]
        if missing:
            raise EnvFormatError(f"discount table misses days {missing[:5]}")

    def to_json(self) -> dict:
        if self.table is None:
            return {"kind": "flat", "rate": self.rate}
        return {"kind": "table", "days": len(self.table)}


@dataclass(frozen=True)
class PricingConfig:
    p1: str
    p2: str
    discount: Discount = field(default_factory=Discount)
    t_now: int = 0
    tenv: TEnv = field(default_factory=dict)

    def __post_init__(self):
        if self.t_now < 0:
            raise EnvFormatError(f"t_now must be a natural number, got {self.t_now}")


class Pipeline(enum.Enum):
    ORACLE = "oracle"
    COMPILED = "compiled"
    COMPILED_CUT = "compiled-cut"


@dataclass(frozen=True)
class PriceReport:
    price: float
    stderr_estimate: float
    pipeline: Pipeline
    horizon_used: int

    def to_json(self) -> dict:
        return {
            "price": self.price,
            "stderr_estimate": self.stderr_estimate,
            "pipeline": self.pipeline.value,
            "horizon_used": self.horizon_used,
        }


# File ingestion


def _no_duplicates(pairs):
    seen = {}
    for k, v in pairs:
        if k in seen:
            raise EnvFormatError(f"duplicate key {k!r}")
        seen[k] = v
    return seen


def read_json(path) -> object:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise EnvFormatError(f"cannot read {path}: {exc.strerror}") from None
    try:
        return json.loads(text, object_pairs_hook=_no_duplicates)
    except json.JSONDecodeError as exc:
        raise EnvFormatError(f"{path}: invalid JSON: {exc.msg} at line {exc.lineno}") from None


def _day(key: str, where: str) -> int:
    try:
        return int(key.strip())
    except ValueError:
        raise EnvFormatError(f"{where}: time key {key!r} is not an integer") from None


def env_from_json(data: object, labels: Mapping[str, Ty] | None = None, where: str = "env") -> ExtEnv:
    """Build an environment from ``{label: {day: value}}``, checking sorts."""
    if not isinstance(data, dict):
        raise EnvFormatError(f"{where}: expected an object of labels")
    entries = {}
    for label, series in data.items():
        if not isinstance(series, dict):
            raise EnvFormatError(f"{where}: label {label!r} must map to an object")
        sorts = set()
        for key, v in series.items():
            day = _day(key, where)
            if (label, day) in entries:
                raise EnvFormatError(f"{where}: duplicate day {day} for {label!r}")
            if isinstance(v, bool):
                sorts.add(Ty.BOOL)
            elif isinstance(v, (int, float)) and math.isfinite(v):
                sorts.add(Ty.REAL)
                v = float(v)
            else:
                raise EnvFormatError(f"{where}: value {v!r} for {label!r} is not a finite number or boolean")
            entries[(label, day)] = v
        if len(sorts) > 1:
            raise SortMismatch(f"{where}: label {label!r} mixes Real and Bool values")
        declared = (labels or {}).get(label)
        if declared is not None and sorts and sorts != {declared}:
            raise SortMismatch(f"{where}: label {label!r} is declared {declared.value}")
    return ExtEnv(entries)


def load_env(path, labels: Mapping[str, Ty] | None = None) -> ExtEnv:
    return env_from_json(read_json(path), labels, str(path))


def tenv_from_json(data: object, where: str = "tenv") -> dict[str, int]:
    if not isinstance(data, dict):
        raise EnvFormatError(f"{where}: expected an object of template variables")
    out = {}
    for k, v in data.items():
        if isinstance(v, bool) or not isinstance(v, int) or v < 0:
            raise EnvFormatError(f"{where}: value of {k!r} must be a natural number, got {v!r}")
        out[k] = v
    return out


def load_tenv(path) -> dict[str, int]:
    return tenv_from_json(read_json(path), str(path))


def load_discount_table(path) -> Discount:
    data = read_json(path)
    if not isinstance(data, dict):
        raise EnvFormatError(f"{path}: expected an object of days")
    table = {}
    for k, v in data.items():
        day = _day(k, str(path))
        if day in table:
            raise EnvFormatError(f"{path}: duplicate day {day}")
        if isinstance(v, bool) or not isinstance(v, (int, float)) or not math.isfinite(v):
            raise EnvFormatError(f"{path}: discount for day {day} must be a finite number")
        table[day] = float(v)
    return Discount.from_table(table)


# Pricing


def _label_sorts(c: Contr) -> dict[str, Ty]:
    return {e.label.name: e.label.sort for x in contract_exps(c) for e in subexps(x) if isinstance(e, Obs)}


def price(c: Contr, rho: ExtEnv, cfg: PricingConfig, pipeline: Pipeline = Pipeline.ORACLE) -> PriceReport:
    """Price ``c`` for ``cfg.p1`` against ``cfg.p2`` through one pipeline.

    At ``t_now = 0`` all three pipelines agree; for ``t_now > 0`` the
    oracle and the guarded compiled expression both ignore earlier days,
    while the unguarded compiled expression prices the whole contract.
    """
    type_check_contract({}, c)
    h = horizon(c, cfg.tenv)
    cfg.discount.check_covers(h)
    if pipeline is Pipeline.ORACLE:
        value = aggregate_price(c, {}, rho, cfg.tenv, cfg.discount, cfg.p1, cfg.p2, from_time=cfg.t_now)
    else:
        il = compile_contract(c)
        value = _eval_real(il, rho, cfg, pipeline)
    return PriceReport(float(value), 0.0, pipeline, h)


def _eval_real(il: ILExpr, rho: ExtEnv, cfg: PricingConfig, pipeline: Pipeline) -> float:
    if pipeline is Pipeline.COMPILED_CUT:
        v = il_sem(cut_payoff(il), rho, cfg.tenv, 0, cfg.t_now, cfg.discount, cfg.p1, cfg.p2)
    else:
        v = il_sem(il, rho, cfg.tenv, 0, 0, cfg.discount, cfg.p1, cfg.p2)
    if not is_real(v):
        raise SortMismatch(f"payoff expression evaluated to {v!r}, expected a real")
    return float(v)


@dataclass(frozen=True)
class CommutationResult:
    cut_at_one: float
    reduced_at_zero: float
    residual: Contr
    agree: bool

    def to_json(self) -> dict:
        from contractc.parser import print_contract

        return {
            "cut_at_one": self.cut_at_one,
            "reduced_at_zero": self.reduced_at_zero,
            "residual": print_contract(self.residual),
            "agree": self.agree,
        }


def commutation_check(c: Contr, rho: ExtEnv, cfg: PricingConfig, tol: float | None = None) -> CommutationResult:
    """Compare one-day reduction followed by compilation against ``cut_payoff``.

    Left: the guarded compiled contract evaluated at ``t_now = 1``. Right:
    the residual of reducing with today's history (days ``<= 0`` of ``rho``)
    compiled and evaluated under ``rho`` and the discount both moved one day.
    Raises ``ReductionStuck`` when the history does not decide today.
    """
    closed = instantiate(c, cfg.tenv)
    residual, _today = reduce(closed, {}, rho.up_to(0))
    lhs = il_sem(cut_payoff(compile_contract(closed)), rho, cfg.tenv, 0, 1, cfg.discount, cfg.p1, cfg.p2)
    rhs = il_sem(
        compile_contract(residual), rho.advance(1), cfg.tenv, 0, 0, cfg.discount.shift(1), cfg.p1, cfg.p2,
    )
    return CommutationResult(float(lhs), float(rhs), residual, close_enough(float(rhs), float(lhs), tol))


# Monte Carlo


@dataclass(frozen=True)
class GBM:
    """Geometric Brownian motion with one step per day; ``seed`` overrides the scenario seed."""

    spot: float
    drift: float = 0.0
    vol: float = 0.0
    seed: int | None = None

    def __post_init__(self):
        if self.vol < 0 or not math.isfinite(self.vol):
            raise EnvFormatError(f"GBM volatility must be finite and >= 0, got {self.vol}")


@dataclass(frozen=True)
class Table:
    """A deterministic series shared by every path."""

    values: Mapping[int, float | bool]


Generator = Union[GBM, Table]


@dataclass(frozen=True)
class ScenarioSpec:
    generators: Mapping[str, Generator]
    n_paths: int = 1
    horizon_hint: int = 0
    seed: int = 0
    history: ExtEnv | None = None

    def __post_init__(self):
        if self.n_paths < 1:
            raise EnvFormatError(f"n_paths must be at least 1, got {self.n_paths}")


def last_observed_day(c: Contr, tenv: TEnv) -> int:
    """Latest day any observable of ``c`` can be read, relative to day 0."""
    shift = max(
        (sub.index for e in contract_exps(c) for sub in subexps(e) if isinstance(sub, Obs)),
        default=0,
    )
    return horizon(c, tenv) + max(shift, 0)


def gbm_paths(g: GBM, n_paths: int, days: int, rng: np.random.Generator) -> np.ndarray:
    """``n_paths x (days + 1)`` array; column ``t`` holds day ``t``, column 0 the spot."""
    z = rng.standard_normal((n_paths, days))
    steps = (g.drift - 0.5 * g.vol * g.vol) + g.vol * z
    paths = np.empty((n_paths, days + 1))
    paths[:, 0] = g.spot
    if days:
        paths[:, 1:] = g.spot * np.exp(np.cumsum(steps, axis=1))
    return paths


def label_rng(seed: int, label: str) -> np.random.Generator:
    """PCG64 stream for one label, derived from the seed and a CRC-32 of the label."""
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence([seed, zlib.crc32(label.encode())])))


def simulate(spec: ScenarioSpec, days: int) -> list[ExtEnv]:
    """One environment per path; ``spec.history`` wins over generated values."""
    series = {}
    for label in sorted(spec.generators):
        g = spec.generators[label]
        if isinstance(g, GBM):
            seed = spec.seed if g.seed is None else g.seed
            series[label] = gbm_paths(g, spec.n_paths, days, label_rng(seed, label)).tolist()
    shared = {}
    for label, g in spec.generators.items():
        if isinstance(g, Table):
            shared.update({(label, t): v for t, v in g.values.items()})
    if spec.history is not None:
        shared.update(dict(spec.history.items()))
    envs = []
    for p in range(spec.n_paths):
        entries = {(label, t): v for label, rows in series.items() for t, v in enumerate(rows[p])}
        entries.update(shared)
        envs.append(ExtEnv(entries))
    return envs


def monte_carlo_price(c: Contr, spec: ScenarioSpec, cfg: PricingConfig) -> PriceReport:
    """Mean compiled price over simulated paths with its standard error.

    Paths are evaluated in index order and summed with ``math.fsum``, so the
    report depends only on the inputs and the seed.
    """
    type_check_contract({}, c)
    used = set(_label_sorts(c))
    missing = used - set(spec.generators) - {k[0] for k, _ in (spec.history.items() if spec.history else [])}
    if missing:
        raise EnvFormatError(f"no scenario generator for labels {sorted(missing)}")
    h = horizon(c, cfg.tenv)
    cfg.discount.check_covers(h)
    pipeline = Pipeline.COMPILED if cfg.t_now == 0 else Pipeline.COMPILED_CUT
    il = compile_contract(c)
    days = max(spec.horizon_hint, last_observed_day(c, cfg.tenv))
    prices = [_eval_real(il, rho, cfg, pipeline) for rho in simulate(spec, days)]
    n = len(prices)
    mean = math.fsum(prices) / n
    if n > 1:
        var = math.fsum((x - mean) ** 2 for x in prices) / (n - 1)
        stderr = math.sqrt(var / n)
    else:
        stderr = 0.0
    return PriceReport(mean, stderr, pipeline, h)
