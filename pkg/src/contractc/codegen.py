"""Emit a standalone payoff function from a payoff expression.

The single backend writes a Haskell-style module; its grammar is described
in ``docs/backend.md``. Emitted text is checked by ``lint`` but never run;
``il_sem`` is the executable reference for what it computes.
"""

from __future__ import annotations

import enum
import re
from dataclasses import dataclass

from contractc.errors import CodegenError
from contractc.payoff import (
    BinOp, BoolLit, FloatLit, If, ILBinOp, ILExpr, ILTExpr, ILTExprZ, ILUnOp,
    LoopIf, Model, NatLit, Now, NumZ, Payoff, TE, TEZ, TexprVal, TPlus, TPlusZ, UnOp,
)
from contractc.syntax import TNum


class BackendKind(enum.Enum):
    REFERENCE_FUNCTIONAL = "reference-functional"


@dataclass(frozen=True)
class Backend:
    kind: BackendKind = BackendKind.REFERENCE_FUNCTIONAL
    module_name: str = "Examples.PayoffFunction"
    emit_loopif_helper: bool = True


@dataclass(frozen=True)
class EmittedModule:
    source: str
    entry_point: str
    helper_included: bool

    @property
    def file_name(self) -> str:
        m = re.match(r"module ([\w.]+) where", self.source)
        return (m.group(1).replace(".", "/") if m else "Payoff") + ".hs"


_LOOPIF_HELPER = """\
loopif :: Int -> Int -> (Int -> Bool) -> (Int -> a) -> (Int -> a) -> a
loopif n t0 b e1 e2 =
  if b t0 then e1 t0
  else if n == 0 then e2 t0
  else loopif (n - 1) (t0 + 1) b e1 e2
"""

_INFIX = {
    ILBinOp.ADD: "+",
    ILBinOp.SUB: "-",
    ILBinOp.MULT: "*",
    ILBinOp.DIV: "/",
    ILBinOp.LT: "<",
    ILBinOp.LE: "<=",
    ILBinOp.EQ: "==",
    ILBinOp.AND: "&&",
    ILBinOp.OR: "||",
    ILBinOp.LTN: "<",
}


def _tsum(t: ILTExpr) -> str:
    match t:
        case TE(t=TNum(n=n)):
            return str(n)
        case TE(t=var):
            return f'(tenv Map.! "{var.name}")'
        case TPlus(left=l, right=r):
            return f"{_tsum(l)} + {_tsum(r)}"
    raise CodegenError(f"bad template sum {t!r}")


def _tsum_z(t: ILTExprZ) -> str:
    match t:
        case TEZ(t=inner):
            return _tsum(inner)
        case NumZ(n=n):
            return str(n) if n >= 0 else f"({n})"
        case TPlusZ(left=l, right=r):
            return f"{_tsum_z(l)} + {_tsum_z(r)}"
    raise CodegenError(f"bad template sum {t!r}")


def _expr(il: ILExpr) -> str:
    match il:
        case FloatLit(value=v):
            text = repr(float(v))
            return f"({text})" if text.startswith("-") else text
        case NatLit(value=n):
            return str(n)
        case BoolLit(value=b):
            return "True" if b else "False"
        case TexprVal(t=t):
            return f"({_tsum(t)} + t0)"
        case Now():
            return "t_now"
        case Model(label=l, t=t):
            return f'(ext Map.! ("{l}", {_tsum_z(t)} + t0))'
        case UnOp(op=ILUnOp.NEG, arg=a):
            return f"(negate {_expr(a)})"
        case UnOp(op=ILUnOp.NOT, arg=a):
            return f"(not {_expr(a)})"
        case BinOp(op=ILBinOp.MAX | ILBinOp.MIN as op, left=a, right=b):
            return f"({op.value} {_expr(a)} {_expr(b)})"
        case BinOp(op=op, left=a, right=b):
            return f"({_expr(a)} {_INFIX[op]} {_expr(b)})"
        case If(cond=c, then=a, else_=b):
            return f"(if {_expr(c)} then {_expr(a)} else {_expr(b)})"
        case LoopIf(cond=c, then=a, else_=b, bound=n):
            return (
                f"(loopif {_tsum(TE(n))} t0 (\\t0 -> {_expr(c)}) "
                f"(\\t0 -> {_expr(a)}) (\\t0 -> {_expr(b)}))"
            )
        case Payoff(t=t, src=x, dst=y):
            return (
                f"(disc ({_tsum(t)} + t0) * "
                f'(if "{x}" == p1 && "{y}" == p2 then 1 '
                f'else if "{x}" == p2 && "{y}" == p1 then -1 else 0))'
            )
    raise CodegenError(f"cannot emit {il!r}")


def emit(il: ILExpr, backend: Backend = Backend()) -> EmittedModule:
    if not isinstance(backend, Backend) or backend.kind is not BackendKind.REFERENCE_FUNCTIONAL:
        raise CodegenError(f"unknown backend {backend!r}")
    lines = [
        f"module {backend.module_name} where",
        "import qualified Data.Map as Map",
    ]
    if not backend.emit_loopif_helper:
        lines.append("import Examples.BasePayoff (loopif)")
    lines.append("")
    if backend.emit_loopif_helper:
        lines += [_LOOPIF_HELPER]
    lines += [
        "payoffInternal ext tenv disc t0 t_now p1 p2 =",
        f"  {_expr(il)}",
        "",
        "payoff ext tenv disc t_now p1 p2 = payoffInternal ext tenv disc 0 t_now p1 p2",
        "",
    ]
    module = EmittedModule("\n".join(lines), "payoff", backend.emit_loopif_helper)
    problems = lint(module.source)
    if problems:
        raise CodegenError("emitted module failed lint: " + "; ".join(problems))
    return module


_LINT_TOKEN = re.compile(
    r'\s+|"[^"\n]*"|\d+(?:\.\d+)?(?:e[+-]?\d+)?|Map\.!|[A-Za-z_][\w\']*(?:\.[A-Z]\w*)*|'
    r"->|::|&&|\|\||==|<=|[-+*/<()\\=,]"
)
_KNOWN_NAMES = {
    "module", "where", "import", "qualified", "as", "Map", "Data.Map",
    "if", "then", "else", "not", "negate", "max", "min", "True", "False",
    "loopif", "payoffInternal", "payoff", "ext", "tenv", "disc",
    "t0", "t_now", "p1", "p2", "n", "b", "e1", "e2", "Int", "Bool", "a",
    "Examples.BasePayoff", "Map.!",
}
_MODULE_HEADER = re.compile(r"module ([A-Z]\w*(?:\.[A-Z]\w*)*) where\n")


def lint(source: str) -> list[str]:
    """Structural checks on emitted text: token set, bracket balance, definitions."""
    problems = []
    header = _MODULE_HEADER.match(source)
    if not header:
        return ["missing or malformed module header"]
    depth = 0
    pos = header.end()
    names = _KNOWN_NAMES
    for m in _LINT_TOKEN.finditer(source, pos):
        if m.start() != pos:
            problems.append(f"unexpected text {source[pos:m.start()]!r} at offset {pos}")
        pos = m.end()
        tok = m.group()
        if tok == "(":
            depth += 1
        elif tok == ")":
            depth -= 1
            if depth < 0:
                problems.append(f"unbalanced ')' at offset {m.start()}")
                depth = 0
        elif tok[0].isalpha() and tok not in names:
            problems.append(f"unknown name {tok!r}")
    if pos != len(source):
        problems.append(f"unexpected text at offset {pos}")
    if depth:
        problems.append("unbalanced '('")
    for required in ("payoffInternal ext tenv disc t0 t_now p1 p2 =", "payoff ext tenv disc t_now p1 p2 ="):
        if required not in source:
            problems.append(f"missing definition {required.split()[0]}")
    if "loopif " in source.split("payoffInternal", 1)[-1] and "loopif n t0" not in source \
            and "import Examples.BasePayoff (loopif)" not in source:
        problems.append("loopif used but neither defined nor imported")
    return problems


def simplify_loopif0(il: ILExpr) -> ILExpr:
    """Rewrite every zero-bound ``loopif`` into a plain ``if``."""
    match il:
        case LoopIf(cond=c, then=a, else_=b, bound=TNum(n=0)):
            return If(simplify_loopif0(c), simplify_loopif0(a), simplify_loopif0(b))
        case LoopIf(cond=c, then=a, else_=b, bound=n):
            return LoopIf(simplify_loopif0(c), simplify_loopif0(a), simplify_loopif0(b), n)
        case If(cond=c, then=a, else_=b):
            return If(simplify_loopif0(c), simplify_loopif0(a), simplify_loopif0(b))
        case UnOp(op=op, arg=a):
            return UnOp(op, simplify_loopif0(a))
        case BinOp(op=op, left=a, right=b):
            return BinOp(op, simplify_loopif0(a), simplify_loopif0(b))
    return il
