"""Concrete syntax for contracts: parser and printer.

The grammar is documented in ``docs/grammar.md``. Printing is canonical:
``parse_program(print_program(c)) == c`` for every contract ``c`` whose
reals are finite.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from contractc.errors import ParseError
from contractc.lexer import TokenStream
from contractc.syntax import (
    Acc, BLit, Both, Contr, Exp, IfWithin, Label, Let, Obs, Op, OpCode, RLit,
    Scale, TExpr, TNum, Transfer, Translate, TVar, Ty, VarE, Zero, ZERO,
    arity, both_all, labels_of,
)

DEFAULT_ASSET = "USD"

_PREFIX_OPS = {op.value: op for op in OpCode}

# Binding strength, loosest first.
_OR, _AND, _CMP, _ADD, _MUL, _ATOM = range(1, 7)

_INFIX = {
    "||": (OpCode.OR, _OR),
    "&&": (OpCode.AND, _AND),
    "<": (OpCode.LT, _CMP),
    "<=": (OpCode.LE, _CMP),
    "==": (OpCode.EQ, _CMP),
    ">=": (OpCode.GE, _CMP),
    ">": (OpCode.GT, _CMP),
    "+": (OpCode.ADD, _ADD),
    "-": (OpCode.SUB, _ADD),
    "*": (OpCode.MULT, _MUL),
    "/": (OpCode.DIV, _MUL),
}
_INFIX_SYMBOL = {op: (sym, prec) for sym, (op, prec) in _INFIX.items()}


@dataclass
class Program:
    """A parsed ``.cl`` file: declarations plus one contract."""

    contract: Contr
    labels: dict[str, Ty] = field(default_factory=dict)
    parties: list[str] = field(default_factory=list)
    assets: list[str] = field(default_factory=list)


class _Parser:
    def __init__(self, src: str, labels: dict[str, Ty] | None = None):
        self.ts = TokenStream(src)
        self.labels: dict[str, Ty] = dict(labels or {})

    # -- prelude ---------------------------------------------------------

    def program(self) -> Program:
        parties: list[str] = []
        assets: list[str] = []
        while True:
            if self.ts.at("label") and self.ts.peek_at(1).kind == "ident" and self.ts.peek_at(2).text == ":":
                self.ts.next()
                name = self.ts.ident("label name")
                self.ts.expect(":")
                sort_tok = self.ts.peek
                sort = self.ts.ident("sort")
                try:
                    ty = Ty(sort)
                except ValueError:
                    raise self.ts.error("expected 'Real' or 'Bool'", sort_tok) from None
                if name in self.labels and self.labels[name] is not ty:
                    raise self.ts.error(f"label {name} redeclared at a different sort", sort_tok)
                self.labels[name] = ty
                self.ts.expect(";")
            elif self.ts.at("party") and self.ts.peek_at(1).kind == "ident" and self.ts.peek_at(2).text in (";", ","):
                self.ts.next()
                parties.extend(self._names())
            elif self.ts.at("asset") and self.ts.peek_at(1).kind == "ident" and self.ts.peek_at(2).text in (";", ","):
                self.ts.next()
                assets.extend(self._names())
            else:
                break
        c = self.contract()
        self.ts.expect_eof()
        return Program(c, self.labels, parties, assets)

    def _names(self) -> list[str]:
        names = [self.ts.ident()]
        while self.ts.accept(","):
            names.append(self.ts.ident())
        self.ts.expect(";")
        return names

    # -- contracts -------------------------------------------------------

    def contract(self) -> Contr:
        ts = self.ts
        tok = ts.peek
        if ts.accept("("):
            c = self.contract()
            ts.expect(")")
            return c
        if tok.kind != "ident":
            raise ts.error("expected a contract")
        name = ts.next().text
        if name == "zero":
            return ZERO
        if name == "let":
            var = ts.ident("variable")
            ts.expect("=")
            e = self.exp()
            ts.expect("in")
            return Let(var, e, self.contract())
        if name == "all":
            ts.expect("[")
            if ts.accept("]"):
                return ZERO
            parts = [self.contract()]
            while ts.accept(","):
                parts.append(self.contract())
            ts.expect("]")
            return both_all(*parts)
        ts.expect("(")
        match name:
            case "transfer":
                src = ts.ident("party")
                ts.expect(",")
                dst = ts.ident("party")
                asset = ts.ident("asset") if ts.accept(",") else DEFAULT_ASSET
                c = Transfer(src, dst, asset)
            case "scale":
                e = self.exp()
                ts.expect(",")
                c = Scale(e, self.contract())
            case "translate":
                t = self.texpr()
                ts.expect(",")
                c = Translate(t, self.contract())
            case "both":
                left = self.contract()
                ts.expect(",")
                c = Both(left, self.contract())
            case "if":
                cond = self.exp()
                ts.expect(",")
                c1 = self.contract()
                ts.expect(",")
                c = IfWithin(cond, TNum(0), c1, self.contract())
            case "ifWithin":
                cond = self.exp()
                ts.expect(",")
                t = self.texpr()
                ts.expect(",")
                c1 = self.contract()
                ts.expect(",")
                c = IfWithin(cond, t, c1, self.contract())
            case _:
                raise ParseError(f"unknown contract combinator {name!r}", tok.line, tok.col)
        ts.expect(")")
        return c

    def texpr(self) -> TExpr:
        tok = self.ts.peek
        if tok.kind == "ident":
            return TVar(self.ts.next().text)
        return TNum(self.ts.natural("template expression"))

    # -- expressions -----------------------------------------------------

    def exp(self, min_prec: int = _OR) -> Exp:
        left = self.unary()
        while True:
            tok = self.ts.peek
            if tok.kind != "punct" or tok.text not in _INFIX:
                return left
            op, prec = _INFIX[tok.text]
            if prec < min_prec:
                return left
            self.ts.next()
            right = self.exp(prec + 1)
            left = Op(op, (left, right))
            if prec == _CMP and self.ts.peek.text in _INFIX and _INFIX[self.ts.peek.text][1] == _CMP:
                raise self.ts.error("comparisons do not chain")

    def unary(self) -> Exp:
        ts = self.ts
        if ts.accept("-"):
            if ts.peek.kind == "num":
                return RLit(-float(ts.next().text))
            return Op(OpCode.NEG, (self.unary(),))
        if ts.accept("!"):
            return Op(OpCode.NOT, (self.unary(),))
        return self.atom()

    def atom(self) -> Exp:
        ts = self.ts
        tok = ts.peek
        if tok.kind == "num":
            ts.next()
            return RLit(float(tok.text))
        if ts.accept("("):
            e = self.exp()
            ts.expect(")")
            return e
        if tok.kind != "ident":
            raise ts.error("expected an expression")
        name = ts.next().text
        if name in ("true", "false"):
            return BLit(name == "true")
        if not ts.at("("):
            return VarE(name)
        ts.next()
        if name == "obs":
            label = ts.ident("label")
            ts.expect(",")
            index = ts.integer()
            ts.expect(")")
            return Obs(Label(label, self.labels.get(label, Ty.REAL)), index)
        if name == "acc":
            var = ts.ident("variable")
            ts.expect("->")
            body = self.exp()
            ts.expect(",")
            days = ts.natural("accumulation length")
            ts.expect(",")
            init = self.exp()
            ts.expect(")")
            return Acc(var, body, days, init)
        op = _PREFIX_OPS.get(name)
        if op is None:
            raise ParseError(f"unknown operator {name!r}", tok.line, tok.col)
        args = [self.exp()]
        while ts.accept(","):
            args.append(self.exp())
        ts.expect(")")
        if len(args) != arity(op):
            raise ParseError(f"operator {name!r} takes {arity(op)} arguments, got {len(args)}", tok.line, tok.col)
        return Op(op, tuple(args))


def parse_program(src: str, labels: dict[str, Ty] | None = None) -> Program:
    return _Parser(src, labels).program()


def parse_contract(src: str, labels: dict[str, Ty] | None = None) -> Contr:
    """Parse contract source text, optionally preceded by declarations.

    Observables of labels that are not declared default to sort ``Real``.
    """
    return parse_program(src, labels).contract


def parse_exp(src: str, labels: dict[str, Ty] | None = None) -> Exp:
    p = _Parser(src, labels)
    e = p.exp()
    p.ts.expect_eof()
    return e


# -- printing ---------------------------------------------------------------


def _real(x: float) -> str:
    return repr(float(x))


def _exp_prec(e: Exp) -> int:
    if isinstance(e, Op) and e.op in _INFIX_SYMBOL:
        return _INFIX_SYMBOL[e.op][1]
    return _ATOM


def print_exp(e: Exp, ctx: int = _OR) -> str:
    match e:
        case RLit(value=v):
            return _real(v)
        case BLit(value=b):
            return "true" if b else "false"
        case VarE(name=x):
            return x
        case Obs(label=l, index=i):
            return f"obs({l.name}, {i})"
        case Acc(var=x, body=body, days=d, init=init):
            return f"acc({x} -> {print_exp(body)}, {d}, {print_exp(init)})"
        case Op(op=op, args=args) if op in _INFIX_SYMBOL:
            sym, prec = _INFIX_SYMBOL[op]
            lhs_ctx = prec + 1 if prec == _CMP else prec
            text = f"{print_exp(args[0], lhs_ctx)} {sym} {print_exp(args[1], prec + 1)}"
            return f"({text})" if prec < ctx else text
        case Op(op=op, args=args):
            return f"{op.value}({', '.join(print_exp(a) for a in args)})"
    raise TypeError(f"not an expression: {e!r}")


def _texpr(t: TExpr) -> str:
    return str(t.n) if isinstance(t, TNum) else t.name


def print_contract(c: Contr) -> str:
    match c:
        case Zero():
            return "zero"
        case Transfer(src=p, dst=q, asset=a):
            return f"transfer({p}, {q}, {a})"
        case Scale(exp=e, body=b):
            return f"scale({print_exp(e)}, {print_contract(b)})"
        case Translate(delay=t, body=b):
            return f"translate({_texpr(t)}, {print_contract(b)})"
        case Both(left=l, right=r):
            return f"both({print_contract(l)}, {print_contract(r)})"
        case Let(var=x, exp=e, body=b):
            return f"let {x} = {print_exp(e)} in {print_contract(b)}"
        case IfWithin(cond=e, within=TNum(n=0), then=c1, else_=c2):
            return f"if({print_exp(e)}, {print_contract(c1)}, {print_contract(c2)})"
        case IfWithin(cond=e, within=t, then=c1, else_=c2):
            return f"ifWithin({print_exp(e)}, {_texpr(t)}, {print_contract(c1)}, {print_contract(c2)})"
    raise TypeError(f"not a contract: {c!r}")


def print_program(c: Contr) -> str:
    """Print a contract with label declarations for every observable it uses."""
    decls = [f"label {l.name} : {l.sort};" for l in sorted(labels_of(c), key=lambda l: (l.name, l.sort.value))]
    return "\n".join([*decls, print_contract(c)])
