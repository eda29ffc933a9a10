"""Tokenizer shared by the contract-language and payoff-language parsers."""

from __future__ import annotations

import re
from dataclasses import dataclass

from contractc.errors import ParseError

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>[ \t\r]+)
  | (?P<nl>\n)
  | (?P<comment>(?://|\#)[^\n]*)
  | (?P<num>\d+(?:\.\d+)?(?:[eE][+-]?\d+)?)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<punct>->|<=|>=|==|&&|\|\||[()\[\],;:=+\-*/<>!])
    """,
    re.VERBOSE,
)

# Typographic variants that turn up when listings are copied from documents.
_NORMALISE = str.maketrans({"−": "-", "·": "*"})


@dataclass(frozen=True)
class Token:
    kind: str  # "num", "ident", "punct", "eof"
    text: str
    line: int
    col: int


def tokenize(src: str) -> list[Token]:
    src = src.replace("≤", "<=").replace("≥", ">=").translate(_NORMALISE)
    tokens: list[Token] = []
    pos, line, line_start = 0, 1, 0
    while pos < len(src):
        m = _TOKEN_RE.match(src, pos)
        if m is None:
            raise ParseError(f"unexpected character {src[pos]!r}", line, pos - line_start + 1)
        kind = m.lastgroup
        if kind == "nl":
            line += 1
            line_start = m.end()
        elif kind not in ("ws", "comment"):
            tokens.append(Token(kind, m.group(), line, m.start() - line_start + 1))
        pos = m.end()
    tokens.append(Token("eof", "", line, pos - line_start + 1))
    return tokens


class TokenStream:
    def __init__(self, src: str):
        self.tokens = tokenize(src)
        self.pos = 0

    @property
    def peek(self) -> Token:
        return self.tokens[self.pos]

    def peek_at(self, offset: int) -> Token:
        return self.tokens[min(self.pos + offset, len(self.tokens) - 1)]

    def next(self) -> Token:
        tok = self.tokens[self.pos]
        if tok.kind != "eof":
            self.pos += 1
        return tok

    def error(self, message: str, tok: Token | None = None) -> ParseError:
        tok = tok or self.peek
        found = tok.text or "end of input"
        return ParseError(f"{message}, found {found!r}", tok.line, tok.col)

    def at(self, text: str) -> bool:
        tok = self.peek
        return tok.kind in ("punct", "ident") and tok.text == text

    def accept(self, text: str) -> bool:
        if self.at(text):
            self.pos += 1
            return True
        return False

    def expect(self, text: str) -> Token:
        if not self.at(text):
            raise self.error(f"expected {text!r}")
        return self.next()

    def ident(self, what: str = "identifier") -> str:
        tok = self.peek
        if tok.kind != "ident":
            raise self.error(f"expected {what}")
        self.pos += 1
        return tok.text

    def natural(self, what: str = "natural number") -> int:
        tok = self.peek
        if tok.kind != "num" or not tok.text.isdigit():
            raise self.error(f"expected {what}")
        self.pos += 1
        return int(tok.text)

    def integer(self) -> int:
        neg = self.accept("-")
        n = self.natural("integer")
        return -n if neg else n

    def expect_eof(self) -> None:
        if self.peek.kind != "eof":
            raise self.error("expected end of input")
