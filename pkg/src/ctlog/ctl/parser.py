"""Text syntax for CTL formulas.

Grammar (ASCII)::

    formula := conj ('|' conj)*
    conj    := unary ('&' unary)*
    unary   := '!' unary | 'EX' unary | 'AX' unary | primary
    primary := 'true' | 'false' | ident | '(' formula ')'
             | ('E' | 'A') '[' formula ('U' | '~U') formula ']'

Identifiers are lowercase alphanumerics; ``#`` starts a comment running to the
end of the line.  Binary connectives associate to the left.
"""

from __future__ import annotations

import re

from .formula import (
    AU,
    AUt,
    AX,
    BOTTOM,
    EU,
    EUt,
    EX,
    TOP,
    And,
    Atom,
    Bottom,
    Formula,
    Not,
    Or,
    Top,
)


class FormulaSyntaxError(ValueError):
    def __init__(self, message: str, line: int, column: int):
        super().__init__(f"{line}:{column}: {message}")
        self.line = line
        self.column = column


_TOKEN = re.compile(
    r"""
    (?P<ws>[ \t\r\n]+|\#[^\n]*)
  | (?P<op>~U|EX|AX|[!&|()\[\]])
  | (?P<kw>[EAU])(?![A-Za-z0-9_])
  | (?P<ident>[a-z][a-z0-9_]*)
    """,
    re.VERBOSE,
)


def _position(text: str, offset: int) -> tuple[int, int]:
    line = text.count("\n", 0, offset) + 1
    col = offset - (text.rfind("\n", 0, offset) + 1) + 1
    return line, col


def tokenize(text: str) -> list[tuple[str, int]]:
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            line, col = _position(text, pos)
            raise FormulaSyntaxError(f"unknown token {text[pos]!r}", line, col)
        if m.lastgroup != "ws":
            tokens.append((m.group(), pos))
        pos = m.end()
    tokens.append(("<eof>", len(text)))
    return tokens


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.tokens = tokenize(text)
        self.i = 0

    def peek(self) -> str:
        return self.tokens[self.i][0]

    def error(self, message: str):
        line, col = _position(self.text, self.tokens[self.i][1])
        raise FormulaSyntaxError(message, line, col)

    def take(self, expected: str | None = None) -> str:
        tok = self.peek()
        if expected is not None and tok != expected:
            self.error(f"expected {expected!r}, found {tok!r}")
        self.i += 1
        return tok

    def formula(self) -> Formula:
        f = self.conj()
        while self.peek() == "|":
            self.take()
            f = Or(f, self.conj())
        return f

    def conj(self) -> Formula:
        f = self.unary()
        while self.peek() == "&":
            self.take()
            f = And(f, self.unary())
        return f

    def unary(self) -> Formula:
        tok = self.peek()
        if tok == "!":
            self.take()
            return Not(self.unary())
        if tok == "EX":
            self.take()
            return EX(self.unary())
        if tok == "AX":
            self.take()
            return AX(self.unary())
        return self.primary()

    def primary(self) -> Formula:
        tok = self.peek()
        if tok == "(":
            self.take()
            f = self.formula()
            self.take(")")
            return f
        if tok in ("E", "A"):
            self.take()
            self.take("[")
            left = self.formula()
            op = self.peek()
            if op not in ("U", "~U"):
                self.error(f"expected 'U' or '~U', found {op!r}")
            self.take()
            right = self.formula()
            self.take("]")
            if tok == "E":
                return EU(left, right) if op == "U" else EUt(left, right)
            return AU(left, right) if op == "U" else AUt(left, right)
        if tok == "true":
            self.take()
            return TOP
        if tok == "false":
            self.take()
            return BOTTOM
        if tok[0].islower():
            self.take()
            return Atom(tok)
        self.error(f"unexpected {tok!r}")


def parse_formula(text: str) -> Formula:
    p = _Parser(text)
    f = p.formula()
    if p.peek() != "<eof>":
        p.error(f"unexpected {p.peek()!r} after formula")
    return f


# Binding strength used by the printer: higher binds tighter.
_PREC = {Or: 1, And: 2}


def _prec(f: Formula) -> int:
    return _PREC.get(type(f), 3)


def render_formula(f: Formula) -> str:
    if isinstance(f, Top):
        return "true"
    if isinstance(f, Bottom):
        return "false"
    if isinstance(f, Atom):
        return f.name
    if isinstance(f, (Not, EX, AX)):
        prefix = {Not: "!", EX: "EX ", AX: "AX "}[type(f)]
        inner = render_formula(f.arg)
        if _prec(f.arg) < 3:
            inner = f"({inner})"
        return prefix + inner
    if isinstance(f, (And, Or)):
        p = _prec(f)
        left = render_formula(f.left)
        right = render_formula(f.right)
        if _prec(f.left) < p:
            left = f"({left})"
        # left-associative parse: an equal-precedence right child needs parens
        if _prec(f.right) <= p:
            right = f"({right})"
        return f"{left} {'&' if isinstance(f, And) else '|'} {right}"
    quant = "E" if isinstance(f, (EU, EUt)) else "A"
    op = "U" if isinstance(f, (EU, AU)) else "~U"
    return f"{quant}[ {render_formula(f.left)} {op} {render_formula(f.right)} ]"
