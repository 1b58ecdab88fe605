"""Text syntax for Datalog programs.

::

    % goal: G
    G(X) :- R(X,Y), !A(Y).
    C(X,N) :- S0(X,Y), C(Y,N-1), N <= cmax.
    P(a).

Variables start with an uppercase letter, constants with a lowercase letter
or digit; bare integers are counter values and ``cmax`` is the counter bound.
``%`` starts a comment.  A ``% goal: NAME`` comment names the goal predicate.
"""

from __future__ import annotations

import re

from .syntax import CMAX, Atom, Const, Int, Leq, Literal, Pred, Program, Rule, Term, Var


class DatalogSyntaxError(ValueError):
    def __init__(self, message: str, line: int, column: int):
        super().__init__(f"{line}:{column}: {message}")
        self.line = line
        self.column = column


_TOKEN = re.compile(
    r"""
    (?P<goal>%[ \t]*goal[ \t]*:[ \t]*(?P<goalname>[A-Za-z0-9_]+)[^\n]*)
  | (?P<ws>[ \t\r\n]+|%[^\n]*)
  | (?P<op>:-|<=|[(),.!\-])
  | (?P<int>[0-9]+(?![A-Za-z0-9_]))
  | (?P<ident>[A-Za-z0-9_]+)
    """,
    re.VERBOSE,
)


def _position(text: str, offset: int) -> tuple[int, int]:
    line = text.count("\n", 0, offset) + 1
    return line, offset - (text.rfind("\n", 0, offset) + 1) + 1


def _is_var(name: str) -> bool:
    return name[0].isupper()


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.tokens: list[tuple[str, str, int]] = []
        self.goal: str | None = None
        pos = 0
        while pos < len(text):
            m = _TOKEN.match(text, pos)
            if m is None:
                self.fail(f"unknown token {text[pos]!r}", pos)
            kind = m.lastgroup
            if kind == "goalname":
                kind = "goal"
            if kind == "goal":
                self.goal = m.group("goalname")
            elif kind != "ws":
                self.tokens.append((kind, m.group(), pos))
            pos = m.end()
        self.tokens.append(("eof", "<eof>", len(text)))
        self.i = 0

    def fail(self, message: str, offset: int | None = None):
        if offset is None:
            offset = self.tokens[self.i][2]
        line, col = _position(self.text, offset)
        raise DatalogSyntaxError(message, line, col)

    def peek(self, ahead: int = 0) -> tuple[str, str, int]:
        return self.tokens[min(self.i + ahead, len(self.tokens) - 1)]

    def take(self, value: str | None = None, kind: str | None = None) -> str:
        k, v, _ = self.peek()
        if value is not None and v != value:
            self.fail(f"expected {value!r}, found {v!r}")
        if kind is not None and k != kind:
            self.fail(f"expected {kind}, found {v!r}")
        self.i += 1
        return v

    def program(self) -> list[tuple[Rule, int]]:
        rules = []
        while self.peek()[0] != "eof":
            start = self.peek()[2]
            rules.append((self.rule(), start))
        return rules

    def rule(self) -> Rule:
        head = self.atom()
        body: list = []
        if self.peek()[1] == ":-":
            self.take()
            body.append(self.item())
            while self.peek()[1] == ",":
                self.take()
                body.append(self.item())
        self.take(".")
        for t in head.args:
            if isinstance(t, Pred):
                self.fail("counter expressions are not allowed in rule heads")
        return Rule(head, tuple(body))

    def item(self):
        kind, value, _ = self.peek()
        if value == "!":
            self.take()
            return Literal(self.atom(), negated=True)
        if kind == "ident" and _is_var(value) and self.peek(1)[1] == "<=":
            self.take()
            self.take("<=")
            k, v, _ = self.peek()
            if k == "int":
                self.take()
                return Leq(Var(value), Int(int(v)))
            if v == "cmax":
                self.take()
                return Leq(Var(value), CMAX)
            self.fail(f"expected an integer or cmax, found {v!r}")
        return Literal(self.atom())

    def atom(self) -> Atom:
        kind, name, _ = self.peek()
        if kind != "ident":
            self.fail(f"expected a predicate name, found {name!r}")
        self.take()
        args: list[Term] = []
        if self.peek()[1] == "(":
            self.take()
            if self.peek()[1] != ")":
                args.append(self.term())
                while self.peek()[1] == ",":
                    self.take()
                    args.append(self.term())
            self.take(")")
        return Atom(name, tuple(args))

    def term(self) -> Term:
        kind, value, _ = self.peek()
        if kind == "int":
            self.take()
            return Int(int(value))
        if kind != "ident":
            self.fail(f"expected a term, found {value!r}")
        self.take()
        if value == "cmax":
            return CMAX
        if _is_var(value):
            if self.peek()[1] == "-":
                self.take()
                one = self.take(kind="int")
                if one != "1":
                    self.fail("only N-1 counter expressions are supported")
                return Pred(Var(value))
            return Var(value)
        return Const(value)


def parse_program(text: str, goal: str | None = None, check: bool = True) -> Program:
    """Parse and (by default) check safety and counter sorts."""
    p = _Parser(text)
    located = p.program()
    program = Program(tuple(r for r, _ in located), goal or p.goal)
    if check:
        from .analysis import check_program

        check_program(program, lambda i: _position(text, located[i][1]))
    return program


def render_term(t: Term) -> str:
    if isinstance(t, Var):
        return t.name
    if isinstance(t, Const):
        return t.name
    if isinstance(t, Int):
        return str(t.value)
    if isinstance(t, Pred):
        return f"{t.var.name}-1"
    return "cmax"


def render_atom(a: Atom) -> str:
    if not a.args:
        return a.pred
    return f"{a.pred}({','.join(render_term(t) for t in a.args)})"


def render_rule(r: Rule) -> str:
    if not r.body:
        return render_atom(r.head) + "."
    parts = []
    for item in r.body:
        if isinstance(item, Leq):
            parts.append(f"{item.var.name} <= {render_term(item.bound)}")
        else:
            parts.append(("!" if item.negated else "") + render_atom(item.atom))
    return f"{render_atom(r.head)} :- {', '.join(parts)}."


def render_program(p: Program) -> str:
    lines = [f"% goal: {p.goal}"] if p.goal else []
    lines.extend(render_rule(r) for r in p.rules)
    return "\n".join(lines) + "\n"
