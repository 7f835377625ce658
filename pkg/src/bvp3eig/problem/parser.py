"""Tokenizer and recursive-descent parser for the problem language.

Grammar (whitespace-insensitive)::

    expr  := term (('+' | '-') term)*
    term  := unary (('*' | '/') unary)*
    unary := ('-' | '+') unary | power
    power := atom ('^' unary)?           # right associative
    atom  := NUMBER | IDENT | IDENT '(' args ')' | '(' expr ')'

so ``^`` binds tighter than unary minus, which binds tighter than ``* /``.
Functionals add ``eval(j, tau)`` and ``integ(j, weight)``.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass

from bvp3eig.problem.ast import FUNCTIONS, BinOp, Call, EvalTerm, Expr, IntegTerm, Neg, Num, Var


class ProblemError(ValueError):
    """Invalid problem text. ``line`` and ``column`` are 1-based when known."""

    def __init__(self, message: str, line: int | None = None, column: int | None = None):
        self.message = message
        self.line = line
        self.column = column
        where = ""
        if line is not None:
            where = f"line {line}, column {column}: "
        super().__init__(where + message)


class ProblemSyntaxError(ProblemError):
    pass


class UnknownIdentifierError(ProblemError):
    pass


class ArityError(ProblemError):
    pass


class ArgumentRangeError(ProblemError):
    pass


@dataclass(frozen=True)
class Token:
    kind: str  # num, ident, op, end
    text: str
    column: int  # 0-based offset in the parsed string


_TOKEN = re.compile(
    r"\s*(?:(?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)|(?P<ident>[A-Za-z_]\w*)|(?P<op>[-+*/^(),]))"
)


def tokenize(text: str, line: int = 1, offset: int = 0) -> list[Token]:
    tokens = []
    pos = 0
    while True:
        while pos < len(text) and text[pos].isspace():
            pos += 1
        if pos >= len(text):
            break
        m = _TOKEN.match(text, pos)
        if m is None or m.end() == pos:
            raise ProblemSyntaxError(f"unexpected character {text[pos]!r}", line, offset + pos + 1)
        kind = m.lastgroup
        tokens.append(Token(kind, m.group(kind), m.start(kind)))
        pos = m.end()
    tokens.append(Token("end", "", len(text)))
    return tokens


class Parser:
    """Parses one expression.

    ``variables`` are the identifiers allowed as bare variables;
    ``functionals`` enables ``eval``/``integ``.
    """

    def __init__(self, text: str, variables=(), functionals: bool = False, line: int = 1, offset: int = 0):
        self.text = text
        self.variables = frozenset(variables)
        self.functionals = functionals
        self.line = line
        self.offset = offset
        self.tokens = tokenize(text, line, offset)
        self.i = 0

    # -- helpers
    @property
    def tok(self) -> Token:
        return self.tokens[self.i]

    def _col(self, tok: Token) -> int:
        return self.offset + tok.column + 1

    def _fail(self, cls, msg, tok=None):
        tok = tok or self.tok
        raise cls(msg, self.line, self._col(tok))

    def _advance(self) -> Token:
        tok = self.tok
        self.i += 1
        return tok

    def _expect(self, text: str) -> Token:
        if self.tok.text != text:
            got = self.tok.text or "end of input"
            self._fail(ProblemSyntaxError, f"expected {text!r}, got {got!r}")
        return self._advance()

    # -- grammar
    def parse(self) -> Expr:
        if self.tok.kind == "end":
            self._fail(ProblemSyntaxError, "empty expression")
        e = self.expr()
        if self.tok.kind != "end":
            self._fail(ProblemSyntaxError, f"unexpected {self.tok.text!r}")
        return e

    def expr(self) -> Expr:
        e = self.term()
        while self.tok.kind == "op" and self.tok.text in "+-":
            op = self._advance().text
            e = BinOp(op, e, self.term())
        return e

    def term(self) -> Expr:
        e = self.unary()
        while self.tok.kind == "op" and self.tok.text in "*/":
            op = self._advance().text
            e = BinOp(op, e, self.unary())
        return e

    def unary(self) -> Expr:
        if self.tok.kind == "op" and self.tok.text == "-":
            self._advance()
            return Neg(self.unary())
        if self.tok.kind == "op" and self.tok.text == "+":
            self._advance()
            return self.unary()
        return self.power()

    def power(self) -> Expr:
        base = self.atom()
        if self.tok.kind == "op" and self.tok.text == "^":
            self._advance()
            return BinOp("^", base, self.unary())
        return base

    def atom(self) -> Expr:
        tok = self.tok
        if tok.kind == "num":
            self._advance()
            return Num(float(tok.text))
        if tok.kind == "op" and tok.text == "(":
            self._advance()
            e = self.expr()
            self._expect(")")
            return e
        if tok.kind == "ident":
            self._advance()
            if self.tok.kind == "op" and self.tok.text == "(":
                return self.call(tok)
            if tok.text in self.variables:
                return Var(tok.text)
            if tok.text in FUNCTIONS or tok.text in ("eval", "integ"):
                self._fail(ProblemSyntaxError, f"function {tok.text!r} needs an argument list", tok)
            self._fail(UnknownIdentifierError, f"unknown identifier {tok.text!r}", tok)
        got = tok.text or "end of input"
        self._fail(ProblemSyntaxError, f"unexpected {got!r}")

    def _args(self, name_tok: Token) -> list[tuple[int, int]]:
        """Split the parenthesised argument list into raw source spans."""
        self._expect("(")
        spans = []
        depth = 0
        start = self.i
        while True:
            tok = self.tok
            if tok.kind == "end":
                self._fail(ProblemSyntaxError, f"unclosed argument list of {name_tok.text!r}", name_tok)
            if tok.text == "(" and tok.kind == "op":
                depth += 1
            elif tok.text == ")" and tok.kind == "op":
                if depth == 0:
                    spans.append((start, self.i))
                    self._advance()
                    return spans
                depth -= 1
            elif tok.text == "," and tok.kind == "op" and depth == 0:
                spans.append((start, self.i))
                start = self.i + 1
            self._advance()

    def _sub(self, span, variables, functionals) -> Expr:
        lo, hi = span
        if lo == hi:
            self._fail(ProblemSyntaxError, "empty argument", self.tokens[lo])
        first, stop = self.tokens[lo], self.tokens[hi]
        text = self.text[first.column : stop.column]
        sub = Parser(text, variables, functionals, self.line, self.offset + first.column)
        return sub.parse()

    def call(self, name_tok: Token) -> Expr:
        name = name_tok.text
        spans = self._args(name_tok)
        if name in FUNCTIONS:
            if len(spans) != 1:
                self._fail(ArityError, f"{name} takes 1 argument, got {len(spans)}", name_tok)
            return Call(name, self._sub(spans[0], self.variables, self.functionals))
        if name in ("eval", "integ"):
            if not self.functionals:
                self._fail(
                    UnknownIdentifierError,
                    f"{name!r} is only available in boundary functionals",
                    name_tok,
                )
            if len(spans) != 2:
                self._fail(ArityError, f"{name} takes 2 arguments, got {len(spans)}", name_tok)
            order = self._order(spans[0])
            if name == "eval":
                at_tok = self.tokens[spans[1][0]]
                try:
                    at = constant_value(self._sub(spans[1], (), False))
                except (ArithmeticError, ValueError) as exc:
                    if isinstance(exc, ProblemError):
                        raise
                    raise ArgumentRangeError(
                        f"cannot evaluate the evaluation point: {exc}", self.line, self._col(at_tok)
                    ) from None
                if not 0.0 <= at <= 1.0:
                    raise ArgumentRangeError(
                        f"evaluation point {at!r} is outside [0, 1]", self.line, self._col(at_tok)
                    )
                return EvalTerm(order, at)
            return IntegTerm(order, self._sub(spans[1], ("t",), False))
        self._fail(UnknownIdentifierError, f"unknown function {name!r}", name_tok)

    def _order(self, span) -> int:
        lo, hi = span
        tok = self.tokens[lo]
        if hi - lo != 1 or tok.kind != "num" or tok.text not in ("0", "1", "2"):
            self._fail(ArgumentRangeError, "derivative order must be the literal 0, 1 or 2", tok)
        return int(tok.text)


def constant_value(e: Expr) -> float:
    """Value of an expression without identifiers or functional terms."""
    if isinstance(e, Num):
        return e.value
    if isinstance(e, Neg):
        return -constant_value(e.operand)
    if isinstance(e, Call):
        x = constant_value(e.arg)
        return float(getattr(math, {"abs": "fabs"}.get(e.func, e.func))(x))
    if isinstance(e, BinOp):
        a, b = constant_value(e.left), constant_value(e.right)
        if e.op == "+":
            return a + b
        if e.op == "-":
            return a - b
        if e.op == "*":
            return a * b
        if e.op == "/":
            return a / b
        return float(a**b)
    raise TypeError(f"not a constant expression: {e!r}")


def parse_expr(text: str, variables=("t", "u", "v", "w"), functionals: bool = False) -> Expr:
    """Parse a single expression."""
    return Parser(text, variables, functionals).parse()
