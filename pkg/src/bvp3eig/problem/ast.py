"""Expression trees for the problem language and a precedence-aware printer."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator, Union

FUNCTIONS = ("sin", "cos", "exp", "abs", "sqrt", "log")
VARIABLES = ("t", "u", "v", "w")


@dataclass(frozen=True)
class Num:
    value: float


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class Neg:
    operand: "Expr"


@dataclass(frozen=True)
class BinOp:
    op: str  # one of + - * / ^
    left: "Expr"
    right: "Expr"


@dataclass(frozen=True)
class Call:
    func: str
    arg: "Expr"


@dataclass(frozen=True)
class EvalTerm:
    """u^(order)(at)."""

    order: int
    at: float


@dataclass(frozen=True)
class IntegTerm:
    """int_0^1 weight(t) u^(order)(t) dt."""

    order: int
    weight: "Expr"


Expr = Union[Num, Var, Neg, BinOp, Call, EvalTerm, IntegTerm]

_ADD, _MUL, _UNARY, _POW, _ATOM = 1, 2, 3, 4, 5


def _prec(e: Expr) -> int:
    if isinstance(e, BinOp):
        return {"+": _ADD, "-": _ADD, "*": _MUL, "/": _MUL, "^": _POW}[e.op]
    if isinstance(e, Neg):
        return _UNARY
    if isinstance(e, Num) and e.value < 0:
        return _UNARY
    return _ATOM


def _num(x: float) -> str:
    if float(x).is_integer() and abs(x) < 1e15:
        return str(int(x))
    return repr(float(x))


def to_text(e: Expr) -> str:
    """Render ``e`` so that parsing the text gives back the same tree."""
    if isinstance(e, Num):
        return _num(e.value)
    if isinstance(e, Var):
        return e.name
    if isinstance(e, Neg):
        inner = to_text(e.operand)
        if _prec(e.operand) < _UNARY:
            inner = f"({inner})"
        return f"-{inner}"
    if isinstance(e, Call):
        return f"{e.func}({to_text(e.arg)})"
    if isinstance(e, EvalTerm):
        return f"eval({e.order}, {_num(e.at)})"
    if isinstance(e, IntegTerm):
        return f"integ({e.order}, {to_text(e.weight)})"
    p = _prec(e)
    left, right = to_text(e.left), to_text(e.right)
    if e.op == "^":
        # base is an atom; the exponent is parsed at unary level
        if _prec(e.left) < _ATOM:
            left = f"({left})"
        if _prec(e.right) < _UNARY:
            right = f"({right})"
        return f"{left}^{right}"
    if _prec(e.left) < p:
        left = f"({left})"
    if _prec(e.right) <= p:
        right = f"({right})"
    return f"{left} {e.op} {right}"


def walk(e: Expr) -> Iterator[Expr]:
    """Pre-order traversal, descending into integral weights."""
    yield e
    if isinstance(e, Neg):
        yield from walk(e.operand)
    elif isinstance(e, BinOp):
        yield from walk(e.left)
        yield from walk(e.right)
    elif isinstance(e, Call):
        yield from walk(e.arg)
    elif isinstance(e, IntegTerm):
        yield from walk(e.weight)


def free_variables(e: Expr) -> set[str]:
    return {n.name for n in walk(e) if isinstance(n, Var)}


def abs_arguments(e: Expr) -> list[Expr]:
    """Arguments of every abs(...) in ``e``; these are where e may kink."""
    return [n.arg for n in walk(e) if isinstance(n, Call) and n.func == "abs"]


def uses_division_or_log(e: Expr) -> bool:
    return any(
        (isinstance(n, BinOp) and n.op == "/") or (isinstance(n, Call) and n.func == "log")
        for n in walk(e)
    )
