"""Problem files and the parsed :class:`ProblemSpec`.

A problem file holds one ``key = expression`` declaration per line::

    # the worked example
    f  = t * exp(abs(u)) * (1 + w^2)
    H1 = 1 / (1 + eval(0, 0.5)^2)
    H2 = (1/40) * sin(integ(2, t^3))
    delta = t          # optional, declared lower bound of f (or -f)
    eta1 = 0.5         # optional, constant lower bounds of H1, H2
    eta2 = -1/40
    sign = 1a          # 1a: f >= delta, 1b: -f >= delta
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from bvp3eig.problem.ast import Expr, abs_arguments, to_text, uses_division_or_log
from bvp3eig.problem.evaluate import EvaluationError, eval_functional, eval_pointwise
from bvp3eig.problem.parser import (
    ArgumentRangeError,
    Parser,
    ProblemError,
    ProblemSyntaxError,
    constant_value,
)

SIGN_MODES = ("1a", "1b")
_KEYS = ("f", "H1", "H2", "delta", "eta1", "eta2", "sign")


@dataclass(frozen=True)
class ProblemSpec:
    f: Expr
    H1: Expr
    H2: Expr
    delta: Expr | None = None
    eta1: float | None = None
    eta2: float | None = None
    sign_mode: str = "1a"

    def __post_init__(self):
        if self.sign_mode not in SIGN_MODES:
            raise ProblemError(f"sign must be one of {SIGN_MODES}, got {self.sign_mode!r}")
        if self.delta is not None:
            check_delta(self.delta)

    @property
    def kink_arguments(self) -> tuple[Expr, ...]:
        """abs(...) arguments of f: the nonlinearity may kink where they vanish."""
        return tuple(abs_arguments(self.f))

    @property
    def flags(self) -> list[str]:
        """Warnings about functionals that may be unbounded on the ball."""
        out = []
        for name in ("H1", "H2"):
            if uses_division_or_log(getattr(self, name)):
                out.append(f"{name} contains division or log; boundedness is not checked")
        return out

    def with_overrides(self, **changes) -> "ProblemSpec":
        return replace(self, **{k: v for k, v in changes.items() if v is not None})

    def to_text(self) -> str:
        lines = [f"f = {to_text(self.f)}", f"H1 = {to_text(self.H1)}", f"H2 = {to_text(self.H2)}"]
        if self.delta is not None:
            lines.append(f"delta = {to_text(self.delta)}")
        for key in ("eta1", "eta2"):
            if getattr(self, key) is not None:
                lines.append(f"{key} = {getattr(self, key)!r}")
        lines.append(f"sign = {self.sign_mode}")
        return "\n".join(lines) + "\n"


def check_delta(delta: Expr, points: int = 1001) -> None:
    t = np.linspace(0.0, 1.0, points)
    try:
        values = eval_pointwise(delta, t=t)
    except EvaluationError as exc:
        raise ProblemError(f"cannot evaluate delta: {exc}") from None
    if np.any(values < 0):
        i = int(np.argmax(values < 0))
        raise ProblemError(f"delta must be nonnegative; delta({t[i]:g}) = {values[i]:g}")


def _parse_line(key: str, text: str, line: int, col: int):
    if key == "f":
        return Parser(text, ("t", "u", "v", "w"), False, line, col).parse()
    if key in ("H1", "H2"):
        return Parser(text, (), True, line, col).parse()
    if key == "delta":
        return Parser(text, ("t",), False, line, col).parse()
    if key in ("eta1", "eta2"):
        expr = Parser(text, (), False, line, col).parse()
        try:
            return float(constant_value(expr))
        except (ArithmeticError, ValueError) as exc:
            raise ArgumentRangeError(f"cannot evaluate {key}: {exc}", line, col + 1) from None
    mode = text.strip()
    if mode not in SIGN_MODES:
        raise ProblemSyntaxError(f"sign must be 1a or 1b, got {mode!r}", line, col + 1)
    return mode


def parse_problem(text: str) -> ProblemSpec:
    """Parse a problem file (see the module docstring for the format)."""
    found: dict[str, object] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        body = raw.split("#", 1)[0]
        if not body.strip():
            continue
        if "=" not in body:
            col = len(body) - len(body.lstrip()) + 1
            raise ProblemSyntaxError("expected 'key = expression'", lineno, col)
        lhs, rhs = body.split("=", 1)
        key = lhs.strip()
        key_col = len(lhs) - len(lhs.lstrip()) + 1
        if key not in _KEYS:
            raise ProblemSyntaxError(f"unknown declaration {key!r}", lineno, key_col)
        if key in found:
            raise ProblemSyntaxError(f"duplicate declaration of {key!r}", lineno, key_col)
        found[key] = _parse_line(key, rhs, lineno, len(lhs) + 1)
    for key in ("f", "H1", "H2"):
        if key not in found:
            raise ProblemError(f"missing required declaration {key!r}")
    return ProblemSpec(
        f=found["f"],
        H1=found["H1"],
        H2=found["H2"],
        delta=found.get("delta"),
        eta1=found.get("eta1"),
        eta2=found.get("eta2"),
        sign_mode=found.get("sign", "1a"),
    )


def eval_f(spec: ProblemSpec, t: float, u: float, v: float, w: float) -> float:
    """f(t, u, v, w) for scalar arguments."""
    if not 0.0 <= t <= 1.0:
        raise ValueError(f"t={t!r} is outside [0, 1]")
    return float(eval_pointwise(spec.f, t=t, u=u, v=v, w=w))


__all__ = ["ProblemSpec", "eval_f", "eval_functional", "parse_problem"]
