"""Numerical evaluation of expression trees.

Pointwise expressions are evaluated on numpy arrays. Any non-finite
intermediate value raises :class:`EvaluationError` naming the offending
subexpression instead of letting a NaN travel into the solver.
"""

from __future__ import annotations

import math

import numpy as np

from bvp3eig.quadrature import gauss_rule
from bvp3eig.problem.ast import BinOp, Call, EvalTerm, Expr, IntegTerm, Neg, Num, Var, to_text

_UFUNC = {
    "sin": np.sin,
    "cos": np.cos,
    "exp": np.exp,
    "abs": np.abs,
    "sqrt": np.sqrt,
    "log": np.log,
}


class EvaluationError(ArithmeticError):
    """Domain error (division by zero, log of a nonpositive number, overflow...)."""

    def __init__(self, message: str, subexpression: str):
        self.subexpression = subexpression
        super().__init__(f"{message} in {subexpression!r}")


def _first_bad(x: np.ndarray) -> str:
    bad = np.flatnonzero(~np.isfinite(np.atleast_1d(x)))
    return f"at flat index {int(bad[0])}" if bad.size else ""


def _checked(node: Expr, value, what: str = "non-finite value"):
    arr = np.asarray(value)
    if not np.all(np.isfinite(arr)):
        raise EvaluationError(f"{what} {_first_bad(arr)}".strip(), to_text(node))
    return value


def evaluate(expr: Expr, env: dict, functional=None):
    """Evaluate ``expr`` with variable bindings ``env``.

    ``functional`` resolves :class:`EvalTerm` / :class:`IntegTerm` leaves; it
    is a callable ``(term) -> float`` supplied by :func:`eval_functional`.
    """
    with np.errstate(all="ignore"):
        return _eval(expr, env, functional)


def _eval(e: Expr, env: dict, functional):
    if isinstance(e, Num):
        return e.value
    if isinstance(e, Var):
        try:
            return env[e.name]
        except KeyError:
            raise EvaluationError("unbound variable", e.name) from None
    if isinstance(e, Neg):
        return -_eval(e.operand, env, functional)
    if isinstance(e, Call):
        x = _eval(e.arg, env, functional)
        xa = np.asarray(x)
        if e.func == "log" and np.any(xa <= 0):
            raise EvaluationError("log of a nonpositive number", to_text(e))
        if e.func == "sqrt" and np.any(xa < 0):
            raise EvaluationError("sqrt of a negative number", to_text(e))
        return _checked(e, _UFUNC[e.func](x))
    if isinstance(e, BinOp):
        a = _eval(e.left, env, functional)
        b = _eval(e.right, env, functional)
        if e.op == "+":
            r = a + b
        elif e.op == "-":
            r = a - b
        elif e.op == "*":
            r = a * b
        elif e.op == "/":
            if np.any(np.asarray(b) == 0):
                raise EvaluationError("division by zero", to_text(e))
            r = a / b
        else:
            r = np.power(np.asarray(a, dtype=float), b)
        return _checked(e, r)
    if isinstance(e, (EvalTerm, IntegTerm)):
        if functional is None:
            raise EvaluationError("functional term outside a boundary functional", to_text(e))
        return _checked(e, functional(e))
    raise TypeError(f"not an expression node: {e!r}")


def eval_pointwise(expr: Expr, t=0.0, u=0.0, v=0.0, w=0.0):
    """Evaluate a pointwise expression; arguments broadcast like numpy arrays."""
    env = {"t": t, "u": u, "v": v, "w": w}
    out = evaluate(expr, env)
    shape = np.broadcast(*(np.asarray(x) for x in env.values())).shape
    return np.broadcast_to(np.asarray(out, dtype=float), shape)


def eval_functional(expr: Expr, u, rule) -> float:
    """H[u] for a functional expression.

    ``u`` must offer ``point_eval(j, t)`` (a :class:`~bvp3eig.grid.DiscreteFunction`
    does); integral terms use ``rule`` on [0, 1].
    """

    def term(node):
        if isinstance(node, EvalTerm):
            return float(np.asarray(u.point_eval(node.order, node.at)).reshape(-1)[0])
        weight = eval_pointwise(node.weight, t=rule.nodes)
        values = np.asarray(u.point_eval(node.order, rule.nodes), dtype=float)
        return float(np.dot(rule.weights, weight * values))

    return float(evaluate(expr, {}, term))


# -- interval enclosures ---------------------------------------------------

_ALL = (-math.inf, math.inf)


def _imul(a, b):
    ps = []
    for x in a:
        for y in b:
            p = x * y
            ps.append(0.0 if math.isnan(p) else p)  # 0 * inf
    return min(ps), max(ps)


def _ipow(a, n: float):
    lo, hi = a
    if float(n).is_integer():
        n = int(n)
        if n == 0:
            return 1.0, 1.0
        if n < 0:
            return _idiv((1.0, 1.0), _ipow(a, -n))
        cands = [lo**n, hi**n]
        if n % 2 == 0 and lo <= 0 <= hi:
            return 0.0, max(cands)
        return min(cands), max(cands)
    if lo >= 0:
        cands = [lo**n, hi**n] if lo > 0 or n > 0 else [math.inf]
        return min(cands), max(cands)
    return _ALL


def _idiv(a, b):
    lo, hi = b
    if lo <= 0 <= hi:
        return _ALL
    return _imul(a, (1.0 / hi, 1.0 / lo))


def _itrig(fn, a):
    lo, hi = a
    if math.isinf(lo) or math.isinf(hi) or hi - lo >= 2 * math.pi:
        return -1.0, 1.0
    vals = [fn(lo), fn(hi)]
    shift = 0.0 if fn is math.cos else math.pi / 2
    # interior extrema of cos at multiples of pi (of sin at pi/2 + k pi)
    k = math.ceil((lo - shift) / math.pi)
    while shift + k * math.pi <= hi:
        vals.append(fn(shift + k * math.pi))
        k += 1
    return min(vals), max(vals)


def interval_bound(expr: Expr, rho: float, t_range=(0.0, 1.0)) -> tuple[float, float]:
    """Interval enclosure of ``expr`` for |u|, |v|, |w| <= rho (or ||u||_2 <= rho
    for functionals). Division by an interval containing 0 gives (-inf, inf).
    """
    box = {"t": t_range, "u": (-rho, rho), "v": (-rho, rho), "w": (-rho, rho)}

    def go(e):
        if isinstance(e, Num):
            return e.value, e.value
        if isinstance(e, Var):
            return box[e.name]
        if isinstance(e, Neg):
            lo, hi = go(e.operand)
            return -hi, -lo
        if isinstance(e, EvalTerm):
            return -rho, rho
        if isinstance(e, IntegTerm):
            rule = gauss_rule(64)
            total = 0.0
            for k in range(16):
                x, wq = rule.mapped(k / 16, (k + 1) / 16)
                total += float(np.dot(wq, np.abs(eval_pointwise(e.weight, t=x))))
            return -rho * total, rho * total
        if isinstance(e, Call):
            lo, hi = go(e.arg)
            if e.func == "sin":
                return _itrig(math.sin, (lo, hi))
            if e.func == "cos":
                return _itrig(math.cos, (lo, hi))
            if e.func == "exp":
                top = math.exp(hi) if hi < 700.0 else math.inf
                return math.exp(min(lo, 700.0)), top
            if e.func == "abs":
                if lo >= 0:
                    return lo, hi
                if hi <= 0:
                    return -hi, -lo
                return 0.0, max(-lo, hi)
            if e.func == "sqrt":
                return (math.sqrt(lo), math.sqrt(hi)) if lo >= 0 else _ALL
            return (math.log(lo), math.log(hi)) if lo > 0 else _ALL
        a, b = go(e.left), go(e.right)
        if e.op == "+":
            return a[0] + b[0], a[1] + b[1]
        if e.op == "-":
            return a[0] - b[1], a[1] - b[0]
        if e.op == "*":
            return _imul(a, b)
        if e.op == "/":
            return _idiv(a, b)
        if b[0] == b[1]:
            return _ipow(a, b[0])
        return _ALL

    return go(expr)
