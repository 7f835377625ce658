"""The problem language: parsing and evaluating f, H1, H2."""

from bvp3eig.problem.ast import to_text
from bvp3eig.problem.evaluate import EvaluationError, eval_functional, eval_pointwise, interval_bound
from bvp3eig.problem.parser import (
    ArgumentRangeError,
    ArityError,
    ProblemError,
    ProblemSyntaxError,
    UnknownIdentifierError,
    parse_expr,
)
from bvp3eig.problem.spec import ProblemSpec, eval_f, parse_problem

EXAMPLE_PROBLEM = """\
# u''' + lam t e^|u| (1 + u''^2) = 0,
# u(0) = lam / (1 + u(1/2)^2),  u(1) = (lam/40) sin(int t^3 u''),  int u = 0
f  = t * exp(abs(u)) * (1 + w^2)
H1 = 1 / (1 + eval(0, 0.5)^2)
H2 = (1/40) * sin(integ(2, t^3))
delta = t
sign = 1a
"""

__all__ = [
    "EXAMPLE_PROBLEM",
    "ArgumentRangeError",
    "ArityError",
    "EvaluationError",
    "ProblemError",
    "ProblemSpec",
    "ProblemSyntaxError",
    "UnknownIdentifierError",
    "eval_f",
    "eval_functional",
    "eval_pointwise",
    "interval_bound",
    "parse_expr",
    "parse_problem",
    "to_text",
]
