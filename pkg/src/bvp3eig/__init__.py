"""Eigenpairs of a third-order BVP with functional boundary conditions.

The problem is

    u'''(t) + lam * f(t, u, u', u'') = 0,   0 < t < 1,
    u(0) = lam * H1[u],  u(1) = lam * H2[u],  int_0^1 u dt = 0,

rewritten as the perturbed Hammerstein equation u = lam * T u and solved on
the sphere ||u||_2 = rho of C^2[0, 1].
"""

from bvp3eig.kernel import gamma, green_d2k, green_dk, green_k
from bvp3eig.quadrature import QuadratureRule, gauss_rule, integrate, integrate_split
from bvp3eig.problem import ProblemSpec, eval_f, eval_functional, parse_problem
from bvp3eig.grid import C2Norm, DiscreteFunction, axpy, c2_norm, point_eval
from bvp3eig.operator import OperatorContext, apply_T, nystrom_matrix
from bvp3eig.hypotheses import (
    HypothesisReport,
    build_report,
    check_inequality,
    estimate_delta,
    estimate_eta,
)
from bvp3eig.solver import (
    BranchTable,
    Eigenpair,
    SolverError,
    newton_polish,
    picard_normalized,
    solve,
    sweep_rho,
)
from bvp3eig.verify import Certificate, certify, cross_check_linear

__version__ = "0.1.0"

__all__ = [
    "BranchTable",
    "C2Norm",
    "Certificate",
    "DiscreteFunction",
    "Eigenpair",
    "HypothesisReport",
    "OperatorContext",
    "ProblemSpec",
    "QuadratureRule",
    "SolverError",
    "apply_T",
    "axpy",
    "build_report",
    "c2_norm",
    "certify",
    "check_inequality",
    "cross_check_linear",
    "estimate_delta",
    "estimate_eta",
    "eval_f",
    "eval_functional",
    "gamma",
    "gauss_rule",
    "green_d2k",
    "green_dk",
    "green_k",
    "integrate",
    "integrate_split",
    "newton_polish",
    "nystrom_matrix",
    "parse_problem",
    "picard_normalized",
    "point_eval",
    "solve",
    "sweep_rho",
]
