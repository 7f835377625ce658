"""Certification of eigenpairs against the differential problem itself.

The ODE is checked by cascaded re-integration on a fine composite Gauss
grid, so nothing from the operator's quadrature is reused:

    u''(t) - u''(0) = int_0^t -lam f(s, u, u', u'') ds
    u'(t)  - u'(0)  = int_0^t u''(s) ds
    u(t)   - u(0)   = int_0^t u'(s) ds
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from bvp3eig.operator import OperatorContext, nystrom_matrices
from bvp3eig.problem.ast import BinOp, Call, Expr, Neg, Num, Var
from bvp3eig.problem.evaluate import eval_functional, eval_pointwise
from bvp3eig.quadrature import gauss_rule

ODE_THRESHOLD = 1e-7
BC_THRESHOLD = 1e-8
CELL_POINTS = 6


@dataclass(frozen=True)
class Certificate:
    ode_residual: float
    bc_residuals: tuple[float, float, float]
    grid: int
    thresholds: tuple[float, float]  # (ode, bc)
    layer_defects: tuple[float, float, float]  # u, u', u'' cascade defects

    @property
    def passed(self) -> bool:
        ode, bc = self.thresholds
        return self.ode_residual < ode and all(r < bc for r in self.bc_residuals)

    @property
    def verdict(self) -> str:
        return "pass" if self.passed else "fail"


def default_thresholds(lam: float, rho: float) -> tuple[float, float]:
    scale = (1.0 + abs(lam)) * (1.0 + rho)
    return ODE_THRESHOLD * scale, BC_THRESHOLD * scale


def certify(ctx: OperatorContext, pair, fine_grid: int = 1001, thresholds=None) -> Certificate:
    """Residuals of the BVP for ``pair`` (anything with ``lam``, ``u``, ``rho``).

    ``thresholds`` is an (ode, bc) pair; by default 1e-7 and 1e-8 scaled by
    (1 + |lam|)(1 + rho).
    """
    if fine_grid < 201:
        raise ValueError(f"fine grid must have at least 201 points, got {fine_grid}")
    lam, u = float(pair.lam), pair.u
    grid = np.linspace(0.0, 1.0, fine_grid)
    cell = gauss_rule(CELL_POINTS)
    h = np.diff(grid)
    pts = (grid[:-1, None] + h[:, None] * cell.nodes).ravel()
    wts = (h[:, None] * cell.weights).ravel()

    at_grid = u.values(grid)
    at_pts = u.values(pts)
    g = -lam * eval_pointwise(ctx.spec.f, t=pts, u=at_pts[0], v=at_pts[1], w=at_pts[2])

    def running(values):
        per_cell = (wts * values).reshape(-1, CELL_POINTS).sum(axis=1)
        return np.concatenate([[0.0], np.cumsum(per_cell)])

    integrands = (at_pts[1], at_pts[2], g)
    defects = tuple(
        float(np.max(np.abs(at_grid[j] - at_grid[j, 0] - running(integrands[j])))) for j in range(3)
    )

    rule = gauss_rule(min(2 * u.rule.order, 512))
    bc = (
        abs(u.point_eval(0, 0.0) - lam * eval_functional(ctx.spec.H1, u, rule)),
        abs(u.point_eval(0, 1.0) - lam * eval_functional(ctx.spec.H2, u, rule)),
        abs(float(np.dot(rule.weights, u.point_eval(0, rule.nodes)))),
    )
    if thresholds is None:
        thresholds = default_thresholds(lam, float(pair.rho))
    return Certificate(
        ode_residual=max(defects),
        bc_residuals=tuple(float(r) for r in bc),
        grid=fine_grid,
        thresholds=(float(thresholds[0]), float(thresholds[1])),
        layer_defects=defects,
    )


# -- linear oracle ----------------------------------------------------------


class LinearOracleError(ValueError):
    """The problem is not of the form f = a u + b v + c w with H1 = H2 = 0."""


def linear_coefficients(expr: Expr) -> tuple[float, float, float]:
    """(a, b, c) with f = a u + b v + c w, read off the expression tree.

    Raises :class:`LinearOracleError` unless f is structurally linear and
    homogeneous in (u, v, w) with constant coefficients.
    """

    def go(e):
        # returns (const, a, b, c)
        if isinstance(e, Num):
            return np.array([e.value, 0.0, 0.0, 0.0])
        if isinstance(e, Var):
            if e.name == "t":
                raise LinearOracleError("f depends on t")
            out = np.zeros(4)
            out[{"u": 1, "v": 2, "w": 3}[e.name]] = 1.0
            return out
        if isinstance(e, Neg):
            return -go(e.operand)
        if isinstance(e, BinOp):
            a, b = go(e.left), go(e.right)
            if e.op == "+":
                return a + b
            if e.op == "-":
                return a - b
            if e.op == "*":
                if not np.any(a[1:]):
                    return a[0] * b
                if not np.any(b[1:]):
                    return b[0] * a
                raise LinearOracleError("f has a product of unknowns")
            if e.op == "/" and not np.any(b[1:]) and b[0] != 0:
                return a / b[0]
            if e.op == "^" and not np.any(b[1:]):
                if not np.any(a[1:]):
                    return np.array([a[0] ** b[0], 0.0, 0.0, 0.0])
                if b[0] == 1.0:
                    return a
            raise LinearOracleError(f"f is not linear at {e.op!r}")
        if isinstance(e, Call):
            raise LinearOracleError(f"f applies {e.func}")
        raise LinearOracleError(f"unexpected term {e!r}")

    coeffs = go(expr)
    if coeffs[0] != 0.0:
        raise LinearOracleError("f has a constant term")
    if not np.any(coeffs[1:]):
        raise LinearOracleError("f is identically zero")
    return tuple(float(c) for c in coeffs[1:])


def _is_zero(expr: Expr) -> bool:
    if isinstance(expr, Num):
        return expr.value == 0.0
    if isinstance(expr, Neg):
        return _is_zero(expr.operand)
    if isinstance(expr, BinOp) and expr.op == "*":
        return _is_zero(expr.left) or _is_zero(expr.right)
    return False


def linear_spectrum(ctx: OperatorContext, count: int = 3) -> np.ndarray:
    """Leading real eigenvalues mu (by modulus) of the linear Nystrom operator.

    For f = a u + b v + c w the nodal map is U -> M U with block rows
    [a W_j, b W_j, c W_j], j = 0, 1, 2; lam = 1/mu are the eigenvalues of the BVP.
    """
    spec = ctx.spec
    if not (_is_zero(spec.H1) and _is_zero(spec.H2)):
        raise LinearOracleError("the linear oracle needs H1 = H2 = 0")
    a, b, c = linear_coefficients(spec.f)
    w = nystrom_matrices(ctx)
    m = np.vstack([np.hstack([a * wj, b * wj, c * wj]) for wj in w])
    mu = np.linalg.eigvals(m)
    scale = np.max(np.abs(mu))
    real = mu[(np.abs(mu.imag) <= 1e-10 * scale) & (np.abs(mu) > 1e-8 * scale)].real
    if real.size == 0:
        raise LinearOracleError("the linear operator has no nonzero real eigenvalue")
    return real[np.argsort(-np.abs(real))][:count]


def cross_check_linear(ctx: OperatorContext, lambdas=None, rho: float = 1.0) -> float:
    """max |lam mu - 1| with each lam matched to the nearest same-sign 1/mu.

    ``lambdas`` defaults to the solver's eigenvalues of both signs at ``rho``
    (signs that fail to converge are skipped). A lam whose sign no leading
    real mu shares is compared against all of them, which exposes mismatches.
    """
    mu = linear_spectrum(ctx)
    if lambdas is None:
        from bvp3eig.solver import SolverError, solve

        lambdas = []
        for sign in (1, -1):
            try:
                lambdas.append(solve(ctx, rho, sign).lam)
            except SolverError:
                pass
        if not lambdas:
            raise LinearOracleError("the solver found no eigenvalue to compare")
    worst = 0.0
    for lam in np.atleast_1d(np.asarray(lambdas, dtype=float)):
        same = mu[np.sign(mu) == np.sign(lam)]
        cands = same if same.size else mu
        worst = max(worst, float(np.min(np.abs(lam * cands - 1.0))))
    return worst
