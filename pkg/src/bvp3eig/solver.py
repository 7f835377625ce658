"""Eigenpairs (lam, u) with u = lam * T u and ||u||_2 = rho, for either sign
of lam, plus branches over rho."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from bvp3eig.grid import C2Norm, DiscreteFunction, c2_norm, max_nodal_difference
from bvp3eig.operator import OperatorContext, apply_T, apply_T_layers, nystrom_extend
from bvp3eig.problem import EvaluationError

log = logging.getLogger(__name__)

METHODS = ("picard", "picard+newton")
LAMBDA_FLOOR = 1e-12


class SolverError(RuntimeError):
    """A solve that did not produce an eigenpair.

    ``code`` is one of: stalled, operator-degenerate, nan, jacobian-singular,
    diverged, norm-index-migrated.
    """

    def __init__(self, code: str, message: str, pair: "Eigenpair | None" = None):
        self.code = code
        self.pair = pair
        super().__init__(f"{code}: {message}")


@dataclass(frozen=True, eq=False)
class Eigenpair:
    lam: float
    u: DiscreteFunction
    rho: float
    fixed_point_residual: float
    norm_residual: float
    norm: C2Norm
    iterations: int
    method: str

    @property
    def sign(self) -> int:
        return 1 if self.lam > 0 else -1

    @classmethod
    def build(cls, ctx: OperatorContext, layers, lam: float, rho: float, iterations: int, method: str):
        """Assemble an eigenpair from the nodal state, recomputing both residuals.

        The stored function is lam * T(state) with its Nystrom extension, so
        off-node values are exact up to quadrature error.
        """
        u = nystrom_extend(ctx, np.asarray(layers, dtype=float), lam)
        residual = float(np.max(np.abs(u.layers - lam * apply_T(ctx, u).layers)))
        norm = c2_norm(u, ctx.fine_grid)
        return cls(
            lam=float(lam),
            u=u,
            rho=float(rho),
            fixed_point_residual=residual,
            norm_residual=abs(norm.value - rho),
            norm=norm,
            iterations=int(iterations),
            method=method,
        )


def _check_sign(sign) -> int:
    if sign in (1, "+", "+1"):
        return 1
    if sign in (-1, "-", "-1"):
        return -1
    raise ValueError(f"sign must be + or -, got {sign!r}")


def _check_rho(rho) -> float:
    rho = float(rho)
    if not (rho > 0 and np.isfinite(rho)):
        raise ValueError(f"rho must be a positive number, got {rho!r}")
    return rho


PROFILES = ("sin", "cos")


def initial_guess(ctx: OperatorContext, rho: float, profile: str = "sin:1") -> DiscreteFunction:
    """rho * sin(2 pi K t) / (2 pi K)^2 with exact derivatives, on the sphere.

    ``profile`` is ``sin:K`` or ``cos:K`` (K a positive integer).
    """
    kind, _, k = profile.partition(":")
    try:
        k = int(k or 1)
    except ValueError:
        raise ValueError(f"bad seed profile {profile!r}") from None
    if kind not in PROFILES or k < 1:
        raise ValueError(f"seed profile must be sin:K or cos:K with K >= 1, got {profile!r}")
    om = 2 * np.pi * k
    if kind == "sin":
        layers = (lambda t: np.sin(om * t) / om**2, lambda t: np.cos(om * t) / om, lambda t: -np.sin(om * t))
    else:
        layers = (lambda t: np.cos(om * t) / om**2, lambda t: -np.sin(om * t) / om, lambda t: -np.cos(om * t))
    u = DiscreteFunction.from_callables(ctx.rule, *layers)
    return u.scaled(rho / c2_norm(u, ctx.fine_grid).value)


def picard_normalized(
    ctx: OperatorContext,
    rho: float,
    sign=1,
    u0: DiscreteFunction | None = None,
    tol: float = 1e-10,
    max_iter: int = 500,
) -> Eigenpair:
    """Normalised fixed-point iteration v = T u_k, lam_k = sign rho / ||v||_2,
    u_{k+1} = lam_k v, until successive nodal states agree to ``tol``."""
    rho, sign = _check_rho(rho), _check_sign(sign)
    u = initial_guess(ctx, rho) if u0 is None else u0
    if np.max(np.abs(u.layers)) == 0.0:
        raise ValueError("initial guess must be nonzero")
    lam = np.nan
    diff = np.inf
    try:
        for k in range(1, max_iter + 1):
            v = apply_T(ctx, u)
            nv = c2_norm(v, ctx.fine_grid).value
            if nv < 1e-14:
                raise SolverError("operator-degenerate", f"||T u||_2 = {nv:.3g} at iteration {k}")
            lam = sign * rho / nv
            u_next = v.scaled(lam)
            diff = max_nodal_difference(u_next, u)
            u = u_next
            if diff < tol:
                return Eigenpair.build(ctx, u.layers, lam, rho, k, "picard")
    except EvaluationError as exc:
        raise SolverError("nan", str(exc)) from exc
    raise SolverError("stalled", f"no convergence in {max_iter} iterations (last step {diff:.3g}, lam {lam:.6g})")


def _frozen_residual(ctx, z, rho, j, t, target):
    n = ctx.n
    layers = z[:-1].reshape(3, n)
    lam = z[-1]
    v = apply_T_layers(ctx, layers)
    g = np.empty(3 * n + 1)
    g[:-1] = (layers - lam * v.layers).ravel()
    g[-1] = lam * v.point_eval(j, t) - target
    return g, v


def newton_polish(
    ctx: OperatorContext,
    rho: float,
    seed: Eigenpair,
    tol: float = 1e-12,
    max_iter: int = 20,
    basin: float = 1e-2,
) -> Eigenpair:
    """Newton on [U - lam T(U); lam (T U)^(j*)(t*) - s* rho] = 0.

    (j*, t*) is the norm achiever of the seed and s* the sign of the seed
    there. Forward-difference Jacobian, halving line search, lam kept away
    from zero and from changing sign.
    """
    rho = _check_rho(rho)
    if not seed.fixed_point_residual <= basin:
        raise SolverError(
            "diverged", f"seed residual {seed.fixed_point_residual:.3g} is outside the Newton basin ({basin:g})"
        )
    j, t = seed.norm.derivative, seed.norm.point
    target = np.sign(seed.u.point_eval(j, t)) * rho
    sign = seed.sign
    z = np.append(seed.u.layers.ravel(), seed.lam)
    try:
        g, v = _frozen_residual(ctx, z, rho, j, t, target)
        gnorm = float(np.max(np.abs(g)))
        it = 0
        while gnorm > tol:
            if it >= max_iter:
                raise SolverError("diverged", f"residual {gnorm:.3g} after {max_iter} Newton steps")
            it += 1
            jac = np.empty((z.size, z.size))
            for k in range(z.size - 1):
                h = 1e-7 * (1.0 + abs(z[k]))
                zk = z.copy()
                zk[k] += h
                jac[:, k] = (_frozen_residual(ctx, zk, rho, j, t, target)[0] - g) / h
            # exact: the residual is affine in lam
            jac[:-1, -1] = -v.layers.ravel()
            jac[-1, -1] = v.point_eval(j, t)
            try:
                step = np.linalg.solve(jac, -g)
            except np.linalg.LinAlgError as exc:
                raise SolverError("jacobian-singular", str(exc)) from exc
            if not np.all(np.isfinite(step)) or np.linalg.cond(jac) > 1e14:
                raise SolverError("jacobian-singular", "Newton matrix is numerically singular")
            alpha = 1.0
            for _ in range(30):
                trial = z + alpha * step
                if np.sign(trial[-1]) == sign and abs(trial[-1]) >= LAMBDA_FLOOR:
                    g_new, v_new = _frozen_residual(ctx, trial, rho, j, t, target)
                    new_norm = float(np.max(np.abs(g_new)))
                    if new_norm < gnorm or new_norm <= tol:
                        break
                alpha /= 2
            else:
                raise SolverError("diverged", f"line search failed at residual {gnorm:.3g}")
            z, g, v, gnorm = trial, g_new, v_new, new_norm
            log.debug("newton step %d: |G| = %.3e (alpha %.3g)", it, gnorm, alpha)
    except EvaluationError as exc:
        raise SolverError("nan", str(exc)) from exc
    pair = Eigenpair.build(ctx, z[:-1].reshape(3, ctx.n), z[-1], rho, seed.iterations + it, "picard+newton")
    moved = (pair.norm.derivative, pair.norm.point) != (j, t)
    if moved and pair.norm_residual > max(tol, 1e-12):
        raise SolverError(
            "norm-index-migrated",
            f"norm achiever moved from (j={j}, t={t:.6g}) to "
            f"(j={pair.norm.derivative}, t={pair.norm.point:.6g})",
            pair=pair,
        )
    return pair


MAX_REFREEZE = 3


def solve(
    ctx: OperatorContext,
    rho: float,
    sign=1,
    u0: DiscreteFunction | None = None,
    tol: float = 1e-10,
    max_iter: int = 500,
    polish: bool = True,
    polish_tol: float = 1e-12,
) -> Eigenpair:
    """Picard iteration followed (optionally) by Newton polishing."""
    pair = picard_normalized(ctx, rho, sign, u0, tol, max_iter)
    if not polish:
        return pair
    seed = pair
    for _ in range(MAX_REFREEZE):
        try:
            return newton_polish(ctx, rho, seed, min(tol, polish_tol))
        except SolverError as exc:
            if exc.code != "norm-index-migrated":
                raise
            seed = exc.pair
    raise SolverError("norm-index-migrated", f"norm achiever kept moving after {MAX_REFREEZE} re-freezes")


@dataclass
class BranchTable:
    entries: list = field(default_factory=list)  # (rho, plus | None, minus | None)
    failures: list = field(default_factory=list)  # (rho, sign, reason)


def sweep_rho(
    ctx: OperatorContext,
    rho_list,
    tol: float = 1e-10,
    max_iter: int = 500,
    polish: bool = True,
    profile: str = "sin:1",
) -> BranchTable:
    """Solve both signs along an increasing list of radii, warm-starting each
    radius from the previous eigenfunction rescaled onto the new sphere."""
    rhos = [_check_rho(r) for r in rho_list]
    if not rhos:
        raise ValueError("rho list is empty")
    if any(b <= a for a, b in zip(rhos, rhos[1:])):
        raise ValueError("rho list must be strictly increasing")
    table = BranchTable()
    found = {rho: {} for rho in rhos}
    for sign in (1, -1):
        prev = None
        for rho in rhos:
            u0 = initial_guess(ctx, rho, profile) if prev is None else prev.u.scaled(rho / prev.rho)
            try:
                pair = solve(ctx, rho, sign, u0, tol, max_iter, polish)
            except SolverError as exc:
                table.failures.append((rho, "+" if sign > 0 else "-", str(exc)))
                continue
            found[rho][sign] = pair
            prev = pair
    for rho in rhos:
        table.entries.append((rho, found[rho].get(1), found[rho].get(-1)))
    return table
