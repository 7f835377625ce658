"""Candidate eigenfunctions on the Gauss nodes and the C^2 norm.

A :class:`DiscreteFunction` stores u, u', u'' at the nodes of a quadrature
rule. Off-node values come from its ``extension`` when it has one (the
Nystrom formula for operator outputs, or exact callables for analytic test
functions); otherwise the nodal layers are interpolated barycentrically,
which is only good enough for initial guesses.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Protocol

import numpy as np
from scipy.optimize import minimize_scalar

from bvp3eig.quadrature import QuadratureRule, interpolation_matrix


class Extension(Protocol):
    def evaluate(self, t: np.ndarray) -> np.ndarray:
        """Values of (u, u', u'') at points t, shape (3, len(t))."""

    def scaled(self, alpha: float) -> "Extension": ...


@dataclass(frozen=True)
class AnalyticExtension:
    """Exact layers supplied as vectorised callables (for tests and probes)."""

    layers: tuple[Callable, Callable, Callable]
    scale: float = 1.0

    def evaluate(self, t):
        t = np.asarray(t, dtype=float)
        return self.scale * np.array([np.broadcast_to(np.asarray(g(t), dtype=float), t.shape) for g in self.layers])

    def scaled(self, alpha):
        return AnalyticExtension(self.layers, self.scale * alpha)


class RuleMismatchError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class DiscreteFunction:
    rule: QuadratureRule
    u0: np.ndarray
    u1: np.ndarray
    u2: np.ndarray
    extension: Extension | None = None

    def __post_init__(self):
        n = self.rule.order
        for name in ("u0", "u1", "u2"):
            arr = np.array(getattr(self, name), dtype=float)
            if arr.shape != (n,):
                raise ValueError(f"{name} has shape {arr.shape}, expected ({n},)")
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @classmethod
    def from_layers(cls, rule: QuadratureRule, layers, extension=None) -> "DiscreteFunction":
        layers = np.asarray(layers, dtype=float)
        return cls(rule, layers[0], layers[1], layers[2], extension)

    @classmethod
    def from_callables(cls, rule: QuadratureRule, u, du, d2u) -> "DiscreteFunction":
        """Sample an analytically known function and keep it exact off-node."""
        ext = AnalyticExtension((u, du, d2u))
        return cls.from_layers(rule, ext.evaluate(rule.nodes), ext)

    @property
    def layers(self) -> np.ndarray:
        return np.vstack([self.u0, self.u1, self.u2])

    @property
    def nodes(self) -> np.ndarray:
        return self.rule.nodes

    def raw(self) -> "DiscreteFunction":
        return DiscreteFunction(self.rule, self.u0, self.u1, self.u2)

    def scaled(self, alpha: float) -> "DiscreteFunction":
        """alpha * u; unlike :func:`axpy` a pure scaling keeps the extension."""
        ext = None if self.extension is None else self.extension.scaled(alpha)
        return DiscreteFunction.from_layers(self.rule, alpha * self.layers, ext)

    def values(self, t) -> np.ndarray:
        """(u, u', u'') at points t, shape (3, m)."""
        t = np.atleast_1d(np.asarray(t, dtype=float))
        if np.any((t < 0.0) | (t > 1.0)):
            raise ValueError("evaluation point outside [0, 1]")
        if self.extension is not None:
            return np.asarray(self.extension.evaluate(t), dtype=float)
        return self.layers @ interpolation_matrix(self.rule, t).T

    def point_eval(self, j: int, t):
        """u^(j)(t); scalar in, scalar out."""
        if j not in (0, 1, 2):
            raise ValueError(f"derivative order must be 0, 1 or 2, got {j!r}")
        out = self.values(t)[j]
        return float(out[0]) if np.ndim(t) == 0 else out


def point_eval(u: DiscreteFunction, j: int, t):
    return u.point_eval(j, t)


def raw_values(u: DiscreteFunction, t) -> np.ndarray:
    """Barycentric interpolation of the nodal layers, ignoring any extension."""
    return u.layers @ interpolation_matrix(u.rule, np.atleast_1d(t)).T


def axpy(alpha: float, u: DiscreteFunction, beta: float, v: DiscreteFunction) -> DiscreteFunction:
    """alpha * u + beta * v on the nodal layers; the result is a raw vector."""
    if u.rule is not v.rule and not np.array_equal(u.rule.nodes, v.rule.nodes):
        raise RuleMismatchError("operands live on different quadrature rules")
    return DiscreteFunction.from_layers(u.rule, alpha * u.layers + beta * v.layers)


def max_nodal_difference(u: DiscreteFunction, v: DiscreteFunction) -> float:
    return float(np.max(np.abs(u.layers - v.layers)))


@dataclass(frozen=True)
class C2Norm:
    value: float
    derivative: int
    point: float


# Relative tolerance under which two maxima count as tied.
TIE_RTOL = 1e-12


def c2_norm(u: DiscreteFunction, fine_grid: int = 1001) -> C2Norm:
    """max_j sup_t |u^(j)(t)| with the achieving (j, t).

    Uniform grid search (endpoints included) followed by a bounded scalar
    maximisation on the bracketing cells of an interior maximum. Ties go to
    the smaller j, then the smaller t.
    """
    if fine_grid < 101:
        raise ValueError(f"fine grid must have at least 101 points, got {fine_grid}")
    t = np.linspace(0.0, 1.0, fine_grid)
    vals = np.abs(u.values(t))
    best = None
    for j in range(3):
        k = int(np.argmax(vals[j]))
        tj, vj = float(t[k]), float(vals[j, k])
        if 0 < k < fine_grid - 1:
            res = minimize_scalar(
                lambda s: -abs(u.point_eval(j, s)),
                bounds=(t[k - 1], t[k + 1]),
                method="bounded",
                options={"xatol": 1e-12},
            )
            if -res.fun > vj:
                tj, vj = float(res.x), float(-res.fun)
        if best is None or vj > best.value * (1 + TIE_RTOL) + 1e-300:
            best = C2Norm(vj, j, tj)
    return best
