"""Gauss-Legendre rules on [0, 1], panel-split integration and barycentric
interpolation on the Gauss nodes."""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Callable

import numpy as np
from numpy.polynomial.legendre import leggauss

MAX_ORDER = 512


@dataclass(frozen=True, eq=False)
class QuadratureRule:
    """n-point Gauss-Legendre rule mapped to [0, 1].

    ``bary`` holds the barycentric interpolation weights for the nodes.
    """

    nodes: np.ndarray
    weights: np.ndarray
    bary: np.ndarray

    @property
    def order(self) -> int:
        return int(self.nodes.size)

    def __len__(self) -> int:
        return self.order

    def mapped(self, a: float, b: float) -> tuple[np.ndarray, np.ndarray]:
        """Nodes and weights of the rule transplanted to [a, b]."""
        h = b - a
        return a + h * self.nodes, h * self.weights


@lru_cache(maxsize=None)
def gauss_rule(n: int) -> QuadratureRule:
    """The n-point Gauss-Legendre rule on [0, 1] (exact to degree 2n - 1)."""
    if isinstance(n, bool) or not isinstance(n, (int, np.integer)):
        raise TypeError(f"rule size must be an integer, got {n!r}")
    if not 1 <= n <= MAX_ORDER:
        raise ValueError(f"rule size must be in [1, {MAX_ORDER}], got {n}")
    x, w = leggauss(int(n))
    # Barycentric weights for Legendre points: (-1)^j sqrt((1 - x_j^2) w_j).
    bary = (-1.0) ** np.arange(n) * np.sqrt((1.0 - x**2) * w)
    nodes = 0.5 * (x + 1.0)
    weights = 0.5 * w
    for arr in (nodes, weights, bary):
        arr.setflags(write=False)
    return QuadratureRule(nodes=nodes, weights=weights, bary=bary)


def _values(g: Callable, x: np.ndarray) -> np.ndarray:
    try:
        vals = np.asarray(g(x), dtype=float)
    except TypeError:
        # g is scalar-only (e.g. written with math.*)
        return np.array([float(g(float(xi))) for xi in x])
    return np.broadcast_to(vals, x.shape)


def integrate(g: Callable, rule: QuadratureRule) -> float:
    """sum_i w_i g(x_i) over [0, 1]."""
    return float(np.dot(rule.weights, _values(g, rule.nodes)))


def integrate_over(g: Callable, rule: QuadratureRule, a: float, b: float) -> float:
    """The rule applied on [a, b]; zero for a degenerate interval."""
    if b <= a:
        return 0.0
    x, w = rule.mapped(a, b)
    return float(np.dot(w, _values(g, x)))


def integrate_split(g: Callable, split: float, rule: QuadratureRule) -> float:
    """Apply the rule on [0, split] and [split, 1] separately and sum."""
    split = float(split)
    if not 0.0 <= split <= 1.0:
        raise ValueError(f"split point {split!r} is outside [0, 1]")
    return integrate_over(g, rule, 0.0, split) + integrate_over(g, rule, split, 1.0)


def interpolation_matrix(rule: QuadratureRule, x) -> np.ndarray:
    """Matrix L with L @ values(nodes) = polynomial interpolant at x.

    Barycentric formula of the second kind; rows for points that coincide
    with a node are unit vectors.
    """
    x = np.atleast_1d(np.asarray(x, dtype=float))
    diff = x[:, None] - rule.nodes[None, :]
    hit = diff == 0.0
    with np.errstate(divide="ignore", invalid="ignore"):
        m = rule.bary[None, :] / diff
    rows = hit.any(axis=1)
    if rows.any():
        m[rows] = hit[rows].astype(float)
    m[~rows] /= m[~rows].sum(axis=1, keepdims=True)
    return m


def interpolate(rule: QuadratureRule, values: np.ndarray, x) -> np.ndarray:
    """Evaluate the interpolant of nodal ``values`` (last axis = nodes) at x."""
    return np.asarray(values) @ interpolation_matrix(rule, x).T
