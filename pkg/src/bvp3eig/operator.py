"""The Hammerstein operator T = F + Gamma and its Nystrom discretisation.

    (Tu)^(j)(t) = gamma_1^(j)(t) H1[u] + gamma_2^(j)(t) H2[u]
                  + int_0^1 d^j k/dt^j (t, s) f(s, u(s), u'(s), u''(s)) ds

T does not include the eigenvalue: an eigenpair satisfies u = lam * T u.

The integral at an output point t is split at s = t (d2k/dt2 jumps there)
and at the zeros of every abs(...) argument of f along the input (f only
has a kink there), and each panel gets the full Gauss rule. The input is
read through the barycentric interpolant of its nodal layers, so the
discrete operator depends on the nodal state alone; that is what makes
the Newton system square. The same formula evaluated at arbitrary t is the
Nystrom extension carried by the output.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq

from bvp3eig.grid import DiscreteFunction, RuleMismatchError
from bvp3eig.kernel import LEFT, RIGHT, gamma_array
from bvp3eig.problem import ProblemSpec
from bvp3eig.problem.evaluate import eval_functional, eval_pointwise
from bvp3eig.quadrature import QuadratureRule, gauss_rule, interpolation_matrix

MIN_ORDER = 8
# Upper bound on interpolation-matrix entries built at once.
_CHUNK = 4_000_000


@dataclass(frozen=True, eq=False)
class OperatorContext:
    spec: ProblemSpec
    rule: QuadratureRule
    fine_grid: int = 1001
    kink_scan: int = field(default=0)

    def __post_init__(self):
        if self.rule.order < MIN_ORDER:
            raise ValueError(f"rule size must be at least {MIN_ORDER}, got {self.rule.order}")
        if self.fine_grid < 101:
            raise ValueError(f"fine grid must have at least 101 points, got {self.fine_grid}")
        if self.kink_scan <= 0:
            object.__setattr__(self, "kink_scan", 8 * self.rule.order)

    @classmethod
    def create(cls, spec: ProblemSpec, order: int = 40, fine_grid: int = 1001) -> "OperatorContext":
        return cls(spec, gauss_rule(order), fine_grid)

    @property
    def n(self) -> int:
        return self.rule.order


def _raw(ctx: OperatorContext, layers: np.ndarray) -> DiscreteFunction:
    return DiscreteFunction.from_layers(ctx.rule, layers)


def find_kinks(ctx: OperatorContext, layers: np.ndarray) -> np.ndarray:
    """Interior zeros of the abs(...) arguments of f along the interpolated input."""
    args = ctx.spec.kink_arguments
    if not args:
        return np.empty(0)
    s = np.linspace(0.0, 1.0, ctx.kink_scan + 1)
    vals = layers @ interpolation_matrix(ctx.rule, s).T
    roots = []
    for g in args:
        gs = eval_pointwise(g, t=s, u=vals[0], v=vals[1], w=vals[2])

        def scalar(x, g=g):
            lv = layers @ interpolation_matrix(ctx.rule, x).T
            return float(eval_pointwise(g, t=x, u=lv[0, 0], v=lv[1, 0], w=lv[2, 0]))

        for i in np.flatnonzero(gs[:-1] * gs[1:] < 0):
            roots.append(brentq(scalar, s[i], s[i + 1], xtol=1e-15))
        roots.extend(s[1:-1][gs[1:-1] == 0.0])
    roots = np.unique(np.asarray(roots, dtype=float))
    return roots[(roots > 0.0) & (roots < 1.0)]


def _panels(ts: np.ndarray, kinks: np.ndarray, rule: QuadratureRule):
    """Quadrature points/weights on [0,1] split at each t and at the kinks.

    Returns sigma, omega with shape (m, P, n) and a (m, P) mask that is True
    for panels left of t (where s <= t).
    """
    m = ts.size
    edges = np.concatenate(
        [np.zeros((m, 1)), np.ones((m, 1)), ts[:, None], np.broadcast_to(kinks, (m, kinks.size))],
        axis=1,
    )
    edges.sort(axis=1)
    a, b = edges[:, :-1], edges[:, 1:]
    h = b - a
    sigma = a[..., None] + h[..., None] * rule.nodes
    omega = h[..., None] * rule.weights
    left = b <= ts[:, None]
    return sigma, omega, left


def _kernel(j: int, ts: np.ndarray, sigma: np.ndarray, left: np.ndarray) -> np.ndarray:
    t = ts[:, None, None]
    return np.where(left[..., None], LEFT[j](t, sigma), RIGHT[j](t, sigma))


def phie_layers(
    ctx: OperatorContext,
    layers: np.ndarray,
    h1: float,
    h2: float,
    kinks: np.ndarray,
    ts,
) -> np.ndarray:
    """(Tu)^(j)(t) for j = 0, 1, 2 at points ts, for input nodal ``layers``."""
    ts = np.atleast_1d(np.asarray(ts, dtype=float))
    n = ctx.n
    npan = kinks.size + 2
    step = max(1, _CHUNK // (npan * n * n))
    out = np.empty((3, ts.size))
    for lo in range(0, ts.size, step):
        tc = ts[lo : lo + step]
        sigma, omega, left = _panels(tc, kinks, ctx.rule)
        vals = layers @ interpolation_matrix(ctx.rule, sigma.ravel()).T
        phi = eval_pointwise(
            ctx.spec.f, t=sigma.ravel(), u=vals[0], v=vals[1], w=vals[2]
        ).reshape(sigma.shape)
        weighted = omega * phi
        for j in range(3):
            out[j, lo : lo + step] = np.einsum("mpq,mpq->m", weighted, _kernel(j, tc, sigma, left))
    for j in range(3):
        out[j] += gamma_array(1, ts, j) * h1 + gamma_array(2, ts, j) * h2
    return out


@dataclass(frozen=True, eq=False)
class NystromExtension:
    """Off-node evaluation of ``scale * T(source)``."""

    ctx: OperatorContext
    source: np.ndarray  # nodal layers of the input, shape (3, n)
    h1: float
    h2: float
    kinks: np.ndarray
    scale: float = 1.0

    def evaluate(self, t):
        return self.scale * phie_layers(self.ctx, self.source, self.h1, self.h2, self.kinks, t)

    def scaled(self, alpha):
        return NystromExtension(self.ctx, self.source, self.h1, self.h2, self.kinks, self.scale * alpha)


def boundary_values(ctx: OperatorContext, u: DiscreteFunction) -> tuple[float, float]:
    """H1[u], H2[u] of the nodal interpolant of u."""
    raw = u.raw()
    return (
        eval_functional(ctx.spec.H1, raw, ctx.rule),
        eval_functional(ctx.spec.H2, raw, ctx.rule),
    )


def apply_T(ctx: OperatorContext, u: DiscreteFunction) -> DiscreteFunction:
    """v = T u at the nodes, carrying the Nystrom extension for off-node values."""
    if u.rule is not ctx.rule and not np.array_equal(u.rule.nodes, ctx.rule.nodes):
        raise RuleMismatchError("input does not live on the context's quadrature rule")
    return apply_T_layers(ctx, u.layers)


def apply_T_layers(ctx: OperatorContext, layers: np.ndarray) -> DiscreteFunction:
    layers = np.array(layers, dtype=float)
    h1, h2 = boundary_values(ctx, _raw(ctx, layers))
    kinks = find_kinks(ctx, layers)
    ext = NystromExtension(ctx, layers, h1, h2, kinks)
    return DiscreteFunction.from_layers(ctx.rule, ext.evaluate(ctx.rule.nodes), ext)


def nystrom_extend(ctx: OperatorContext, layers: np.ndarray, lam: float) -> DiscreteFunction:
    """lam * T(u) for nodal ``layers``: the Nystrom interpolant of a computed eigenfunction."""
    return apply_T_layers(ctx, layers).scaled(lam)


def nystrom_matrices(ctx: OperatorContext) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """W_j with (W_j h)_i = int d^j k/dt^j (t_i, s) p_h(s) ds.

    p_h is the polynomial interpolant of nodal values h, so the integrals are
    exact for polynomial h of degree < n (the kernel is piecewise cubic in s
    and each side of the diagonal gets its own n-point rule).
    """
    ts = ctx.rule.nodes
    sigma, omega, left = _panels(ts, np.empty(0), ctx.rule)
    lag = interpolation_matrix(ctx.rule, sigma.ravel()).reshape(sigma.shape + (ctx.n,))
    return tuple(
        np.einsum("mpq,mpqk->mk", omega * _kernel(j, ts, sigma, left), lag) for j in range(3)
    )


def nystrom_matrix(ctx: OperatorContext) -> np.ndarray:
    """Discretisation of h -> int k(., s) h(s) ds on nodal values."""
    return nystrom_matrices(ctx)[0]
