"""Sufficient conditions for eigenpairs of both signs on the sphere of radius rho.

With Pi_rho = [0,1] x [-rho, rho]^3, the conditions are

  mode 1a:  f >= delta on Pi_rho,  H_i[u] >= eta_i on the sphere,
            B = 6 (eta1 + eta2) + int (1-s)^2 (2s+1) delta(s) ds > 0
  mode 1b:  -f >= delta on Pi_rho, H_i[u] >= eta_i on the sphere,
            B = 6 (eta1 + eta2) + int s^2 (3-2s) delta(s) ds > 0

with delta >= 0. Bounds may be declared in the problem file or estimated
by sampling; sampled minima over-estimate the true infima, so an estimate
never certifies anything.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from bvp3eig.problem import EvaluationError, ProblemSpec, eval_functional, eval_pointwise
from bvp3eig.quadrature import QuadratureRule, gauss_rule

TOLERANCE = 1e-12
MODES = ("1a", "1b")


def weight(mode: str) -> Callable:
    if mode == "1a":
        return lambda s: (1 - s) ** 2 * (2 * s + 1)
    if mode == "1b":
        return lambda s: s**2 * (3 - 2 * s)
    raise ValueError(f"mode must be 1a or 1b, got {mode!r}")


class DeltaClampWarning(UserWarning):
    """The estimated lower bound of f was negative somewhere and was clamped to 0."""


class EstimationError(ArithmeticError):
    pass


@dataclass(frozen=True, eq=False)
class SampledFunction:
    """Nonnegative function of t known at sample points (and exactly, if declared)."""

    t: np.ndarray
    values: np.ndarray
    exact: Callable | None = None

    def __call__(self, s):
        s = np.asarray(s, dtype=float)
        if self.exact is not None:
            return np.broadcast_to(np.asarray(self.exact(s), dtype=float), s.shape)
        return np.interp(s, self.t, self.values)

    @classmethod
    def from_expr(cls, expr, points: int = 101) -> "SampledFunction":
        t = np.linspace(0.0, 1.0, points)

        def exact(s):
            return eval_pointwise(expr, t=s)

        return cls(t, np.array(exact(t)), exact)


def _lattice(rho: float, box_grid: int) -> np.ndarray:
    # zero is always included: many nonlinearities are minimal there
    return np.union1d(np.linspace(-rho, rho, box_grid), [0.0])


def estimate_delta(spec: ProblemSpec, rho: float, t_grid: int = 101, box_grid: int = 21) -> SampledFunction:
    """Pointwise minimum of f (mode 1a) or -f (mode 1b) over a lattice on [-rho, rho]^3.

    Negative minima are clamped to 0 with a :class:`DeltaClampWarning`.
    """
    if t_grid < 11 or box_grid < 11:
        raise ValueError("t and box grids need at least 11 points")
    sign = 1.0 if spec.sign_mode == "1a" else -1.0
    t = np.linspace(0.0, 1.0, t_grid)
    x = _lattice(rho, box_grid)
    uu, vv, ww = (a.ravel() for a in np.meshgrid(x, x, x, indexing="ij"))
    mins = np.empty(t_grid)
    for i, ti in enumerate(t):
        try:
            vals = sign * eval_pointwise(spec.f, t=ti, u=uu, v=vv, w=ww)
        except EvaluationError as exc:
            raise EstimationError(f"f cannot be evaluated on the lattice: {_first_failure(spec, ti, uu, vv, ww, exc)}")
        mins[i] = vals.min()
    if np.any(mins < 0):
        k = int(np.argmin(mins))
        warnings.warn(
            f"lower bound of f is negative (min {mins[k]:.6g} at t={t[k]:.3g}); clamped to 0",
            DeltaClampWarning,
            stacklevel=2,
        )
    return SampledFunction(t, np.maximum(mins, 0.0))


def _first_failure(spec, ti, uu, vv, ww, exc) -> str:
    for u, v, w in zip(uu, vv, ww):
        try:
            eval_pointwise(spec.f, t=ti, u=u, v=v, w=w)
        except EvaluationError as inner:
            return f"(t, u, v, w) = ({ti:g}, {u:g}, {v:g}, {w:g}): {inner}"
    return str(exc)


class _TrigSample:
    """u(t) = scale * sum_k a_k cos(2 pi k t) + b_k sin(2 pi k t), with derivatives."""

    def __init__(self, a, b, scale=1.0):
        self.a, self.b, self.scale = a, b, scale
        self.om = 2 * np.pi * np.arange(a.size)

    def values(self, t):
        ph = np.outer(np.atleast_1d(t), self.om)
        c, s = np.cos(ph), np.sin(ph)
        u = c @ self.a + s @ self.b
        du = (-s * self.om) @ self.a + (c * self.om) @ self.b
        d2u = (-c * self.om**2) @ self.a + (-s * self.om**2) @ self.b
        return self.scale * np.array([u, du, d2u])

    def point_eval(self, j, t):
        out = self.values(t)[j]
        return float(out[0]) if np.ndim(t) == 0 else out


class _Probe:
    def __init__(self, layers):
        self.layers = layers

    def point_eval(self, j, t):
        return self.layers[j](t) if np.ndim(t) == 0 else np.broadcast_to(self.layers[j](np.asarray(t)), np.shape(t))


def _probes(rho):
    one = lambda t: 1.0 + 0 * t  # noqa: E731
    zero = lambda t: 0.0 * t  # noqa: E731
    shapes = [
        (one, zero, zero),
        (lambda t: t - 0.5, one, zero),
        (lambda t: t**2 / 2, lambda t: t, one),
    ]
    for sign in (1.0, -1.0):
        for lay in shapes:
            yield _Probe(tuple((lambda g, c: lambda t: c * g(t))(g, sign * rho) for g in lay))


@dataclass(frozen=True)
class EtaEstimate:
    eta1: float
    eta2: float
    samples: int


def estimate_eta(
    spec: ProblemSpec,
    rho: float,
    samples: int = 1000,
    seed: int = 0,
    rule: QuadratureRule | None = None,
    max_degree: int = 4,
) -> EtaEstimate:
    """Smallest H1, H2 seen over random trigonometric polynomials on the sphere.

    Each sample is rescaled to ||u||_2 = rho (sup norms taken on a dense
    grid). A few deterministic probes (constants, lines, parabolas with
    norm rho) are always included.
    """
    if samples < 100:
        raise ValueError(f"need at least 100 samples, got {samples}")
    rule = rule or gauss_rule(64)
    rng = np.random.default_rng(seed)
    dense = np.linspace(0.0, 1.0, 2001)
    lo = np.array([np.inf, np.inf])

    def visit(u):
        h = (eval_functional(spec.H1, u, rule), eval_functional(spec.H2, u, rule))
        np.minimum(lo, h, out=lo)

    for u in _probes(rho):
        visit(u)
    for _ in range(samples):
        deg = int(rng.integers(1, max_degree + 1))
        damp = 1.0 / (1.0 + np.arange(deg + 1)) ** 2
        a = rng.standard_normal(deg + 1) * damp
        b = rng.standard_normal(deg + 1) * damp
        b[0] = 0.0
        u = _TrigSample(a, b)
        norm = np.max(np.abs(u.values(dense)))
        if norm == 0:
            continue
        u.scale = rho / norm
        visit(u)
    return EtaEstimate(float(lo[0]), float(lo[1]), samples)


def check_inequality(mode: str, delta, eta1: float, eta2: float, rule: QuadratureRule | None = None) -> float:
    """B = 6 (eta1 + eta2) + int_0^1 w_mode(s) delta(s) ds; the conditions need B > 0.

    ``delta`` is a :class:`SampledFunction` (piecewise linear between its
    samples unless it is exact), or any vectorised callable.
    """
    w = weight(mode)
    rule = rule or gauss_rule(8)
    if isinstance(delta, SampledFunction):
        if np.any(delta.values < 0):
            raise ValueError("delta must be nonnegative")
        edges = delta.t if delta.exact is None else np.linspace(0.0, 1.0, 17)
    else:
        edges = np.linspace(0.0, 1.0, 17)
    total = 0.0
    for a, b in zip(edges[:-1], edges[1:]):
        x, wq = rule.mapped(a, b)
        total += float(np.dot(wq, w(x) * delta(x)))
    return 6.0 * (eta1 + eta2) + total


@dataclass(frozen=True, eq=False)
class HypothesisReport:
    rho: float
    mode: str
    delta_source: str
    delta: SampledFunction
    eta1: float
    eta2: float
    eta_source: str
    bound3a: float | None
    bound3b: float | None
    verdict: str
    warnings: list = field(default_factory=list)

    @property
    def bound(self) -> float:
        return self.bound3a if self.mode == "1a" else self.bound3b

    def to_dict(self) -> dict:
        return {
            "rho": self.rho,
            "mode": self.mode,
            "delta_source": self.delta_source,
            "delta": {"t": self.delta.t.tolist(), "values": self.delta.values.tolist()},
            "eta1": self.eta1,
            "eta2": self.eta2,
            "eta_source": self.eta_source,
            "bound3a": self.bound3a,
            "bound3b": self.bound3b,
            "verdict": self.verdict,
            "warnings": list(self.warnings),
        }


def build_report(
    spec: ProblemSpec,
    rho: float,
    samples: int = 1000,
    seed: int = 0,
    t_grid: int = 101,
    box_grid: int = 21,
    mode: str | None = None,
) -> HypothesisReport:
    """Declared bounds where the problem has them, estimates otherwise."""
    rho = float(rho)
    if not rho > 0:
        raise ValueError(f"rho must be positive, got {rho!r}")
    mode = mode or spec.sign_mode
    if mode != spec.sign_mode:
        spec = spec.with_overrides(sign_mode=mode)
    notes = list(spec.flags)
    if spec.delta is not None:
        delta, delta_source = SampledFunction.from_expr(spec.delta, t_grid), "declared"
    else:
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always", DeltaClampWarning)
            delta = estimate_delta(spec, rho, t_grid, box_grid)
        notes += [str(w.message) for w in caught if issubclass(w.category, DeltaClampWarning)]
        delta_source = "estimated"
    eta1, eta2 = spec.eta1, spec.eta2
    eta_source = "declared"
    if eta1 is None or eta2 is None:
        est = estimate_eta(spec, rho, samples, seed)
        eta1 = est.eta1 if eta1 is None else eta1
        eta2 = est.eta2 if eta2 is None else eta2
        eta_source = "estimated"
    b = check_inequality(mode, delta, eta1, eta2)
    if b <= TOLERANCE:
        verdict = "fails"
    elif delta_source == "declared" and eta_source == "declared":
        verdict = "holds"
    else:
        verdict = "estimated-holds"
    return HypothesisReport(
        rho=rho,
        mode=mode,
        delta_source=delta_source,
        delta=delta,
        eta1=float(eta1),
        eta2=float(eta2),
        eta_source=eta_source,
        bound3a=b if mode == "1a" else None,
        bound3b=b if mode == "1b" else None,
        verdict=verdict,
        warnings=notes,
    )
