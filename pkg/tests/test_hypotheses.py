import dataclasses
import json

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from bvp3eig.hypotheses import (
    DeltaClampWarning,
    EstimationError,
    SampledFunction,
    build_report,
    check_inequality,
    estimate_delta,
    estimate_eta,
    weight,
)
from bvp3eig.problem import EXAMPLE_PROBLEM, parse_expr, parse_problem
from bvp3eig.quadrature import gauss_rule, integrate


def example_bounds(spec, rho):
    return spec.with_overrides(eta1=1 / (1 + rho**2), eta2=-1 / 40)


def declared_delta(text):
    return SampledFunction.from_expr(parse_expr(text, variables=("t",)))


class TestWeights:
    def test_integrals(self):
        r = gauss_rule(8)
        assert abs(integrate(weight("1a"), r) - 0.5) < 1e-13
        assert abs(integrate(weight("1b"), r) - 0.5) < 1e-13

    def test_bad_mode(self):
        with pytest.raises(ValueError):
            weight("2a")


class TestCheckInequality:
    @pytest.mark.parametrize("rho", [0.5, 1.0, 2.0, 5.0])
    def test_example_closed_form(self, rho):
        b = check_inequality("1a", declared_delta("t"), 1 / (1 + rho**2), -1 / 40)
        assert abs(b - 6 / (1 + rho**2)) < 1e-12

    def test_at_rho_one(self):
        assert check_inequality("1a", declared_delta("t"), 0.5, -1 / 40) == pytest.approx(3.0, abs=1e-12)

    def test_zero_bounds(self):
        zero = SampledFunction(np.linspace(0, 1, 11), np.zeros(11))
        assert check_inequality("1a", zero, 0.0, 0.0) == 0.0

    def test_sampled_piecewise_linear_exact(self):
        t = np.linspace(0, 1, 11)
        b = check_inequality("1b", SampledFunction(t, t.copy()), 0.0, 0.0)
        # int s^3 (3 - 2s) ds = 3/4 - 2/5
        assert b == pytest.approx(0.35, abs=1e-14)

    def test_negative_delta_rejected(self):
        t = np.linspace(0, 1, 11)
        with pytest.raises(ValueError):
            check_inequality("1a", SampledFunction(t, t - 0.5), 0, 0)

    @given(st.floats(-1, 1), st.floats(-1, 1), st.floats(0, 1), st.floats(0, 1), st.sampled_from(["1a", "1b"]))
    @settings(max_examples=50)
    def test_monotone(self, e1, e2, bump, c, mode):
        t = np.linspace(0, 1, 21)
        lo = SampledFunction(t, c * t)
        hi = SampledFunction(t, c * t + bump * t * (1 - t))
        assert check_inequality(mode, hi, e1, e2) >= check_inequality(mode, lo, e1, e2) - 1e-15
        assert check_inequality(mode, lo, e1 + bump, e2) >= check_inequality(mode, lo, e1, e2)
        assert check_inequality(mode, lo, e1, e2 + bump) >= check_inequality(mode, lo, e1, e2)


class TestEstimateDelta:
    def test_example(self, example_spec):
        spec = dataclasses.replace(example_spec, delta=None)
        for rho in (0.5, 3.0):
            d = estimate_delta(spec, rho)
            assert np.max(np.abs(d.values - d.t)) < 1e-15

    def test_constant(self):
        d = estimate_delta(parse_problem("f = 1\nH1 = 0\nH2 = 0"), 1.0)
        assert np.all(d.values == 1.0)

    def test_sign_changing_is_clamped(self):
        with pytest.warns(DeltaClampWarning):
            d = estimate_delta(parse_problem("f = u\nH1 = 0\nH2 = 0"), 1.0)
        assert np.all(d.values == 0.0)

    def test_mode_1b_uses_minus_f(self):
        d = estimate_delta(parse_problem("f = -2 - u^2\nH1 = 0\nH2 = 0\nsign = 1b"), 1.0)
        assert np.all(d.values == 2.0)

    def test_nan_names_lattice_point(self):
        spec = parse_problem("f = log(u + 1)\nH1 = 0\nH2 = 0")
        with pytest.raises(EstimationError, match=r"u, v, w\) = \(0, -1"):
            estimate_delta(spec, 1.0)

    def test_small_grids(self, example_spec):
        with pytest.raises(ValueError):
            estimate_delta(example_spec, 1.0, box_grid=5)


class TestEstimateEta:
    def test_constant_functional(self):
        spec = parse_problem("f = 1\nH1 = 1/40\nH2 = 1/40")
        est = estimate_eta(spec, 1.0, samples=100)
        assert est.eta1 == est.eta2 == pytest.approx(0.025)

    def test_example_ranges(self, example_spec):
        est = estimate_eta(example_spec, 1.0, samples=500, seed=3)
        assert 0.5 <= est.eta1 <= 1.0
        assert -0.025 <= est.eta2 <= 0.025

    def test_deterministic(self, example_spec):
        assert estimate_eta(example_spec, 2.0, 200, seed=7) == estimate_eta(example_spec, 2.0, 200, seed=7)

    def test_minimum_samples(self, example_spec):
        with pytest.raises(ValueError):
            estimate_eta(example_spec, 1.0, samples=50)


class TestBuildReport:
    def test_declared_holds(self, example_spec):
        r = build_report(example_bounds(example_spec, 1.0), 1.0)
        assert r.verdict == "holds"
        assert r.bound3a == pytest.approx(3.0, abs=1e-12) and r.bound3b is None
        assert r.delta_source == r.eta_source == "declared"

    @pytest.mark.parametrize("rho", [0.5, 1.0, 2.0, 5.0])
    def test_identity_grid(self, example_spec, rho):
        r = build_report(example_bounds(example_spec, rho), rho)
        assert abs(r.bound - 6 / (1 + rho**2)) < 1e-12

    def test_estimated(self, example_spec):
        r = build_report(example_spec, 2.0, samples=1000)
        assert r.verdict == "estimated-holds"
        assert r.eta_source == "estimated"
        assert r.bound >= 6 / 5

    def test_fails_without_compensation(self):
        r = build_report(parse_problem("f = u\nH1 = 0\nH2 = 0"), 1.0, samples=100)
        assert r.verdict == "fails"
        assert r.warnings

    def test_mode_override(self, example_spec):
        r = build_report(example_bounds(example_spec, 1.0), 1.0, mode="1b")
        assert r.bound3a is None and r.bound3b is not None

    def test_json(self, example_spec):
        r = build_report(example_bounds(example_spec, 1.0), 1.0)
        doc = json.loads(json.dumps(r.to_dict()))
        assert doc["verdict"] == "holds" and len(doc["delta"]["t"]) == 101
