import dataclasses
from types import SimpleNamespace

import numpy as np
import pytest

from bvp3eig.grid import DiscreteFunction
from bvp3eig.operator import OperatorContext
from bvp3eig.problem import parse_problem
from bvp3eig.verify import (
    LinearOracleError,
    certify,
    cross_check_linear,
    default_thresholds,
    linear_coefficients,
    linear_spectrum,
)

from conftest import cubic


def analytic_pair(ctx, lam, rho=1.0):
    u = DiscreteFunction.from_callables(ctx.rule, *(lambda t, j=j: lam * cubic(t)[j] for j in range(3)))
    return SimpleNamespace(lam=lam, u=u, rho=rho)


class TestCertify:
    def test_analytic_pair(self, constant_ctx):
        cert = certify(constant_ctx, analytic_pair(constant_ctx, 2.0))
        assert cert.ode_residual < 1e-11
        assert max(cert.bc_residuals) < 1e-11
        assert cert.verdict == "pass" and cert.grid == 1001

    def test_example_pairs_pass(self, example_ctx, example_pairs):
        for pair in example_pairs.values():
            assert certify(example_ctx, pair).passed

    def test_tight_thresholds(self, example_ctx, example_pairs):
        # pairs converged to tol = 1e-10 pass at 100 tol
        for pair in example_pairs.values():
            assert certify(example_ctx, pair, thresholds=(1e-8, 1e-8)).passed

    def test_perturbed_lambda_fails(self, example_ctx, example_pairs):
        pair = example_pairs[1]
        bad = dataclasses.replace(pair, lam=pair.lam * (1 + 1e-3))
        cert = certify(example_ctx, bad)
        assert cert.ode_residual > 1e-4 * 1.0  # |f| is of order 1 on the solution
        assert cert.verdict == "fail"

    def test_zero_function(self):
        ctx = OperatorContext.create(parse_problem("f = u\nH1 = 1\nH2 = 0"), 16)
        zero = SimpleNamespace(lam=0.5, u=DiscreteFunction.from_layers(ctx.rule, np.zeros((3, 16))), rho=1.0)
        cert = certify(ctx, zero)
        assert cert.bc_residuals[0] == 0.5 and cert.bc_residuals[1] == 0.0 and cert.bc_residuals[2] == 0.0
        assert not cert.passed

    def test_zero_function_homogeneous(self):
        ctx = OperatorContext.create(parse_problem("f = u\nH1 = 0\nH2 = 0"), 16)
        zero = SimpleNamespace(lam=0.5, u=DiscreteFunction.from_layers(ctx.rule, np.zeros((3, 16))), rho=1.0)
        assert certify(ctx, zero).passed

    def test_wrong_problem_does_not_self_certify(self, example_pairs):
        other = OperatorContext.create(parse_problem("f = t * exp(abs(u)) * (1 + v^2)\nH1 = 1 / (1 + eval(0, 0.5)^2)\nH2 = (1/40) * sin(integ(2, t^3))"), 40)
        assert not certify(other, example_pairs[1]).passed

    def test_thresholds_scale(self):
        assert default_thresholds(1.0, 1.0) == (4e-7, 4e-8)

    def test_minimum_grid(self, constant_ctx):
        with pytest.raises(ValueError):
            certify(constant_ctx, analytic_pair(constant_ctx, 1.0), fine_grid=100)


class TestLinearOracle:
    def test_coefficients(self):
        f = parse_problem("f = 2*u - v/4 + 3*(w - u)\nH1 = 0\nH2 = 0").f
        assert linear_coefficients(f) == (-1.0, -0.25, 3.0)

    @pytest.mark.parametrize("f", ["u^2", "u + 1", "t * u", "sin(u)", "u * v", "0 * u"])
    def test_nonlinear_rejected(self, f):
        with pytest.raises(LinearOracleError):
            linear_coefficients(parse_problem(f"f = {f}\nH1 = 0\nH2 = 0").f)

    def test_boundary_terms_rejected(self):
        ctx = OperatorContext.create(parse_problem("f = v\nH1 = eval(0, 0.5)\nH2 = 0"), 16)
        with pytest.raises(LinearOracleError):
            linear_spectrum(ctx)

    def test_buckling_spectrum(self, buckling_ctx):
        lam = 1 / linear_spectrum(buckling_ctx)
        # 4 pi^2, then the first root of tan(w/2) = w/2 squared, then 16 pi^2
        assert lam[0] == pytest.approx(4 * np.pi**2, rel=1e-12)
        assert lam[1] == pytest.approx(80.76291422570789, rel=1e-10)
        assert lam[2] == pytest.approx(16 * np.pi**2, rel=1e-10)

    def test_refinement(self, buckling_ctx):
        fine = OperatorContext.create(buckling_ctx.spec, 80)
        assert np.max(np.abs(1 / linear_spectrum(fine) - 1 / linear_spectrum(buckling_ctx))) < 1e-9 * 160

    def test_cross_check(self, buckling_ctx):
        assert cross_check_linear(buckling_ctx) < 1e-6

    def test_sign_mismatch_detected(self, buckling_ctx):
        assert cross_check_linear(buckling_ctx, lambdas=[-4 * np.pi**2]) > 1.0

    def test_no_real_spectrum(self):
        # u''' + lam u = 0 with these conditions has only imaginary eigenvalues
        ctx = OperatorContext.create(parse_problem("f = u\nH1 = 0\nH2 = 0"), 40)
        with pytest.raises(LinearOracleError):
            linear_spectrum(ctx)
