import dataclasses

import numpy as np
import pytest

from bvp3eig.grid import C2Norm, DiscreteFunction, c2_norm
from bvp3eig.operator import OperatorContext, apply_T
from bvp3eig.problem import parse_problem
from bvp3eig.solver import (
    Eigenpair,
    SolverError,
    initial_guess,
    newton_polish,
    picard_normalized,
    solve,
    sweep_rho,
)
from bvp3eig.verify import linear_spectrum

from conftest import cubic

# lam(rho) for the worked example at n = 40 (regression anchors)
EXAMPLE_LAMBDAS = {
    0.25: (0.04052630453677292, -0.04064259678095709),
    0.5: (0.08058654521589263, -0.08104200685338153),
    1.0: (0.15811495577461737, -0.15979830437198114),
    2.0: (0.2972424235948636, -0.3024071013398996),
}


def ctx_for(text, n=40):
    return OperatorContext.create(parse_problem(text), n)


def mixed_guess(rule):
    """sin + cos: excites every mode, unlike either alone."""
    om = 2 * np.pi
    return DiscreteFunction.from_callables(
        rule,
        lambda t: np.sin(om * t) + np.cos(om * t),
        lambda t: om * (np.cos(om * t) - np.sin(om * t)),
        lambda t: -(om**2) * (np.sin(om * t) + np.cos(om * t)),
    )


def check_pair(ctx, pair, rho, sign, tol=1e-10):
    fresh = np.max(np.abs(pair.u.layers - pair.lam * apply_T(ctx, pair.u).layers))
    assert fresh <= 10 * tol
    assert abs(c2_norm(pair.u).value - rho) <= 10 * tol
    assert np.sign(pair.lam) == sign


class TestInitialGuess:
    def test_on_sphere(self, example_ctx):
        for profile in ("sin:1", "cos:2"):
            assert c2_norm(initial_guess(example_ctx, 0.7, profile)).value == pytest.approx(0.7)

    def test_default_satisfies_boundary_conditions(self, example_ctx):
        u = initial_guess(example_ctx, 1.0)
        assert abs(u.point_eval(0, 0.0)) < 1e-17 and abs(u.point_eval(0, 1.0)) < 1e-16
        assert abs(np.dot(example_ctx.rule.weights, u.u0)) < 1e-15

    @pytest.mark.parametrize("profile", ["tan:1", "sin:0", "sin:x"])
    def test_bad_profile(self, example_ctx, profile):
        with pytest.raises(ValueError):
            initial_guess(example_ctx, 1.0, profile)


class TestPicard:
    def test_constant_operator(self, constant_ctx):
        pair = picard_normalized(constant_ctx, 1.0, 1)
        assert pair.iterations <= 2
        assert pair.lam == pytest.approx(2.0, abs=1e-12)
        t = np.linspace(0, 1, 101)
        assert np.max(np.abs(pair.u.values(t) - 2 * cubic(t))) < 1e-12

    @pytest.mark.parametrize("sign", [1, -1])
    def test_example(self, example_ctx, sign):
        pair = picard_normalized(example_ctx, 1.0, sign)
        assert pair.fixed_point_residual < 1e-8
        assert pair.method == "picard"
        check_pair(example_ctx, pair, 1.0, sign)

    def test_linear_dominant_eigenvalue(self, buckling_ctx):
        mu = linear_spectrum(buckling_ctx)
        pair = picard_normalized(buckling_ctx, 1.0, 1, mixed_guess(buckling_ctx.rule))
        assert abs(pair.lam * mu[0] - 1) < 1e-6
        assert pair.lam == pytest.approx(4 * np.pi**2, rel=1e-9)

    def test_stalled(self):
        ctx = ctx_for("f = u\nH1 = 0\nH2 = 0")
        with pytest.raises(SolverError) as err:
            picard_normalized(ctx, 1.0, 1, max_iter=30)
        assert err.value.code == "stalled"

    def test_degenerate(self):
        ctx = ctx_for("f = 0 * u\nH1 = 0\nH2 = 0", 16)
        with pytest.raises(SolverError) as err:
            picard_normalized(ctx, 1.0, 1)
        assert err.value.code == "operator-degenerate"

    def test_nan(self):
        ctx = ctx_for("f = log(u)\nH1 = 0\nH2 = 0", 16)
        with pytest.raises(SolverError) as err:
            picard_normalized(ctx, 1.0, 1)
        assert err.value.code == "nan"

    @pytest.mark.parametrize("rho, sign", [(0.0, 1), (-1.0, 1), (1.0, 0), (1.0, "x")])
    def test_invalid(self, example_ctx, rho, sign):
        with pytest.raises(ValueError):
            picard_normalized(example_ctx, rho, sign)

    def test_zero_guess(self, example_ctx):
        with pytest.raises(ValueError):
            picard_normalized(example_ctx, 1.0, 1, initial_guess(example_ctx, 1.0).scaled(0.0))


class TestNewton:
    def test_converged_seed_unchanged(self, example_ctx, example_pairs):
        for sign, pair in example_pairs.items():
            seed = picard_normalized(example_ctx, 1.0, sign)
            polished = newton_polish(example_ctx, 1.0, seed)
            assert abs(polished.lam - seed.lam) < 1e-9
            assert polished.fixed_point_residual <= 1e-10
            assert polished.method == "picard+newton"

    def test_quadratic_tail_on_linear_problem(self, buckling_ctx):
        mu = linear_spectrum(buckling_ctx)[0]
        u0 = mixed_guess(buckling_ctx.rule)
        seed = picard_normalized(buckling_ctx, 1.0, 1, u0, tol=1e-3)
        assert abs(seed.lam * mu - 1) > 1e-9
        pair = solve(buckling_ctx, 1.0, 1, u0, tol=1e-3)
        assert abs(pair.lam * mu - 1) < 1e-10
        assert pair.norm_residual < 1e-10
        assert pair.iterations > seed.iterations

    def test_outside_basin(self, example_pairs):
        seed = dataclasses.replace(example_pairs[1], fixed_point_residual=0.5)
        with pytest.raises(SolverError) as err:
            newton_polish(None, 1.0, seed)
        assert err.value.code == "diverged"

    def test_norm_index_migration(self, buckling_ctx):
        seed = picard_normalized(buckling_ctx, 1.0, 1)
        moved = dataclasses.replace(seed, norm=C2Norm(seed.norm.value, 0, 0.3))
        with pytest.raises(SolverError) as err:
            newton_polish(buckling_ctx, 1.0, moved)
        assert err.value.code == "norm-index-migrated"
        assert err.value.pair is not None
        # re-freezing on the reported pair recovers the sphere
        again = newton_polish(buckling_ctx, 1.0, err.value.pair)
        assert again.norm_residual < 1e-10
        assert again.lam == pytest.approx(4 * np.pi**2, rel=1e-10)


class TestSolve:
    @pytest.mark.parametrize("sign", [1, -1])
    def test_example(self, example_ctx, example_pairs, sign):
        pair = example_pairs[sign]
        assert pair.fixed_point_residual <= 1e-10
        check_pair(example_ctx, pair, 1.0, sign)
        assert pair.lam == pytest.approx(EXAMPLE_LAMBDAS[1.0][0 if sign > 0 else 1], rel=1e-9)

    def test_residuals_recomputed(self, example_ctx, example_pairs):
        pair = example_pairs[1]
        rebuilt = Eigenpair.build(example_ctx, pair.u.layers, pair.lam, 1.0, 0, "picard")
        assert rebuilt.fixed_point_residual == pytest.approx(pair.fixed_point_residual, abs=1e-14)

    def test_linear_rho_invariance(self, buckling_ctx):
        pairs = [solve(buckling_ctx, rho, 1) for rho in (0.5, 1.0, 2.0)]
        lams = [p.lam for p in pairs]
        assert max(lams) - min(lams) < 1e-8
        assert np.allclose(pairs[2].u.layers, 4 * pairs[0].u.layers, atol=1e-8)

    def test_no_polish(self, example_ctx):
        assert solve(example_ctx, 1.0, -1, polish=False).method == "picard"

    def test_quadrature_refinement(self, example_spec, example_pairs):
        fine = OperatorContext.create(example_spec, 80)
        for sign in (1, -1):
            assert abs(solve(fine, 1.0, sign).lam - example_pairs[sign].lam) < 1e-7


class TestSweep:
    def test_single_radius(self, example_ctx, example_pairs):
        table = sweep_rho(example_ctx, [1.0])
        (rho, plus, minus), = table.entries
        assert rho == 1.0 and not table.failures
        assert plus.lam == pytest.approx(example_pairs[1].lam, abs=1e-12)
        assert minus.lam == pytest.approx(example_pairs[-1].lam, abs=1e-12)

    def test_example_branch(self, example_ctx):
        table = sweep_rho(example_ctx, sorted(EXAMPLE_LAMBDAS))
        assert not table.failures
        assert [e[0] for e in table.entries] == sorted(EXAMPLE_LAMBDAS)
        for rho, plus, minus in table.entries:
            check_pair(example_ctx, plus, rho, 1)
            check_pair(example_ctx, minus, rho, -1)
            assert plus.lam == pytest.approx(EXAMPLE_LAMBDAS[rho][0], rel=1e-9)
            assert minus.lam == pytest.approx(EXAMPLE_LAMBDAS[rho][1], rel=1e-9)

    def test_failures_recorded(self):
        ctx = ctx_for("f = u\nH1 = 0\nH2 = 0")
        table = sweep_rho(ctx, [0.5, 1.0], max_iter=20)
        assert len(table.failures) == 4
        assert all(plus is None and minus is None for _, plus, minus in table.entries)

    @pytest.mark.parametrize("rhos", [[], [1.0, 0.5], [1.0, 1.0], [-1.0]])
    def test_invalid_lists(self, example_ctx, rhos):
        with pytest.raises(ValueError):
            sweep_rho(example_ctx, rhos)
