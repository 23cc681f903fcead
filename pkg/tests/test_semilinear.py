"""Fixed-point solver, composite norm and the RHS expression grammar."""

import math

import numpy as np
import pytest

from tricomilab import semilinear as sl
from tricomilab.data import InitialData
from tricomilab.propagator import GridSpec, TricomiParams, solve_linear

SMALL_A3 = InitialData("a3", (0.2, -0.15, 0.25, -0.1))


class TestExpressionGrammar:
    def test_arithmetic_and_functions(self):
        f = sl.compile_expression("-u^3 + 0.1*sin(t)*exp(-x1^2-x2^2)")
        val = f(0.5, (np.array([1.0]), np.array([0.5])), np.array([2.0]))
        expected = -8.0 + 0.1 * math.sin(0.5) * math.exp(-1.25)
        assert val[0] == pytest.approx(expected, rel=1e-12)

    def test_precedence(self):
        f = sl.compile_expression("2+3*u^2")
        assert f(0.0, (), np.array([2.0]))[0] == pytest.approx(14.0)

    def test_division_and_parens(self):
        f = sl.compile_expression("(t+1)/(u+2)")
        assert f(1.0, (), np.array([0.0]))[0] == pytest.approx(1.0)

    def test_unary_minus_power(self):
        f = sl.compile_expression("-u^2")
        assert f(0.0, (), np.array([3.0]))[0] == pytest.approx(-9.0)

    def test_errors(self):
        with pytest.raises(ValueError):
            sl.compile_expression("u +")
        with pytest.raises(ValueError):
            sl.compile_expression("sin u")
        with pytest.raises(ValueError):
            sl.compile_expression("u @ 2")
        f = sl.compile_expression("y1 + u")
        with pytest.raises(ValueError):
            f(0.0, (), np.array([1.0]))

    def test_rhs_from_name(self):
        assert sl.NonlinearRHS.from_name("zero").name == "zero"
        assert sl.NonlinearRHS.from_name("cubic").name == "cubic"
        custom = sl.NonlinearRHS.from_name("custom-expression",
                                           expression="-u^3")
        out = custom.f(0.0, (), np.array([2.0]))
        assert out[0] == pytest.approx(-8.0)
        with pytest.raises(ValueError):
            sl.NonlinearRHS.from_name("bogus")
        with pytest.raises(ValueError):
            sl.NonlinearRHS.from_name("source")


class TestLinearConsistency:
    def test_zero_rhs_reproduces_linear_bitwise(self):
        params = TricomiParams(1, 2, 1.0)
        grid = GridSpec(2, 32, 8.0)
        sol = sl.picard_solve(params, grid, SMALL_A3, sl.NonlinearRHS.zero(),
                              0.25, nt=16)
        assert sol.report.iterations == 1
        for j in (4, 16):
            ref = solve_linear(params, grid, None, SMALL_A3.sample(grid),
                               float(sol.times[j]))
            assert np.array_equal(sol.u_hat[j], ref.coeffs)

    def test_constant_source_degenerate_mode(self):
        # f(t,x,0) = 1 on the zero mode: u2(t) = t^2/2, one iteration
        params = TricomiParams(1, 2, 1.0)
        grid = GridSpec(2, 16, 8.0)
        flat = InitialData("a3", (0.0, 0.0, 0.0, 0.0))
        rhs = sl.NonlinearRHS.source(lambda t, X: np.ones_like(X[0]))
        sol = sl.picard_solve(params, grid, flat, rhs, 0.5, nt=16)
        assert sol.report.iterations == 1
        zero_mode = sol.u_hat[-1][0, 0].real
        assert zero_mode == pytest.approx(0.125, abs=1e-12)

    def test_linear_parts_l_infinity_growth(self):
        # quadrant data: sup|u1(t)| grows linearly at small t
        params = TricomiParams(1, 2, 1.0)
        grid = GridSpec(2, 64, 8.0)
        machine, u1, u2 = sl.linear_parts(params, grid,
                                          InitialData("a3", (1., 2., 3., 4.)),
                                          sl.NonlinearRHS.zero(), 0.4, nt=16)
        sups = [np.max(np.abs(np.fft.ifftn(u1[j] * u1[j].size).real))
                for j in (4, 8, 16)]
        ts = machine.times[[4, 8, 16]]
        ratio = (sups[2] / sups[0]) / (ts[2] / ts[0])
        assert abs(ratio - 1.0) <= 0.1
        assert np.max(np.abs(u2)) == 0.0


class TestPicard:
    def test_cubic_converges_with_contraction(self):
        params = TricomiParams(1, 2, 1.0)
        grid = GridSpec(2, 64, 8.0)
        data = InitialData("a3", (0.8, -0.6, 1.0, -0.4))
        sol = sl.picard_solve(params, grid, data, sl.NonlinearRHS.cubic(),
                              0.5, tol=1e-12, nt=48)
        rep = sol.report
        assert rep.converged
        assert rep.fixed_point_residual <= 1e-12
        assert rep.accepted_T == 0.5
        # geometric contraction after the first correction
        assert all(r <= 0.6 for r in rep.contraction_ratios[1:3])
        assert rep.pde_residual_l2 <= 1e-3

    def test_divergence_triggers_halving(self):
        params = TricomiParams(1, 2, 2.0)
        grid = GridSpec(2, 32, 8.0)
        data = InitialData("a3", (1.6, -1.2, 2.0, -0.8))
        sol = sl.picard_solve(params, grid, data,
                              sl.NonlinearRHS.cubic(strength=60.0),
                              1.6, tol=1e-9, nt=32, max_iter=18)
        assert sol.report.halvings >= 1
        assert sol.report.accepted_T < 1.6
        assert sol.report.converged

    def test_divergence_floor_raises(self):
        params = TricomiParams(1, 2, 2.0)
        grid = GridSpec(2, 16, 8.0)
        data = InitialData("a3", (3.0, -3.0, 3.0, -3.0))
        with pytest.raises(sl.DivergenceError):
            sl.picard_solve(params, grid, data,
                            sl.NonlinearRHS.cubic(strength=1e5),
                            1.9, nt=12, max_iter=10, min_T_factor=2.0)

    def test_report_records_unweighted_norms(self):
        params = TricomiParams(1, 2, 1.0)
        grid = GridSpec(2, 32, 8.0)
        sol = sl.picard_solve(params, grid, SMALL_A3,
                              sl.NonlinearRHS.cubic(), 0.25, nt=16)
        assert len(sol.report.delta_norms_unweighted) == \
            len(sol.report.delta_norms)
        # the t-weight t^((m+2)p1/2 - 2) with p1 = 1, m = 1 blows up at
        # small t, so the weighted norm dominates the unweighted one
        assert sol.report.delta_norms[0] >= sol.report.delta_norms_unweighted[0]


class TestCompositeNorm:
    def test_weight_exponents(self):
        assert sl.p0_of(1) == 1.0
        assert sl.p0_of(4) == pytest.approx(4.0 / 6.0)
        assert sl.p1_of(2) == 1.0
        assert sl.p1_of(6) == pytest.approx(14.0 / 16.0)
        assert sl.p2_of(1) == pytest.approx(1.0 / 6.0)
        assert sl.p2_of(4) == pytest.approx(1.0 / 3.0)

    def test_norm_positive_definite(self):
        params = TricomiParams(2, 2, 1.0)
        grid = GridSpec(2, 16, 4.0)
        rng = np.random.default_rng(0)
        w = np.fft.fftn(rng.normal(size=grid.shape)) / 256.0
        n1 = sl.composite_norm(params, grid, w, np.zeros_like(w), 0.5)
        assert n1 > 0.0
        assert sl.composite_norm(params, grid, np.zeros_like(w),
                                 np.zeros_like(w), 0.5) == 0.0
