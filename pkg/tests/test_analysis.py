"""Sobolev norms, decay fits and the estimate-verification suites."""

import math

import numpy as np
import pytest

from tricomilab import analysis
from tricomilab.data import InitialData, smooth_bump
from tricomilab.propagator import GridSpec, SpectralField, TricomiParams

GENERIC_A3 = InitialData("a3", (2.0, 0.5, 1.5, 0.25))


class TestSobolevNorm:
    def test_single_mode(self):
        grid = GridSpec(2, 32, 4.0)
        X = grid.meshgrid()
        k0 = 2.0 * math.pi / grid.L * np.array([3, 1])
        mode = np.exp(1j * (k0[0] * X[0] + k0[1] * X[1]))
        field = SpectralField.from_physical(grid, 0.0, mode)
        s = 0.7
        expected = grid.volume ** 0.5 * (1.0 + k0 @ k0) ** (s / 2.0)
        assert analysis.sobolev_norm(field, s).value == pytest.approx(
            expected, rel=1e-12)

    def test_parseval_at_s_zero(self):
        grid = GridSpec(2, 32, 4.0)
        rng = np.random.default_rng(0)
        values = rng.normal(size=grid.shape)
        field = SpectralField.from_physical(grid, 0.0, values)
        l2 = math.sqrt(grid.cell_volume * float(np.sum(values ** 2)))
        assert analysis.sobolev_norm(field, 0.0).value == pytest.approx(
            l2, rel=1e-10)

    def test_monotone_in_s(self):
        grid = GridSpec(2, 16, 4.0)
        rng = np.random.default_rng(1)
        field = SpectralField.from_physical(grid, 0.0,
                                            rng.normal(size=grid.shape))
        norms = [analysis.sobolev_norm(field, s).value
                 for s in (-1.0, 0.0, 0.5, 1.0, 2.0)]
        assert all(a <= b + 1e-12 for a, b in zip(norms, norms[1:]))


class TestDataDecay:
    def test_a3_axis_and_diagonal(self):
        axis = analysis.data_decay_check(GENERIC_A3, 2, direction="axis")
        assert abs(axis.fitted_exponent + 1.0) <= 0.1
        assert axis.r_squared >= 0.98
        diag = analysis.data_decay_check(GENERIC_A3, 2, direction="diagonal")
        assert abs(diag.fitted_exponent + 2.0) <= 0.15
        assert diag.r_squared >= 0.98

    def test_a2_product_structure(self):
        a2 = InitialData("a2", (0.5, 1.5))
        axis = analysis.data_decay_check(a2, 2, direction="axis")
        assert abs(axis.fitted_exponent + 1.0) <= 0.1
        rapid = analysis.data_decay_check(a2, 2, direction="axis2")
        assert rapid.fitted_exponent < -5.0

    def test_a1_shell_decay(self):
        a1 = InitialData("a1", (1.0,))
        fit = analysis.data_decay_check(a1, 2, direction="shell")
        assert abs(fit.fitted_exponent + 2.0) <= 0.25

    def test_smooth_data_superpolynomial(self):
        flat = InitialData("a3", (1.0, 1.0, 1.0, 1.0))
        fit = analysis.data_decay_check(flat, 2, direction="axis")
        assert fit.fitted_exponent < -6.0

    def test_refinement_trend_distinguishes_half(self):
        low = analysis.refinement_trend(GENERIC_A3, 0.3)
        high = analysis.refinement_trend(GENERIC_A3, 0.7)
        assert low.fitted_exponent < 0.05
        assert high.fitted_exponent > 0.10


class TestMultiplierSuite:
    def test_endpoints_m2(self):
        params = TricomiParams(2, 2, 4.0)
        fits = analysis.multiplier_decay_suite(params, params.a1, params.a2)
        by_name = {f.quantity.split()[0]: f for f in fits}
        assert abs(by_name["V1"].fitted_exponent + 0.5) <= 0.05
        assert by_name["V1"].r_squared >= 0.98
        assert abs(by_name["V2"].fitted_exponent + 0.5) <= 0.05
        # dt multipliers stay bounded (no blow-up as t -> 0)
        assert by_name["dtV1"].fitted_exponent >= -0.05
        assert by_name["dtV2"].fitted_exponent >= -0.05

    def test_bounded_case(self):
        params = TricomiParams(2, 2, 4.0)
        fits = analysis.multiplier_decay_suite(params, 0.0, 0.0)
        v1 = fits[0]
        assert abs(v1.fitted_exponent) <= 0.05
        v2 = fits[1]
        assert abs(v2.fitted_exponent - 1.0) <= 0.05

    def test_range_guards(self):
        params = TricomiParams(1, 2, 1.0)
        with pytest.raises(ValueError):
            analysis.multiplier_decay_suite(params, 0.9, 0.0)


class TestDuhamelSuite:
    def test_m2_suite(self):
        params = TricomiParams(2, 2, 4.0)
        fits = analysis.duhamel_gain_suite(params, 0.0, 0.2, nquad=24)
        assert abs(fits[0].fitted_exponent - 2.0) <= 0.1
        assert abs(fits[1].fitted_exponent - 0.6) <= 0.1
        assert fits[1].r_squared >= 0.98

    def test_parameter_guards(self):
        params = TricomiParams(2, 2, 1.0)
        with pytest.raises(ValueError):
            analysis.duhamel_gain_suite(params, 1.5, 0.0)
        with pytest.raises(ValueError):
            analysis.duhamel_gain_suite(params, 0.0, 0.9)


class TestLinfSuite:
    def test_a3_bounded_with_unit_slope(self):
        params = TricomiParams(1, 2, 2.0)
        rep = analysis.linf_suite(params, InitialData("a3", (1., 2., 3., 4.)),
                                  Ns=(64, 128, 256))
        assert rep.uniformly_bounded
        assert rep.relative_changes[-1] <= 0.02
        assert abs(rep.slope_fit.fitted_exponent - 1.0) <= 0.1

    def test_a2_stabilizes(self):
        params = TricomiParams(2, 2, 2.0)
        rep = analysis.linf_suite(params, InitialData("a2", (0.5, 1.5)),
                                  Ns=(64, 128, 256))
        assert rep.uniformly_bounded

    def test_rejects_a1(self):
        params = TricomiParams(1, 2, 1.0)
        with pytest.raises(ValueError):
            analysis.linf_suite(params, InitialData("a1", (1.0,)))


def test_fit_loglog_flat_series():
    slope, r2 = analysis.fit_loglog([1.0, 2.0, 4.0], [3.0, 3.0, 3.0])
    assert slope == pytest.approx(0.0, abs=1e-12)
    assert r2 == 1.0
