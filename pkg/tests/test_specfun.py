"""Kummer engine, gamma, Gauss summation and the singular quadrature rules."""

import math

import numpy as np
import pytest

from tricomilab import specfun
from tricomilab.specfun import KummerMethod, KummerParams

from oracles import damped_kummer_reference, kummer_reference


class TestGamma:
    def test_matches_reference(self):
        xs = np.concatenate([np.linspace(0.05, 20.0, 157),
                             [-0.5, -1.5, -2.3, -7.7]])
        for x in xs:
            assert specfun.gamma(float(x)) == pytest.approx(
                math.gamma(float(x)), rel=1e-12)

    def test_pole_raises(self):
        with pytest.raises(specfun.ParameterError):
            specfun.gamma(-3.0)

    def test_rgamma_zero_at_poles(self):
        assert specfun.rgamma(0.0) == 0.0
        assert specfun.rgamma(-5.0) == 0.0


class TestKummer:
    def test_value_at_zero_is_one(self):
        ev = specfun.kummer(KummerParams(0.25, 0.5, 0.0))
        assert ev.value == pytest.approx(1.0, abs=1e-15)
        assert ev.method is KummerMethod.TAYLOR_SERIES

    def test_exponential_case(self):
        # (a)_n/(c)_n = 1 for a = c: the series is exp(z)
        ev = specfun.kummer(KummerParams(0.5, 0.5, 1j))
        assert ev.value == pytest.approx(complex(math.cos(1), math.sin(1)),
                                         abs=1e-14)

    def test_against_series_oracle(self):
        ev = specfun.kummer(KummerParams(1 / 6, 1 / 3, 2j))
        assert abs(ev.value - kummer_reference(1 / 6, 1 / 3, 2j)) < 1e-13

    def test_invalid_c(self):
        with pytest.raises(specfun.ParameterError):
            KummerParams(0.5, -1.0, 1j)

    def test_accuracy_error_carries_best(self):
        with pytest.raises(specfun.AccuracyError) as err:
            specfun.kummer(KummerParams(0.3, 0.7, 35j), tol=1e-30)
        assert err.value.best.value == pytest.approx(
            kummer_reference(0.3, 0.7, 35j), abs=1e-7)

    def test_transform_identity_exact_case(self):
        # a = c: both sides are e^z
        assert specfun.kummer_transform_check(
            KummerParams(0.5, 0.5, 3j)) < 1e-12

    def test_transform_identity_spec_point(self):
        assert specfun.kummer_transform_check(
            KummerParams(0.25, 0.5, 2j)) < 1e-10

    def test_transform_identity_asymptotic_branch(self):
        params = KummerParams(1 / 6, 1 / 3, 50j)
        lhs = specfun.kummer(params)
        rhs = specfun.kummer(KummerParams(1 / 6, 1 / 3, -50j))
        combined = lhs.abs_error_estimate + rhs.abs_error_estimate
        assert specfun.kummer_transform_check(params) <= max(combined, 1e-12)

    def test_series_asymptotic_overlap(self):
        # both branches agree within their combined error estimates on a
        # band around the default switch radius
        rng = np.random.default_rng(5)
        for _ in range(25):
            a = rng.uniform(0.1, 1.8)
            c = rng.uniform(0.2, 1.9)
            y = rng.uniform(30.0, 60.0)
            series_val, series_err = specfun._kummer_series_dd(a, c, 1j * y, 1e-18)
            asymp_val, asymp_err = specfun._kummer_asymptotic(a, c, 1j * y)
            assert abs(series_val - asymp_val) <= series_err + asymp_err + 1e-12


class TestKummerDerivative:
    def test_at_zero(self):
        ev = specfun.kummer_derivative(KummerParams(0.25, 0.5, 0.0))
        assert ev.value == pytest.approx(0.5, abs=1e-14)

    def test_exponential(self):
        ev = specfun.kummer_derivative(KummerParams(0.5, 0.5, 1j))
        assert ev.value == pytest.approx(complex(math.cos(1), math.sin(1)),
                                         abs=1e-13)

    def test_contiguous_relation(self):
        # dPhi/dz = ((1-c)/z)(Phi(a,c;z) - Phi(a,c-1;z))
        a, c, z = 1 / 6, 1 / 3, 3j
        lhs = specfun.kummer_derivative(KummerParams(a, c, z)).value
        rhs = (1.0 - c) / z * (specfun.kummer(KummerParams(a, c, z)).value
                               - specfun.kummer(KummerParams(a, c - 1.0, z)).value)
        assert lhs == pytest.approx(rhs, abs=1e-12)

    def test_higher_order_vs_finite_difference(self):
        a, c = 0.3, 0.9
        h = 1e-4
        second = specfun.kummer_derivative(KummerParams(a, c, 2j), order=2).value
        fd = (specfun.kummer(KummerParams(a, c, 2j + h)).value
              - 2 * specfun.kummer(KummerParams(a, c, 2j)).value
              + specfun.kummer(KummerParams(a, c, 2j - h)).value) / h ** 2
        assert second == pytest.approx(fd, abs=1e-6)


class TestDampedKummer:
    @pytest.mark.parametrize("a,c", [(1 / 6, 1 / 3), (5 / 6, 5 / 3),
                                     (5 / 6, 1 / 3), (1.25, 2.5)])
    def test_against_oracle(self, a, c):
        ys = np.array([0.0, 0.5, 3.0, 12.0, 29.9, 30.1, 80.0, 500.0])
        got = specfun.damped_kummer(a, c, ys)
        ref = np.array([damped_kummer_reference(a, c, float(y)) for y in ys])
        assert np.max(np.abs(got - ref)) < 5e-10


class TestGaussSummation:
    def test_trivial(self):
        assert specfun.gauss_f_at_one(0.0, 0.0, 1.0) == pytest.approx(1.0)

    def test_m1_value(self):
        g = 1 / 6
        expected = math.gamma(1.0) * math.gamma(2 / 3) / math.gamma(5 / 6) ** 2
        assert specfun.gauss_f_at_one(g, g, 1.0) == pytest.approx(expected,
                                                                  rel=1e-12)

    def test_m2_value(self):
        expected = math.gamma(0.5) / math.gamma(0.75) ** 2
        assert specfun.gauss_f_at_one(0.25, 0.25, 1.0) == pytest.approx(
            expected, rel=1e-12)

    def test_divergent(self):
        with pytest.raises(specfun.DivergenceError):
            specfun.gauss_f_at_one(0.5, 0.6, 1.0)


class TestJacobiRule:
    def test_plain_integral_of_one(self):
        rule = specfun.jacobi_rule(0.0, 12)
        assert rule.integrate(lambda s: np.ones_like(s)) == pytest.approx(1.0,
                                                                          abs=1e-14)

    def test_exact_linear_moment(self):
        # int_0^1 s (1-s^2)^(-1/4) ds = 2/3
        rule = specfun.jacobi_rule(0.25, 20)
        assert rule.integrate(lambda s: s) == pytest.approx(2.0 / 3.0,
                                                            abs=1e-13)

    def test_moment_against_beta(self):
        rule = specfun.jacobi_rule(1 / 6, 20)
        assert rule.integrate(lambda s: np.ones_like(s)) == pytest.approx(
            specfun.weight_moment(1 / 6), abs=1e-13)

    def test_weights_positive_and_moment_error(self):
        for gamma_ in (0.0, 1 / 6, 0.25, 1 / 3, 0.45):
            rule = specfun.jacobi_rule(gamma_, 16)
            assert np.all(rule.weights > 0.0)
            assert np.all((rule.nodes > 0.0) & (rule.nodes < 1.0))
            assert rule.moment_error < 1e-10

    def test_polynomial_accuracy(self):
        rule = specfun.jacobi_rule(0.3, 24)
        from scipy.integrate import quad
        for deg in range(1, 9):
            ref, _ = quad(lambda s, d=deg: s ** d * (1 - s * s) ** (-0.3),
                          0.0, 1.0, limit=200)
            assert rule.integrate(lambda s, d=deg: s ** d) == pytest.approx(
                ref, abs=1e-11)

    def test_parameter_errors(self):
        with pytest.raises(specfun.ParameterError):
            specfun.jacobi_rule(0.6, 8)
        with pytest.raises(specfun.ParameterError):
            specfun.jacobi_rule(0.2, 1)


def test_decay_law_exponent():
    """Envelope slope of log|Phi(a1, c1; 2ir)| vs log r equals -m/(2(m+2))."""
    from tricomilab.analysis import fit_loglog
    rs = np.geomspace(1e2, 1e4, 240)
    for m in (1, 2, 3, 4):
        a = m / (2.0 * (m + 2))
        c = m / (m + 2.0)
        vals = np.abs(specfun.damped_kummer(a, c, 2.0 * rs))
        slope, _ = fit_loglog(rs, vals, envelope_block=12)
        assert abs(slope - (-a)) <= 0.05 * a
