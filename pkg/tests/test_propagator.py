"""Multiplier pairs, linear propagation, Duhamel kernel and field dumps."""

import math

import numpy as np
import pytest

from tricomilab.propagator import (
    GridSpec, SpectralField, TricomiParams, duhamel, multiplier_arrays,
    multipliers, propagate_state, read_field, solve_linear, write_field,
)

from oracles import forced_mode, mode_fundamental, propagate_modes


class TestMultipliers:
    def test_values_at_t_zero(self):
        pair = multipliers(TricomiParams(3, 2, 1.0), 0.0, 17.3)
        assert (pair.V1, pair.V2, pair.dtV1, pair.dtV2) == (1.0, 0.0, 0.0, 1.0)

    def test_degenerate_mode(self):
        pair = multipliers(TricomiParams(2, 2, 2.0), 0.7, 0.0)
        assert pair.V1 == pytest.approx(1.0)
        assert pair.V2 == pytest.approx(0.7)
        assert pair.dtV1 == pytest.approx(0.0)
        assert pair.dtV2 == pytest.approx(1.0)

    @pytest.mark.parametrize("m", [1, 2, 3, 4])
    def test_wronskian_lattice(self, m):
        params = TricomiParams(m, 2, 2.0)
        rho = np.concatenate([[0.0], np.geomspace(0.5, 64.0, 40)])
        worst = 0.0
        for t in np.linspace(0.1, 2.0, 8):
            v1, v2, d1, d2 = multiplier_arrays(params, float(t), rho)
            worst = max(worst, float(np.max(np.abs(v1 * d2 - v2 * d1 - 1.0))))
        assert worst <= 1e-8

    def test_against_mode_ode_oracle(self):
        params = TricomiParams(2, 1, 2.0)
        pair = multipliers(params, 1.0, 4.0)
        v1, v2, d1, d2 = mode_fundamental(2, 4.0, 1.0)
        assert pair.V1.real == pytest.approx(v1, rel=1e-6)
        assert pair.V2.real == pytest.approx(v2, rel=1e-6)
        assert pair.dtV1.real == pytest.approx(d1, rel=1e-6)
        assert pair.dtV2.real == pytest.approx(d2, rel=1e-6)

    def test_dtv2_formula_vs_finite_difference(self):
        # the printed derivative formula with the (m+2)z/4 factor
        params = TricomiParams(3, 1, 2.0)
        h = 1e-6
        up = multipliers(params, 0.8 + h, 5.0).V2
        dn = multipliers(params, 0.8 - h, 5.0).V2
        pair = multipliers(params, 0.8, 5.0)
        assert pair.dtV2 == pytest.approx((up - dn) / (2 * h), abs=1e-7)

    def test_horizon_guard(self):
        with pytest.raises(ValueError):
            multipliers(TricomiParams(1, 1, 1.0), 1.5, 1.0)


class TestSolveLinear:
    def setup_method(self):
        self.params = TricomiParams(1, 1, 2.0)
        self.grid = GridSpec(1, 128, 8.0)

    def test_zero_data(self):
        zero = np.zeros(self.grid.shape)
        out = solve_linear(self.params, self.grid, zero, zero, 0.5)
        assert np.all(out.coeffs == 0.0)

    def test_single_mode_diagonal_action(self):
        x = self.grid.axes()[0]
        k0 = 2.0 * math.pi / self.grid.L * 5
        mode = np.exp(1j * k0 * x)
        out = solve_linear(self.params, self.grid, mode, None, 0.5)
        pair = multipliers(self.params, 0.5, k0)
        assert np.allclose(out.to_physical(), pair.V1 * mode, atol=1e-12)

    def test_gaussian_vs_mode_oracle(self):
        x = self.grid.axes()[0]
        bump = np.exp(-4.0 * x ** 2)
        out = solve_linear(self.params, self.grid, bump, None, 0.5)
        rho = self.grid.rho()
        uniq, inv = np.unique(rho, return_inverse=True)
        v1, _ = propagate_modes(1, uniq, 0.5, rtol=1e-11)
        ref_coeffs = v1[inv] * np.fft.fft(bump) / bump.size
        num = np.linalg.norm(out.coeffs - ref_coeffs)
        den = np.linalg.norm(ref_coeffs)
        assert num / den <= 1e-6

    def test_linearity(self):
        rng = np.random.default_rng(0)
        f = rng.normal(size=self.grid.shape)
        g = rng.normal(size=self.grid.shape)
        a, b = 0.7, -1.3
        lhs = solve_linear(self.params, self.grid, a * f + b * g, None, 0.8)
        fa = solve_linear(self.params, self.grid, f, None, 0.8)
        gb = solve_linear(self.params, self.grid, g, None, 0.8)
        assert np.allclose(lhs.coeffs, a * fa.coeffs + b * gb.coeffs,
                           atol=1e-14)

    def test_realness_preservation(self):
        rng = np.random.default_rng(1)
        f = rng.normal(size=self.grid.shape)
        out = solve_linear(self.params, self.grid, f, None, 1.0)
        assert np.max(np.abs(out.to_physical().imag)) <= 1e-10
        assert out.hermitian_defect() <= 1e-12

    def test_velocity_output(self):
        x = self.grid.axes()[0]
        k0 = 2.0 * math.pi / self.grid.L * 3
        mode = np.exp(1j * k0 * x)
        out = solve_linear(self.params, self.grid, None, mode, 0.6,
                           derivative=True)
        pair = multipliers(self.params, 0.6, k0)
        assert np.allclose(out.to_physical(), pair.dtV2 * mode, atol=1e-12)


class TestTransition:
    def test_two_step_equals_direct(self):
        params = TricomiParams(2, 1, 3.0)
        grid = GridSpec(1, 64, 2.0 * math.pi)
        rng = np.random.default_rng(2)
        phi1 = rng.normal(size=grid.shape)
        phi2 = rng.normal(size=grid.shape)
        rho = grid.rho()
        u1 = solve_linear(params, grid, phi1, phi2, 0.6).coeffs
        ut1 = solve_linear(params, grid, phi1, phi2, 0.6, derivative=True).coeffs
        u2, ut2 = propagate_state(params, u1, ut1, 0.6, 1.4, rho)
        direct = solve_linear(params, grid, phi1, phi2, 1.4).coeffs
        direct_t = solve_linear(params, grid, phi1, phi2, 1.4,
                                derivative=True).coeffs
        assert np.max(np.abs(u2 - direct)) <= 1e-8
        assert np.max(np.abs(ut2 - direct_t)) <= 1e-8


class TestDuhamel:
    def test_zero_forcing(self):
        params = TricomiParams(1, 1, 1.0)
        grid = GridSpec(1, 16, 4.0)
        out = duhamel(params, grid, lambda tau: np.zeros(grid.shape), 0.5)
        assert np.allclose(out.coeffs, 0.0)

    def test_constant_forcing_zero_mode(self):
        # spatially constant f == 1: kernel reduces to (t - tau), u = t^2/2
        params = TricomiParams(2, 1, 1.0)
        grid = GridSpec(1, 16, 4.0)
        out = duhamel(params, grid, lambda tau: np.ones(grid.shape), 0.8)
        val = out.to_physical()[0]
        assert val.real == pytest.approx(0.32, abs=1e-12)

    def test_forced_mode_oracle(self):
        params = TricomiParams(2, 1, 1.5)
        grid = GridSpec(1, 32, 2.0 * math.pi)
        x = grid.axes()[0]
        k0 = 3.0
        mode = np.exp(1j * k0 * x)
        out = duhamel(params, grid,
                      lambda tau: math.sin(tau) * mode, 1.0, nquad=40)
        ref = forced_mode(2, k0, 1.0, math.sin)
        err = np.max(np.abs(out.to_physical() - ref * mode))
        assert err / abs(ref) <= 1e-6

    def test_nquad_guard(self):
        params = TricomiParams(1, 1, 1.0)
        grid = GridSpec(1, 16, 4.0)
        with pytest.raises(ValueError):
            duhamel(params, grid, lambda tau: np.ones(grid.shape), 0.5, nquad=1)


class TestFieldDump:
    def test_round_trip_complex(self, tmp_path):
        params = TricomiParams(1, 2, 1.0)
        grid = GridSpec(2, 8, 4.0)
        rng = np.random.default_rng(3)
        values = rng.normal(size=grid.shape) + 1j * rng.normal(size=grid.shape)
        field = SpectralField.from_physical(grid, 0.25, values)
        write_field(params, field, tmp_path / "dump")
        meta, arr = read_field(tmp_path / "dump")
        assert meta == {"m": 1, "n": 2, "N": 8, "L": 4.0, "t": 0.25,
                        "kind": "complex-interleaved"}
        assert np.allclose(arr, values, atol=1e-13)

    def test_round_trip_real(self, tmp_path):
        params = TricomiParams(2, 1, 1.0)
        grid = GridSpec(1, 16, 2.0)
        values = np.sin(grid.axes()[0])
        field = SpectralField.from_physical(grid, 0.0, values)
        write_field(params, field, tmp_path / "dump", kind="real")
        meta, arr = read_field(tmp_path / "dump")
        assert meta["kind"] == "real"
        assert np.allclose(arr, values, atol=1e-13)

    def test_shape_guard(self):
        grid = GridSpec(1, 16, 2.0)
        with pytest.raises(ValueError):
            SpectralField.from_physical(grid, 0.0, np.zeros(8))
