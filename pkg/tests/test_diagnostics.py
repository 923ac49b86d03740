import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from chemokin.errors import ConfigError
from chemokin.mc import McConfig, init_ensemble
from chemokin.model import ModelParams, lambda_response
from chemokin.diagnostics import (
    block_bootstrap_dd,
    center_second_derivative,
    diffusion_layer_marker,
    estimate_run_length,
    rescale_collapse,
    slice_2d,
)
from chemokin.profiles import GridProfile


from oracles import cell_averages


class TestCenterSecondDerivative:
    def test_constant_is_zero(self):
        assert center_second_derivative(np.full(10, 3.7), 0.1) == 0.0

    def test_linear_ramp_is_zero(self):
        # cell averages of a + b x on a symmetric grid
        rho = cell_averages(lambda x: 2.0 * x + 0.25 * x**2, 12, 0.1)
        assert center_second_derivative(rho, 0.1) == pytest.approx(0.0, abs=1e-12)

    def test_exact_for_quadratic_cell_averages(self):
        rho = cell_averages(lambda x: x**3 / 3.0, 100, 0.1)
        assert center_second_derivative(rho, 0.1) == pytest.approx(2.0, abs=1e-10)

    def test_rejects_short_or_odd(self):
        with pytest.raises(ConfigError):
            center_second_derivative(np.ones(3), 0.1)
        with pytest.raises(ConfigError):
            center_second_derivative(np.ones(7), 0.1)

    @given(st.integers(0, 10**6), st.floats(-5, 5), st.floats(-5, 5))
    @settings(max_examples=50)
    def test_translation_invariance(self, seed, const, slope):
        rng = np.random.default_rng(seed)
        rho = rng.random(20)
        dx = 0.25
        base = center_second_derivative(rho, dx)
        x = (np.arange(20) - 10 + 0.5) * dx
        shifted = rho + const + slope * x
        assert center_second_derivative(shifted, dx) == pytest.approx(base, abs=1e-9)

    @given(st.integers(0, 10**6))
    @settings(max_examples=50)
    def test_bimodality_consistency(self, seed):
        # the stencil is linear, so rho'' = rho_f'' + rho_g'': whenever
        # rho_f'' < 0 and rho'' > 0, the tumbling part must be positive
        rng = np.random.default_rng(seed)
        rho_f = rng.random(16)
        rho_g = rng.random(16)
        dd_f = center_second_derivative(rho_f, 0.1)
        dd_g = center_second_derivative(rho_g, 0.1)
        dd = center_second_derivative(rho_f + rho_g, 0.1)
        assert dd == pytest.approx(dd_f + dd_g, abs=1e-9)
        if dd_f < 0 < dd:
            assert dd_g > 0


class TestRunLengthEstimate:
    def _ensemble(self):
        params = ModelParams(epsilon=0.1, tau=1.0, nu=0.3, delta=1.25, chi=0.7,
                             domain_length=10.0, dim=1)
        cfg = McConfig(params=params, n_particles=8, n_cells=4, dt=1e-3,
                       t_end=1.0, avg_window=0.5)
        return init_ensemble(cfg), params

    def test_handmade_classification(self):
        ens, params = self._ensemble()
        # cell 1 of 4 spans [-2.5, 0): place two climbers (v=+1, x<0) with
        # known y, one descender, and park everything else tumbling far away
        ens.positions[0][:] = [-1.0, -1.2, -1.4, 3.0, 3.0, 3.0, 3.0, 3.0]
        ens.velocities[0][:] = [1.0, 1.0, -1.0, 0.0, 0.0, 0.0, 0.0, 0.0]
        ens.y[:] = [0.5, 1.0, 2.0, 0, 0, 0, 0, 0]
        xi_p, xi_m, xi_b = estimate_run_length(ens, 4, params)
        lam = lambda_response(np.array([0.5, 1.0, 2.0]), 1.25, 0.7)
        expect_p = np.mean(0.1 / lam[:2])
        expect_m = 0.1 / lam[2]
        assert xi_p[1] == pytest.approx(expect_p, rel=1e-12)
        assert xi_m[1] == pytest.approx(expect_m, rel=1e-12)
        assert xi_b[1] == pytest.approx(0.5 * (expect_p + expect_m), rel=1e-12)
        # tumbling-only cell: no run-length samples at all
        assert math.isnan(xi_p[3]) and math.isnan(xi_m[3]) and math.isnan(xi_b[3])

    def test_on_axis_excluded_from_signed_classes(self):
        ens, params = self._ensemble()
        ens.positions[0][:] = [0.0, 0.5, 3.0, 3.0, 3.0, 3.0, 3.0, 3.0]
        ens.velocities[0][:] = [1.0, -1.0, 0, 0, 0, 0, 0, 0]
        ens.y[:] = 0.0
        xi_p, xi_m, xi_b = estimate_run_length(ens, 4, params)
        # cell 2 spans [0, 2.5): x=0 is gradient-free (tie-break), x=0.5 climbs
        assert xi_p[2] == pytest.approx(0.1)
        assert math.isnan(xi_m[2])
        # the pooled mean still includes the on-axis sample
        assert xi_b[2] == pytest.approx(0.1)

    def test_bounds(self):
        ens, params = self._ensemble()
        rng = np.random.default_rng(0)
        ens.positions[0][:] = rng.uniform(-5, 5, 8)
        ens.velocities[0][:] = rng.choice([-1.0, 1.0], 8)
        ens.y[:] = rng.normal(scale=100.0, size=8)
        xi_p, xi_m, xi_b = estimate_run_length(ens, 4, params)
        lo, hi = 0.1 / 1.7, 0.1 / 0.3
        for arr in (xi_p, xi_m, xi_b):
            vals = arr[np.isfinite(arr)]
            assert np.all(vals > lo) and np.all(vals < hi)


class TestRescaleCollapse:
    def test_single_profile_zero(self):
        x = np.linspace(-4.95, 4.95, 100)
        rho = np.exp(-np.abs(x))
        assert rescale_collapse([(1.0, x, rho)]) == 0.0

    def test_round_trip_bounded_by_interpolation(self):
        x = np.linspace(-4.95, 4.95, 100)
        rho = 1.0 + np.exp(-(x**2))
        a2 = 2.0
        pair = [(1.0, x, rho), (a2, x * math.sqrt(a2), rho)]
        err = rescale_collapse(pair, seam_margin_layers=0.0)
        assert err < 1e-12  # identical samples on the rescaled axis

    def test_interpolation_error_scale(self):
        x = np.linspace(-4.95, 4.95, 100)
        f = lambda u: 1.0 + np.exp(-(u**2))
        x2 = np.linspace(-4.9, 4.9, 81)
        pair = [(1.0, x, f(x)), (1.0, x2, f(x2))]
        err = rescale_collapse(pair, seam_margin_layers=0.0)
        assert err < 5e-3

    def test_non_overlapping_rejected(self):
        a = (1.0, np.linspace(1.0, 2.0, 10), np.ones(10))
        b = (1.0, np.linspace(5.0, 6.0, 10), np.ones(10))
        with pytest.raises(ConfigError):
            rescale_collapse([a, b], seam_margin_layers=0.0)

    def test_mass_normalization_mode(self):
        x = np.linspace(-4.95, 4.95, 100)
        rho = np.exp(-np.abs(x))
        assert rescale_collapse([(1.0, x, rho), (1.0, x, 2 * rho)], normalization="mass") == 0.0


class TestSlice2d:
    def _profile(self):
        rho = np.fromfunction(lambda i, j: 1.0 + 0.01 * i + 100 * j, (10, 10))
        return GridProfile(dim=2, domain_length=10.0, n_cells=10, rho=rho,
                           rho_f=rho * 0.7, rho_g=rho * 0.3, xi_bar=rho * 0.01)

    def test_uniform_slice(self):
        prof = GridProfile(dim=2, domain_length=10.0, n_cells=10,
                           rho=np.ones((10, 10)), rho_f=np.ones((10, 10)),
                           rho_g=np.zeros((10, 10)))
        s = slice_2d(prof, 0.0)
        assert np.all(s.rho == 1.0) and len(s.rho) == 10

    def test_orientation_and_upper_row(self):
        prof = self._profile()
        # value 0.0 lies on a lattice line; half-open cells select row i=5
        s0 = slice_2d(prof, 0.0, axis=0)
        assert np.array_equal(s0.rho, prof.rho[5, :])
        s1 = slice_2d(prof, 0.0, axis=1)
        assert np.array_equal(s1.rho, prof.rho[:, 5])

    def test_outside_domain_rejected(self):
        with pytest.raises(ConfigError):
            slice_2d(self._profile(), 5.0)

    def test_needs_2d(self):
        prof = GridProfile(dim=1, domain_length=10.0, n_cells=10,
                           rho=np.ones(10), rho_f=np.ones(10), rho_g=np.zeros(10))
        with pytest.raises(ConfigError):
            slice_2d(prof, 0.0)


class TestDiffusionLayerMarker:
    def test_values(self):
        assert diffusion_layer_marker(0.1, 10.0) == pytest.approx(1.0)
        assert diffusion_layer_marker(0.1, 0.1) == pytest.approx(0.1)
        assert diffusion_layer_marker(0.1, 0.0) == 0.0

    def test_rejects_negative(self):
        with pytest.raises(ConfigError):
            diffusion_layer_marker(-0.1, 1.0)


class TestBootstrap:
    def test_matches_iid_standard_error(self):
        rng = np.random.default_rng(1)
        n, cells, sigma = 400, 8, 0.05
        snaps = 1.0 + sigma * rng.standard_normal((n, cells))
        se = block_bootstrap_dd(snaps, 0.1, n_boot=300, block_len=1)
        # analytic: sd of the 4-cell stencil of the mean profile
        expect = sigma * 2.0 / (2 * 0.1**2) / math.sqrt(n)
        assert se == pytest.approx(expect, rel=0.35)


class TestBimodalitySweep:
    def test_exks_nu_sweep_sign_change(self):
        from chemokin.continuum import GridSpec
        from chemokin.diagnostics import bimodality_sweep

        base = ModelParams(epsilon=0.1, tau=10.0, nu=0.3, delta=1.25, chi=0.7,
                           domain_length=10.0, dim=1)
        pts = bimodality_sweep(
            base, "nu", [0.0, 0.3], engines=("ExKS",),
            exks_grid=GridSpec(n_x=60, n_m=80, m_halfwidth=5.0, t_end=15.0),
        )
        assert [p.param_value for p in pts] == [0.0, 0.3]
        assert all(p.source == "ExKS" for p in pts)
        assert pts[0].rho_dd < 0 < pts[1].rho_dd
        assert not pts[0].bimodal and pts[1].bimodal

    def test_mc_engine_via_builder(self):
        from chemokin.diagnostics import bimodality_sweep

        base = ModelParams(epsilon=0.1, tau=1.0, nu=0.3, delta=1.25, chi=0.7,
                           domain_length=10.0, dim=1)

        def builder(p):
            return McConfig(params=p, n_particles=4000, n_cells=20, dt=1e-3,
                            t_end=2.0, avg_window=1.0, seed=17)

        pts = bimodality_sweep(base, "tau", [1.0], engines=("MC",),
                               mc_config_builder=builder)
        assert len(pts) == 1 and pts[0].source == "MC"
        assert math.isfinite(pts[0].rho_dd) and math.isfinite(pts[0].rho_g_dd)

    def test_mc_without_builder_rejected(self):
        from chemokin.diagnostics import bimodality_sweep

        base = ModelParams(epsilon=0.1, tau=1.0, nu=0.3, delta=1.25, chi=0.7,
                           domain_length=10.0, dim=1)
        with pytest.raises(ConfigError):
            bimodality_sweep(base, "tau", [1.0], engines=("MC",))
