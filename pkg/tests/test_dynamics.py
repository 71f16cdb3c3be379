"""Reduced equations of motion, the integrator and peak extraction."""

import math

import numpy as np
import pytest
from scipy.integrate import solve_ivp

import superradiance as sr

from conftest import GAMMA_STAR_C10


def symmetric_rates(g, gbar, gamma=1.0):
    return sr.RateSet.symmetric(g, gbar, gamma)


class TestRhsSmallSample:
    def test_free_decay_from_inversion(self):
        ds = sr.rhs_small_sample(sr.ReducedState(1.0, 0.0, 1.0, 0.0),
                                 symmetric_rates(0.0, 0.0))
        assert (ds.a, ds.d, ds.n, ds.x) == (-1.0, 0.0, -4.0, 0.0)

    def test_ground_state_is_stationary(self):
        ds = sr.rhs_small_sample(sr.ReducedState(0.0, 0.0, 1.0, 0.0),
                                 symmetric_rates(0.0, 0.0))
        assert (ds.a, ds.d, ds.n, ds.x) == (0.0, 0.0, 0.0, 0.0)

    def test_initial_depletion_with_converged_rates(self, params_c10):
        g, gbar = sr.solve_self_consistent(1.0, 0.0, 0.0, params_c10)
        ds = sr.rhs_small_sample(sr.ReducedState(1.0, 0.0, 1.0, 0.0),
                                 symmetric_rates(g, gbar))
        assert -ds.a == pytest.approx(GAMMA_STAR_C10 + 1.0, rel=1e-10)

    def test_rejects_asymmetric_rates(self):
        rates = sr.RateSet(gamma_plus=1.0, gammabar_plus=0.0, gamma_vac=1.0,
                           gamma_minus=0.1)
        with pytest.raises(ValueError):
            sr.rhs_small_sample(sr.ReducedState(0.5), rates)


class TestRhsGeneral:
    def test_reduces_to_small_sample_for_symmetric_rates(self):
        # identical atoms means d = 0; on that manifold the two forms agree
        # bitwise for symmetric rates
        rng = np.random.default_rng(42)
        for _ in range(100):
            s = sr.ReducedState(a=rng.uniform(0, 1), d=0.0,
                                n=rng.uniform(-1, 1), x=rng.uniform(-0.5, 0.5))
            rates = symmetric_rates(rng.uniform(0, 50), rng.uniform(0, 50))
            ds_general, dx_im = sr.rhs_general(s, rates)
            ds_small = sr.rhs_small_sample(s, rates)
            assert ds_general == ds_small
            assert dx_im == 0.0

    def test_population_difference_decays(self):
        rates = sr.RateSet(gamma_plus=0.0, gammabar_plus=0.0, gamma_vac=1.0)
        s = sr.ReducedState(a=0.5, d=0.3, n=0.2, x=0.0)
        ds, _ = sr.rhs_general(s, rates)
        assert ds.d == pytest.approx(-0.3, rel=1e-15)

    def test_relative_shift_rotates_coherence(self):
        """With only gamma, Gamma+ and delta12 active the coherence obeys a
        linear equation whose magnitude decays at gamma + 2 Gamma+."""
        gamma, gp, d12 = 1.0, 0.4, 3.0
        rates = sr.RateSet(gamma_plus=gp, gammabar_plus=0.0, gamma_vac=gamma,
                           delta12=d12)
        x0 = complex(0.6, -0.2)

        def f(t, y):
            s = sr.ReducedState(a=0.0, d=0.0, n=0.0, x=y[0])
            ds, dxi = sr.rhs_general(s, rates, x_im=y[1])
            return [ds.x, dxi]

        sol = solve_ivp(f, (0.0, 1.5), [x0.real, x0.imag], rtol=1e-11, atol=1e-13)
        got = complex(sol.y[0, -1], sol.y[1, -1])
        assert abs(got) == pytest.approx(abs(x0) * math.exp(-(gamma + 2 * gp) * 1.5),
                                         rel=1e-8)
        # the phase rotates at the relative shift
        expected = x0 * np.exp(-(gamma + 2 * gp + 1j * d12) * 1.5)
        assert got == pytest.approx(expected, rel=1e-8)


class TestIntensity:
    def test_ground_state_dark(self):
        assert sr.intensity(sr.ReducedState(0.0, 0.0, 1.0, 0.0),
                            symmetric_rates(0.0, 0.0)) == 0.0

    def test_single_atom_rate(self):
        assert sr.intensity(sr.ReducedState(1.0), symmetric_rates(0.0, 0.0)) == 1.0

    def test_initial_cooperative_rate(self, params_c10):
        g, gbar = sr.solve_self_consistent(1.0, 0.0, 0.0, params_c10)
        val = sr.intensity(sr.ReducedState(1.0), symmetric_rates(g, gbar))
        assert val == pytest.approx(GAMMA_STAR_C10 + 1.0, rel=1e-10)


class TestIntegrateFreeDecay:
    def test_matches_closed_form(self, traj_free):
        t = traj_free.t
        np.testing.assert_allclose(traj_free.a, np.exp(-t), atol=1e-8)
        np.testing.assert_allclose(traj_free.x, 0.0, atol=1e-12)
        np.testing.assert_allclose(traj_free.n, (2.0 * np.exp(-t) - 1.0) ** 2, atol=1e-8)

    def test_long_time_limits(self):
        params = sr.Parameters(coop=0.0, rho_size=10.0)
        traj = sr.integrate(sr.IntegratorConfig(t_end=20.0), params)
        assert abs(traj.a[-1]) < 1e-3
        assert abs(traj.n[-1] - 1.0) < 1e-3
        assert abs(traj.x[-1]) < 1e-3


class TestIntegrateBurst:
    def test_correlation_rises_then_decays(self, traj_c10):
        x = traj_c10.x
        k = int(np.argmax(x))
        assert x[0] == 0.0
        assert x[k] > 0.0
        assert 0 < k < len(x) - 1
        assert x[-1] < 0.01 * x[k]

    def test_population_monotone_decreasing(self, traj_c10):
        assert np.all(np.diff(traj_c10.a) <= 1e-12)

    def test_rates_exceed_vacuum_rate_by_far(self, traj_c10):
        assert traj_c10.gamma_rate.max() > 25.0
        assert traj_c10.gammabar.max() > 25.0

    def test_physical_at_every_sample(self, traj_c10):
        traj_c10.validate()  # strictly increasing times, states in range
        for i in range(len(traj_c10)):
            s = traj_c10.state_at(i).validate()
            rho = sr.reconstruct(s, atol=1e-8)
            assert np.trace(rho).real == pytest.approx(1.0, abs=1e-10)
            assert np.linalg.eigvalsh(rho).min() >= -1e-8

    def test_never_entangled(self, traj_c10):
        assert np.max(traj_c10.witness) <= 1e-8

    def test_symmetric_population_dominates(self, traj_c10):
        mask = traj_c10.x >= 0.0
        assert np.all(traj_c10.rho_pp[mask] >= traj_c10.rho_mm[mask])
        assert traj_c10.rho_pp.min() >= -1e-10
        assert traj_c10.rho_mm.min() >= -1e-10
        # the two populations approach each other once the coherence is gone
        assert abs(traj_c10.rho_pp[-1] - traj_c10.rho_mm[-1]) < 2e-3

    def test_energy_bookkeeping(self, traj_c10):
        emitted = traj_c10.a[0] - traj_c10.a
        assert np.max(np.abs(emitted - traj_c10.energy)) < 1e-6

    def test_late_time_coherence_is_gone(self, traj_c10):
        assert abs(traj_c10.x[-1]) < 1e-3


class TestFindPeak:
    def test_burst_peak(self, traj_c10):
        t_max, peak = sr.find_peak(traj_c10)
        assert peak == pytest.approx(57.0, rel=0.25)
        assert t_max == pytest.approx(0.0018, rel=0.35)

    def test_boundary_peak_warns(self, traj_free):
        with pytest.warns(sr.BoundaryPeakWarning):
            t_max, peak = sr.find_peak(traj_free)
        assert t_max == 0.0
        assert peak == pytest.approx(1.0, rel=1e-8)

    def test_needs_three_samples(self, traj_free):
        import dataclasses
        short = dataclasses.replace(
            traj_free, **{name: getattr(traj_free, name)[:2] for name in
                          ("t", "a", "d", "n", "x", "gamma_rate", "gammabar",
                           "intensity", "rho_pp", "rho_mm", "witness", "energy",
                           "delta")})
        with pytest.raises(ValueError):
            sr.find_peak(short)


class TestIntegrateErrors:
    def test_antisymmetric_start_aborts_with_timestamp(self, params_c10):
        config = sr.IntegratorConfig(
            t_end=1.0, initial=sr.ReducedState(a=0.5, d=0.0, n=-1.0, x=-0.5))
        with pytest.raises(sr.IntegrationError) as err:
            sr.integrate(config, params_c10)
        assert err.value.t is not None

    def test_rejects_unphysical_initial(self, params_c10):
        config = sr.IntegratorConfig(t_end=1.0,
                                     initial=sr.ReducedState(a=1.0, n=0.0))
        with pytest.raises(sr.UnphysicalStateError):
            sr.integrate(config, params_c10)

    def test_config_validation(self):
        with pytest.raises(ValueError):
            sr.IntegratorConfig(t_end=0.0)
        with pytest.raises(ValueError):
            sr.IntegratorConfig(rel_tol=-1.0)


class TestChirpMode:
    def test_short_run_stays_physical(self):
        params = sr.Parameters(coop=10.0, rho_size=10.0, delta_mode="kramers-kronig")
        config = sr.IntegratorConfig(t_end=0.02, sample_dt=0.005)
        traj = sr.integrate(config, params)
        assert np.all(np.isfinite(traj.delta))
        # the self-consistently updated shift stays small against the rates
        assert np.max(np.abs(traj.delta)) < traj.gamma_rate.max()
        for i in range(len(traj)):
            sr.reconstruct(traj.state_at(i), atol=1e-8)

    def test_zero_mode_has_zero_shift(self, traj_c10):
        assert np.all(traj_c10.delta == 0.0)
