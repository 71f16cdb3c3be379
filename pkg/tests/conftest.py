"""Shared fixtures; the expensive trajectories are computed once per session."""

import numpy as np
import pytest

import superradiance as sr

#: fixed point of G = e^{100/(1/2 + G)} - 1 (full inversion, coop=10, size=10),
#: frozen from an independent high-precision bisection
GAMMA_STAR_C10 = 28.923498765786521


@pytest.fixture(scope="session")
def params_c10():
    return sr.Parameters(coop=10.0, rho_size=10.0)


@pytest.fixture(scope="session")
def traj_c10(params_c10):
    """Default-tolerance burst trajectory out to t = 20/gamma."""
    return sr.integrate(sr.IntegratorConfig(t_end=20.0), params_c10)


@pytest.fixture(scope="session")
def traj_free():
    """Rate-free decay (coop = 0) out to t = 10/gamma, tight tolerances."""
    params = sr.Parameters(coop=0.0, rho_size=10.0)
    config = sr.IntegratorConfig(t_end=10.0, rel_tol=1e-10, abs_tol=1e-13)
    return sr.integrate(config, params)


@pytest.fixture(scope="session")
def table_sweep():
    """The scaling sweep over coop = 10, 20, 30 at size 10."""
    rows = sr.sweep([10.0, 20.0, 30.0], 10.0)
    assert len(rows) == 3
    return rows


@pytest.fixture(scope="session")
def equivalence_c10(params_c10):
    """Tightly integrated reduced and full propagations on shared samples."""
    dt = 0.01
    config = sr.IntegratorConfig(t_end=5.0, rel_tol=1e-10, abs_tol=1e-12, sample_dt=dt)
    traj = sr.integrate(config, params_c10)
    wanted = np.arange(0.0, float(traj.t[-1]), dt)
    idx = np.searchsorted(traj.t, wanted)
    assert np.max(np.abs(traj.t[idx] - wanted)) < 1e-13
    rho0 = sr.reconstruct(sr.ReducedState(a=1.0))
    times, rhos = sr.propagate(rho0, params_c10, float(traj.t[idx[-1]]),
                               times=traj.t[idx])
    return traj, idx, times, rhos
