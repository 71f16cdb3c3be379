"""Time evolution of the reduced two-atom variables with state-dependent rates.

Every derivative evaluation re-solves the self-consistent rate equation at the
instantaneous (a, x), warm-started from the previously converged value, so the
system is integrated as a genuinely autonomous closure.  An explicit embedded
Runge-Kutta 4(5) pair with adaptive step control is sufficient because the
expensive part is the inner rate solve and the burst region forces small steps
through local error control anyway; ``max_step`` additionally caps the step at
a fraction of the expected burst time 1/(coop * gamma).

The emitted intensity per atom is the depletion rate -da/dt; it is integrated
alongside the state so that energy bookkeeping holds to integrator accuracy.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import solve_ivp

from .states import Parameters, RateSet, ReducedState, Trajectory, reconstruct, entanglement_witness, super_sub_populations
from .rates import RateSolveError, chirp_kk, gamma_spectrum, solve_self_consistent

__all__ = [
    "IntegratorConfig",
    "IntegrationError",
    "StiffnessError",
    "BoundaryPeakWarning",
    "rhs_small_sample",
    "rhs_general",
    "integrate",
    "intensity",
    "find_peak",
]

_A_FLOOR = 1e-12          # terminate once the excited population is fully drained
_KK_GRID_POINTS = 161     # detuning grid for the chirp update
_KK_SPAN_WIDTHS = 40.0    # grid half-span in units of the dressed linewidth


class IntegrationError(RuntimeError):
    """Integration aborted; carries the time and state where it happened."""

    def __init__(self, message: str, t: float | None = None,
                 state: ReducedState | None = None):
        self.t = t
        self.state = state
        if t is not None:
            message = f"{message} (at t = {t}, state = {state})"
        super().__init__(message)


class StiffnessError(IntegrationError):
    """The step size underflowed; retry with a tighter max_step."""


class BoundaryPeakWarning(UserWarning):
    """The intensity maximum sits on a boundary sample (t_end too small)."""


@dataclass(frozen=True)
class IntegratorConfig:
    """Tolerances, horizon and initial condition of one integration run.

    ``max_step`` and ``sample_dt`` default to automatic choices:
    1/(50 coop gamma) for the step cap (the burst time is about 1/(coop gamma))
    and t_end/1000 for the output cadence.
    """

    t_end: float = 20.0
    rel_tol: float = 1e-8
    abs_tol: float = 1e-11
    max_step: float | None = None
    sample_dt: float | None = None
    initial: ReducedState = field(default_factory=lambda: ReducedState(a=1.0, d=0.0, n=1.0, x=0.0))

    def __post_init__(self):
        if not self.t_end > 0.0:
            raise ValueError("t_end must be positive")
        if not (self.rel_tol > 0.0 and self.abs_tol > 0.0):
            raise ValueError("tolerances must be positive")
        if self.max_step is not None and not self.max_step > 0.0:
            raise ValueError("max_step must be positive when given")
        if self.sample_dt is not None and not self.sample_dt > 0.0:
            raise ValueError("sample_dt must be positive when given")

    def resolved_max_step(self, params: Parameters) -> float:
        if self.max_step is not None:
            return self.max_step
        if params.coop > 0.0:
            return 1.0 / (50.0 * params.coop * params.gamma)
        return math.inf

    def resolved_sample_dt(self) -> float:
        return self.sample_dt if self.sample_dt is not None else self.t_end / 1000.0


def rhs_small_sample(s: ReducedState, rates: RateSet) -> ReducedState:
    """Equations of motion for identical atoms (no relative rates or shifts).

        da/dt = -(2 Gamma + gamma) a + Gamma
        dn/dt = -2 (2 Gamma + gamma) n - 2 gamma (2a - 1) + 8 Gammabar x
        dx/dt = -(2 Gamma + gamma) x + Gammabar n

    and d stays identically zero.  The derivative is returned packed into a
    ``ReducedState`` for layout symmetry with the state itself.
    """
    if not rates.is_symmetric:
        raise ValueError("small-sample form requires symmetric rates "
                         "(gamma_minus = gammabar_minus = delta12 = 0)")
    g = rates.gamma_plus
    gbar = rates.gammabar_plus
    gamma = rates.gamma_vac
    total = 2.0 * g + gamma
    return ReducedState(
        a=-total * s.a + g,
        d=0.0,
        n=-2.0 * total * s.n - 2.0 * gamma * (2.0 * s.a - 1.0) + 8.0 * gbar * s.x,
        x=-total * s.x + gbar * s.n,
    )


def rhs_general(s: ReducedState, rates: RateSet, x_im: float = 0.0
                ) -> tuple[ReducedState, float]:
    """Equations of motion with distinct atoms and a relative shift.

    The exchange coherence is complex here, carried as (s.x, x_im); its
    conjugate partner enters the population-product equation.  Returns the
    derivative of the real variables plus the derivative of Im x.  With
    symmetric rates and x_im = 0 this reduces exactly to ``rhs_small_sample``.
    """
    gp = rates.gamma_plus
    gm = rates.gamma_minus
    gbp = rates.gammabar_plus
    gbm = rates.gammabar_minus
    gamma = rates.gamma_vac
    d12 = rates.delta12
    total = 2.0 * gp + gamma

    # 4 (gbp + gbm) x + 4 (gbp - gbm) conj(x) = 8 gbp Re x + 8 i gbm Im x;
    # only the real part feeds the (real) inversion product
    da = -total * s.a + gp - gm * s.d
    dd = -total * s.d - 2.0 * gm * (2.0 * s.a - 1.0)
    dn = -2.0 * total * s.n - 2.0 * gamma * (2.0 * s.a - 1.0) + 8.0 * gbp * s.x
    dx_re = -total * s.x + d12 * x_im + (gbp + gbm) * s.n
    dx_im = -total * x_im - d12 * s.x
    return ReducedState(a=da, d=dd, n=dn, x=dx_re), dx_im


def intensity(s: ReducedState, rates: RateSet) -> float:
    """Emitted intensity per atom, -da/dt = (2 Gamma+ + gamma) a - Gamma+ + Gamma- d."""
    return ((2.0 * rates.gamma_plus + rates.gamma_vac) * s.a
            - rates.gamma_plus + rates.gamma_minus * s.d)


def _chirp_update(a: float, x: float, gamma_f: float, delta_prev: float,
                  params: Parameters) -> float:
    """One dispersion-integral update of the common shift at the current state."""
    span = max(_KK_SPAN_WIDTHS * gamma_f, 10.0 * params.gamma,
               4.0 * abs(delta_prev) + params.gamma)
    grid = np.linspace(-span, span, _KK_GRID_POINTS)
    profile = gamma_spectrum(a, x, params, grid)
    return chirp_kk(profile, delta_prev)


def integrate(config: IntegratorConfig, params: Parameters) -> Trajectory:
    """Integrate the small-sample system; returns the sampled trajectory.

    Samples are the user cadence merged with every internal solver step, so
    the burst region is resolved at the integrator's own (adaptive) density.
    Stops at ``t_end`` or as soon as the excited population drains below
    1e-12.  In "kramers-kronig" mode the common shift is recomputed from the
    rate spectrum once per cadence interval and held constant in between.
    """
    initial = config.initial.validate()
    reconstruct(initial)  # rejects initial conditions outside the physical region
    gamma = params.gamma
    max_step = config.resolved_max_step(params)
    sample_dt = config.resolved_sample_dt()
    kk_mode = params.delta_mode == "kramers-kronig"

    warm: list[float | None] = [None]
    t_now: list[float] = [0.0]
    delta_now: list[float] = [0.0]

    def odefun(t, y):
        t_now[0] = t
        a, d, n, x, _ = y
        a_solve = min(max(a, 0.0), 1.0)
        gi, gbar = solve_self_consistent(a_solve, x, delta_now[0], params, warm[0])
        warm[0] = gi
        s = ReducedState(a=a, d=d, n=n, x=x)
        rates = RateSet.symmetric(gi, gbar, gamma, delta=delta_now[0])
        ds = rhs_small_sample(s, rates)
        return (ds.a, ds.d, ds.n, ds.x, -ds.a)

    def drained(t, y):
        return y[0] - _A_FLOOR
    drained.terminal = True
    drained.direction = -1

    if kk_mode:
        boundaries = np.arange(sample_dt, config.t_end, sample_dt).tolist()
        boundaries.append(config.t_end)
    else:
        boundaries = [config.t_end]

    y0 = [initial.a, initial.d, initial.n, initial.x, 0.0]
    t0 = 0.0
    segments: list[tuple] = []          # (sol, delta_used, t_start, t_stop)
    terminated = False
    for tb in boundaries:
        if kk_mode:
            a_here = min(max(y0[0], 0.0), 1.0)
            gi_here, _ = solve_self_consistent(a_here, y0[3], delta_now[0], params, warm[0])
            delta_now[0] = _chirp_update(a_here, y0[3], 0.5 * gamma + gi_here,
                                         delta_now[0], params)
        try:
            sol = solve_ivp(odefun, (t0, tb), y0, method="RK45",
                            rtol=config.rel_tol, atol=config.abs_tol,
                            max_step=max_step, dense_output=True, events=drained)
        except RateSolveError as exc:
            a, d, n, x, _ = [float(v) for v in y0]
            raise IntegrationError(f"rate solver failed: {exc}", t=t_now[0],
                                   state=ReducedState(a=a, d=d, n=n, x=x)) from exc
        if sol.status == -1:
            if "step size" in (sol.message or "").lower():
                raise StiffnessError(
                    f"integrator step size underflow: {sol.message}; "
                    f"retry with a tighter max_step", t=float(sol.t[-1]))
            raise IntegrationError(f"integration failed: {sol.message}",
                                   t=float(sol.t[-1]))
        segments.append((sol, delta_now[0], t0, float(sol.t[-1])))
        if sol.status == 1:             # population drained
            terminated = True
            break
        t0 = float(sol.t[-1])
        y0 = sol.y[:, -1].tolist()

    t_reached = segments[-1][3]
    internal = np.concatenate([seg[0].t for seg in segments])
    cadence = np.arange(0.0, t_reached, sample_dt)
    times = np.unique(np.concatenate([internal, cadence, [t_reached]]))
    times = times[(times >= 0.0) & (times <= t_reached)]
    # drop near-duplicates that differ only at rounding level
    keep = np.concatenate([[True], np.diff(times) > 1e-15 * max(t_reached, 1.0)])
    times = times[keep]

    seg_ends = np.array([seg[3] for seg in segments])
    n_out = len(times)
    cols = {name: np.empty(n_out) for name in
            ("a", "d", "n", "x", "gamma_rate", "gammabar", "intensity",
             "rho_pp", "rho_mm", "witness", "energy", "delta")}
    warm_out: float | None = None
    for i, t in enumerate(times):
        k = int(np.searchsorted(seg_ends, t))
        k = min(k, len(segments) - 1)
        sol, delta_used, _, _ = segments[k]
        a, d, n, x, energy = (float(v) for v in sol.sol(t))
        a_solve = min(max(a, 0.0), 1.0)
        gi, gbar = solve_self_consistent(a_solve, x, delta_used, params, warm_out)
        warm_out = gi
        s = ReducedState(a=a, d=d, n=n, x=x)
        rates = RateSet.symmetric(gi, gbar, gamma, delta=delta_used)
        rho_pp, rho_mm = super_sub_populations(s)
        cols["a"][i] = a
        cols["d"][i] = d
        cols["n"][i] = n
        cols["x"][i] = x
        cols["gamma_rate"][i] = gi
        cols["gammabar"][i] = gbar
        cols["intensity"][i] = intensity(s, rates)
        cols["rho_pp"][i] = rho_pp
        cols["rho_mm"][i] = rho_mm
        cols["witness"][i] = entanglement_witness(reconstruct(s, atol=1e-6))
        cols["energy"][i] = energy
        cols["delta"][i] = delta_used

    return Trajectory(t=times, params=params, terminated_early=terminated, **cols)


def find_peak(traj: Trajectory) -> tuple[float, float]:
    """Locate the global intensity maximum of a trajectory.

    Refines the bracketing samples with a quadratic fit.  A maximum on the
    first or last sample triggers a ``BoundaryPeakWarning`` (the run was too
    short to bracket the burst) and is returned as-is.
    """
    if len(traj) < 3:
        raise ValueError("need at least three samples to locate a peak")
    inten = traj.intensity
    k = int(np.argmax(inten))
    if k == 0 or k == len(traj) - 1:
        warnings.warn("intensity maximum at a boundary sample; increase t_end",
                      BoundaryPeakWarning, stacklevel=2)
        return float(traj.t[k]), float(inten[k])
    t1, t2, t3 = traj.t[k - 1], traj.t[k], traj.t[k + 1]
    y1, y2, y3 = inten[k - 1], inten[k], inten[k + 1]
    s1 = (y2 - y1) / (t2 - t1)
    s2 = (y3 - y2) / (t3 - t2)
    curv = (s2 - s1) / (t3 - t1)
    if curv >= 0.0:
        return float(t2), float(y2)
    t_peak = 0.5 * (t1 + t2 - s1 / curv)
    # Newton-form parabola through the three samples, evaluated at its vertex
    y_peak = y1 + s1 * (t_peak - t1) + curv * (t_peak - t1) * (t_peak - t2)
    return float(t_peak), float(y_peak)
