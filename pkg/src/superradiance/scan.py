"""Parameter sweeps over the cooperativity and scaling-law fits.

Each row integrates one trajectory at a given cooperativity with identical
integrator settings and extracts the burst summary.  The horizon is
auto-scaled as 50/(coop gamma) plus a fixed 5/gamma tail so that the burst
(at roughly 1/(coop gamma)) and the subsequent relaxation are both captured.
Rows are independent, so they may be computed in worker processes; results
are always gathered by input index.
"""

from __future__ import annotations

import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from .states import Parameters
from .dynamics import IntegratorConfig, find_peak, integrate

__all__ = ["ScanRow", "ScalingFit", "sweep", "fit_scaling", "row_t_end"]


@dataclass(frozen=True)
class ScanRow:
    """Burst summary for a single cooperativity value."""

    coop: float
    rho_size: float
    tau_max: float          # time of peak intensity, units of 1/gamma
    peak_intensity: float   # peak of -da/dt, units of gamma
    max_gamma: float        # largest induced rate along the trajectory
    max_x: float            # largest exchange coherence
    max_rho_mm: float       # largest antisymmetric-state population


@dataclass(frozen=True)
class ScalingFit:
    """Least-squares scaling summary of a sweep."""

    slope: float            # linear fit of peak intensity vs coop
    intercept: float
    r_squared: float
    tau_exponent: float     # log-log slope of tau_max vs coop


def row_t_end(coop: float, gamma: float) -> float:
    """Auto-scaled horizon: burst window 50/(coop gamma) plus a 5/gamma tail."""
    tail = 5.0 / gamma
    if coop <= 0.0:
        return tail
    return 50.0 / (coop * gamma) + tail


def _run_row(args) -> ScanRow:
    coop, rho_size, base_params, integrator = args
    params = replace(base_params, coop=coop, rho_size=rho_size)
    traj = integrate(integrator, params)
    tau_max, peak = find_peak(traj)
    return ScanRow(
        coop=coop,
        rho_size=rho_size,
        tau_max=float(tau_max),
        peak_intensity=float(peak),
        max_gamma=float(np.max(traj.gamma_rate)),
        max_x=float(np.max(traj.x)),
        max_rho_mm=float(np.max(traj.rho_mm)),
    )


def sweep(c_values, rho_size: float, base_params: Parameters | None = None,
          integrator: IntegratorConfig | None = None, workers: int = 1,
          auto_t_end: bool = True) -> list[ScanRow]:
    """One trajectory + peak per cooperativity value; rows ordered as given.

    With ``auto_t_end`` each row's horizon is rescaled by ``row_t_end``;
    otherwise the template's horizon is used verbatim.  A failing row is
    reported through a warning and skipped, the sweep continues.
    """
    c_values = [float(c) for c in c_values]
    if not c_values:
        raise ValueError("c_values must be non-empty")
    if any(c < 0.0 for c in c_values):
        raise ValueError("cooperativity values must be non-negative")
    if base_params is None:
        base_params = Parameters(coop=c_values[0], rho_size=rho_size)
    if integrator is None:
        integrator = IntegratorConfig()

    jobs = []
    for c in c_values:
        cfg = integrator
        if auto_t_end:
            cfg = replace(integrator, t_end=row_t_end(c, base_params.gamma))
        jobs.append((c, rho_size, base_params, cfg))

    results: list[ScanRow | None] = [None] * len(jobs)
    failures: list[tuple[float, str]] = []
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            futures = [pool.submit(_run_row, job) for job in jobs]
            for idx, fut in enumerate(futures):
                try:
                    results[idx] = fut.result()
                except Exception as exc:
                    failures.append((jobs[idx][0], str(exc)))
    else:
        for idx, job in enumerate(jobs):
            try:
                results[idx] = _run_row(job)
            except Exception as exc:
                failures.append((job[0], str(exc)))

    for coop, message in failures:
        warnings.warn(f"sweep row coop={coop} failed: {message}", stacklevel=2)
    return [row for row in results if row is not None]


def fit_scaling(rows: list[ScanRow]) -> ScalingFit:
    """Linear fit of peak vs coop and power-law fit of tau_max vs coop.

    Requires at least three rows with distinct cooperativities; the power law
    additionally needs strictly positive coop and tau_max.
    """
    if len(rows) < 3:
        raise ValueError(f"need at least 3 rows to fit, got {len(rows)}")
    c = np.array([r.coop for r in rows])
    peak = np.array([r.peak_intensity for r in rows])
    tau = np.array([r.tau_max for r in rows])
    if len(np.unique(c)) < len(c):
        raise ValueError("cooperativity values must be distinct for the fit")

    slope, intercept = np.polyfit(c, peak, 1)
    fitted = slope * c + intercept
    ss_res = float(np.sum((peak - fitted) ** 2))
    ss_tot = float(np.sum((peak - peak.mean()) ** 2))
    r_squared = 1.0 - ss_res / ss_tot if ss_tot > 0.0 else 1.0

    if np.any(c <= 0.0) or np.any(tau <= 0.0):
        raise ValueError("power-law fit requires positive coop and tau_max")
    tau_exponent = float(np.polyfit(np.log(c), np.log(tau), 1)[0])
    return ScalingFit(slope=float(slope), intercept=float(intercept),
                      r_squared=float(r_squared), tau_exponent=tau_exponent)
