"""Figure rendering for the CLI report path (opt-in via --plot=true).

Figures are written next to the delimited output; the CSV files remain the
primary, byte-stable interface.  Matplotlib is imported lazily with the Agg
backend so headless runs work and the import cost is only paid when asked.
"""

from __future__ import annotations

import numpy as np


def _pyplot():
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt
    return plt


def render_trajectory(traj, path) -> None:
    """Three-panel burst figure: intensity, atomic variables, rates."""
    plt = _pyplot()
    fig, axes = plt.subplots(3, 1, figsize=(6.4, 8.0), sharex=True)

    axes[0].plot(traj.t, traj.intensity, color="C3")
    axes[0].set_ylabel(r"intensity per atom  [$\gamma$]")
    axes[0].set_yscale("log")

    axes[1].plot(traj.t, traj.a, label="a", color="C0")
    axes[1].plot(traj.t, traj.n, label="n", color="C1")
    axes[1].plot(traj.t, traj.x, label="x", color="C2")
    axes[1].set_ylabel("atomic variables")
    axes[1].legend(loc="best", frameon=False)

    axes[2].plot(traj.t, traj.gamma_rate, label=r"$\Gamma$", color="C4")
    axes[2].plot(traj.t, traj.gammabar, label=r"$\bar\Gamma$", color="C5")
    axes[2].set_ylabel(r"induced rates  [$\gamma$]")
    axes[2].set_xlabel(r"t  [$1/\gamma$]")
    axes[2].set_xscale("log")
    axes[2].legend(loc="best", frameon=False)

    t_positive = traj.t[traj.t > 0]
    if len(t_positive):
        axes[2].set_xlim(t_positive[0], traj.t[-1])
    fig.suptitle(f"C = {traj.params.coop:g}, size = {traj.params.rho_size:g}")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def render_scan(rows, path) -> None:
    """Peak intensity (linear) and peak time (log-log) against cooperativity."""
    plt = _pyplot()
    c = np.array([r.coop for r in rows])
    peak = np.array([r.peak_intensity for r in rows])
    tau = np.array([r.tau_max for r in rows])

    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(9.0, 4.0))
    ax1.plot(c, peak, "o-", color="C3")
    ax1.set_xlabel("cooperativity C")
    ax1.set_ylabel(r"peak intensity  [$\gamma$]")

    good = (c > 0) & (tau > 0)
    ax2.loglog(c[good], tau[good], "s-", color="C0")
    ax2.set_xlabel("cooperativity C")
    ax2.set_ylabel(r"$\tau_{max}$  [$1/\gamma$]")

    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def render_spectrum(profile, chirps, path) -> None:
    """Induced rate and its dispersion integral versus detuning."""
    plt = _pyplot()
    fig, ax = plt.subplots(figsize=(6.4, 4.2))
    ax.plot(profile.grid, profile.gamma_values, color="C0", label=r"$\Gamma(\Delta')$")
    finite = np.isfinite(chirps)
    ax.plot(profile.grid[finite], np.asarray(chirps)[finite], color="C1",
            label=r"dispersion integral")
    ax.set_xlabel(r"detuning $\Delta'$  [$\gamma$]")
    ax.set_ylabel(r"rate  [$\gamma$]")
    ax.legend(loc="best", frameon=False)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
