"""Command-line entry point.

Subcommands: ``simulate`` (one trajectory), ``scan`` (cooperativity sweep),
``spectrum`` (rate vs detuning plus dispersion integral) and ``oracle-check``
(reduced vs full 4x4 propagation).  Configuration is a flat JSON object; any
key can be overridden on the command line as ``--key=value``.  Unknown keys
are rejected before any computation starts.

Exit codes: 0 success, 2 configuration error, 3 solver failure,
4 oracle mismatch.  All delimited output uses 17 significant digits so that
64-bit floats round-trip exactly; identical configurations produce
byte-identical files.
"""

from __future__ import annotations

import json
import math
import sys
import warnings
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Callable

import numpy as np

from .states import Parameters, ReducedState, reconstruct
from .rates import RateSolveError, chirp_kk, gamma_spectrum
from .dynamics import (BoundaryPeakWarning, IntegrationError, IntegratorConfig,
                       find_peak, integrate)
from .oracle import OracleIntegrityError, propagate
from .scan import fit_scaling, sweep

__all__ = ["main", "entrypoint", "ConfigError"]

USAGE = """usage: superradiance COMMAND [--config=FILE] [--key=value ...]

commands:
  simulate      integrate one trajectory; writes trajectory.csv + summary.json
  scan          sweep the cooperativity; writes scan.csv + fit.json
  spectrum      induced rate vs detuning; writes spectrum.csv
  oracle-check  compare reduced dynamics against the full 4x4 propagator

Any configuration key may be set in a flat JSON file (--config) or as a
--key=value flag; flags override the file.  Use --help-keys for the list.
"""


class ConfigError(Exception):
    """Invalid configuration; reported with exit code 2."""


def _cast_float(value: Any) -> float:
    try:
        out = float(value)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"expected a number, got {value!r}") from exc
    if not math.isfinite(out):
        raise ConfigError(f"expected a finite number, got {value!r}")
    return out


def _cast_int(value: Any) -> int:
    try:
        out = int(str(value))
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"expected an integer, got {value!r}") from exc
    return out


def _cast_bool(value: Any) -> bool:
    if isinstance(value, bool):
        return value
    text = str(value).strip().lower()
    if text in ("true", "1", "yes", "on"):
        return True
    if text in ("false", "0", "no", "off"):
        return False
    raise ConfigError(f"expected a boolean, got {value!r}")


def _cast_str(value: Any) -> str:
    return str(value)


def _cast_optional_float(value: Any) -> float | None:
    if value is None:
        return None
    if isinstance(value, str) and value.strip().lower() in ("none", "auto", "null", ""):
        return None
    return _cast_float(value)


def _cast_float_list(value: Any) -> list[float]:
    if isinstance(value, str):
        parts = [p for p in value.replace(",", " ").split() if p]
        return [_cast_float(p) for p in parts]
    if isinstance(value, (list, tuple)):
        return [_cast_float(v) for v in value]
    raise ConfigError(f"expected a list of numbers, got {value!r}")


@dataclass(frozen=True)
class _Key:
    cast: Callable[[Any], Any]
    default: Any
    help: str


SCHEMA: dict[str, _Key] = {
    # physical configuration
    "coop": _Key(_cast_float, 10.0, "cooperativity parameter (scaled density)"),
    "rho_size": _Key(_cast_float, 10.0, "effective radial size in reduced wavelengths"),
    "gamma": _Key(_cast_float, 1.0, "vacuum decay rate (sets the time unit)"),
    "delta_mode": _Key(_cast_str, "zero", "chirp handling: zero | kramers-kronig"),
    "series_epsilon": _Key(_cast_float, 1e-8, "series branch threshold of the rate formula"),
    "fixed_point_tol": _Key(_cast_float, 1e-10, "relative tolerance of the rate solve"),
    # integrator
    "t_end": _Key(_cast_float, 20.0, "integration horizon in units of 1/gamma"),
    "rel_tol": _Key(_cast_float, 1e-8, "integrator relative tolerance"),
    "abs_tol": _Key(_cast_float, 1e-11, "integrator absolute tolerance"),
    "max_step": _Key(_cast_optional_float, None, "step cap; default 1/(50 coop gamma)"),
    "sample_dt": _Key(_cast_optional_float, None, "output cadence; default t_end/1000"),
    "a0": _Key(_cast_float, 1.0, "initial excited population"),
    "d0": _Key(_cast_float, 0.0, "initial population difference"),
    "n0": _Key(_cast_float, 1.0, "initial inversion product"),
    "x0": _Key(_cast_float, 0.0, "initial exchange coherence"),
    # outputs
    "out_dir": _Key(_cast_str, ".", "directory for output files"),
    "plot": _Key(_cast_bool, False, "also render PNG figures next to the CSV output"),
    # scan
    "c_values": _Key(_cast_float_list, [10.0, 20.0, 30.0], "cooperativities to sweep"),
    "workers": _Key(_cast_int, 1, "worker processes for the sweep"),
    "auto_t_end": _Key(_cast_bool, True, "rescale the horizon per sweep row"),
    # spectrum
    "delta_max": _Key(_cast_float, 50.0, "detuning grid half-width in units of gamma"),
    "grid_points": _Key(_cast_int, 201, "number of detuning grid points"),
    "spectrum_a": _Key(_cast_float, 1.0, "excited population for the spectrum"),
    "spectrum_x": _Key(_cast_float, 0.0, "exchange coherence for the spectrum"),
    "pin_rho_tilde": _Key(_cast_bool, False,
                          "freeze the dispersion correction of the size argument"),
    # oracle check
    "oracle_tol": _Key(_cast_float, 1e-6, "acceptance threshold for the equivalence check"),
    "oracle_rate_scale": _Key(_cast_float, 1.0,
                              "sensitivity knob scaling the oracle's induced rates"),
    "oracle_t_end": _Key(_cast_float, 2.0, "horizon of the equivalence check"),
    "oracle_samples": _Key(_cast_int, 201, "number of shared comparison samples"),
}

COMMANDS = ("simulate", "scan", "spectrum", "oracle-check")


def _parse_tokens(tokens: list[str]) -> tuple[dict[str, str], str | None]:
    """Split --key=value flags; returns (flags, config_path)."""
    flags: dict[str, str] = {}
    config_path = None
    for tok in tokens:
        if not tok.startswith("--") or "=" not in tok:
            raise ConfigError(f"arguments must look like --key=value, got {tok!r}")
        key, _, value = tok[2:].partition("=")
        if key == "config":
            config_path = value
            continue
        if key not in SCHEMA:
            raise ConfigError(f"unknown configuration key {key!r}")
        flags[key] = value
    return flags, config_path


def load_config(tokens: list[str]) -> dict[str, Any]:
    """Merge defaults, an optional JSON file and command-line flags."""
    flags, config_path = _parse_tokens(tokens)
    merged = {key: spec.default for key, spec in SCHEMA.items()}
    if config_path is not None:
        try:
            raw = json.loads(Path(config_path).read_text())
        except FileNotFoundError as exc:
            raise ConfigError(f"config file not found: {config_path}") from exc
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config file is not valid JSON: {exc}") from exc
        if not isinstance(raw, dict):
            raise ConfigError("config file must hold a flat JSON object")
        for key, value in raw.items():
            if key not in SCHEMA:
                raise ConfigError(f"unknown configuration key {key!r} in {config_path}")
            merged[key] = SCHEMA[key].cast(value)
    for key, value in flags.items():
        merged[key] = SCHEMA[key].cast(value)
    return merged


def _build_params(cfg: dict[str, Any]) -> Parameters:
    try:
        return Parameters(coop=cfg["coop"], rho_size=cfg["rho_size"], gamma=cfg["gamma"],
                          delta_mode=cfg["delta_mode"],
                          series_epsilon=cfg["series_epsilon"],
                          fixed_point_tol=cfg["fixed_point_tol"])
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def _build_integrator(cfg: dict[str, Any]) -> IntegratorConfig:
    try:
        initial = ReducedState(a=cfg["a0"], d=cfg["d0"], n=cfg["n0"], x=cfg["x0"])
        config = IntegratorConfig(t_end=cfg["t_end"], rel_tol=cfg["rel_tol"],
                                  abs_tol=cfg["abs_tol"], max_step=cfg["max_step"],
                                  sample_dt=cfg["sample_dt"], initial=initial)
        initial.validate()
        reconstruct(initial)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    return config


def _fmt(value: float) -> str:
    return f"{value:.17g}"


def _write_lines(path: Path, lines: list[str]) -> None:
    path.write_text("\n".join(lines) + "\n", encoding="ascii", newline="\n")


def _write_json(path: Path, payload: dict) -> None:
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n",
                    encoding="ascii", newline="\n")


def write_trajectory_csv(path: Path, traj) -> None:
    lines = [
        "# cooperative-emission trajectory; time t in units of 1/gamma",
        "# Gamma, Gammabar and intensity in units of gamma; remaining columns dimensionless",
        "# rho_pp/rho_mm: symmetric/antisymmetric one-excitation populations;"
        " witness <= 0 means separable",
        "t,a,d,n,x,Gamma,Gammabar,intensity,rho_pp,rho_mm,witness",
    ]
    for i in range(len(traj)):
        lines.append(",".join(_fmt(v) for v in (
            traj.t[i], traj.a[i], traj.d[i], traj.n[i], traj.x[i],
            traj.gamma_rate[i], traj.gammabar[i], traj.intensity[i],
            traj.rho_pp[i], traj.rho_mm[i], traj.witness[i])))
    _write_lines(path, lines)


def write_scan_csv(path: Path, rows) -> None:
    lines = [
        "# cooperativity sweep; tau_max in units of 1/gamma, peak_intensity and"
        " max_Gamma in units of gamma",
        "C,rho,tau_max,peak_intensity,max_Gamma,max_x,max_rho_mm",
    ]
    for r in rows:
        lines.append(",".join(_fmt(v) for v in (
            r.coop, r.rho_size, r.tau_max, r.peak_intensity,
            r.max_gamma, r.max_x, r.max_rho_mm)))
    _write_lines(path, lines)


def write_spectrum_csv(path: Path, profile, chirps) -> None:
    lines = [
        "# induced rate vs detuning; delta_prime and Gamma in units of gamma",
        "# chirp: dispersion integral of the profile (nan at the grid edges)",
        "delta_prime,Gamma,chirp",
    ]
    for dp, g, ch in zip(profile.grid, profile.gamma_values, chirps):
        lines.append(",".join(_fmt(v) for v in (dp, g, ch)))
    _write_lines(path, lines)


def cmd_simulate(cfg: dict[str, Any]) -> int:
    params = _build_params(cfg)
    config = _build_integrator(cfg)
    out_dir = Path(cfg["out_dir"])
    out_dir.mkdir(parents=True, exist_ok=True)

    traj = integrate(config, params)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", BoundaryPeakWarning)
        t_peak, peak = find_peak(traj)
        boundary = any(issubclass(w.category, BoundaryPeakWarning) for w in caught)

    write_trajectory_csv(out_dir / "trajectory.csv", traj)
    summary = {
        "boundary_peak": boundary,
        "final_state": {"t": float(traj.t[-1]), "a": float(traj.a[-1]),
                        "d": float(traj.d[-1]), "n": float(traj.n[-1]),
                        "x": float(traj.x[-1])},
        "max_rates": {"Gamma": float(np.max(traj.gamma_rate)),
                      "Gammabar": float(np.max(traj.gammabar))},
        "peak": {"t_max": float(t_peak), "intensity": float(peak)},
        "samples": len(traj),
        "terminated_early": traj.terminated_early,
    }
    _write_json(out_dir / "summary.json", summary)
    if cfg["plot"]:
        from . import plots
        plots.render_trajectory(traj, out_dir / "trajectory.png")
    print(f"wrote {out_dir / 'trajectory.csv'} ({len(traj)} samples), "
          f"peak intensity {peak:.6g} at t = {t_peak:.6g}")
    return 0


def cmd_scan(cfg: dict[str, Any]) -> int:
    params = _build_params(cfg)
    config = _build_integrator(cfg)
    if not cfg["c_values"]:
        raise ConfigError("c_values must be non-empty")
    out_dir = Path(cfg["out_dir"])
    out_dir.mkdir(parents=True, exist_ok=True)

    rows = sweep(cfg["c_values"], cfg["rho_size"], base_params=params,
                 integrator=config, workers=cfg["workers"],
                 auto_t_end=cfg["auto_t_end"])
    if not rows:
        print("error: every sweep row failed", file=sys.stderr)
        return 3
    write_scan_csv(out_dir / "scan.csv", rows)

    fit_payload: dict[str, Any] = {"rows": len(rows)}
    distinct = len({r.coop for r in rows})
    if len(rows) >= 3 and distinct == len(rows) and all(r.coop > 0 for r in rows):
        fit = fit_scaling(rows)
        fit_payload.update({"slope": fit.slope, "intercept": fit.intercept,
                            "r_squared": fit.r_squared,
                            "tau_exponent": fit.tau_exponent})
    else:
        fit_payload.update({"slope": None, "intercept": None,
                            "r_squared": None, "tau_exponent": None})
    _write_json(out_dir / "fit.json", fit_payload)
    if cfg["plot"]:
        from . import plots
        plots.render_scan(rows, out_dir / "scan.png")
    print(f"wrote {out_dir / 'scan.csv'} ({len(rows)} rows)")
    return 0


def cmd_spectrum(cfg: dict[str, Any]) -> int:
    params = _build_params(cfg)
    if cfg["grid_points"] < 2:
        raise ConfigError(f"grid_points must be at least 2, got {cfg['grid_points']}")
    if cfg["delta_max"] <= 0.0:
        raise ConfigError("delta_max must be positive")
    if not (0.0 <= cfg["spectrum_a"] <= 1.0):
        raise ConfigError("spectrum_a must lie in [0, 1]")
    out_dir = Path(cfg["out_dir"])
    out_dir.mkdir(parents=True, exist_ok=True)

    grid = np.linspace(-cfg["delta_max"], cfg["delta_max"], cfg["grid_points"])
    profile = gamma_spectrum(cfg["spectrum_a"], cfg["spectrum_x"], params, grid,
                             pin_rho_tilde=cfg["pin_rho_tilde"])
    chirps = np.full(len(grid), math.nan)
    for k in range(1, len(grid) - 1):
        chirps[k] = chirp_kk(profile, float(grid[k]))
    write_spectrum_csv(out_dir / "spectrum.csv", profile, chirps)
    if cfg["plot"]:
        from . import plots
        plots.render_spectrum(profile, chirps, out_dir / "spectrum.png")
    print(f"wrote {out_dir / 'spectrum.csv'} ({len(grid)} detunings)")
    return 0


def cmd_oracle_check(cfg: dict[str, Any]) -> int:
    params = _build_params(cfg)
    config = _build_integrator(cfg)
    t_end = cfg["oracle_t_end"]
    n_samples = cfg["oracle_samples"]
    if n_samples < 2:
        raise ConfigError("oracle_samples must be at least 2")
    if t_end <= 0.0:
        raise ConfigError("oracle_t_end must be positive")

    dt = t_end / (n_samples - 1)
    reduced_cfg = IntegratorConfig(t_end=t_end, rel_tol=min(config.rel_tol, 1e-10),
                                   abs_tol=min(config.abs_tol, 1e-12),
                                   max_step=config.max_step, sample_dt=dt,
                                   initial=config.initial)
    traj = integrate(reduced_cfg, params)

    # shared sample times: the cadence points that the trajectory contains
    wanted = np.arange(0.0, float(traj.t[-1]), dt)
    idx = np.searchsorted(traj.t, wanted)
    idx = np.clip(idx, 0, len(traj.t) - 1)
    keep = np.abs(traj.t[idx] - wanted) <= 1e-12 * max(t_end, 1.0)
    idx = idx[keep]
    times = traj.t[idx]
    if len(times) < 2:
        raise ConfigError("no shared samples; decrease oracle_samples or increase t_end")

    rho0 = reconstruct(config.initial)
    times_full, rhos = propagate(rho0, params, float(times[-1]), times=times,
                                 rate_scale=cfg["oracle_rate_scale"])
    dev = {"a": 0.0, "d": 0.0, "n": 0.0, "x": 0.0}
    from .states import reduce as reduce_state
    for k in range(len(times_full)):
        red = reduce_state(rhos[k], trace_tol=1e-8)
        i = idx[k]
        dev["a"] = max(dev["a"], abs(red.a - traj.a[i]))
        dev["d"] = max(dev["d"], abs(red.d - traj.d[i]))
        dev["n"] = max(dev["n"], abs(red.n - traj.n[i]))
        dev["x"] = max(dev["x"], abs(red.x - traj.x[i]))

    tol = cfg["oracle_tol"]
    worst = max(dev, key=dev.get)
    for name in ("a", "d", "n", "x"):
        print(f"max deviation {name}: {dev[name]:.6e}")
    if dev[worst] < tol:
        print(f"ORACLE CHECK PASSED ({len(times_full)} shared samples, tol {tol:g})")
        return 0
    print(f"ORACLE CHECK FAILED: {worst} deviates by {dev[worst]:.6e} "
          f"(tol {tol:g})", file=sys.stderr)
    return 4


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    if not argv or argv[0] in ("-h", "--help"):
        print(USAGE)
        return 0 if argv else 2
    if argv[0] == "--help-keys":
        for key, spec in SCHEMA.items():
            print(f"  {key:<18} default {spec.default!r:<14} {spec.help}")
        return 0
    command = argv[0]
    if command not in COMMANDS:
        print(f"error: unknown command {command!r}\n\n{USAGE}", file=sys.stderr)
        return 2
    try:
        cfg = load_config(argv[1:])
        if command == "simulate":
            return cmd_simulate(cfg)
        if command == "scan":
            return cmd_scan(cfg)
        if command == "spectrum":
            return cmd_spectrum(cfg)
        return cmd_oracle_check(cfg)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (RateSolveError, IntegrationError) as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return 3
    except OracleIntegrityError as exc:
        print(f"oracle failure: {exc}", file=sys.stderr)
        return 4


def entrypoint() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entrypoint()
