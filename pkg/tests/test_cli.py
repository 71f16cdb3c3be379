"""CLI contract: config handling, file formats, determinism, exit codes."""

import json
import math

import numpy as np
import pytest

from superradiance.cli import main

TRAJ_HEADER = "t,a,d,n,x,Gamma,Gammabar,intensity,rho_pp,rho_mm,witness"
SCAN_HEADER = "C,rho,tau_max,peak_intensity,max_Gamma,max_x,max_rho_mm"
SPECTRUM_HEADER = "delta_prime,Gamma,chirp"


def read_csv(path):
    rows = []
    header = None
    for line in path.read_text().splitlines():
        if line.startswith("#"):
            continue
        if header is None:
            header = line
            continue
        rows.append([float(v) for v in line.split(",")])
    return header, np.array(rows)


class TestConfigHandling:
    def test_unknown_key_rejected_without_output(self, tmp_path):
        out = tmp_path / "out"
        rc = main(["simulate", f"--out_dir={out}", "--no_such_key=1"])
        assert rc == 2
        assert not out.exists()

    def test_malformed_value_rejected(self, tmp_path):
        rc = main(["simulate", f"--out_dir={tmp_path}", "--coop=abc"])
        assert rc == 2
        assert not (tmp_path / "trajectory.csv").exists()

    def test_invalid_physical_value_rejected(self, tmp_path):
        rc = main(["simulate", f"--out_dir={tmp_path}", "--coop=-2"])
        assert rc == 2

    def test_unknown_command(self):
        assert main(["transmogrify"]) == 2

    def test_help(self, capsys):
        assert main(["--help"]) == 0
        assert "simulate" in capsys.readouterr().out

    def test_help_keys_lists_schema(self, capsys):
        assert main(["--help-keys"]) == 0
        out = capsys.readouterr().out
        for key in ("coop", "rho_size", "c_values", "oracle_tol"):
            assert key in out

    def test_config_file_with_flag_override(self, tmp_path):
        cfgfile = tmp_path / "run.json"
        cfgfile.write_text(json.dumps({"coop": 0.0, "t_end": 1.0, "sample_dt": 0.5}))
        out = tmp_path / "out"
        rc = main(["simulate", f"--config={cfgfile}", f"--out_dir={out}",
                   "--t_end=2.0"])
        assert rc == 0
        summary = json.loads((out / "summary.json").read_text())
        assert summary["final_state"]["t"] == pytest.approx(2.0)

    def test_config_file_unknown_key(self, tmp_path):
        cfgfile = tmp_path / "run.json"
        cfgfile.write_text(json.dumps({"cooperativity": 10.0}))
        assert main(["simulate", f"--config={cfgfile}", f"--out_dir={tmp_path}"]) == 2

    def test_missing_config_file(self, tmp_path):
        assert main(["simulate", f"--config={tmp_path / 'nope.json'}"]) == 2


class TestSimulate:
    def test_default_model_run(self, tmp_path):
        rc = main(["simulate", f"--out_dir={tmp_path}", "--t_end=1.0",
                   "--sample_dt=0.01"])
        assert rc == 0
        header, data = read_csv(tmp_path / "trajectory.csv")
        assert header == TRAJ_HEADER
        witness = data[:, 10]
        assert np.max(witness) <= 1e-8
        summary = json.loads((tmp_path / "summary.json").read_text())
        assert summary["peak"]["intensity"] > 25.0
        assert not summary["boundary_peak"]

    def test_free_decay_column(self, tmp_path):
        rc = main(["simulate", f"--out_dir={tmp_path}", "--coop=0", "--t_end=5.0",
                   "--rel_tol=1e-10", "--abs_tol=1e-13", "--sample_dt=0.05"])
        assert rc == 0
        _, data = read_csv(tmp_path / "trajectory.csv")
        t, a = data[:, 0], data[:, 1]
        assert np.max(np.abs(a - np.exp(-t))) < 1e-8

    def test_byte_identical_reruns(self, tmp_path):
        args = ["simulate", "--t_end=0.5", "--sample_dt=0.01"]
        out1, out2 = tmp_path / "r1", tmp_path / "r2"
        assert main(args + [f"--out_dir={out1}"]) == 0
        assert main(args + [f"--out_dir={out2}"]) == 0
        assert (out1 / "trajectory.csv").read_bytes() == (out2 / "trajectory.csv").read_bytes()
        assert (out1 / "summary.json").read_bytes() == (out2 / "summary.json").read_bytes()

    def test_csv_floats_round_trip(self, tmp_path):
        assert main(["simulate", f"--out_dir={tmp_path}", "--t_end=0.2",
                     "--sample_dt=0.01"]) == 0
        text = (tmp_path / "trajectory.csv").read_text().splitlines()
        body = [line for line in text if not line.startswith("#")][1:]
        for line in body[:50]:
            for tok in line.split(","):
                assert f"{float(tok):.17g}" == tok

    def test_solver_failure_exit_code(self, tmp_path):
        rc = main(["simulate", f"--out_dir={tmp_path}", "--a0=0.5", "--n0=-1",
                   "--x0=-0.5", "--t_end=0.5"])
        assert rc == 3

    def test_plot_rendering(self, tmp_path):
        rc = main(["simulate", f"--out_dir={tmp_path}", "--t_end=0.2",
                   "--sample_dt=0.01", "--plot=true"])
        assert rc == 0
        assert (tmp_path / "trajectory.png").stat().st_size > 0

    def test_chirp_mode_runs(self, tmp_path):
        rc = main(["simulate", f"--out_dir={tmp_path}", "--t_end=0.01",
                   "--sample_dt=0.005", "--delta_mode=kramers-kronig"])
        assert rc == 0
        _, data = read_csv(tmp_path / "trajectory.csv")
        assert np.all(np.isfinite(data))


class TestScan:
    def test_three_row_scan_with_fit(self, tmp_path):
        rc = main(["scan", f"--out_dir={tmp_path}", "--c_values=4,6,8",
                   "--auto_t_end=false", "--t_end=1.2"])
        assert rc == 0
        header, data = read_csv(tmp_path / "scan.csv")
        assert header == SCAN_HEADER
        assert data.shape == (3, 7)
        assert list(data[:, 0]) == [4.0, 6.0, 8.0]
        fit = json.loads((tmp_path / "fit.json").read_text())
        assert fit["rows"] == 3
        assert fit["slope"] > 0.0

    def test_no_medium_row(self, tmp_path):
        with pytest.warns(UserWarning):
            rc = main(["scan", f"--out_dir={tmp_path}", "--c_values=0"])
        assert rc == 0
        _, data = read_csv(tmp_path / "scan.csv")
        assert data[0, 2] == 0.0                       # tau_max
        assert data[0, 3] == pytest.approx(1.0, rel=1e-8)  # peak = gamma
        fit = json.loads((tmp_path / "fit.json").read_text())
        assert fit["slope"] is None

    def test_byte_identical_reruns(self, tmp_path):
        args = ["scan", "--c_values=5,7", "--auto_t_end=false", "--t_end=0.8"]
        out1, out2 = tmp_path / "a", tmp_path / "b"
        assert main(args + [f"--out_dir={out1}"]) == 0
        assert main(args + [f"--out_dir={out2}"]) == 0
        assert (out1 / "scan.csv").read_bytes() == (out2 / "scan.csv").read_bytes()
        assert (out1 / "fit.json").read_bytes() == (out2 / "fit.json").read_bytes()

    def test_empty_c_values(self, tmp_path):
        assert main(["scan", f"--out_dir={tmp_path}", "--c_values="]) == 2

    def test_plot_rendering(self, tmp_path):
        rc = main(["scan", f"--out_dir={tmp_path}", "--c_values=4,6,8",
                   "--auto_t_end=false", "--t_end=0.8", "--plot=true"])
        assert rc == 0
        assert (tmp_path / "scan.png").stat().st_size > 0


class TestSpectrum:
    @pytest.mark.filterwarnings("ignore:spectral grid may be too short")
    def test_even_profile_and_center_chirp(self, tmp_path):
        rc = main(["spectrum", f"--out_dir={tmp_path}", "--delta_max=30",
                   "--grid_points=31", "--spectrum_a=0.8", "--spectrum_x=0.05",
                   "--pin_rho_tilde=true"])
        assert rc == 0
        header, data = read_csv(tmp_path / "spectrum.csv")
        assert header == SPECTRUM_HEADER
        gam = data[:, 1]
        np.testing.assert_allclose(gam, gam[::-1], rtol=1e-12)
        center = len(gam) // 2
        assert data[center, 0] == 0.0
        assert abs(data[center, 2]) < 1e-10
        assert math.isnan(data[0, 2]) and math.isnan(data[-1, 2])

    def test_empty_grid_rejected(self, tmp_path):
        out = tmp_path / "out"
        assert main(["spectrum", f"--out_dir={out}", "--grid_points=0"]) == 2
        assert not out.exists()

    def test_physical_profile_falls_off(self, tmp_path):
        rc = main(["spectrum", f"--out_dir={tmp_path}", "--delta_max=200",
                   "--grid_points=41"])
        assert rc == 0
        _, data = read_csv(tmp_path / "spectrum.csv")
        center = 20
        assert data[center, 1] > 10.0 * data[0, 1]

    def test_plot_rendering(self, tmp_path):
        rc = main(["spectrum", f"--out_dir={tmp_path}", "--delta_max=40",
                   "--grid_points=21", "--plot=true"])
        assert rc == 0
        assert (tmp_path / "spectrum.png").stat().st_size > 0

    @pytest.mark.filterwarnings("ignore:spectral grid may be too short")
    def test_chirp_column_against_independent_quadrature(self, tmp_path):
        """Dual-route check of the written file: re-derive the dispersion
        integral from the CSV's own profile with a plain subtracted-trapezoid
        principal-value quadrature."""
        rc = main(["spectrum", f"--out_dir={tmp_path}", "--delta_max=300",
                   "--grid_points=401", "--spectrum_a=0.9", "--spectrum_x=0.02"])
        assert rc == 0
        _, data = read_csv(tmp_path / "spectrum.csv")
        xg, yg, ch = data[:, 0], data[:, 1], data[:, 2]

        def pv_independent(delta):
            y_at = np.interp(delta, xg, yg)
            with np.errstate(divide="ignore", invalid="ignore"):
                integrand = (yg - y_at) / (delta - xg)
            on_node = np.flatnonzero(np.isclose(xg, delta, rtol=0.0, atol=1e-12))
            for k in on_node:
                integrand[k] = -(yg[k + 1] - yg[k - 1]) / (xg[k + 1] - xg[k - 1])
            log_term = y_at * math.log((delta - xg[0]) / (xg[-1] - delta))
            return (np.trapezoid(integrand, xg) + log_term) / math.pi

        for k in (100, 150, 200, 250, 300):
            assert ch[k] == pytest.approx(pv_independent(xg[k]), abs=5e-3)


class TestOracleCheck:
    def test_free_decay_passes(self, capsys):
        rc = main(["oracle-check", "--coop=0", "--oracle_t_end=2.0",
                   "--oracle_samples=41"])
        assert rc == 0
        assert "PASSED" in capsys.readouterr().out

    def test_cooperative_case_passes(self):
        rc = main(["oracle-check", "--oracle_t_end=0.4", "--oracle_samples=81"])
        assert rc == 0

    def test_perturbed_rates_fail(self, capsys):
        rc = main(["oracle-check", "--oracle_t_end=0.4", "--oracle_samples=81",
                   "--oracle_rate_scale=1.01"])
        assert rc == 4
        assert "FAILED" in capsys.readouterr().err
