import json
import os

import numpy as np
import pytest

from fbm.cli import (build_config, load_config, main, resolve_tau0,
                     run_solve, run_sweep, run_svd_study, run_trace_plot,
                     _parse_order_list)
from fbm.errors import ValidationError
from fbm.geometry import compute_radii


def _write_config(path, **overrides):
    raw = {
        "curve": "kite",
        "k": 1.0,
        "delta": 1e-16,
        "eta": 5.0,
        "tau0": 2.2,
        "seeds": [1],
        "grid_resolution": 200,
    }
    raw.update(overrides)
    with open(path, "w", encoding="utf-8") as handle:
        json.dump(raw, handle)
    return path


class TestConfigParsing:
    def test_defaults(self):
        cfg = build_config({"curve": "circle:1", "k": 1.0, "delta": 0.01})
        assert cfg.eta == 5.0
        assert cfg.tau0 == "auto"
        assert cfg.seeds == list(range(1, 11))
        assert cfg.node_count == "auto"
        assert cfg.grid_resolution == 200
        assert np.hypot(*cfg.direction) == pytest.approx(1.0, abs=1e-12)

    def test_lists_accepted(self):
        cfg = build_config({"curve": "kite", "k": [0.5, 1.0], "delta": [0.01, 0.05]})
        assert cfg.k_list == [0.5, 1.0]
        assert cfg.delta_list == [0.01, 0.05]

    def test_custom_fourier_curve(self):
        cfg = build_config({
            "curve": {"x1_cos": [0.0, 1.2], "x2_sin": [0.0, 1.2], "name": "disc"},
            "k": 1.0, "delta": 0.0})
        assert cfg.curve.name == "disc"

    def test_missing_field(self):
        with pytest.raises(ValidationError) as err:
            build_config({"curve": "kite", "k": 1.0})
        assert err.value.code == "missing_field"

    def test_bad_delta(self):
        with pytest.raises(ValidationError):
            build_config({"curve": "kite", "k": 1.0, "delta": 1.0})

    def test_empty_seeds(self):
        with pytest.raises(ValidationError) as err:
            build_config({"curve": "kite", "k": 1.0, "delta": 0.0, "seeds": []})
        assert err.value.code == "seeds_empty"

    def test_direction_must_be_unit(self):
        with pytest.raises(ValidationError) as err:
            build_config({"curve": "kite", "k": 1.0, "delta": 0.0,
                          "direction": [1.0, 1.0]})
        assert err.value.code == "direction_not_unit"

    def test_odd_node_count_rejected(self):
        with pytest.raises(ValidationError):
            build_config({"curve": "kite", "k": 1.0, "delta": 0.0, "M_q": 99})

    def test_auto_tau0(self):
        kite_cfg = build_config({"curve": "kite", "k": 1.0, "delta": 0.0})
        assert resolve_tau0(kite_cfg, compute_radii(kite_cfg.curve)) == 2.2
        circ_cfg = build_config({"curve": "circle:1", "k": 1.0, "delta": 0.0})
        # 1.02 * tau_min rounded up to two decimals, tau_min = 1
        assert resolve_tau0(circ_cfg, compute_radii(circ_cfg.curve)) == pytest.approx(1.02)

    def test_order_list_parsing(self):
        assert _parse_order_list("4..12:2") == [4, 6, 8, 10, 12]
        assert _parse_order_list("4..6") == [4, 5, 6]
        assert _parse_order_list("3,7,11") == [3, 7, 11]
        with pytest.raises(ValidationError):
            _parse_order_list("a..b")


class TestRunSolve:
    def test_kite_noise_free(self, tmp_path):
        cfg = load_config(_write_config(tmp_path / "cfg.json"))
        out = run_solve(cfg, str(tmp_path / "out"))
        assert out["rel_l2_interior"] <= 1e-8
        report = json.loads((tmp_path / "out" / "report.json").read_text())
        for key in ("k", "delta", "eta", "tau0", "N", "alpha", "M_q",
                    "grid_resolution", "seed", "m_overridden"):
            assert key in report["metadata"]
        coeff_lines = (tmp_path / "out" / "coefficients.csv").read_text().splitlines()
        data_lines = [ln for ln in coeff_lines if not ln.startswith("#")]
        assert data_lines[0] == "n,real,imag"
        assert len(data_lines) == 1 + 2 * report["metadata"]["N"] + 1

    def test_circle_noise_free(self, tmp_path):
        path = _write_config(tmp_path / "cfg.json", curve="circle:1", delta=0.0,
                             tau0="auto")
        out = run_solve(load_config(path), str(tmp_path / "out"))
        assert out["rel_l2_interior"] <= 1e-8
        assert out["rel_l2_boundary"] <= 1e-8

    def test_multi_value_config_rejected(self, tmp_path):
        path = _write_config(tmp_path / "cfg.json", k=[1.0, 2.0])
        with pytest.raises(ValidationError) as err:
            run_solve(load_config(path), str(tmp_path / "out"))
        assert err.value.code == "expected_single_case"


class TestExitCodes:
    def test_success(self, tmp_path, capsys):
        path = _write_config(tmp_path / "cfg.json", curve="circle:1",
                             tau0="auto", grid_resolution=64)
        assert main(["solve", "--config", str(path),
                     "--out", str(tmp_path / "out")]) == 0

    def test_tau0_too_small(self, tmp_path, capsys):
        path = _write_config(tmp_path / "cfg.json", tau0=2.0)
        code = main(["solve", "--config", str(path), "--out", str(tmp_path / "o")])
        record = json.loads(capsys.readouterr().err.strip())
        assert code == 2
        assert record["error"] == "tau0_too_small"

    def test_unreadable_config(self, tmp_path, capsys):
        code = main(["solve", "--config", str(tmp_path / "missing.json")])
        assert code == 2
        assert json.loads(capsys.readouterr().err.strip())["error"] == "config_unreadable"

    def test_bad_json(self, tmp_path, capsys):
        path = tmp_path / "bad.json"
        path.write_text("{not json")
        assert main(["solve", "--config", str(path)]) == 2
        assert json.loads(capsys.readouterr().err.strip())["error"] == "config_not_json"


class TestRunSweep:
    def test_row_and_summary_counts(self, tmp_path):
        path = _write_config(tmp_path / "cfg.json", k=[1.0], delta=[1e-16, 0.01],
                             seeds=[1, 2, 3], grid_resolution=96)
        out = run_sweep(load_config(path), str(tmp_path / "out"))
        lines = [ln for ln in open(out, encoding="utf-8").read().splitlines()
                 if ln and not ln.startswith("#")]
        cells = [ln for ln in lines if ln.startswith("cell,")]
        medians = [ln for ln in lines if ln.startswith("median,")]
        assert len(cells) == 6
        assert len(medians) == 2

    def test_determinism(self, tmp_path):
        path = _write_config(tmp_path / "cfg.json", k=[1.0], delta=[0.01],
                             seeds=[1, 2], grid_resolution=96)
        out1 = run_sweep(load_config(path), str(tmp_path / "a"))
        out2 = run_sweep(load_config(path), str(tmp_path / "b"))
        assert open(out1, "rb").read() == open(out2, "rb").read()

    def test_threads_match_serial(self, tmp_path):
        path = _write_config(tmp_path / "cfg.json", k=[0.5, 1.0], delta=[0.01],
                             seeds=[1, 2], grid_resolution=96)
        serial = run_sweep(load_config(path), str(tmp_path / "s"), threads=1)
        threaded = run_sweep(load_config(path), str(tmp_path / "t"), threads=4)
        assert open(serial, "rb").read() == open(threaded, "rb").read()

    def test_median_errors_in_noise_band(self, tmp_path):
        # medians for (k=1, delta=0.01) land between 1e-4 and 1e-1
        path = _write_config(tmp_path / "cfg.json", k=[1.0], delta=[0.01],
                             seeds=list(range(1, 11)), grid_resolution=128)
        out = run_sweep(load_config(path), str(tmp_path / "out"))
        median = [ln for ln in open(out, encoding="utf-8").read().splitlines()
                  if ln.startswith("median,")][0].split(",")
        rel_l2_interior = float(median[9])
        assert 1e-4 <= rel_l2_interior <= 1e-1

    def test_full_reference_lattice_counts(self, tmp_path):
        # the full 3 x 3 x 10 lattice: 90 cell rows plus 9 median rows
        path = _write_config(tmp_path / "cfg.json", k=[0.5, 1.0, 5.0],
                             delta=[1e-16, 0.01, 0.05],
                             seeds=list(range(1, 11)), grid_resolution=128)
        out = run_sweep(load_config(path), str(tmp_path / "out"))
        lines = open(out, encoding="utf-8").read().splitlines()
        assert sum(ln.startswith("cell,") for ln in lines) == 90
        assert sum(ln.startswith("median,") for ln in lines) == 9
        assert not any(ln.startswith("cell,") and not ln.endswith(",")
                       for ln in lines)  # no marked failures

    def test_all_cells_failing_is_numerical_failure(self, tmp_path, capsys):
        # M_q = 8 cannot hold the 2N+1 columns of any cell; rows are
        # marked, and an entirely failed sweep exits with code 3
        path = _write_config(tmp_path / "cfg.json", M_q=8, seeds=[1])
        code = main(["sweep", "--config", str(path), "--out", str(tmp_path / "o")])
        record = json.loads(capsys.readouterr().err.strip())
        assert code == 3
        assert record["error"] == "all_cells_failed"


class TestRunSvdStudy:
    def test_rows_and_slope_footer(self, tmp_path):
        path = _write_config(tmp_path / "cfg.json")
        out = run_svd_study(load_config(path), str(tmp_path / "out"),
                            list(range(4, 25, 2)))
        lines = open(out, encoding="utf-8").read().splitlines()
        data = [ln for ln in lines if ln and not ln.startswith("#")]
        assert data[0] == "N,mu_min,bound_product"
        assert len(data) == 1 + 11
        assert lines[-1].startswith("# fitted_slope=-")

    def test_single_order_footer(self, tmp_path):
        path = _write_config(tmp_path / "cfg.json")
        out = run_svd_study(load_config(path), str(tmp_path / "out"), [6])
        assert open(out, encoding="utf-8").read().splitlines()[-1] \
            == "# fitted_slope=n/a"

    def test_large_k_all_positive(self, tmp_path):
        path = _write_config(tmp_path / "cfg.json", k=5.0)
        out = run_svd_study(load_config(path), str(tmp_path / "out"), [4, 8, 12])
        rows = [ln.split(",") for ln in open(out, encoding="utf-8").read().splitlines()
                if ln and not ln.startswith("#") and not ln.startswith("N,")]
        assert all(float(r[1]) > 0.0 for r in rows)


class TestRunTracePlot:
    def test_noise_free_curves_coincide(self, tmp_path):
        path = _write_config(tmp_path / "cfg.json", grid_resolution=96)
        exact_path, numeric_path = run_trace_plot(
            load_config(path), str(tmp_path / "out"), k=1.0, delta=1e-16, seed=1)
        exact = np.loadtxt(exact_path)
        numeric = np.loadtxt(numeric_path)
        assert exact.shape == (512, 2)
        assert numeric.shape == (512, 2)
        assert exact[0, 0] == 0.0
        assert exact[-1, 0] == pytest.approx(2 * np.pi * (1 - 1 / 512), abs=1e-14)
        assert np.max(np.abs(exact[:, 1] - numeric[:, 1])) < 1e-6

    def test_high_wavenumber_with_noise(self, tmp_path):
        # k=7 is plottable even though no reference table value exists
        path = _write_config(tmp_path / "cfg.json", grid_resolution=96)
        exact_path, numeric_path = run_trace_plot(
            load_config(path), str(tmp_path / "out"), k=7.0, delta=0.01, seed=1)
        exact = np.loadtxt(exact_path)
        numeric = np.loadtxt(numeric_path)
        gap = np.max(np.abs(exact[:, 1] - numeric[:, 1]))
        assert gap < 0.5  # same order as the boundary L2 error

    def test_metadata_header(self, tmp_path):
        path = _write_config(tmp_path / "cfg.json", grid_resolution=96)
        exact_path, _ = run_trace_plot(load_config(path), str(tmp_path / "out"),
                                       k=1.0, delta=1e-16, seed=1)
        header = [ln for ln in open(exact_path, encoding="utf-8")
                  if ln.startswith("#")]
        keys = {ln.split("=", 1)[0].lstrip("# ") for ln in header}
        for need in ("k", "delta", "eta", "tau0", "N", "alpha", "M_q",
                     "grid_resolution", "seed", "m_overridden"):
            assert need in keys


class TestEnvThreads:
    def test_env_override(self, monkeypatch):
        from fbm.cli import _thread_count
        monkeypatch.setenv("FBM_THREADS", "3")
        assert _thread_count(None) == 3
        assert _thread_count(2) == 2
        monkeypatch.setenv("FBM_THREADS", "junk")
        assert _thread_count(None) == 1
