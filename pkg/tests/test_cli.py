import json
import os
from pathlib import Path

import numpy as np
import pytest

from saturex.cli import run_cli
from saturex.experiments import (
    ConfigError,
    build_initial,
    load_config,
    simulate,
    sweep,
    verify,
)


BASE_CONFIG = """\
[model]
id = rhe
s = 1.0

[grid]
x_min = -3.0
x_max = 3.0
n_cells = 256

[initial]
kind = box
height = 1.0
x_left = -0.5
x_right = 0.5

[solver]
cfl = 0.4
end_time = 0.2
snapshots = 0.0:0.2:0.05
average = arithmetic

[verify]
suites = super

[output]
directory = {outdir}
seed = 7
"""


@pytest.fixture
def config_file(tmp_path):
    def make(text=None, name="exp.cfg", **fmt):
        fmt.setdefault("outdir", str(tmp_path / "out"))
        path = tmp_path / name
        path.write_text((text or BASE_CONFIG).format(**fmt))
        return path

    return make


class TestConfigParsing:
    def test_roundtrip(self, config_file):
        cfg = load_config(config_file())
        assert cfg.model.id == "relativistic(p=2)"
        assert cfg.grid.n_cells == 256
        assert cfg.solver.snapshot_times == (0.0, 0.05, 0.1, 0.15, 0.2)
        assert cfg.seed == 7

    def test_missing_required_names_field(self, tmp_path):
        p = tmp_path / "bad.cfg"
        p.write_text("[grid]\nx_min = 0\nx_max = 1\nn_cells = 64\n")
        with pytest.raises(ConfigError, match=r"\[model\.id\]"):
            load_config(p)

    def test_bad_value_names_field(self, config_file):
        path = config_file(BASE_CONFIG.replace("cfl = 0.4", "cfl = fast"))
        with pytest.raises(ConfigError, match=r"\[solver\.cfl\]"):
            load_config(path)

    def test_unknown_suite(self, config_file):
        path = config_file(BASE_CONFIG.replace("suites = super", "suites = psychic"))
        with pytest.raises(ConfigError, match=r"\[verify\.suites\]"):
            load_config(path)

    def test_missing_file(self):
        with pytest.raises(ConfigError):
            load_config("/nonexistent/exp.cfg")


class TestInitialData:
    def test_box(self, config_file):
        cfg = load_config(config_file())
        u0 = build_initial(cfg)
        x = cfg.grid.centers()
        np.testing.assert_array_equal(u0, np.where(np.abs(x) <= 0.5, 1.0, 0.0))

    def test_staircase(self, config_file):
        text = BASE_CONFIG.replace(
            "kind = box\nheight = 1.0\nx_left = -0.5\nx_right = 0.5",
            "kind = staircase\nlevels = 1.0,0.5\nbreaks = -0.5,0.0,0.5")
        cfg = load_config(config_file(text))
        u0 = build_initial(cfg)
        x = cfg.grid.centers()
        assert u0[np.searchsorted(x, -0.25)] == 1.0
        assert u0[np.searchsorted(x, 0.25)] == 0.5
        assert u0[np.searchsorted(x, 0.75)] == 0.0

    def test_semicircle_and_gaussian(self, config_file):
        for repl in ("kind = semicircle\nradius = 0.5",
                     "kind = gaussian\nsigma = 0.2\namplitude = 1.0"):
            text = BASE_CONFIG.replace(
                "kind = box\nheight = 1.0\nx_left = -0.5\nx_right = 0.5", repl)
            cfg = load_config(config_file(text))
            u0 = build_initial(cfg)
            assert float(np.max(u0)) <= 1.0
            assert np.all(u0 >= 0.0)

    def test_custom_length_mismatch(self, config_file):
        text = BASE_CONFIG.replace(
            "kind = box\nheight = 1.0\nx_left = -0.5\nx_right = 0.5",
            "kind = custom\nvalues = 1.0,2.0,3.0")
        cfg = load_config(config_file(text))
        with pytest.raises(ConfigError, match=r"\[initial\.values\]"):
            build_initial(cfg)


class TestSimulate:
    def test_outputs_written(self, config_file, tmp_path):
        cfg = load_config(config_file())
        res = simulate(cfg)
        traj_path = Path(res["trajectory"])
        assert traj_path.exists()
        head = traj_path.read_text().splitlines()
        assert head[0] == "t,x,u"
        meta = json.loads(Path(res["metadata"]).read_text())
        assert meta["mass_drift"] < 1e-12
        assert meta["steps"] > 0

    def test_byte_identical_reruns(self, config_file, tmp_path):
        cfg = load_config(config_file())
        a = simulate(cfg, tmp_path / "a")
        b = simulate(cfg, tmp_path / "b")
        assert Path(a["trajectory"]).read_bytes() == Path(b["trajectory"]).read_bytes()
        assert Path(a["metadata"]).read_bytes() == Path(b["metadata"]).read_bytes()


class TestVerify:
    def test_super_suite_passes(self, config_file):
        cfg = load_config(config_file())
        results, ok = verify(cfg)
        assert ok
        assert results["super"]["pass"]

    def test_edge_suite_with_band(self, config_file):
        # coarse short run: the measuring foot inflates the speed, so the
        # band here is a wiring check, not the acceptance-scale bound
        text = BASE_CONFIG.replace("suites = super",
                                   "suites = edges\nedge_speed_band = 0.8,1.3")
        text = text.replace("n_cells = 256", "n_cells = 512")
        text = text.replace("end_time = 0.2", "end_time = 0.8")
        text = text.replace("snapshots = 0.0:0.2:0.05", "snapshots = 0.0:0.8:0.1")
        cfg = load_config(config_file(text, name="edges.cfg"))
        results, ok = verify(cfg)
        assert ok, results["edges"]

    def test_failing_expectation(self, config_file):
        text = BASE_CONFIG.replace(
            "suites = super",
            "suites = edges\nexpected_edge_speed = 5.0\nedge_speed_band = 0.99,1.01")
        cfg = load_config(config_file(text, name="fail.cfg"))
        results, ok = verify(cfg)
        assert not ok

    def test_contraction_suite(self, config_file):
        text = BASE_CONFIG.replace("suites = super", "suites = contraction")
        cfg = load_config(config_file(text, name="contr.cfg"))
        results, ok = verify(cfg)
        assert ok


class TestSweep:
    def test_parallel_simulate_sweep(self, config_file, tmp_path, monkeypatch):
        monkeypatch.setenv("SATUREX_THREADS", "2")
        text = BASE_CONFIG + "\n[sweep]\nparameter = model.s\nvalues = 0.5,1.0\nmode = simulate\n"
        cfg = load_config(config_file(text, name="sweep.cfg"))
        results = sweep(cfg, tmp_path / "sw")
        assert len(results) == 2
        ids = [r["id"] for r in results]
        assert len(set(ids)) == 2
        for r in results:
            assert Path(r["trajectory"]).exists()
        assert (tmp_path / "sw" / "sweep_sweep.json").exists()

    def test_sweep_requires_parameter(self, config_file, tmp_path):
        cfg = load_config(config_file(name="nosweep.cfg"))
        with pytest.raises(ConfigError, match=r"\[sweep\.parameter\]"):
            sweep(cfg, tmp_path / "sw2")


class TestCliCommands:
    def test_check_linear_negative_control(self, capsys):
        rc = run_cli(["check", "linear"])
        out = capsys.readouterr().out
        assert rc == 0
        payload = json.loads(out)
        sat = [it for it in payload["items"] if it["item"] == "saturation"][0]
        assert sat["verdict"] == "fail"

    def test_check_output_file(self, tmp_path):
        dest = tmp_path / "report.json"
        rc = run_cli(["check", "rhe", "--output", str(dest)])
        assert rc == 0
        assert json.loads(dest.read_text())["model"] == "relativistic(p=2)"

    def test_unknown_model_exit_2(self, capsys):
        assert run_cli(["check", "heat"]) == 2

    def test_cost_csv_infinite_rows(self, tmp_path, capsys):
        dest = tmp_path / "cost.csv"
        rc = run_cli(["cost", "rhe", "--s", "1", "--grid", "-1.5:1.5:0.1",
                      "--output", str(dest)])
        assert rc == 0
        rows = dest.read_text().splitlines()
        assert rows[0] == "v,k,classification,pbar,residual"
        for row in rows[1:]:
            v, k, cls, *_ = row.split(",")
            if abs(float(v)) > 1.0 + 1e-9:
                assert cls == "infinite"
                assert k == "inf"
        sidecar = json.loads(dest.with_suffix(".csv.json").read_text())
        assert sidecar["closed_form_max_abs_error"] < 1e-6

    def test_cost_deterministic(self, tmp_path):
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        run_cli(["cost", "coth", "--grid", "-1.2:1.2:0.2", "--output", str(a)])
        run_cli(["cost", "coth", "--grid", "-1.2:1.2:0.2", "--output", str(b)])
        assert a.read_bytes() == b.read_bytes()

    def test_inspect_json(self, capsys):
        rc = run_cli(["inspect", "wilson", "--samples", "20"])
        out = capsys.readouterr().out
        assert rc == 0
        payload = json.loads(out)
        assert payload["growth_constants"]["C0"] == 0.5
        assert payload["lower_bound_worst_violation"] <= 1e-10

    def test_simulate_and_verify_cli(self, tmp_path):
        cfgtext = BASE_CONFIG.format(outdir=str(tmp_path / "out"))
        cfgfile = tmp_path / "exp.cfg"
        cfgfile.write_text(cfgtext)
        assert run_cli(["simulate", str(cfgfile)]) == 0
        assert run_cli(["verify", str(cfgfile)]) == 0

    def test_verify_failure_exit_1(self, tmp_path):
        text = BASE_CONFIG.replace(
            "suites = super",
            "suites = edges\nexpected_edge_speed = 5.0\nedge_speed_band = 0.99,1.01")
        cfgfile = tmp_path / "fail.cfg"
        cfgfile.write_text(text.format(outdir=str(tmp_path / "out")))
        assert run_cli(["verify", str(cfgfile)]) == 1

    def test_malformed_config_exit_2(self, tmp_path, capsys):
        cfgfile = tmp_path / "bad.cfg"
        cfgfile.write_text("[model]\nid = rhe\n[grid]\nx_min = 0\n")
        rc = run_cli(["simulate", str(cfgfile)])
        assert rc == 2
        assert "grid.x_max" in capsys.readouterr().err

    def test_sweep_cli(self, tmp_path):
        text = BASE_CONFIG + "\n[sweep]\nparameter = model.s\nvalues = 0.8,1.2\nmode = verify\n"
        cfgfile = tmp_path / "sweep.cfg"
        cfgfile.write_text(text.format(outdir=str(tmp_path / "out")))
        assert run_cli(["sweep", str(cfgfile)]) == 0
