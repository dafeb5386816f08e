import csv
import io
import json
import math
import subprocess
import sys

import numpy as np
import pytest

from d2dframe.channel import SystemParams
from d2dframe.cli import main
from d2dframe.harness.config import (DEFAULT_SWEEPS, ConfigError, ExperimentConfig,
                                     load_config, parse_config)
from d2dframe.harness.experiments import (crossover, regenerate_gains,
                                          run_experiment, sweep_points, trial_rng)
from d2dframe.reuse_power import vertex_search


def write(tmp_path, obj, name="cfg.json"):
    p = tmp_path / name
    p.write_text(json.dumps(obj) if not isinstance(obj, str) else obj)
    return str(p)


def small(name, **exp):
    base = {"name": name, "trials": 3, "seed": 9}
    base.update(exp)
    return parse_config({"experiment": base})


class TestConfig:
    def test_empty_config_takes_defaults(self):
        c = parse_config({})
        assert c.name == "fig7" and c.trials == 30
        assert c.params == SystemParams()
        assert 600.0 in c.sweeps["d_mr"]

    @pytest.mark.parametrize("name", ["fig5", "fig6a", "fig6b", "fig7", "fig8"])
    def test_default_sweeps_include_anchor(self, name):
        assert 600.0 in DEFAULT_SWEEPS[name]["d_mr"]

    def test_system_in_db(self):
        c = parse_config({"system": {"p_max_dtx_dbm": 20.0, "sinr_min_fue_db": 10.0}})
        assert c.params.p_max_dtx == pytest.approx(100.0)
        assert c.params.sinr_min_fue == pytest.approx(10.0)

    def test_pathloss_and_link_class(self):
        c = parse_config({"system": {"pathloss_models": {"d2d": [30, 35]},
                                     "link_classes": {"FAP->DRX": "d2d"}}})
        assert c.params.model_for("FAP", "DRX").slope_db_per_decade == 35

    def test_unknown_link_class(self):
        with pytest.raises(ConfigError):
            parse_config({"system": {"link_classes": {"FAP->DRX": "nope"}}})

    def test_unknown_key(self):
        with pytest.raises(ConfigError, match="experiment"):
            parse_config({"experiment": {"trails": 3}})

    def test_bad_type_names_path(self):
        with pytest.raises(ConfigError, match="system/bandwidth_hz"):
            parse_config({"system": {"bandwidth_hz": -1}})

    def test_sweep_override(self):
        c = parse_config({"experiment": {"name": "fig6a", "sweeps": {"d_mr": [600]}}})
        assert c.sweeps["d_mr"] == [600]
        assert c.sweeps["d"] == DEFAULT_SWEEPS["fig6a"]["d"]

    def test_topology_override(self):
        c = parse_config({"topology": {"CUE": [100, 0]}})
        assert c.topology_for(600, 20).positions["CUE"] == (100, 0)

    def test_malformed_json(self, tmp_path):
        p = write(tmp_path, '{"experiment": {\n  "trials": }')
        with pytest.raises(ConfigError, match=r":2:\d+:"):
            load_config(p)

    def test_missing_file(self, tmp_path):
        with pytest.raises(ConfigError):
            load_config(str(tmp_path / "nope.json"))

    def test_direct_construction_validates(self):
        with pytest.raises(ConfigError):
            ExperimentConfig(name="fig9")


class TestExperiments:
    def test_streams_are_independent_of_order(self):
        c = small("fig7")
        a = trial_rng(c, 3, 1).random()
        trial_rng(c, 0, 0).random()
        assert trial_rng(c, 3, 1).random() == a
        assert trial_rng(c, 3, 2).random() != a

    def test_sweep_point_order(self):
        pts = sweep_points(small("fig8"))
        assert pts[0] == {"d": 10.0, "d_mr": 200.0}
        assert len(pts) == 25

    def test_fig5_dominance_small(self):
        r = run_experiment(small("fig5", trials=50))
        for row in r.rows:
            assert row["pct_max"] >= row["pct_constant"]
            assert row["pct_max"] >= row["pct_adaptive"]

    def test_fig6a_columns(self):
        r = run_experiment(small("fig6a", sweeps={"d_mr": [600], "d": [10, 150]}))
        assert len(r.rows) == 2
        assert r.rows[0]["median_rate_gain"] > 1 > r.rows[1]["median_rate_gain"]

    def test_fig6b_two_stage_not_worse(self):
        r = run_experiment(small("fig6b", trials=40))
        for row in r.rows:
            # the second stage only overrides when it raises the rate
            assert row["rate_two_stage"] >= row["rate_distance_only"] - 1e-12

    def test_fig7_rows_recomputable(self):
        c = small("fig7", trials=2, sweeps={"d_mr": [600]}, oracle_grid=8)
        row = run_experiment(c).rows[0]
        rates = []
        for k in range(2):
            _, g = regenerate_gains(c, 0, k)
            v = vertex_search(g, c.params)
            if v.feasible:
                rates.append(v.sum_rate_bps_hz)
        assert row["feasible_trials"] <= len(rates)
        if row["feasible_trials"] == len(rates) and rates:
            assert row["vertex_sum_rate"] == pytest.approx(np.mean(rates))

    def test_fig8_gain(self):
        c = small("fig8", trials=2, sweeps={"d": [30], "d_mr": [400]}, lattice_step=0.01)
        row = run_experiment(c).rows[0]
        assert row["feasible_trials"] + row["infeasible_trials"] == 2
        if row["feasible_trials"]:
            assert row["sum_rate_gain"] == pytest.approx(
                row["dedicated_sum_rate"] / row["cellular_sum_rate"])

    def test_parallel_matches_serial(self):
        c = small("fig6b", trials=5)
        assert run_experiment(c, workers=1).to_csv() == run_experiment(c, workers=3).to_csv()

    def test_crossover(self):
        assert crossover([0, 1, 2], [2.0, 1.5, 0.5]) == pytest.approx(1.5)
        assert math.isnan(crossover([0, 1], [2.0, 3.0]))


class TestCli:
    def test_run_writes_csv(self, tmp_path):
        cfg = write(tmp_path, {"experiment": {"trials": 2,
                                              "sweeps": {"d_mr": [400, 600]}}})
        out = tmp_path / "res" / "f6b.csv"
        assert main(["run", "fig6b", "--config", cfg, "--out", str(out)]) == 0
        text = out.read_text(encoding="utf-8")
        rows = list(csv.DictReader(io.StringIO(text)))
        assert len(rows) == 2
        assert "," not in rows[0]["rate_two_stage"]
        float(rows[0]["rate_two_stage"])

    def test_seed_and_trials_flags(self, tmp_path):
        cfg = write(tmp_path, {"experiment": {"sweeps": {"d_mr": [600]}}})
        a, b, c = (tmp_path / n for n in ("a.csv", "b.csv", "c.csv"))
        main(["run", "fig6b", "--config", cfg, "--seed", "1", "--trials", "4", "--out", str(a)])
        main(["run", "fig6b", "--config", cfg, "--seed", "1", "--trials", "4", "--out", str(b)])
        main(["run", "fig6b", "--config", cfg, "--seed", "2", "--trials", "4", "--out", str(c)])
        assert a.read_text() == b.read_text() != c.read_text()
        assert ",4\n" in a.read_text()

    def test_plot_script(self, tmp_path):
        cfg = write(tmp_path, {"experiment": {"trials": 2, "sweeps": {"d_mr": [600]}}})
        out = tmp_path / "f5.csv"
        assert main(["run", "fig5", "--config", cfg, "--out", str(out), "--plot"]) == 0
        script = tmp_path / "f5_plot.py"
        body = script.read_text()
        assert "'f5.csv'" in body and str(tmp_path) not in body
        assert (tmp_path / "f5.png").exists()
        (tmp_path / "f5.png").unlink()
        subprocess.run([sys.executable, str(script)], check=True, cwd="/")
        assert (tmp_path / "f5.png").exists()

    def test_fig7_timing_sidecar(self, tmp_path):
        cfg = write(tmp_path, {"experiment": {"trials": 1, "oracle_grid": 5,
                                              "sweeps": {"d_mr": [600]}}})
        out = tmp_path / "f7.csv"
        assert main(["run", "fig7", "--config", cfg, "--out", str(out)]) == 0
        side = json.loads((tmp_path / "f7.csv.timing.json").read_text())
        assert side["oracle_seconds"] > 0
        assert "seconds" not in out.read_text()

    def test_single(self, tmp_path, capsys):
        cfg = write(tmp_path, {"experiment": {"seed": 3}})
        assert main(["single", "--config", cfg, "--orthogonal"]) == 0
        rec = json.loads(capsys.readouterr().out)
        assert rec["mode"] == "Dedicated"

    def test_validate(self, tmp_path):
        assert main(["validate", "--config", write(tmp_path, {})]) == 0

    @pytest.mark.parametrize("bad", ['{"experiment": {"trials": 0}}', "{oops",
                                     '{"system": {"p_max_dtx_dbm": "high"}}'])
    def test_config_error_exit_code(self, tmp_path, bad):
        cfg = write(tmp_path, bad)
        assert main(["validate", "--config", cfg]) == 2
        assert main(["run", "fig5", "--config", cfg]) == 2

    def test_bad_seed_flag(self, tmp_path):
        assert main(["run", "fig5", "--config", write(tmp_path, {}), "--seed", "-1"]) == 2

    def test_console_script(self, tmp_path):
        r = subprocess.run(["d2d", "validate", "--config", write(tmp_path, {})],
                           capture_output=True, text=True)
        assert r.returncode == 0 and r.stdout.startswith("ok")
