"""End-to-end command line checks via subprocess (exit codes, files, determinism)."""

import json
import os
import subprocess
import sys

import pytest


def run_cli(*args, cwd=None, env_extra=None):
    env = dict(os.environ)
    if env_extra:
        env.update(env_extra)
    return subprocess.run(
        [sys.executable, "-m", "twolevel.cli", *args],
        capture_output=True,
        text=True,
        cwd=cwd,
        env=env,
        timeout=300,
    )


def kv_lines(stdout):
    out = {}
    for line in stdout.strip().split("\n"):
        key, _, value = line.partition(" = ")
        out[key] = value
    return out


class TestParamsCommand:
    def test_default_instance_is_critical(self):
        proc = run_cli("params")
        assert proc.returncode == 0
        got = kv_lines(proc.stdout)
        assert got["n"] == "100" and got["c2"] == "50"
        assert got["capacity_ratio r"] == "0.5"
        assert got["critical_ratio r_c"] == "0.5"
        assert got["regime"] == "Critical"
        assert got["minimal_c2_without_congestion"] == "51"
        assert "omitted" in got["fixed_point"]

    def test_overloaded_instance_reports_fixed_point(self):
        proc = run_cli("params", "--c2", "30")
        got = kv_lines(proc.stdout)
        assert got["regime"] == "Overloaded"
        assert got["overloaded_fixed_point (y_star, y)"] == "(0.4, 0.3)"
        assert got["blocked_fraction_limit"] == "0.4"

    def test_underloaded_instance_reports_fixed_point(self):
        proc = run_cli("params", "--c2", "70")
        got = kv_lines(proc.stdout)
        assert got["regime"] == "Underloaded"
        assert got["underloaded_fixed_point (y, z)"] == "(0.5, 0.2)"

    def test_flags_override_config_file(self, tmp_path):
        cfg = tmp_path / "instance.json"
        cfg.write_text(json.dumps({"c2": 30}))
        proc = run_cli("params", "--config", str(cfg), "--c2", "70")
        assert kv_lines(proc.stdout)["regime"] == "Underloaded"

    def test_unknown_config_key_rejected(self, tmp_path):
        cfg = tmp_path / "instance.json"
        cfg.write_text(json.dumps({"c_two": 30}))
        proc = run_cli("params", "--config", str(cfg))
        assert proc.returncode == 2
        assert proc.stderr.startswith("error:")

    def test_dump_config_round_trips(self, tmp_path):
        dump = run_cli("params", "--c2", "30", "--dump-config")
        assert dump.returncode == 0
        cfg = tmp_path / "dumped.json"
        cfg.write_text(dump.stdout)
        via_config = run_cli("params", "--config", str(cfg))
        direct = run_cli("params", "--c2", "30")
        assert via_config.stdout == direct.stdout


class TestSimulateCommand:
    def test_writes_trajectories_and_manifest(self, tmp_path):
        proc = run_cli(
            "simulate", "--n", "5", "--c2", "2", "--horizon", "5", "--seed", "42",
            "--replications", "2", "--out", str(tmp_path),
        )
        assert proc.returncode == 0
        for seed in (42, 43):
            lines = (tmp_path / f"sim_main_seed{seed}.csv").read_text().split("\n")
            assert lines[0] == "t,y_star,y,z"
            assert lines[1] == "0,0,0,0"
        manifest = json.loads((tmp_path / "sim_main_seed42_manifest.json").read_text())
        assert manifest["seeds"] == [42, 43]
        assert manifest["files"] == ["sim_main_seed42.csv", "sim_main_seed43.csv"]
        assert manifest["process"] == "main"
        assert manifest["config"]["n"] == 5

    def test_zero_horizon_single_row(self, tmp_path):
        run_cli(
            "simulate", "--n", "4", "--c2", "2", "--horizon", "0", "--seed", "1",
            "--out", str(tmp_path),
        )
        lines = (tmp_path / "sim_main_seed1.csv").read_text().strip().split("\n")
        assert len(lines) == 2

    def test_repeat_run_byte_identical(self, tmp_path):
        (tmp_path / "a").mkdir()
        (tmp_path / "b").mkdir()
        for sub in ("a", "b"):
            run_cli(
                "simulate", "--n", "8", "--c2", "3", "--horizon", "10", "--seed", "7",
                "--out", str(tmp_path / sub),
            )
        name = "sim_main_seed7.csv"
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()

    def test_aux_process_columns(self, tmp_path):
        proc = run_cli(
            "simulate", "--process", "aux-noblock", "--init", "0,0", "--n", "6",
            "--c2", "2", "--horizon", "5", "--seed", "2", "--out", str(tmp_path),
        )
        assert proc.returncode == 0
        lines = (tmp_path / "sim_aux-noblock_seed2.csv").read_text().split("\n")
        assert lines[0] == "t,y,z"

    def test_missing_seed_is_config_error(self, tmp_path):
        proc = run_cli("simulate", "--n", "4", "--c2", "2", "--out", str(tmp_path))
        assert proc.returncode == 2
        assert "seed" in proc.stderr


class TestFluidCommand:
    def test_underloaded_ode_reaches_fixed_point(self, tmp_path):
        proc = run_cli(
            "fluid", "--system", "underloaded-ode", "--n", "100", "--c2", "70",
            "--horizon", "50", "--out", str(tmp_path),
        )
        assert proc.returncode == 0
        lines = (tmp_path / "fluid_underloaded-ode.csv").read_text().strip().split("\n")
        assert lines[0] == "t,y_star,y,z,u"
        last = [float(v) for v in lines[-1].split(",")]
        assert last[0] == pytest.approx(50.0)
        assert last[1] == 0.0
        assert last[2] == pytest.approx(0.5, abs=1e-6)
        assert last[3] == pytest.approx(0.2, abs=1e-6)
        assert last[4] == 0.0

    def test_saturated_regulator_monotone(self, tmp_path):
        run_cli(
            "fluid", "--system", "aux-saturated", "--n", "100", "--c2", "30",
            "--horizon", "10", "--out", str(tmp_path),
        )
        rows = (tmp_path / "fluid_aux-saturated.csv").read_text().strip().split("\n")[1:]
        u = [float(r.split(",")[4]) for r in rows]
        assert u[0] == 0.0
        assert all(b >= a for a, b in zip(u, u[1:]))
        assert u[-1] > 0.1

    def test_regime_mismatch_exits_2(self, tmp_path):
        proc = run_cli(
            "fluid", "--system", "overloaded-ode", "--n", "100", "--c2", "70",
            "--out", str(tmp_path),
        )
        assert proc.returncode == 2
        assert "overloaded-ode" in proc.stderr

    def test_bad_init_shape_rejected(self, tmp_path):
        proc = run_cli(
            "fluid", "--system", "hybrid", "--init", "0,0", "--n", "100",
            "--c2", "30", "--out", str(tmp_path),
        )
        assert proc.returncode == 2


class TestExperimentCommand:
    def test_oracle_check_passes_and_writes_report(self, tmp_path):
        proc = run_cli(
            "experiment", "--experiment", "oracle-check", "--n", "2", "--c2", "1",
            "--horizon", "1100", "--seed", "5", "--out", str(tmp_path),
        )
        assert proc.returncode == 0
        assert proc.stdout.startswith("oracle_check: PASS\n")
        assert "  all_summaries_within_3se: ok\n" in proc.stdout
        report = json.loads((tmp_path / "oracle_check_seed5.json").read_text())
        assert report["passed"] is True
        assert (tmp_path / "oracle_check_seed5.csv").exists()

    def test_failing_verdict_exits_1(self, tmp_path):
        proc = run_cli(
            "experiment", "--experiment", "no-blocking", "--n", "20", "--c2", "14",
            "--n-list", "20", "--horizon", "25", "--burn-in", "10",
            "--replications", "4", "--seed", "3", "--out", str(tmp_path),
        )
        assert proc.returncode == 1
        assert proc.stdout.startswith("no_blocking: FAIL\n")

    def test_unknown_experiment_rejected_by_parser(self, tmp_path):
        proc = run_cli(
            "experiment", "--experiment", "warp", "--seed", "0", "--out", str(tmp_path)
        )
        assert proc.returncode == 2
        assert "invalid choice" in proc.stderr

    def test_reports_identical_across_runs_and_workers(self, tmp_path):
        outs = {}
        for tag, workers in (("a", "1"), ("b", "1"), ("c", "2")):
            d = tmp_path / tag
            d.mkdir()
            run_cli(
                "experiment", "--experiment", "convergence", "--target",
                "aux-saturated", "--n", "100", "--c2", "30", "--n-list", "15,30",
                "--horizon", "6", "--burn-in", "2", "--replications", "4",
                "--seed", "11", "--workers", workers, "--out", str(d),
            )
            outs[tag] = (d / "convergence_aux-saturated_seed11.json").read_bytes()
        assert outs["a"] == outs["b"] == outs["c"]

    def test_out_dir_env_var_honored(self, tmp_path):
        proc = run_cli(
            "experiment", "--experiment", "oracle-check", "--n", "1", "--c2", "1",
            "--horizon", "50", "--seed", "2",
            cwd=str(tmp_path), env_extra={"TWOLEVEL_OUT": str(tmp_path / "nested")},
        )
        assert proc.returncode in (0, 1)
        assert (tmp_path / "nested" / "oracle_check_seed2.json").exists()
