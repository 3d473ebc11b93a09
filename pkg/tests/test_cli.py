import json
import math

import pytest

from belltest import lhv
from belltest.cli import main


def run_cli(capsys, argv):
    code = main(argv)
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def run_json(capsys, argv):
    code, out, err = run_cli(capsys, argv)
    assert code == 0, f"stderr: {err}"
    return json.loads(out)


class TestVerifyTheorem:
    def test_exit_zero_and_payload(self, capsys):
        code, out, _ = run_cli(capsys, ["verify-theorem"])
        assert code == 0
        payload = json.loads(out)
        assert payload["min_functional_value"] == -1
        assert payload["all_satisfied"] is True
        assert payload["n_assignments"] == 81
        assert len(payload["functional_values"]) == 81
        case_iii = payload["case_bounds"][2]
        assert case_iii == {
            "a_prime": "+", "b_prime": "-", "min_three_term": -3, "expected": -3,
        }

    def test_byte_stable(self, capsys):
        _, first, _ = run_cli(capsys, ["verify-theorem"])
        _, second, _ = run_cli(capsys, ["verify-theorem"])
        assert first == second


class TestEval:
    def test_detection_sym_undamped(self, capsys):
        payload = run_json(capsys, [
            "eval", "--ineq", "detection-sym", "--source", "qm-real",
            "--eta", "0.2", "--phi", "30", "--force-F", "1",
        ])
        assert payload["lhs"] == pytest.approx(-1.5, abs=1e-12)
        assert payload["violation_factor"] == pytest.approx(1.5, abs=1e-12)
        assert payload["violated"] is True
        assert payload["inputs"]["eta"] == 0.2

    def test_detection_undamped(self, capsys):
        payload = run_json(capsys, [
            "eval", "--ineq", "detection", "--source", "qm-real", "--force-F", "1",
        ])
        assert payload["lhs"] == pytest.approx(-1.5, abs=1e-12)

    def test_bell65_diffs(self, capsys):
        payload = run_json(capsys, [
            "eval", "--ineq", "bell65", "--source", "qm-ideal",
            "--diffs", "120,120,120",
        ])
        assert payload["lhs"] == pytest.approx(-1.5, abs=1e-12)

    def test_ternary_default_quad(self, capsys):
        payload = run_json(capsys, ["eval", "--ineq", "ternary"])
        assert payload["lhs"] == pytest.approx(-1.5, abs=1e-12)

    def test_chsh_optimal(self, capsys):
        payload = run_json(capsys, [
            "eval", "--ineq", "chsh", "--source", "qm-ideal",
            "--diffs", "22.5,22.5,22.5,67.5",
        ])
        assert payload["violation_factor"] == pytest.approx(math.sqrt(2), abs=1e-9)

    def test_csv_format(self, capsys):
        code, out, _ = run_cli(capsys, [
            "eval", "--ineq", "ternary", "--format", "csv",
        ])
        assert code == 0
        lines = out.strip().split("\n")
        assert lines[0] == "name,lhs,bound,margin,violation_factor,violated"
        assert lines[1].startswith("ternary,")

    def test_angles_and_diffs_conflict(self, capsys):
        code, _, err = run_cli(capsys, [
            "eval", "--ineq", "ternary", "--angles", "0,1,2,3", "--diffs", "1,2,3",
        ])
        assert code == 1
        assert "mutually exclusive" in err

    def test_source_mismatch(self, capsys):
        code, _, err = run_cli(capsys, [
            "eval", "--ineq", "detection", "--source", "qm-ideal",
        ])
        assert code == 1
        assert "qm-real" in err

    def test_bad_ineq_flag(self, capsys):
        code, _, _ = run_cli(capsys, ["eval", "--ineq", "nope"])
        assert code == 1

    def test_asymmetric_quad_rejected_for_symmetric_form(self, capsys):
        code, _, err = run_cli(capsys, [
            "eval", "--ineq", "ternary-sym", "--angles", "0,120,30,30",
        ])
        assert code == 1
        assert "shared cross difference" in err


class TestMc:
    COMMON = [
        "mc", "--pairs", "200000", "--seed", "7",
        "--eta", "0.2", "--phi", "30", "--force-F", "1",
    ]

    def test_runs_and_reports(self, capsys):
        payload = run_json(capsys, self.COMMON)
        assert payload["name"] == "detection-sym"
        assert payload["std_error"] > 0
        assert abs(payload["lhs"] - (-1.5)) < 5 * payload["std_error"]
        assert payload["inputs"]["seed"] == 7

    def test_deterministic_output(self, capsys):
        _, first, _ = run_cli(capsys, self.COMMON)
        _, second, _ = run_cli(capsys, self.COMMON)
        assert first == second

    def test_workers_do_not_change_output(self, capsys):
        _, first, _ = run_cli(capsys, self.COMMON)
        _, second, _ = run_cli(capsys, self.COMMON + ["--workers", "4"])
        first_payload = json.loads(first)
        second_payload = json.loads(second)
        assert first_payload["lhs"] == second_payload["lhs"]

    def test_counter_and_manifest_files(self, capsys, tmp_path):
        counters = tmp_path / "counts.csv"
        manifest = tmp_path / "run.txt"
        argv = self.COMMON + ["--counters", str(counters), "--manifest", str(manifest)]
        code, _, _ = run_cli(capsys, argv)
        assert code == 0
        lines = counters.read_text().strip().split("\n")
        assert lines[0] == "pair,cell,count"
        assert len(lines) == 1 + 36
        first_bytes = counters.read_bytes()
        run_cli(capsys, argv)
        assert counters.read_bytes() == first_bytes
        assert manifest.read_text().startswith("belltest run manifest\n")

    def test_pairs_zero_rejected(self, capsys):
        code, _, err = run_cli(capsys, ["mc", "--pairs", "0"])
        assert code == 1
        assert "--pairs" in err

    def test_env_seed_honored(self, capsys, monkeypatch):
        monkeypatch.setenv("BELLTEST_SEED", "7")
        no_seed_argv = [
            "mc", "--pairs", "200000", "--eta", "0.2", "--phi", "30", "--force-F", "1",
        ]
        env_payload = run_json(capsys, no_seed_argv)
        explicit_payload = run_json(capsys, self.COMMON)
        assert env_payload["lhs"] == explicit_payload["lhs"]
        assert env_payload["inputs"]["seed"] == 7

    def test_explicit_seed_beats_env(self, capsys, monkeypatch):
        monkeypatch.setenv("BELLTEST_SEED", "99")
        payload = run_json(capsys, self.COMMON)
        assert payload["inputs"]["seed"] == 7

    def test_bad_env_seed(self, capsys, monkeypatch):
        monkeypatch.setenv("BELLTEST_SEED", "not-a-number")
        code, _, err = run_cli(capsys, ["mc", "--pairs", "1000"])
        assert code == 1
        assert "BELLTEST_SEED" in err

    def test_ideal_source(self, capsys):
        payload = run_json(capsys, [
            "mc", "--pairs", "100000", "--seed", "3", "--source", "qm-ideal",
        ])
        assert abs(payload["lhs"] - (-1.5)) < 5 * max(payload["std_error"], 1e-9)

    def test_lhv_source(self, capsys, tmp_path):
        path = tmp_path / "uniform.lhv"
        lhv.save_model(lhv.FourAxisModel.uniform(), path)
        payload = run_json(capsys, [
            "mc", "--pairs", "100000", "--seed", "3", "--source", "lhv",
            "--model", str(path),
        ])
        assert payload["margin"] >= -3 * payload["std_error"]

    def test_lhv_source_requires_model(self, capsys):
        code, _, err = run_cli(capsys, ["mc", "--source", "lhv", "--pairs", "10"])
        assert code == 1
        assert "--model" in err

    def test_corrupt_model_file(self, capsys, tmp_path):
        path = tmp_path / "bad.lhv"
        path.write_text("++++ 1.0\n")
        code, _, err = run_cli(capsys, [
            "mc", "--source", "lhv", "--model", str(path), "--pairs", "10",
        ])
        assert code == 1
        assert "missing" in err


class TestScan:
    def test_coarse_scan(self, capsys):
        payload = run_json(capsys, ["scan", "--step", "15", "--rounds", "3"])
        assert payload["best_lhs"] == pytest.approx(-1.5, abs=1e-4)
        assert payload["best_factor"] >= 1.4999

    def test_surface_csv(self, capsys, tmp_path):
        surface = tmp_path / "surface.csv"
        code, _, _ = run_cli(capsys, [
            "scan", "--step", "45", "--rounds", "0", "--surface", str(surface),
        ])
        assert code == 0
        lines = surface.read_text().strip().split("\n")
        assert lines[0] == "a,b,a_prime,b_prime,lhs"
        assert len(lines) == 1 + 4 ** 3

    def test_step_out_of_range(self, capsys):
        code, _, err = run_cli(capsys, ["scan", "--step", "60"])
        assert code == 1
        assert "--step" in err

    def test_detection_scan(self, capsys):
        payload = run_json(capsys, [
            "scan", "--ineq", "detection", "--source", "qm-real",
            "--step", "15", "--rounds", "3", "--force-F", "1",
        ])
        assert payload["best_lhs"] == pytest.approx(-1.5, abs=1e-4)


class TestParsing:
    def test_unknown_command(self, capsys):
        code, _, _ = run_cli(capsys, ["frobnicate"])
        assert code == 1

    def test_help_exits_zero(self, capsys):
        code, out, _ = run_cli(capsys, ["--help"])
        assert code == 0
        assert "belltest" in out

    def test_bad_angles_count(self, capsys):
        code, _, err = run_cli(capsys, ["eval", "--ineq", "ternary", "--angles", "1,2"])
        assert code == 1
        assert "--angles" in err

    def test_eval_and_scan_byte_stable(self, capsys):
        for argv in (
            ["eval", "--ineq", "detection", "--source", "qm-real"],
            ["scan", "--step", "20", "--rounds", "2"],
        ):
            _, first, _ = run_cli(capsys, argv)
            _, second, _ = run_cli(capsys, argv)
            assert first == second

    def test_module_entry_point(self):
        import subprocess
        import sys

        result = subprocess.run(
            [sys.executable, "-m", "belltest", "verify-theorem"],
            capture_output=True, text=True,
        )
        assert result.returncode == 0
        assert '"min_functional_value": -1' in result.stdout
