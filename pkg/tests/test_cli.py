"""End-to-end checks of the command-line interface.

Everything drives main(argv) in-process; one test exercises the
installed console entry point. Runs use small registers and few reads
so the whole module stays fast.
"""

from __future__ import annotations

import csv
import hashlib
import xml.etree.ElementTree as ET

import pytest

from annealdp.cli import (
    EXIT_CAPACITY,
    EXIT_OK,
    EXIT_USAGE,
    EXIT_VERIFY,
    RunConfig,
    main,
    read_config_file,
)
from annealdp.pbf import Poly, read_poly, write_poly

TRUTH = (0.3135, -18.116633445402133, 1.4566642388929352)
ALG1_FIXED2 = (0.3112428489077642, -18.128433813540788, 1.4414371661060008)
COMB6 = (0.3118011784996823, -18.259284102452543, 1.3993152531097488)


def read_summary(path):
    with open(path, newline="") as fh:
        return {row["parameter"]: row for row in csv.DictReader(fh)}


def assert_csv_parses(path):
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    assert len(rows) >= 2
    width = len(rows[0])
    for row in rows[1:]:
        assert len(row) == width


def assert_svg_parses(path):
    root = ET.parse(path).getroot()
    assert root.tag.endswith("svg")


def file_digest(path):
    return hashlib.sha256(open(path, "rb").read()).hexdigest()


class TestConfig:
    def test_defaults_validate(self):
        RunConfig().validate()

    def test_file_parsing(self, tmp_path):
        cfg = tmp_path / "run.cfg"
        cfg.write_text("# comment\nalgorithm = classical\n\nseed=7 # trailing\nj2 = 6\n")
        values = read_config_file(str(cfg))
        assert values == {"algorithm": "classical", "seed": 7, "j2": 6}

    def test_unknown_key_exits_2(self, tmp_path, capsys):
        cfg = tmp_path / "run.cfg"
        cfg.write_text("jj2 = 6\n")
        rc = main(["solve", "--config", str(cfg)])
        assert rc == EXIT_USAGE
        assert "unknown config key" in capsys.readouterr().err

    def test_bad_value_exits_2(self, tmp_path):
        cfg = tmp_path / "run.cfg"
        cfg.write_text("seed = soon\n")
        assert main(["solve", "--config", str(cfg)]) == EXIT_USAGE

    def test_missing_equals_exits_2(self, tmp_path):
        cfg = tmp_path / "run.cfg"
        cfg.write_text("classical\n")
        assert main(["solve", "--config", str(cfg)]) == EXIT_USAGE

    def test_flag_overrides_file(self, tmp_path):
        cfg = tmp_path / "run.cfg"
        cfg.write_text("algorithm = one-shot\nseed = 3\n")
        out = tmp_path / "out"
        rc = main(["solve", "--config", str(cfg), "--algorithm", "classical",
                   "--iterations", "1", "--out-dir", str(out)])
        assert rc == EXIT_OK
        text = (out / "classical_config.txt").read_text()
        assert "algorithm = classical" in text
        assert "seed = 3" in text  # file value survives where no flag given

    def test_bad_algorithm_exits_2(self, tmp_path):
        assert main(["solve", "--config", "/nonexistent.cfg"]) == EXIT_USAGE

    def test_validation_rejections(self):
        with pytest.raises(Exception):
            RunConfig(algorithm="annealer").validate()
        for bad in (
            RunConfig(keep_fraction=0.0),
            RunConfig(reversal=1.0),
            RunConfig(j1=0),
            RunConfig(executions=0),
            RunConfig(bias=-0.1),
            RunConfig(anneal_time=1.0),
            RunConfig(k_count=1),
        ):
            with pytest.raises(Exception):
                bad.validate()

    def test_unknown_flag_exits_2(self):
        with pytest.raises(SystemExit) as ei:
            main(["solve", "--bogus"])
        assert ei.value.code == 2

    def test_emitted_config_round_trips(self, tmp_path):
        out1 = tmp_path / "a"
        out2 = tmp_path / "b"
        assert main(["solve", "--algorithm", "one-shot", "--j1", "3", "--j2", "3",
                     "--j3", "3", "--reads", "20", "--out-dir", str(out1)]) == EXIT_OK
        assert main(["solve", "--config", str(out1 / "one_shot_config.txt"),
                     "--out-dir", str(out2)]) == EXIT_OK
        assert (out1 / "one_shot_summary.csv").read_bytes() == \
            (out2 / "one_shot_summary.csv").read_bytes()


class TestSolve:
    def test_classical_two_iterations(self, tmp_path, capsys):
        out = tmp_path / "out"
        rc = main(["solve", "--algorithm", "classical", "--iterations", "2",
                   "--out-dir", str(out)])
        assert rc == EXIT_OK
        summary = read_summary(out / "classical_summary.csv")
        for name, want in zip(("x1", "x2", "x3"), ALG1_FIXED2):
            assert float(summary[name]["mean_estimate"]) == pytest.approx(want, rel=1e-12)
        # single execution: iteration log carries per-iteration history
        with open(out / "classical_iterations.csv", newline="") as fh:
            rows = list(csv.DictReader(fh))
        assert [r["iteration"] for r in rows] == ["1", "2"]
        assert "classical" in capsys.readouterr().out
        assert_csv_parses(out / "classical_iterations.csv")
        assert_svg_parses(out / "classical_errors.svg")

    def test_combinatorial_small_matches_joint_argmin(self, tmp_path):
        out = tmp_path / "out"
        rc = main(["solve", "--algorithm", "combinatorial", "--j2", "6", "--j3", "6",
                   "--out-dir", str(out)])
        assert rc == EXIT_OK
        summary = read_summary(out / "combinatorial_summary.csv")
        for name, want in zip(("x1", "x2", "x3"), COMB6):
            assert float(summary[name]["mean_estimate"]) == pytest.approx(want, rel=1e-12)

    def test_hybrid_oracle_agrees_with_exhaustive(self, tmp_path):
        out = tmp_path / "out"
        rc = main(["solve", "--algorithm", "hybrid", "--engine", "greedy",
                   "--j2", "6", "--j3", "6", "--out-dir", str(out)])
        assert rc == EXIT_OK
        summary = read_summary(out / "hybrid_summary.csv")
        for name, want in zip(("x1", "x2", "x3"), COMB6):
            assert float(summary[name]["mean_estimate"]) == pytest.approx(want, rel=1e-12)

    def test_init_true_noop(self, tmp_path):
        out = tmp_path / "out"
        rc = main(["solve", "--algorithm", "classical", "--init-true",
                   "--out-dir", str(out)])
        assert rc == EXIT_OK
        summary = read_summary(out / "classical_summary.csv")
        for name in ("x1", "x2", "x3"):
            assert float(summary[name]["mean_pct_error"]) == 0.0

    def test_zero_iterations_needs_init_true(self, tmp_path):
        rc = main(["solve", "--algorithm", "classical", "--iterations", "0",
                   "--out-dir", str(tmp_path)])
        assert rc == EXIT_USAGE

    def test_one_shot_small(self, tmp_path, capsys):
        out = tmp_path / "out"
        rc = main(["solve", "--algorithm", "one-shot", "--j1", "3", "--j2", "3",
                   "--j3", "3", "--reads", "30", "--cycles", "2",
                   "--out-dir", str(out)])
        assert rc == EXIT_OK
        text = capsys.readouterr().out
        assert "per-anneal time: 69.0 us" in text
        summary = read_summary(out / "one_shot_summary.csv")
        assert 0.0 < float(summary["x1"]["mean_estimate"]) < 1.0

    def test_multi_anneal_greedy_small(self, tmp_path):
        out = tmp_path / "out"
        rc = main(["solve", "--algorithm", "multi-anneal", "--engine", "greedy",
                   "--reads", "2", "--j1", "3", "--j2", "3", "--j3", "3",
                   "--out-dir", str(out)])
        assert rc == EXIT_OK

    def test_merged_statevector_rejected(self, tmp_path, capsys):
        rc = main(["solve", "--algorithm", "one-shot", "--engine", "statevector",
                   "--out-dir", str(tmp_path)])
        assert rc == EXIT_USAGE
        assert "statevector" in capsys.readouterr().err

    def test_executions_logged_per_run(self, tmp_path):
        out = tmp_path / "out"
        rc = main(["solve", "--algorithm", "one-shot", "--j1", "2", "--j2", "2",
                   "--j3", "2", "--reads", "15", "--executions", "3",
                   "--out-dir", str(out)])
        assert rc == EXIT_OK
        with open(out / "one_shot_iterations.csv", newline="") as fh:
            rows = list(csv.DictReader(fh))
        assert len(rows) == 3
        summary = read_summary(out / "one_shot_summary.csv")
        assert float(summary["x1"]["sd_estimate"]) >= 0.0

    def test_same_seed_identical_artifacts(self, tmp_path):
        out = tmp_path / "out"
        argv = ["solve", "--algorithm", "one-shot", "--j1", "3", "--j2", "3",
                "--j3", "3", "--reads", "25", "--out-dir", str(out)]
        assert main(argv) == EXIT_OK
        first = {p.name: file_digest(p) for p in out.iterdir()}
        assert main(argv) == EXIT_OK
        second = {p.name: file_digest(p) for p in out.iterdir()}
        assert first == second

    def test_different_seed_changes_estimates(self, tmp_path):
        # needs the full-width grid: tiny registers quantize different
        # noise realizations onto the same handful of grid points
        outs = []
        for seed in ("0", "1"):
            out = tmp_path / seed
            assert main(["solve", "--algorithm", "one-shot", "--reads", "40",
                         "--seed", seed, "--out-dir", str(out)]) == EXIT_OK
            outs.append(read_summary(out / "one_shot_summary.csv"))
        est = [tuple(o[n]["mean_estimate"] for n in ("x1", "x2", "x3")) for o in outs]
        assert est[0] != est[1]


class TestQuadratize:
    def cubic_file(self, tmp_path):
        path = tmp_path / "cubic.poly"
        z = Poly.variable
        poly = -2.5 * (z(0) * z(1) * z(2)) + z(1) * z(3) + 0.75 * z(2) - 0.25
        write_poly(poly, str(path))
        return path, poly

    def test_round_trip_and_verify(self, tmp_path, capsys):
        path, poly = self.cubic_file(tmp_path)
        rc = main(["quadratize", str(path), "--verify"])
        assert rc == EXIT_OK
        text = capsys.readouterr().out
        assert "equivalent on all 2^4 assignments" in text
        assert "aux" in text
        reduced = read_poly(str(path) + ".quad")
        assert reduced.degree <= 2

    def test_explicit_out_path(self, tmp_path):
        path, _ = self.cubic_file(tmp_path)
        out = tmp_path / "reduced.poly"
        assert main(["quadratize", str(path), "--out", str(out)]) == EXIT_OK
        assert out.exists()

    def test_verify_capacity_guard(self, tmp_path, capsys):
        path = tmp_path / "wide.poly"
        z = Poly.variable
        poly = sum((z(i) * z(i + 1) * z(i + 2) for i in range(11)), Poly({}))
        write_poly(poly, str(path))
        rc = main(["quadratize", str(path), "--verify"])
        assert rc == EXIT_CAPACITY
        assert "2^13" in capsys.readouterr().err

    def test_parse_error_exits_2(self, tmp_path):
        path = tmp_path / "bad.poly"
        path.write_text("3 x0 x1 banana\n")
        assert main(["quadratize", str(path)]) == EXIT_USAGE


class TestAppendixB:
    def test_greedy_rows(self, tmp_path, capsys):
        out = tmp_path / "out"
        rc = main(["appendix-b", "--engine", "greedy", "--out-dir", str(out)])
        assert rc == EXIT_OK
        with open(out / "appendix_b.csv", newline="") as fh:
            rows = {(r["model"], int(r["cycles"])): r for r in csv.DictReader(fh)}
        assert rows[("single-activation", 1)]["verdict"] == "incorrect"
        assert rows[("single-activation", 1)]["modal_state"] == "01"
        assert rows[("single-activation", 2)]["verdict"] == "correct"
        assert rows[("single-activation", 2)]["modal_state"] == "11"
        assert rows[("two-component", 1)]["verdict"] == "incorrect"
        assert rows[("two-component", 2)]["verdict"] == "correct"
        assert float(rows[("two-component", 2)]["energy"]) == -1.0

    def test_all_engines_share_improves_with_cycles(self, tmp_path):
        out = tmp_path / "out"
        rc = main(["appendix-b", "--reads", "400", "--out-dir", str(out)])
        assert rc == EXIT_OK
        with open(out / "appendix_b.csv", newline="") as fh:
            rows = list(csv.DictReader(fh))
        assert len(rows) == 12
        by_key = {(r["model"], r["engine"], int(r["cycles"])): float(r["ground_share"])
                  for r in rows}
        for model in ("single-activation", "two-component"):
            for engine in ("greedy", "heuristic", "statevector"):
                assert by_key[(model, engine, 2)] > by_key[(model, engine, 1)] or \
                    by_key[(model, engine, 1)] == 1.0


class TestSimulate:
    def test_true_policy_coincides(self, tmp_path, capsys):
        out = tmp_path / "out"
        rc = main(["simulate", "--true", "--out-dir", str(out)])
        assert rc == EXIT_OK
        assert "max relative gap 0.0000%" in capsys.readouterr().out
        assert_csv_parses(out / "consumption.csv")
        assert_svg_parses(out / "consumption.svg")

    def test_explicit_x1(self, tmp_path, capsys):
        out = tmp_path / "out"
        rc = main(["simulate", "--x1", "0.31", "--periods", "6",
                   "--out-dir", str(out)])
        assert rc == EXIT_OK
        with open(out / "consumption.csv", newline="") as fh:
            rows = list(csv.DictReader(fh))
        assert len(rows) == 6
        assert rows[0]["z_index"] == "2"
        assert rows[1]["z_index"] == "0"

    def test_from_summary(self, tmp_path):
        out = tmp_path / "solve"
        assert main(["solve", "--algorithm", "classical", "--iterations", "2",
                     "--out-dir", str(out)]) == EXIT_OK
        sim_out = tmp_path / "sim"
        rc = main(["simulate", "--from-summary",
                   str(out / "classical_summary.csv"), "--out-dir", str(sim_out)])
        assert rc == EXIT_OK

    def test_missing_policy_exits_2(self, tmp_path, capsys):
        rc = main(["simulate", "--out-dir", str(tmp_path)])
        assert rc == EXIT_USAGE
        assert "--x1" in capsys.readouterr().err

    def test_summary_without_x1_exits_2(self, tmp_path):
        bad = tmp_path / "s.csv"
        bad.write_text("parameter,mean_estimate\nx9,0.5\n")
        assert main(["simulate", "--from-summary", str(bad)]) == EXIT_USAGE


class TestBench:
    def test_worked_total_present(self, tmp_path, capsys):
        out = tmp_path / "out"
        rc = main(["bench", "--vars", "8", "--out-dir", str(out)])
        assert rc == EXIT_OK
        assert "23000" in capsys.readouterr().out
        with open(out / "bench.csv", newline="") as fh:
            rows = {(int(r["reads"]), float(r["t_anneal_us"])): float(r["total_us"])
                    for r in csv.DictReader(fh)}
        assert rows[(100, 20.0)] == 23000.0
        assert rows[(1, 5.0)] == 9125.0


class TestEntryPoint:
    def test_console_script_help(self):
        import subprocess
        import sys

        proc = subprocess.run([sys.executable, "-m", "annealdp.cli", "--help"],
                              capture_output=True, text=True)
        assert proc.returncode == 0
        for name in ("solve", "quadratize", "appendix-b", "simulate", "bench"):
            assert name in proc.stdout
