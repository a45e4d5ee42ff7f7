"""Command-line interface: output schemas, exit codes, determinism."""

from __future__ import annotations

import csv
import json
import math
import subprocess
import sys

import pytest

from hardylab import cli
from hardylab.constants import Params, c_ratio, sharp_constant
from hardylab.martingale import ExtremalMartingale, extremal_ratio_exact


def run_cli(capsys, *argv):
    rc = cli.main(list(argv))
    captured = capsys.readouterr()
    return rc, captured.out, captured.err


def run_json(capsys, *argv):
    rc, out, err = run_cli(capsys, *argv)
    return rc, json.loads(out), err


class TestConstant:
    def test_interior_record(self, capsys):
        rc, doc, _ = run_json(
            capsys, "constant", "--p", "1.5", "--m", "1", "--lambda", "2"
        )
        assert rc == cli.EXIT_OK
        assert doc["branch"] == "interior_optimum"
        assert abs(doc["C_pow_p"] - 1.814421415182) <= 1e-9
        assert abs(doc["C"] - doc["C_pow_p"] ** (1.0 / 1.5)) <= 1e-9
        assert abs(doc["gamma"] - 5.0 / 6.0) <= 1e-12
        assert abs(doc["conjectured_value"] - 1.4) <= 1e-12
        assert "alpha_star" in doc and "beta_star" in doc

    def test_p_two_branch(self, capsys):
        rc, doc, _ = run_json(capsys, "constant", "--p", "2", "--m", "0", "--lambda", "2")
        assert rc == cli.EXIT_OK
        assert doc["branch"] == "p_equals_two"
        assert doc["C"] == 3.0

    def test_twelve_digit_rounding(self, capsys):
        _, doc, _ = run_json(capsys, "constant", "--p", "1.5", "--m", "1", "--lambda", "2")
        for key in ("C_pow_p", "C", "gamma", "alpha_star", "beta_star"):
            v = doc[key]
            assert v == float(f"{v:.12g}")

    def test_deterministic_output(self, capsys):
        argv = ("constant", "--p", "1.7", "--m", "0.3", "--lambda", "1.9")
        _, out1, _ = run_cli(capsys, *argv)
        _, out2, _ = run_cli(capsys, *argv)
        assert out1 == out2

    def test_domain_error_exits_one(self, capsys):
        rc, out, err = run_cli(capsys, "constant", "--p", "0.9", "--m", "0", "--lambda", "1")
        assert rc == cli.EXIT_INPUT
        assert out == ""
        assert "p must exceed 1 (got 0.9)" in err

    def test_missing_flag_exits_one(self, capsys):
        with pytest.raises(SystemExit) as ei:
            cli.main(["constant", "--p", "1.5", "--m", "1"])
        assert ei.value.code == cli.EXIT_INPUT

    def test_unknown_command_exits_one(self, capsys):
        with pytest.raises(SystemExit) as ei:
            cli.main(["frobnicate"])
        assert ei.value.code == cli.EXIT_INPUT


class TestRatio:
    def test_benchmark_value(self, capsys):
        rc, doc, _ = run_json(
            capsys,
            "ratio", "--p", "1.5", "--m", "1", "--lambda", "2",
            "--alpha", "0.4", "--beta", "5.7",
        )
        assert rc == cli.EXIT_OK
        want = c_ratio(Params(1.5, 1.0, 2.0), 0.4, 5.7)
        assert abs(doc["c_ratio_pow_p"] - want) <= 1e-11
        assert abs(doc["c_ratio"] - want ** (1.0 / 1.5)) <= 1e-11

    def test_infeasible_pair_exits_one(self, capsys):
        rc, out, err = run_cli(
            capsys,
            "ratio", "--p", "2", "--m", "0", "--lambda", "1",
            "--alpha", "0.7", "--beta", "2",
        )
        assert rc == cli.EXIT_INPUT
        assert "error" in err


class TestSharpness:
    def test_interior_gap_is_tiny(self, capsys):
        rc, doc, _ = run_json(capsys, "sharpness", "--p", "1.5", "--m", "1", "--lambda", "2")
        assert rc == cli.EXIT_OK
        assert abs(doc["gap"]) <= 1e-6
        assert abs(doc["ratio_pow_p_at_argmax"] - doc["C_pow_p"]) <= 1e-6

    def test_closed_form_anchor_pair(self, capsys):
        rc, doc, _ = run_json(capsys, "sharpness", "--p", "4", "--m", "0", "--lambda", "1")
        assert rc == cli.EXIT_OK
        assert abs(doc["ratio_pow_p_at_argmax"] - 3.0) <= 1e-9

    def test_boundary_case_probe(self, capsys):
        rc, doc, _ = run_json(capsys, "sharpness", "--p", "1.5", "--m", "0", "--lambda", "0")
        assert rc == cli.EXIT_OK
        assert doc["C_pow_p"] == 1.0
        assert doc["ratio_pow_p_best_probe"] <= 1.0 + 1e-12
        assert doc["gap"] >= 0.0


class TestMajorize:
    def test_mart_branch_with_conditions(self, capsys):
        rc, doc, _ = run_json(
            capsys,
            "majorize", "--p", "4", "--m", "0", "--lambda", "1", "--points", "100000",
        )
        assert rc == cli.EXIT_OK
        assert doc["branch"] == "mart_m0_l1"
        assert doc["majorization"]["passed"] is True
        assert set(doc["burkholder"]) == {"majorization", "initial", "maximal", "concavity"}

    def test_second_case_passes(self, capsys):
        rc, doc, _ = run_json(
            capsys,
            "majorize", "--p", "1.5", "--m", "1", "--lambda", "2", "--points", "100000",
        )
        assert rc == cli.EXIT_OK
        assert doc["branch"] == "general_second_case"
        assert "burkholder" not in doc

    def test_forced_undersized_constant_exits_three(self, capsys):
        rc, doc, _ = run_json(
            capsys,
            "majorize", "--p", "4", "--m", "0", "--lambda", "1",
            "--force-c", "1.1", "--points", "100000",
        )
        assert rc == cli.EXIT_VERIFY
        assert doc["majorization"]["passed"] is False
        assert doc["majorization"]["witness_x"] is not None

    def test_p_two_exits_two(self, capsys):
        rc, out, err = run_cli(capsys, "majorize", "--p", "2", "--m", "0", "--lambda", "0.5")
        assert rc == cli.EXIT_NUMERIC
        assert "failed" in err


class TestMartingale:
    def test_record_matches_library(self, capsys):
        rc, doc, _ = run_json(
            capsys, "martingale", "--alpha", "-2", "--s", "0.25", "--n", "6", "--p", "4"
        )
        assert rc == cli.EXIT_OK
        want = extremal_ratio_exact(ExtremalMartingale(-2.0, 0.25, 6), 4.0)
        assert abs(doc["ratio_pow_p"] - want) <= 1e-11
        assert doc["beta"] == 2.0
        assert doc["growth_exceeds_one"] is True

    def test_zero_alpha_exits_one(self, capsys):
        rc, out, err = run_cli(
            capsys, "martingale", "--alpha", "0", "--s", "0.25", "--n", "3", "--p", "2"
        )
        assert rc == cli.EXIT_INPUT
        assert "alpha = 0" in err

    def test_fuzz_writes_csv(self, capsys, tmp_path):
        out_path = tmp_path / "fuzz.csv"
        rc, _, _ = run_cli(
            capsys,
            "martingale", "--alpha", "-2", "--s", "0.25", "--n", "3", "--p", "3",
            "--fuzz", "20", "--out", str(out_path),
        )
        assert rc == cli.EXIT_OK
        rows = list(csv.reader(out_path.open()))
        assert rows[0] == ["seed", "ratio", "passed"]
        assert len(rows) == 21
        assert all(r[2] == "true" for r in rows[1:])

    def test_fuzz_flags_bad_constant(self, capsys):
        rc, out, _ = run_cli(
            capsys,
            "martingale", "--alpha", "-2", "--s", "0.25", "--n", "3", "--p", "3",
            "--fuzz", "50", "--c", "0.2",
        )
        assert rc == cli.EXIT_VERIFY
        assert "false" in out


class TestSweep:
    def _write_spec(self, tmp_path, spec):
        path = tmp_path / "spec.json"
        path.write_text(json.dumps(spec))
        return str(path)

    def test_single_cell_matches_constant(self, capsys, tmp_path):
        spec = self._write_spec(tmp_path, {"p": [1.5], "m": [1.0], "lambda": [2.0]})
        rc, out, _ = run_cli(capsys, "sweep", "--spec", spec)
        assert rc == cli.EXIT_OK
        rows = list(csv.DictReader(out.splitlines()))
        assert len(rows) == 1
        row = rows[0]
        assert row["status"] == "ok"
        want = sharp_constant(Params(1.5, 1.0, 2.0)).c_pow_p
        assert abs(float(row["C_pow_p"]) - want) <= 1e-9
        assert float(row["wall_ms"]) > 0.0

    def test_closed_form_cells_are_exact(self, capsys, tmp_path):
        spec = self._write_spec(tmp_path, {"p": [1.5], "m": [0.0], "lambda": [-1.0, 0.0]})
        rc, out, _ = run_cli(capsys, "sweep", "--spec", spec)
        assert rc == cli.EXIT_OK
        rows = list(csv.DictReader(out.splitlines()))
        assert [r["C"] for r in rows] == ["4", "1"]
        assert all(r["branch"] == "lambda_nonpositive" for r in rows)

    def test_empty_grid_emits_header_only(self, capsys, tmp_path):
        spec = self._write_spec(tmp_path, {"p": [], "m": [], "lambda": []})
        rc, out, _ = run_cli(capsys, "sweep", "--spec", spec)
        assert rc == cli.EXIT_OK
        lines = out.strip().splitlines()
        assert len(lines) == 1
        assert lines[0].split(",")[:4] == ["p", "m", "lambda", "gamma"]

    def test_infeasible_cell_is_skipped_with_reason(self, capsys, tmp_path):
        spec = self._write_spec(tmp_path, {"p": [1.5], "m": [-3.0, 1.0], "lambda": [2.0]})
        rc, out, _ = run_cli(capsys, "sweep", "--spec", spec)
        assert rc == cli.EXIT_OK
        rows = list(csv.DictReader(out.splitlines()))
        assert rows[0]["status"] == "skipped"
        assert "m must exceed" in rows[0]["reason"]
        assert rows[1]["status"] == "ok"

    def test_range_axis_expansion(self, capsys, tmp_path):
        spec = self._write_spec(
            tmp_path,
            {"p": {"lo": 1.5, "hi": 2.5, "steps": 3}, "m": [0.0], "lambda": [1.0]},
        )
        rc, out, _ = run_cli(capsys, "sweep", "--spec", spec)
        assert rc == cli.EXIT_OK
        rows = list(csv.DictReader(out.splitlines()))
        assert [float(r["p"]) for r in rows] == [1.5, 2.0, 2.5]

    def test_unknown_opt_key_exits_one(self, capsys, tmp_path):
        spec = self._write_spec(
            tmp_path, {"p": [1.5], "m": [0.0], "lambda": [1.0], "opt": {"bogus": 1}}
        )
        rc, _, err = run_cli(capsys, "sweep", "--spec", spec)
        assert rc == cli.EXIT_INPUT
        assert "unknown opt overrides" in err

    def test_parallel_matches_serial(self, capsys, tmp_path):
        spec = self._write_spec(
            tmp_path, {"p": [1.5, 2.0], "m": [0.0, 1.0], "lambda": [1.0]}
        )
        rc1, out1, _ = run_cli(capsys, "sweep", "--spec", spec)
        rc2, out2, _ = run_cli(capsys, "sweep", "--spec", spec, "--jobs", "2")
        assert rc1 == rc2 == cli.EXIT_OK

        def strip_wall(text):
            rows = list(csv.DictReader(text.splitlines()))
            for r in rows:
                r.pop("wall_ms")
            return rows

        assert strip_wall(out1) == strip_wall(out2)

    def test_json_format(self, capsys, tmp_path):
        spec = self._write_spec(
            tmp_path, {"p": [4.0], "m": [0.0], "lambda": [1.0], "format": "json"}
        )
        rc, out, _ = run_cli(capsys, "sweep", "--spec", spec)
        assert rc == cli.EXIT_OK
        doc = json.loads(out)
        assert abs(doc["rows"][0]["C_pow_p"] - 3.0) <= 1e-9

    def test_output_file(self, capsys, tmp_path):
        spec = self._write_spec(tmp_path, {"p": [1.5], "m": [0.0], "lambda": [0.0]})
        out_path = tmp_path / "rows.csv"
        rc, out, _ = run_cli(capsys, "sweep", "--spec", spec, "--out", str(out_path))
        assert rc == cli.EXIT_OK
        assert out == ""
        assert "lambda_nonpositive" in out_path.read_text()


class TestApply:
    def _indicator_doc(self):
        return {"pieces": [{"coeff_re": 1.0, "coeff_im": 0.0, "exponent": 0.0, "lo": 0.0, "hi": 1.0}]}

    def test_closed_image_of_indicator(self, capsys, tmp_path):
        path = tmp_path / "f.json"
        path.write_text(json.dumps(self._indicator_doc()))
        rc, doc, _ = run_json(
            capsys, "apply", "--input", str(path), "--p", "2", "--m", "0"
        )
        assert rc == cli.EXIT_OK
        segs = doc["image"]["pieces"]
        assert len(segs) == 2
        assert segs[0]["exponent"] == 0.0 and segs[0]["coeff_re"] == 1.0
        assert segs[1]["exponent"] == -1.0 and segs[1]["hi"] == "inf"
        assert abs(doc["input_norm"]["norm"] - 1.0) <= 1e-12
        assert abs(doc["image_norm"]["norm"] - math.sqrt(2.0)) <= 1e-11

    def test_residual_requires_lambda(self, capsys, tmp_path):
        path = tmp_path / "f.json"
        path.write_text(json.dumps(self._indicator_doc()))
        rc, _, err = run_cli(
            capsys, "apply", "--input", str(path), "--p", "2", "--m", "0",
            "--operator", "residual",
        )
        assert rc == cli.EXIT_INPUT
        assert "requires --lambda" in err

    def test_residual_of_indicator(self, capsys, tmp_path):
        path = tmp_path / "f.json"
        path.write_text(json.dumps(self._indicator_doc()))
        rc, doc, _ = run_json(
            capsys, "apply", "--input", str(path), "--p", "2", "--m", "0",
            "--operator", "residual", "--lambda", "1",
        )
        assert rc == cli.EXIT_OK
        segs = doc["image"]["pieces"]
        # 1 - H maps the indicator to -1/t past the support
        assert len(segs) == 1
        assert segs[0]["coeff_re"] == -1.0 and segs[0]["exponent"] == -1.0
        assert abs(doc["image_norm"]["norm"] - 1.0) <= 1e-11

    def test_sampled_grid_input(self, capsys, tmp_path):
        grid = [0.0, 0.5, 1.0, 1.5, 2.0]
        values = [3.0, 3.0, 3.0, 3.0, 3.0]
        path = tmp_path / "g.json"
        path.write_text(json.dumps({"grid": grid, "values_re": values}))
        rc, doc, _ = run_json(
            capsys, "apply", "--input", str(path), "--p", "2", "--m", "1"
        )
        assert rc == cli.EXIT_OK
        assert doc["image"]["values_re"][0] == pytest.approx(2.0, abs=1e-12)
        assert doc["image"]["values_re"][-1] == pytest.approx(2.0, abs=1e-12)
        assert not any(doc["image"]["values_im"])

    def test_divergent_norm_is_reported_not_fatal(self, capsys, tmp_path):
        doc_in = {"pieces": [{"coeff_re": 1.0, "coeff_im": 0.0, "exponent": -0.6, "lo": 0.0, "hi": 1.0}]}
        path = tmp_path / "f.json"
        path.write_text(json.dumps(doc_in))
        rc, doc, _ = run_json(
            capsys, "apply", "--input", str(path), "--p", "2", "--m", "0"
        )
        assert rc == cli.EXIT_OK
        assert doc["input_norm"]["norm"] is None
        assert "reason" in doc["input_norm"]

    def test_bad_schema_exits_one(self, capsys, tmp_path):
        path = tmp_path / "f.json"
        path.write_text(json.dumps({"nope": 1}))
        rc, _, err = run_cli(capsys, "apply", "--input", str(path), "--p", "2", "--m", "0")
        assert rc == cli.EXIT_INPUT
        assert "neither 'pieces' nor 'grid'" in err

    def test_missing_file_exits_one(self, capsys, tmp_path):
        rc, _, err = run_cli(
            capsys, "apply", "--input", str(tmp_path / "absent.json"), "--p", "2", "--m", "0"
        )
        assert rc == cli.EXIT_INPUT

    def test_output_file_round_trip(self, capsys, tmp_path):
        path = tmp_path / "f.json"
        path.write_text(json.dumps(self._indicator_doc()))
        out_path = tmp_path / "image.json"
        rc, out, _ = run_cli(
            capsys, "apply", "--input", str(path), "--p", "2", "--m", "0",
            "--output", str(out_path),
        )
        assert rc == cli.EXIT_OK
        assert out == ""
        doc = json.loads(out_path.read_text())
        from hardylab.hardy import PiecewisePowerFn

        img = PiecewisePowerFn.from_json(doc["image"])
        assert img(0.5) == 1.0


class TestEntryPoint:
    def test_module_invocation(self):
        proc = subprocess.run(
            [sys.executable, "-m", "hardylab.cli", "constant",
             "--p", "2", "--m", "0", "--lambda", "2"],
            capture_output=True, text=True,
        )
        assert proc.returncode == 0
        assert json.loads(proc.stdout)["C"] == 3.0

    def test_exit_code_constants(self):
        assert (cli.EXIT_OK, cli.EXIT_INPUT, cli.EXIT_NUMERIC, cli.EXIT_VERIFY) == (0, 1, 2, 3)
