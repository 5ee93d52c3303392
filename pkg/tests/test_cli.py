"""Black-box tests of the command-line interface.

Every test drives main(argv) directly and inspects exit codes, stdout, or
written files.  Closed-form targets: the kink interval [1, 3] and the
cosine-sum value (-cos x)+ + (-cos y)+ at grid nodes.
"""
import json
import math

import numpy as np
import pytest

from convexgap import cli
from convexgap.errors import SamplingError


def run_cli(*argv):
    return cli.main(list(argv))


class TestIndexCommand:
    def test_json_output(self, capsys):
        code = run_cli("index", "--function", "kink", "--point", "0")
        assert code == 0
        payload = json.loads(capsys.readouterr().out)
        assert payload["point"] == [0.0]
        assert payload["loc_low"] == pytest.approx(1.0, abs=1e-9)
        assert payload["loc_high"] == pytest.approx(3.0, abs=1e-9)
        assert payload["nloc_low"] == pytest.approx(1.0, abs=1e-9)
        assert payload["rho"] == pytest.approx(3.0, abs=1e-9)
        assert payload["exact"] is True

    def test_csv_format(self, capsys):
        code = run_cli("index", "--function", "mixed", "--point", "0",
                       "--format", "csv")
        assert code == 0
        lines = capsys.readouterr().out.splitlines()
        assert lines[0] == ("x1,loc_low,loc_high,nloc_low,nloc_high,"
                            "conv_low,conv_high,rho,exact,approximate_nloc")
        cells = lines[1].split(",")
        assert float(cells[1]) == pytest.approx(0.0, abs=1e-9)
        assert float(cells[2]) == pytest.approx(1.0, abs=1e-9)
        assert cells[8] == "1"  # exact flag rendered as 1/0

    def test_params_key_value(self, capsys):
        code = run_cli("index", "--function", "pw_quad",
                       "--params", "a=-2,b=-5", "--point", "0")
        assert code == 0
        payload = json.loads(capsys.readouterr().out)
        assert payload["loc_low"] == pytest.approx(2.0, abs=1e-9)
        assert payload["loc_high"] == pytest.approx(5.0, abs=1e-9)

    def test_params_json_matrix(self, capsys):
        code = run_cli("index", "--function", "quadratic",
                       "--params", '{"matrix": [[0.0, 1.0], [1.0, 0.0]]}',
                       "--point", "0,0")
        assert code == 0
        payload = json.loads(capsys.readouterr().out)
        assert payload["loc_low"] == pytest.approx(1.0, abs=1e-9)
        assert payload["nloc_low"] == pytest.approx(0.5, abs=1e-9)

    def test_output_file(self, tmp_path, capsys):
        out = tmp_path / "point.json"
        code = run_cli("index", "--function", "kink", "--point", "0",
                       "--output", str(out))
        assert code == 0
        assert capsys.readouterr().out == ""
        payload = json.loads(out.read_text())
        assert payload["loc_high"] == pytest.approx(3.0, abs=1e-9)


class TestInputErrors:
    def test_unknown_family(self, capsys):
        assert run_cli("index", "--function", "nope", "--point", "0") == 2
        assert "error:" in capsys.readouterr().err

    def test_missing_point(self):
        assert run_cli("index", "--function", "kink") == 2

    def test_malformed_point(self):
        assert run_cli("index", "--function", "kink", "--point", "x") == 2

    def test_wrong_point_dimension(self):
        assert run_cli("index", "--function", "kink", "--point", "0,1") == 2

    def test_bad_params(self):
        assert run_cli("index", "--function", "pw_quad",
                       "--params", "a", "--point", "0") == 2

    def test_missing_config_file(self):
        assert run_cli("index", "--config", "/no/such/config.json",
                       "--function", "kink", "--point", "0") == 2

    def test_unknown_config_key(self, tmp_path):
        cfg = tmp_path / "bad.json"
        cfg.write_text(json.dumps({"functions": {"family": "kink"}}))
        assert run_cli("index", "--config", str(cfg), "--point", "0") == 2

    def test_no_function_selected(self):
        assert run_cli("index", "--point", "0") == 2

    def test_argparse_error_maps_to_two(self, capsys):
        assert run_cli("index", "--function", "kink", "--point", "0",
                       "--format", "xml") == 2
        capsys.readouterr()

    def test_no_subcommand(self, capsys):
        assert run_cli() == 2
        capsys.readouterr()

    def test_help_exits_zero(self, capsys):
        assert run_cli("--help") == 0
        capsys.readouterr()


class TestNumericalFailureExit:
    def test_sampling_error_maps_to_three(self, monkeypatch, capsys):
        def boom(*args, **kwargs):
            raise SamplingError("no usable samples")
        monkeypatch.setattr(cli, "sample_hessian_set", boom)
        assert run_cli("index", "--function", "kink", "--point", "0") == 3
        assert "numerical failure" in capsys.readouterr().err


class TestScanCommand:
    def test_grid_values_match_closed_form(self, capsys):
        code = run_cli("scan", "--function", "neg_cos_sum",
                       "--region", "0:3,0:3", "--grid", "4")
        assert code == 0
        lines = capsys.readouterr().out.splitlines()
        assert len(lines) == 17  # header plus 4x4 rows
        assert lines[0].startswith("x1,x2,loc_low")
        for line in lines[1:]:
            cells = [float(c) for c in line.split(",")[:4]]
            x, y, low, high = cells
            target = max(0.0, -math.cos(x)) + max(0.0, -math.cos(y))
            assert low == pytest.approx(target, abs=1e-9)
            assert high == pytest.approx(target, abs=1e-9)

    def test_last_row_frozen_value(self, capsys):
        run_cli("scan", "--function", "neg_cos_sum",
                "--region", "0:3,0:3", "--grid", "4")
        last = capsys.readouterr().out.splitlines()[-1].split(",")
        # 2 * (-cos 3)+ at the corner (3, 3)
        assert float(last[3]) == pytest.approx(1.9799849932008908, abs=1e-9)

    def test_byte_identical_reruns(self, tmp_path):
        cfg = tmp_path / "scan.json"
        cfg.write_text(json.dumps({
            "function": {"family": "neg_cos_sum"},
            "sampling": {"prefer_exact": False, "samples_per_radius": 8},
            "scan": {"region": [[0.0, 3.0], [0.0, 3.0]], "grid": 3},
        }))
        out1 = tmp_path / "a.csv"
        out2 = tmp_path / "b.csv"
        assert run_cli("scan", "--config", str(cfg), "--seed", "42",
                       "--output", str(out1)) == 0
        assert run_cli("scan", "--config", str(cfg), "--seed", "42",
                       "--output", str(out2)) == 0
        assert out1.read_bytes() == out2.read_bytes()

    def test_seed_changes_sampled_output(self, tmp_path):
        cfg = tmp_path / "scan.json"
        cfg.write_text(json.dumps({
            "function": {"family": "neg_cos_sum"},
            "sampling": {"prefer_exact": False, "samples_per_radius": 8},
            "scan": {"region": [[0.0, 3.0], [0.0, 3.0]], "grid": 2},
        }))
        out1 = tmp_path / "a.csv"
        out2 = tmp_path / "b.csv"
        run_cli("scan", "--config", str(cfg), "--seed", "1", "--output", str(out1))
        run_cli("scan", "--config", str(cfg), "--seed", "2", "--output", str(out2))
        assert out1.read_bytes() != out2.read_bytes()

    def test_json_format(self, capsys):
        # leading minus needs the --flag=value form under argparse
        code = run_cli("scan", "--function", "mixed", "--region=-1:1",
                       "--grid", "3", "--format", "json")
        assert code == 0
        rows = json.loads(capsys.readouterr().out)
        assert len(rows) == 3
        assert rows[0]["point"] == [-1.0]
        assert rows[1]["point"] == [0.0]
        assert rows[1]["loc_high"] == pytest.approx(1.0, abs=1e-9)
        assert rows[0]["loc_high"] == pytest.approx(1.0, abs=1e-9)
        assert rows[2]["loc_high"] == pytest.approx(0.0, abs=1e-9)

    def test_region_required(self):
        assert run_cli("scan", "--function", "mixed") == 2

    def test_region_dimension_mismatch(self):
        assert run_cli("scan", "--function", "neg_cos_sum",
                       "--region", "0:1", "--grid", "3") == 2

    def test_degenerate_region(self):
        assert run_cli("scan", "--function", "mixed",
                       "--region", "1:1", "--grid", "3") == 2

    def test_grid_broadcasts_single_count(self, capsys):
        code = run_cli("scan", "--function", "neg_cos_sum",
                       "--region", "0:1,0:1", "--grid", "2")
        assert code == 0
        assert len(capsys.readouterr().out.splitlines()) == 5

    def test_flags_override_config(self, tmp_path, capsys):
        cfg = tmp_path / "scan.json"
        cfg.write_text(json.dumps({
            "function": {"family": "kink"},
            "scan": {"region": [[-1.0, 1.0]], "grid": 5, "format": "json"},
        }))
        code = run_cli("scan", "--config", str(cfg), "--function", "mixed",
                       "--grid", "2", "--format", "csv")
        assert code == 0
        lines = capsys.readouterr().out.splitlines()
        assert len(lines) == 3
        assert lines[0].startswith("x1,")

    def test_unknown_scan_key(self, tmp_path):
        cfg = tmp_path / "scan.json"
        cfg.write_text(json.dumps({
            "function": {"family": "mixed"},
            "scan": {"region": [[-1.0, 1.0]], "step": 0.5},
        }))
        assert run_cli("scan", "--config", str(cfg)) == 2


class TestVerifyCommand:
    def test_single_suite_passes(self, capsys):
        code = run_cli("verify", "--suite", "table1")
        assert code == 0
        out = capsys.readouterr().out
        assert "table1" in out
        assert "PASS" in out
        assert "1/1 suites passed" in out

    def test_repeatable_suite_flag(self, capsys):
        code = run_cli("verify", "--suite", "table1",
                       "--suite", "smooth-reduction")
        assert code == 0
        assert "2/2 suites passed" in capsys.readouterr().out

    def test_unknown_suite_rejected(self, capsys):
        assert run_cli("verify", "--suite", "bogus") == 2
        capsys.readouterr()

    def test_failing_suite_exits_three(self, monkeypatch, capsys):
        from convexgap.verify import SuiteResult

        def fake(names, seed=0):
            return [SuiteResult(name="table1", passed=False, worst_slack=1.0,
                                tolerance=1e-9, detail="forced", seconds=0.0)]
        monkeypatch.setattr(cli, "run_suites", fake)
        assert run_cli("verify", "--suite", "table1") == 3
        assert "FAIL" in capsys.readouterr().out


class TestMollifyCommand:
    def test_kink_report(self, capsys):
        code = run_cli("mollify", "--function", "kink", "--point", "0",
                       "--eps", "0.1,0.01")
        assert code == 0
        payload = json.loads(capsys.readouterr().out)
        assert payload["pass"] is True
        assert payload["interval"]["loc_low"] == pytest.approx(1.0, abs=1e-9)
        assert payload["interval"]["loc_high"] == pytest.approx(3.0, abs=1e-9)
        assert len(payload["samples"]) == 2
        assert payload["samples"][-1]["distance"] <= 1e-6

    def test_exit_zero_even_when_membership_fails(self, monkeypatch, capsys):
        from convexgap.smoothing import MollificationReport, MollificationSample

        def fake(f, x, cfg=None, sampling=None):
            sample = MollificationSample(eps=0.1, distance=1.0,
                                         ell_value=9.0, passed=False)
            return MollificationReport(samples=(sample,),
                                       interval=(0.0, 1.0), passed=False)
        monkeypatch.setattr(cli, "mollification_membership_check", fake)
        code = run_cli("mollify", "--function", "kink", "--point", "0")
        assert code == 0
        assert json.loads(capsys.readouterr().out)["pass"] is False

    def test_bad_eps_list(self):
        assert run_cli("mollify", "--function", "kink", "--point", "0",
                       "--eps", "0.1,oops") == 2


class TestFormatting:
    def test_twelve_digit_floats(self):
        assert cli._format_value(1.9799849932008908) == "1.9799849932"
        assert cli._format_value(0.123456789012345) == "0.123456789012"
        assert cli._format_value(True) == "1"
        assert cli._format_value(False) == "0"
        assert cli._format_value(0.0) == "0"

    def test_csv_ends_with_newline(self, capsys):
        run_cli("index", "--function", "kink", "--point", "0",
                "--format", "csv")
        assert capsys.readouterr().out.endswith("\n")
