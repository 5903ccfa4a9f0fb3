"""Command line driver: parsing, outputs, exit codes, determinism."""

import dataclasses
import json
import shutil
import subprocess

import numpy as np
import pytest

from morsesturm import cli
from morsesturm.errors import NotStabilized, UnresolvedRoot
from morsesturm.problem import fixture_path, load, save, validate


def run(capsys, argv):
    code = cli.main(argv)
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def table_rows(text):
    """Data rows of a one-table CSV: everything after the column header."""
    lines = text.strip().splitlines()
    body = [ln for ln in lines if not ln.startswith("#")]
    return body[0], body[1:]


class TestConfigAndParsing:
    def test_t_grid_expansion(self):
        grid = cli.parse_t_grid("0.05:1:0.05")
        assert grid.size == 20
        assert grid[0] == pytest.approx(0.05)
        assert grid[-1] == pytest.approx(1.0)
        assert np.allclose(np.diff(grid), 0.05)
        assert np.array_equal(cli.parse_t_grid("0.1:0.3:0.1"), [0.1, 0.2, 0.3])

    def test_t_grid_clamps_to_unit_interval(self):
        grid = cli.parse_t_grid("-0.2:0.4:0.1")
        assert grid.min() > 0.0
        assert grid[-1] == pytest.approx(0.4)
        assert cli.parse_t_grid("0.5:2.0:0.5").max() <= 1.0

    def test_t_grid_rejects_malformed_specs(self):
        for spec in ("nope", "0:0.5", "0.1:1:-0.1", "1:0:0.1", "2:3:0.5"):
            with pytest.raises(ValueError):
                cli.parse_t_grid(spec)

    def test_config_invariants(self):
        for kwargs in (
            {"mesh": 1},
            {"eps": 0.0},
            {"trials": 0},
            {"tol_rank": -1e-7},
            {"param_length": 0.0},
        ):
            with pytest.raises(ValueError):
                cli.RunConfig("focal", **kwargs)

    def test_show_config_prints_resolved_values(self, capsys):
        code, out, _ = run(
            capsys, ["focal", "exsimple", "--mesh", "32", "--show-config"]
        )
        assert code == 0
        cfg = json.loads(out)
        assert cfg["mesh"] == 32
        assert cfg["subcommand"] == "focal"
        assert cfg["tol_rank"] == 1e-7
        assert cfg["t_grid"] == "0.05:1.0:0.05"

    def test_input_resolution(self, tmp_path):
        assert cli.resolve_input("exsimple") == fixture_path("exsimple")
        assert cli.resolve_input("exsimple.msp.json") == fixture_path("exsimple")
        local = tmp_path / "own.msp.json"
        save(load(fixture_path("exsimple")), local)
        assert cli.resolve_input(str(local)) == local
        with pytest.raises(FileNotFoundError):
            cli.resolve_input("no_such_thing")


class TestFocalCommand:
    def test_causal_fixture_table(self, capsys):
        code, out, _ = run(capsys, ["focal", "excausal"])
        assert code == 0
        header, rows = table_rows(out)
        assert header == "t,multiplicity,signature,degenerate"
        assert rows == ["1.000000,1,-1,false"]
        assert "# tol_rank=1e-07" in out
        assert "# grid_size=2048" in out

    def test_simple_fixture_empty_table(self, capsys):
        code, out, _ = run(capsys, ["focal", "exsimple"])
        assert code == 0
        _, rows = table_rows(out)
        assert rows == []

    def test_double_harmonic_rows(self, capsys):
        code, out, _ = run(capsys, ["focal", "harmonic_2"])
        assert code == 0
        _, rows = table_rows(out)
        assert rows == ["0.500000,2,2,false", "1.000000,2,2,false"]

    def test_output_file_and_determinism(self, tmp_path, capsys):
        first = tmp_path / "a.csv"
        second = tmp_path / "b.csv"
        code, out, _ = run(capsys, ["focal", "harmonic_2", "--output", str(first)])
        assert code == 0
        assert f"wrote {first}" in out
        run(capsys, ["focal", "harmonic_2", "--output", str(second)])
        assert first.read_bytes() == second.read_bytes()

    def test_missing_input_exit_code(self, capsys):
        code, _, err = run(capsys, ["focal", "no_such_thing"])
        assert code == 1
        assert "no such file or bundled fixture" in err

    def test_scan_error_exit_code_and_bracket(self, capsys, monkeypatch):
        def explode(*args, **kwargs):
            raise UnresolvedRoot("candidate did not converge", bracket=(0.2, 0.3))

        monkeypatch.setattr(cli, "scan_focal", explode)
        code, _, err = run(capsys, ["focal", "exsimple"])
        assert code == 2
        assert "bracket: (0.2, 0.3)" in err


class TestVerifyCommand:
    def test_simple_fixture_document(self, capsys):
        code, out, _ = run(capsys, ["verify", "exsimple"])
        assert code == 0
        doc = json.loads(out)
        assert doc["n_minus_K"] == 1
        assert doc["n_minus_gP"] == 1
        assert doc["maslov"] == 0
        assert doc["endpoint_correction"] == 0
        assert doc["residual"] == 0
        assert doc["constrained"] is True
        assert doc["mesh_history"] == [[32, 1], [64, 1]]
        assert set(doc["tolerances"]) >= {"tol_eig", "tol_rank", "ode_tol"}

    def test_causal_fixture_document(self, capsys):
        code, out, _ = run(capsys, ["verify", "excausal"])
        assert code == 0
        doc = json.loads(out)
        assert doc["n_minus_K"] == 0
        assert doc["endpoint_correction"] == 1
        assert doc["residual"] == 0

    def test_json_output_deterministic(self, tmp_path, capsys):
        a = tmp_path / "a.json"
        b = tmp_path / "b.json"
        run(capsys, ["verify", "excausal", "--output", str(a)])
        run(capsys, ["verify", "excausal", "--output", str(b)])
        assert a.read_bytes() == b.read_bytes()

    def test_missing_witness_seed_exit_code(self, tmp_path, capsys):
        bare = dataclasses.replace(
            load(fixture_path("exsimple")), witness_seed=None
        )
        path = tmp_path / "bare.msp.json"
        save(bare, path)
        code, _, err = run(capsys, ["verify", str(path)])
        assert code == 3
        assert "seed" in err

    def test_not_stabilized_exit_code(self, capsys, monkeypatch):
        def explode(*args, **kwargs):
            raise NotStabilized("schedule exhausted")

        monkeypatch.setattr(cli, "verify", explode)
        code, _, err = run(capsys, ["verify", "exsimple"])
        assert code == 4
        assert "exhausted" in err


class TestEvolveCommand:
    def test_constant_trace_on_simple_fixture(self, capsys):
        code, out, _ = run(capsys, ["evolve", "exsimple", "--t-grid", "0.05:1:0.05"])
        assert code == 0
        evolution, jumps = out.split("\n\n")
        _, rows = table_rows(evolution)
        assert len(rows) == 20
        assert all(row.endswith(",1") for row in rows)
        assert rows[-1] == "1.000000,1"
        _, jump_rows = table_rows(jumps + "\n")
        assert jump_rows == []

    def test_staircase_and_jump_files(self, tmp_path, capsys):
        out_path = tmp_path / "evo.csv"
        code, out, _ = run(
            capsys, ["evolve", "harmonic_2p5", "--output", str(out_path)]
        )
        assert code == 0
        jumps_path = tmp_path / "evo.jumps.csv"
        assert out_path.exists() and jumps_path.exists()
        _, jump_rows = table_rows(jumps_path.read_text())
        assert jump_rows == [
            "0.425000,2,0.400000,2",
            "0.825000,2,0.800000,2",
        ]
        _, rows = table_rows(out_path.read_text())
        assert rows[0] == "0.050000,0"
        assert rows[-1] == "1.000000,4"

    def test_drop_jump_on_causal_fixture(self, capsys):
        code, out, _ = run(capsys, ["evolve", "excausal"])
        assert code == 0
        _, jumps = out.split("\n\n")
        _, jump_rows = table_rows(jumps + "\n")
        assert jump_rows == ["0.975000,-1,1.000000,-1"]


class TestMaslovAndPerturbCommands:
    def test_maslov_value(self, capsys):
        code, out, _ = run(capsys, ["maslov", "harmonic_1p5"])
        assert code == 0
        header, rows = table_rows(out)
        assert header == "maslov"
        assert rows == ["2"]

    def test_maslov_endpoint_focal_exit_code(self, capsys):
        code, _, err = run(capsys, ["maslov", "excausal"])
        assert code == 2
        assert "focal" in err

    def test_perturb_agreement_table(self, capsys):
        argv = ["perturb", "harmonic_1p5", "--eps", "1e-4", "--trials", "4"]
        code, out, _ = run(capsys, argv)
        assert code == 0
        assert "# consensus=2" in out
        header, rows = table_rows(out)
        assert header == "trial_seed,status,value"
        assert rows == ["0,ok,2", "1,ok,2", "2,ok,2", "3,ok,2"]
        code2, out2, _ = run(capsys, argv)
        assert (code2, out2) == (code, out)


class TestTrivializeCommand:
    def test_conformal_chain_reaches_conjugate_instant(self, tmp_path, capsys, monkeypatch):
        monkeypatch.chdir(tmp_path)
        code, out, _ = run(
            capsys,
            ["trivialize", "--chart", "conformal_exp_t2", "--T", "3.1415926535"],
        )
        assert code == 0
        assert (tmp_path / "conformal_exp_t2.msp.json").exists()
        code, out, _ = run(capsys, ["focal", "conformal_exp_t2.msp.json"])
        assert code == 0
        _, rows = table_rows(out)
        assert rows == ["1.000000,1,-1,false"]

    def test_written_problem_is_valid(self, tmp_path, capsys):
        target = tmp_path / "flat.msp.json"
        code, _, _ = run(
            capsys,
            ["trivialize", "--chart", "minkowski2", "--output", str(target)],
        )
        assert code == 0
        problem = load(target)
        assert validate(problem) == []
        assert problem.meta["chart"] == "minkowski2"
        assert problem.boundary.space.basis.shape == (2, 0)

    def test_unknown_chart_exit_code(self, capsys):
        code, _, err = run(capsys, ["trivialize", "--chart", "schwarzschild"])
        assert code == 1
        assert "unknown chart" in err


class TestReportCommand:
    def test_report_directory_contents(self, tmp_path, capsys):
        target = tmp_path / "rpt"
        code, out, _ = run(
            capsys, ["report", "harmonic_2", "--output", str(target)]
        )
        assert code == 0
        names = [
            "focal.csv",
            "traces.csv",
            "fundamental.csv",
            "evolution.csv",
            "jumps.csv",
            "traces.png",
            "staircase.png",
        ]
        for name in names:
            assert (target / name).exists(), name
            assert f"wrote {target / name}" in out
        for figure in ("traces.png", "staircase.png"):
            assert (target / figure).read_bytes()[:4] == b"\x89PNG"
        _, rows = table_rows((target / "focal.csv").read_text())
        assert rows == ["0.500000,2,2,false", "1.000000,2,2,false"]
        trace_lines = (target / "traces.csv").read_text().strip().splitlines()
        assert trace_lines[7] == "t,det,sigma_min"
        assert len(trace_lines) == 8 + 2049
        fundamental = (target / "fundamental.csv").read_text().splitlines()
        assert fundamental[7].startswith("t,M00,M01")
        assert ",Mp11" in fundamental[7]

    def test_csv_tables_match_single_commands(self, tmp_path, capsys):
        target = tmp_path / "rpt"
        run(capsys, ["report", "harmonic_2", "--output", str(target)])
        solo = tmp_path / "solo.csv"
        run(capsys, ["focal", "harmonic_2", "--output", str(solo)])
        assert (target / "focal.csv").read_bytes() == solo.read_bytes()


class TestConsoleScript:
    def test_installed_entry_point(self):
        exe = shutil.which("morsesturm")
        assert exe is not None
        proc = subprocess.run(
            [exe, "focal", "excausal"], capture_output=True, text=True
        )
        assert proc.returncode == 0
        assert "1.000000,1,-1,false" in proc.stdout
