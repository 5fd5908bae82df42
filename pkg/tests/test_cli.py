"""Command line interface: exit codes and subcommand round trips."""

import json
import os

import pytest

from mobstab.cli import main
from mobstab.pipeline import OUTPUT_FILES


def _write_small_input(root, n_rows=40):
    """A tiny grouped fix file around the grid center, 2-week frame."""
    from numpy import array, full, linspace

    from mobstab.geometry import cell_center
    from mobstab.synth import default_grid, write_fixes_csv, write_meta_csv
    from mobstab.units import WEEK_SECONDS

    grid = default_grid()
    lon0, lat0 = cell_center(grid, 2000, 2000)
    lon1, lat1 = cell_center(grid, 2000, 2010)
    t = linspace(0.0, 2 * WEEK_SECONDS, n_rows)
    blocks = [
        ("pa", t, full(n_rows, lon0), full(n_rows, lat0)),
        ("pb", t, array([lon0, lon1] * (n_rows // 2)), array([lat0, lat1] * (n_rows // 2))),
    ]
    fixes = root / "fixes.csv"
    meta = root / "meta.csv"
    write_fixes_csv(fixes, blocks)
    write_meta_csv(meta, [("pa", "male", "young"), ("pb", "female", "old")])
    return fixes, meta, 2 * WEEK_SECONDS


class TestExitCodes:
    def test_usage_error_is_config_exit(self, capsys):
        assert main(["analyze", "--no-such-flag"]) == 1
        assert "error" in capsys.readouterr().err

    def test_unknown_subcommand(self, capsys):
        assert main(["transmogrify"]) == 1

    def test_invalid_config_value(self, capsys):
        assert main(["analyze", "--set", "gamma=banana"]) == 1
        assert "gamma" in capsys.readouterr().err

    def test_missing_fix_file_is_config_error(self, tmp_path, capsys):
        assert (
            main(
                [
                    "analyze",
                    "--fixes",
                    str(tmp_path / "missing.csv"),
                    "--out",
                    str(tmp_path / "out"),
                    "--set",
                    "t_max=100",
                ]
            )
            == 1
        )

    def test_malformed_data_is_data_exit(self, tmp_path, capsys):
        bad = tmp_path / "bad.csv"
        bad.write_text("participant_id,unix_time_seconds,lon,lat\npa,notatime,8.0,46.5\n")
        code = main(
            [
                "analyze",
                "--fixes",
                str(bad),
                "--out",
                str(tmp_path / "out"),
                "--set",
                "t_max=100",
            ]
        )
        assert code == 2
        assert "data error" in capsys.readouterr().err


class TestSubcommands:
    def test_ingest_then_analyze_then_curves(self, tmp_path, capsys):
        fixes, meta, t_max = _write_small_input(tmp_path)
        norm_dir = tmp_path / "norm"
        code = main(
            [
                "ingest",
                "--fixes",
                str(fixes),
                "--meta",
                str(meta),
                "--out",
                str(norm_dir),
                "--set",
                f"t_max={t_max}",
            ]
        )
        assert code == 0
        assert (norm_dir / "normalized_fixes.csv").exists()
        assert (norm_dir / "ingest_report.csv").exists()

        run_dir = tmp_path / "run"
        code = main(
            [
                "analyze",
                "--fixes",
                str(norm_dir / "normalized_fixes.csv"),
                "--meta",
                str(meta),
                "--out",
                str(run_dir),
                "--set",
                f"t_max={t_max}",
                "--set",
                "n_bootstrap=20",
            ]
        )
        assert code == 0
        for name in OUTPUT_FILES:
            assert (run_dir / name).exists(), name

        # recomputing curves with the pipeline's own settings matches
        recurve = tmp_path / "curves.csv"
        code = main(
            [
                "curves",
                "--run",
                str(run_dir),
                "--meta",
                str(meta),
                "--out",
                str(recurve),
                "--n-bootstrap",
                "20",
            ]
        )
        assert code == 0
        assert recurve.read_bytes() == (run_dir / "group_curves.csv").read_bytes()

    def test_curves_on_missing_run_dir(self, tmp_path, capsys):
        assert main(["curves", "--run", str(tmp_path / "nope")]) == 1

    def test_synth_writes_runnable_bundle(self, tmp_path, capsys):
        out = tmp_path / "synthetic"
        code = main(
            [
                "synth",
                "--preset",
                "two_anchor",
                "--out",
                str(out),
                "--members",
                "2",
                "--n-fixes",
                "50",
                "--weeks",
                "2",
            ]
        )
        assert code == 0
        assert (out / "fixes.csv").exists()
        assert (out / "meta.csv").exists()
        cfg_text = (out / "run.cfg").read_text()
        assert "t_max=1209600.0" in cfg_text

        run_dir = out / "run"
        code = main(
            ["analyze", "--config", str(out / "run.cfg"), "--set", "n_bootstrap=20"]
        )
        assert code == 0
        doc = json.loads((run_dir / "manifest.json").read_text())
        assert doc["totals"]["n_participants"] == 2

    def test_synth_rejects_unknown_preset(self, capsys):
        assert main(["synth", "--preset", "teleporter", "--out", "/tmp/x"]) == 1
        assert "unknown preset" in capsys.readouterr().err

    def test_verify_small(self, capsys):
        code = main(
            [
                "verify",
                "--rates",
                "200,2000",
                "--n-seeds",
                "3",
                "--presets",
                "stationary,two_anchor",
            ]
        )
        assert code == 0
        out = capsys.readouterr().out
        assert "stationary: medians decrease across rates -> ok" in out
        assert "two_anchor: medians decrease across rates -> ok" in out

    def test_version(self, capsys):
        with pytest.raises(SystemExit) as exc:
            main(["--version"])
        assert exc.value.code == 0
        assert "mobstab" in capsys.readouterr().out


class TestConsoleScript:
    def test_entry_point_installed(self):
        import shutil
        import subprocess

        exe = shutil.which("mobstab")
        if exe is None:
            pytest.skip("console script not on PATH")
        proc = subprocess.run(
            [exe, "--version"], capture_output=True, text=True, check=False
        )
        assert proc.returncode == 0
        assert proc.stdout.startswith("mobstab")
