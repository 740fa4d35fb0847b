"""Command line: flag plumbing, config-file precedence, exit codes."""

from __future__ import annotations

import json

import pytest

from dickechaos.cli import build_parser, config_from_args, main
from dickechaos.output import read_table


def tiny_argv(tmp_path, pipeline="spectrum", *extra):
    return [pipeline, "--twice-j", "1", "--n-max", "8", "--delta-nmax", "0",
            "--outdir", str(tmp_path / "run"), "--cache-dir", "none",
            *extra]


def test_parser_covers_all_subcommands():
    parser = build_parser()
    for name in ("spectrum", "stats", "ratio-map", "ad-scan", "classical",
                 "lyapunov-map", "ghs-compare"):
        args = parser.parse_args([name])
        assert args.pipeline == name
    with pytest.raises(SystemExit):
        parser.parse_args(["interpretive-dance"])


def test_flags_override_config_file(tmp_path):
    config_file = tmp_path / "c.json"
    config_file.write_text(json.dumps(
        {"n_max": 10, "tol_match": 1e-3, "outdir": "from-file"}))
    args = build_parser().parse_args(
        ["stats", "--config", str(config_file), "--n-max", "12"])
    config = config_from_args(args)
    assert config.pipeline == "stats"
    assert config.n_max == 12           # flag wins
    assert config.tol_match == 1e-3     # file beats default
    assert config.outdir == "from-file"
    assert config.window_size == 500    # untouched default


def test_grid_flags_and_cache_sentinel(tmp_path):
    args = build_parser().parse_args(
        tiny_argv(tmp_path, "ratio-map", "--gamma-minus-grid", "1.0", "2.0"))
    config = config_from_args(args)
    assert config.gamma_minus_grid == (1.0, 2.0)
    assert config.cache_dir is None


def test_unknown_config_key_fails_with_exit_2(tmp_path, capsys):
    config_file = tmp_path / "c.json"
    config_file.write_text(json.dumps({"n_maxx": 10}))
    code = main(["spectrum", "--config", str(config_file)])
    assert code == 2
    assert "unknown config keys" in capsys.readouterr().err


def test_main_spectrum_smoke(tmp_path, capsys):
    code = main(tiny_argv(tmp_path))
    assert code == 0
    out = capsys.readouterr().out
    assert "spectrum: 1 cell(s)" in out
    [path] = (tmp_path / "run").glob("spectrum_*.csv")
    header, columns = read_table(path)
    assert header["n_max"] == 8
    assert columns["re"].size == 162


def test_main_reports_cell_failures(tmp_path, capsys):
    code = main(tiny_argv(tmp_path, "ratio-map",
                          "--gamma-minus-grid", "0.5", "-1.0"))
    assert code == 1
    err = capsys.readouterr().err
    assert "1 cell(s) failed" in err
    assert "ValueError" in err
