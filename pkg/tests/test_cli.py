import json

import pytest

from fracmfg.cli import build_parser, main


def test_parser_defaults_and_aliases():
    parser = build_parser()
    args = parser.parse_args(["--test", "2", "--lambda", "0.3", "--T", "1.5"])
    assert args.test == 2
    assert args.lam == 0.3
    assert args.horizon == 1.5
    assert args.alpha is None
    with pytest.raises(SystemExit):
        parser.parse_args(["--test", "9"])


def test_config_file_with_overrides(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text(
        "# comment line\n"
        "test = 1\n"
        "alpha = 0.7, 0.85\n"
        "lambda = 0.0\n"
        "T = 0.5\n"
        "nh = 12\n"
        "nt = 8\n"
    )
    parser = build_parser()
    args = parser.parse_args(["--config", str(cfg), "--nt", "6"])
    from fracmfg.cli import _apply_config_file

    _apply_config_file(args)
    assert args.test == 1
    assert args.alpha == [0.7, 0.85]
    assert args.lam == 0.0
    assert args.horizon == 0.5
    assert args.nh == 12
    assert args.nt == 6  # command line wins over the file


def test_config_file_bad_key(tmp_path):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("bogus = 1\n")
    with pytest.raises(SystemExit):
        main(["--config", str(cfg)])


def test_config_file_bad_line(tmp_path):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("no equals sign here\n")
    with pytest.raises(SystemExit):
        main(["--config", str(cfg)])


def test_tiny_preset_run_writes_outputs(tmp_path, capsys):
    out = tmp_path / "results"
    code = main(
        ["--test", "1", "--alpha", "0.85", "--nh", "12", "--nt", "8", "--T", "0.5", "--out", str(out)]
    )
    assert code == 0
    captured = capsys.readouterr().out
    assert "alpha = 0.85" in captured
    summary = json.loads((out / "alpha_0.85" / "summary.json").read_text())
    assert summary["lambda"] == 0.0
    assert (out / "alpha_0.85" / "density.csv").exists()
    assert (out / "alpha_0.85" / "value.csv").exists()


def test_order_study_command(capsys):
    code = main(["--study", "order", "--alpha", "0.5"])
    assert code == 0
    captured = capsys.readouterr().out
    assert "observed temporal order" in captured


def test_refine_study_command(capsys):
    code = main(["--study", "refine", "--test", "1", "--alpha", "0.7", "--nh", "8", "--nt", "6", "--T", "0.5"])
    assert code == 0
    captured = capsys.readouterr().out
    assert "monotone decrease: True" in captured
