import csv
import json

import pytest

from sospca.cli import main, read_config
from sospca.datagen import DataMatrix


def test_generate_and_verify_roundtrip(tmp_path, capsys):
    path = tmp_path / "x.bin"
    assert main(["generate", "--p", "10", "--n", "8", "--k", "4", "--seed", "2", "--out", str(path)]) == 0
    assert DataMatrix.load(path).X.shape == (10, 8)
    code = main(["verify", "--input", str(path), "--k", "4", "--psd-mode", "eigen"])
    rep = json.loads(capsys.readouterr().out)
    assert code == (0 if rep["feasible"] else 2)


def test_verify_csv(capsys):
    main(["verify", "--p", "10", "--n", "8", "--k", "4", "--format", "csv"])
    rows = list(csv.reader(capsys.readouterr().out.splitlines()))
    assert rows[0] == ["constraint", "value", "bound", "pass", "estimate"]
    assert [r[0] for r in rows[1:7]] == [f"C{i}" for i in (1, 3, 4, 2, 5, 6)]


def test_config_file_and_flag_override(tmp_path, capsys):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("p = 9  # rows\nn = 6\nk = 3\ndiscrete = true\n")
    assert read_config(cfg) == {"p": 9, "n": 6, "k": 3, "discrete": True}
    assert main(["oracle", "--config", str(cfg), "--k", "4"]) == 0
    out = json.loads(capsys.readouterr().out)
    assert len(out["support"]) == 4 and len(out["signs"]) == 4


def test_bad_config_key(tmp_path, capsys):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("colour = red\n")
    assert main(["certify", "--config", str(cfg)]) == 1
    assert "unknown key" in capsys.readouterr().err


def test_check_pr_and_certify(tmp_path, capsys):
    main(["check-pr", "--p", "30", "--n", "16"])
    assert set(json.loads(capsys.readouterr().out)["properties"]) == {f"P{i}" for i in range(1, 8)}
    out = tmp_path / "c.json"
    assert main(["certify", "--p", "8", "--n", "6", "--k", "3", "--out", str(out)]) == 0
    assert json.loads(out.read_text())["params"]["k"] == 3


def test_detect_estimate_report(tmp_path, capsys):
    d, e = tmp_path / "d.json", tmp_path / "e.json"
    assert main(["detect", "--p", "12", "--n", "10", "--k", "5", "--trials", "2", "--lambda", "0.1",
                 "--out", str(d)]) == 0
    assert json.loads(d.read_text())["summary"]["trials"] == 2
    assert main(["estimate", "--p", "20", "--n", "10", "--k", "4", "--lambda", "1", "--gamma", "1.5",
                 "--trials", "2", "--out", str(e)]) == 0
    assert main(["report", str(d), str(e)]) == 0
    rows = list(csv.DictReader(capsys.readouterr().out.splitlines()))
    assert [r["file"] for r in rows] == [str(d), str(e)]


def test_theorem_mode_flag(capsys):
    from sospca.cli import build_parser, resolve

    o = resolve(build_parser().parse_args(["detect", "--n", "10", "--k", "5", "--lambda", "0.5", "--theorem-mode"]))
    assert o["gamma"] == 5.5 and o["p"] == 61


def test_generate_needs_out(capsys):
    assert main(["generate"]) == 1
