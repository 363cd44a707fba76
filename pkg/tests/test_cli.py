import filecmp
import json
import os
import subprocess
import sys

import pytest

from vte.cli import main
from vte.expansion import PredictionRecord, save_predictions


def run_cli(*argv):
    return main(list(argv))


def synth_dir(tmp_path, name="data", seed=7, classes=3, items=4, dim=8):
    out = tmp_path / name
    code = run_cli("synth", "--seed", str(seed), "--out", str(out),
                   "--classes", str(classes), "--items-per-class", str(items),
                   "--text-dim", str(dim), "--image-dim", str(dim))
    assert code == 0
    return out


def test_synth_byte_identical_directories(tmp_path, capsys):
    a = synth_dir(tmp_path, "a")
    b = synth_dir(tmp_path, "b")
    for name in ("taxonomy.tsv", "text.jsonl", "images.jsonl",
                 "train.tsv", "eval.tsv", "meta.json"):
        assert filecmp.cmp(a / name, b / name, shallow=False), name
    out = capsys.readouterr().out
    assert "# resolved config" in out and "seed = 7" in out


def test_eval_on_oracle_predictions_is_all_100(tmp_path, capsys):
    preds = tmp_path / "preds.jsonl"
    save_predictions([PredictionRecord("a", "b", 0.9, 1, 1),
                      PredictionRecord("c", "d", 0.2, 0, 0)], preds)
    metrics = tmp_path / "metrics.json"
    assert run_cli("eval", "--predictions-in", str(preds), "--out", str(metrics)) == 0
    data = json.loads(metrics.read_text())
    assert data == {"accuracy": 100.0, "precision": 100.0, "recall": 100.0, "f1": 100.0}
    assert '"f1": 100.00' in metrics.read_text()


def test_grad_check_subcommand(capsys):
    assert run_cli("grad-check", "--seed", "3") == 0
    out = capsys.readouterr().out
    assert "f_text.w" in out and "worst tensor" in out


def test_unknown_flag_is_validation_error(tmp_path, capsys):
    assert run_cli("synth", "--seed", "1", "--out", str(tmp_path / "x"),
                   "--bogus-flag", "1") == 1


def test_missing_file_is_validation_error(tmp_path, capsys):
    code = run_cli("eval", "--checkpoint", str(tmp_path / "none.ckpt"),
                   "--candidates", str(tmp_path / "none.tsv"),
                   "--text", str(tmp_path / "none.jsonl"),
                   "--out", str(tmp_path / "m.json"))
    assert code == 1


def test_full_pipeline_train_eval_expand_protodump(tmp_path, capsys):
    data = synth_dir(tmp_path, "data", seed=5)
    ckpt = tmp_path / "model.ckpt"
    log = tmp_path / "train_log.jsonl"
    code = run_cli(
        "train",
        "--taxonomy", str(data / "taxonomy.tsv"),
        "--text", str(data / "text.jsonl"),
        "--images", str(data / "images.jsonl"),
        "--positives", str(data / "train.tsv"),
        "--out", str(ckpt),
        "--log", str(log),
        "--set", "epochs=2", "--set", "batch_size=4", "--set", "k=4",
        "--set", "d=8", "--set", "d_z=4", "--set", "lr=0.001", "--set", "seed=5",
    )
    assert code == 0
    assert ckpt.exists()
    entries = [json.loads(line) for line in log.read_text().splitlines()]
    assert len(entries) == 2

    resolved = capsys.readouterr().out
    assert "epochs = 2" in resolved and "batch_size = 4" in resolved

    metrics = tmp_path / "metrics.json"
    preds = tmp_path / "preds.jsonl"
    code = run_cli("eval", "--checkpoint", str(ckpt),
                   "--candidates", str(data / "eval.tsv"),
                   "--text", str(data / "text.jsonl"),
                   "--images", str(data / "images.jsonl"),
                   "--predictions-out", str(preds),
                   "--out", str(metrics))
    assert code == 0
    report = json.loads(metrics.read_text())
    assert set(report) == {"accuracy", "precision", "recall", "f1"}
    assert preds.exists()

    edges_out = tmp_path / "expanded.tsv"
    preds_out = tmp_path / "expand_preds.jsonl"
    code = run_cli("expand", "--checkpoint", str(ckpt),
                   "--taxonomy", str(data / "taxonomy.tsv"),
                   "--candidates", str(data / "eval.tsv"),
                   "--text", str(data / "text.jsonl"),
                   "--images", str(data / "images.jsonl"),
                   "--out-edges", str(edges_out),
                   "--out-predictions", str(preds_out))
    assert code == 0
    assert edges_out.exists() and preds_out.exists()

    clusters = tmp_path / "clusters.jsonl"
    code = run_cli("proto-dump", "--checkpoint", str(ckpt),
                   "--images", str(data / "images.jsonl"),
                   "--out", str(clusters))
    assert code == 0
    lines = [json.loads(line) for line in clusters.read_text().splitlines()]
    dumped = [key for rec in lines for key in rec["instances"]]
    assert len(dumped) == 12  # every image appears exactly once
    assert len(set(dumped)) == 12


def test_config_file_and_override_precedence(tmp_path, capsys):
    cfg = tmp_path / "train.cfg"
    cfg.write_text("epochs = 9\nbatch_size = 4\n", encoding="utf-8")
    data = synth_dir(tmp_path, "d2", seed=2)
    ckpt = tmp_path / "m.ckpt"
    code = run_cli("train", "--config", str(cfg),
                   "--taxonomy", str(data / "taxonomy.tsv"),
                   "--text", str(data / "text.jsonl"),
                   "--images", str(data / "images.jsonl"),
                   "--positives", str(data / "train.tsv"),
                   "--out", str(ckpt),
                   "--set", "epochs=1", "--set", "k=4", "--set", "d=8",
                   "--set", "d_z=4", "--set", "seed=2")
    assert code == 0
    out = capsys.readouterr().out
    assert "epochs = 1" in out  # --set wins over --config


def test_vte_seed_env_default(tmp_path, monkeypatch, capsys):
    monkeypatch.setenv("VTE_SEED", "123")
    out = tmp_path / "env_seeded"
    assert run_cli("synth", "--out", str(out)) == 0
    assert "seed = 123" in capsys.readouterr().out


def test_console_entry_point_subprocess(tmp_path):
    env = dict(os.environ, VTE_SEED="3")
    result = subprocess.run(
        [sys.executable, "-m", "vte", "grad-check"],
        capture_output=True, text=True, env=env, timeout=300,
    )
    assert result.returncode == 0, result.stderr
    assert "worst tensor" in result.stdout
