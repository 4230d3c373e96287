"""Command-line interface: subcommands, config merging, and exit codes."""

import json
import subprocess
import sys

import numpy as np
import pytest

from earlywarn import cli, series
from earlywarn.errors import DataError, ParseError
from earlywarn.models import load_model
from earlywarn.sweep import import_report

FAST = ["--max-epochs", "3", "--patience", "2", "--batch-size", "8"]


def _synth(tmp_path, name="data", scheme="binary", per_class=6):
    out = tmp_path / name
    code = cli.main(["synth", "--per-class", str(per_class), "--weeks", "8",
                     "--channels", "3", "--scheme", scheme, "--seed", "1",
                     "--out", str(out)])
    assert code == 0
    return out


# ------------------------------------------------------------- subcommands


def test_synth_creates_dataset_and_manifest(tmp_path):
    out = _synth(tmp_path)
    ds = series.load_dataset(out)
    assert ds.n_samples == 12 and ds.n_weeks == 8 and ds.n_channels == 3

    manifest = json.loads((out / "run_manifest.json").read_text())
    assert manifest["command"] == "synth"
    assert manifest["seed"] == 1
    assert manifest["arguments"]["per_class"] == 6
    assert "numpy" in manifest["versions"]
    assert manifest["wall_s"] >= 0


def test_train_writes_model_artifacts(tmp_path, capsys):
    data = _synth(tmp_path)
    out = tmp_path / "model"
    code = cli.main(["train", "--dataset", str(data), "--model", "mlp",
                     "--scheme", "binary", "--horizon", "6", "--seed", "0",
                     "--out", str(out), *FAST])
    assert code == 0
    assert "test weighted_f1=" in capsys.readouterr().out

    doc = json.loads((out / "model.json").read_text())
    assert doc["kind"] == "mlp"
    assert doc["horizon"] == 6
    assert doc["class_names"] == ["Negative", "Positive"]
    assert len(doc["vocab_hash"]) == 16
    assert set(doc["fit_metrics"]) == {"train_weighted_f1", "test_weighted_f1"}

    fit = json.loads((out / "fit_report.json").read_text())
    assert fit["scheme"] == "binary"
    assert "confusion" in fit["test"]
    assert (out / "params.bin").exists()
    assert (out / "run_manifest.json").exists()

    state = load_model(out)
    preds = state.predict(np.zeros((2, 6, 3)))
    assert preds.shape == (2,)


def test_knn_k_override(tmp_path):
    data = _synth(tmp_path)
    out = tmp_path / "knn"
    code = cli.main(["train", "--dataset", str(data), "--model", "knn",
                     "--out", str(out), "--k", "1", *FAST])
    assert code == 0
    doc = json.loads((out / "model.json").read_text())
    assert doc["model_config"]["k"] == 1


def test_sweep_then_report(tmp_path, capsys):
    data = _synth(tmp_path)
    out = tmp_path / "rep"
    code = cli.main(["sweep", "--dataset", str(data),
                     "--models", "mlp,majority", "--horizons", "4,8",
                     "--schemes", "binary", "--seed", "0",
                     "--out", str(out), *FAST])
    assert code == 0
    assert "swept 4 cells" in capsys.readouterr().out

    records = import_report(out / "report.csv")
    assert [(r["model"], r["horizon"]) for r in records] == [
        ("mlp", 4), ("mlp", 8), ("majority", 4), ("majority", 8)]
    assert (out / "plot_data.csv").exists()
    assert (out / "report.json").exists()
    assert (out / "run_manifest.json").exists()

    assert cli.main(["report", "--report", str(out / "report.csv")]) == 0
    text = capsys.readouterr().out
    assert "course=synthetic scheme=binary" in text
    assert "mlp" in text and "majority" in text


def test_sweep_rejects_duplicate_course(tmp_path):
    data = _synth(tmp_path)
    with pytest.raises(DataError, match="duplicate course"):
        cli.main(["sweep", "--dataset", str(data), str(data),
                  "--models", "majority", "--horizons", "4",
                  "--out", str(tmp_path / "rep"), *FAST])


def test_baseline_prints_all_conventions(tmp_path, capsys):
    data = _synth(tmp_path, scheme="multiclass")
    out = tmp_path / "base"
    code = cli.main(["baseline", "--dataset", str(data), "--out", str(out)])
    assert code == 0
    text = capsys.readouterr().out
    assert "published reference=0.58" in text
    assert "published reference=0.48" in text
    assert "train-majority on held-out cohorts" in text
    assert "whole dataset" in text

    doc = json.loads((out / "baseline.json").read_text())
    assert set(doc) == {"binary", "multiclass"}
    assert set(doc["binary"]) == {"overall", "held_out"}
    assert "macro_f1" in doc["binary"]["held_out"]


def test_ingest_and_build(oulad_dir, tmp_path, capsys):
    out = tmp_path / "ingested"
    code = cli.main(["ingest", "--oulad-dir", str(oulad_dir),
                     "--out", str(out)])
    assert code == 0
    printed = json.loads(capsys.readouterr().out)
    assert printed == json.loads((out / "ingest_summary.json").read_text())
    assert "rows_read" in printed

    built = tmp_path / "built"
    code = cli.main(["build", "--oulad-dir", str(oulad_dir),
                     "--course", "BBB", "--out", str(built)])
    assert code == 0
    ds = series.load_dataset(built)
    assert ds.course == "BBB"
    assert ds.n_samples == 7
    assert ds.vocab.names == ("forumng", "quiz")


def test_sweep_from_course_codes(oulad_dir, tmp_path):
    out = tmp_path / "rep"
    code = cli.main(["sweep", "--course", "BBB",
                     "--oulad-dir", str(oulad_dir),
                     "--models", "majority", "--horizons", "2",
                     "--scheme", "binary", "--out", str(out), *FAST])
    assert code == 0
    records = import_report(out / "report.csv")
    assert [(r["course"], r["model"], r["horizon"]) for r in records] == [
        ("BBB", "majority", 2)]


def test_data_dir_env_fallback(oulad_dir, monkeypatch, capsys):
    monkeypatch.setenv(cli.ENV_DATA_DIR, str(oulad_dir))
    assert cli.main(["ingest"]) == 0
    capsys.readouterr()

    monkeypatch.delenv(cli.ENV_DATA_DIR)
    with pytest.raises(DataError, match="no data directory"):
        cli.main(["ingest"])


# ------------------------------------------------------------------ config


def test_config_file_sets_defaults_but_flags_win(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"per_class": 4, "weeks": 6}))

    a = tmp_path / "a"
    assert cli.main(["synth", "--config", str(cfg), "--channels", "2",
                     "--out", str(a)]) == 0
    ds = series.load_dataset(a)
    assert ds.n_samples == 8 and ds.n_weeks == 6

    b = tmp_path / "b"
    assert cli.main(["synth", "--config", str(cfg), "--per-class", "2",
                     "--out", str(b)]) == 0
    assert series.load_dataset(b).n_samples == 4  # explicit flag wins


def test_config_unknown_key_rejected(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"per_klass": 3}))
    with pytest.raises(DataError, match="per_klass"):
        cli.main(["synth", "--config", str(cfg), "--out", str(tmp_path / "x")])


def test_config_bad_json_and_missing_file(tmp_path):
    cfg = tmp_path / "broken.json"
    cfg.write_text("{not json")
    with pytest.raises(ParseError):
        cli.main(["synth", "--config", str(cfg), "--out", str(tmp_path / "x")])
    with pytest.raises(DataError, match="not found"):
        cli.main(["synth", "--config", str(tmp_path / "absent.json"),
                  "--out", str(tmp_path / "x")])


# ------------------------------------------------------- parsing & exits


def test_parse_horizon_list():
    assert cli.parse_horizon_list("5:40:5") == [5, 10, 15, 20, 25, 30, 35, 40]
    assert cli.parse_horizon_list("7") == [7]
    assert cli.parse_horizon_list("8,2,2,4") == [2, 4, 8]
    assert cli.parse_horizon_list([3, 1]) == [1, 3]
    for bad in ("a", "5:4:1", "1:9", "1:9:0", "0", "", "3,-1"):
        with pytest.raises(ValueError):
            cli.parse_horizon_list(bad)


def test_parse_model_and_scheme_lists():
    assert cli.parse_model_list("fcn, mlp") == ["fcn", "mlp"]
    assert cli.parse_model_list(["knn_dtw"]) == ["knn_dtw"]
    with pytest.raises(ValueError, match="unknown model"):
        cli.parse_model_list("xgboost")
    with pytest.raises(ValueError):
        cli.parse_model_list("")
    assert cli.parse_scheme_list("binary,multiclass") == [
        "binary", "multiclass"]
    with pytest.raises(ValueError, match="unknown scheme"):
        cli.parse_scheme_list("weekly")


@pytest.mark.parametrize("argv", [
    [],
    ["not-a-command"],
    ["train", "--dataset", "x", "--model", "transformer", "--out", "y"],
    ["sweep", "--dataset", "x", "--horizons", "nope", "--out", "y"],
    ["sweep", "--dataset", "x", "--models", "resnet", "--out", "y"],
    ["sweep", "--out", "y"],  # needs --dataset or --course
    ["sweep", "--dataset", "x", "--course", "BBB", "--out", "y"],
    ["build", "--course", "BBB"],  # missing required --out
])
def test_usage_errors_exit_one(argv):
    with pytest.raises(SystemExit) as err:
        cli.main(argv)
    assert err.value.code == 1


def test_entrypoint_exit_codes(tmp_path):
    def run(*argv):
        return subprocess.run([sys.executable, "-m", "earlywarn.cli", *argv],
                              capture_output=True, text=True)

    missing = run("baseline", "--dataset", str(tmp_path / "nowhere"))
    assert missing.returncode == 2
    assert "error:" in missing.stderr

    usage = run("not-a-command")
    assert usage.returncode == 1

    version = run("--version")
    assert version.returncode == 0
    assert "earlywarn" in version.stdout
