"""Command-line interface: flag handling, exit codes, and output contracts.
Subcommands run in-process through main() to keep the suite fast."""
import json
import re
from pathlib import Path

import pytest

from beanroast.cli import build_parser, main


SUBCOMMANDS = ("synth", "preprocess", "train", "kfold", "evaluate", "predict", "serve")


@pytest.mark.parametrize("sub", SUBCOMMANDS)
def test_help_exits_zero(sub, capsys):
    with pytest.raises(SystemExit) as e:
        main([sub, "--help"])
    assert e.value.code == 0
    out = capsys.readouterr().out
    assert "--" in out  # flags documented


def test_top_level_help(capsys):
    with pytest.raises(SystemExit) as e:
        main(["--help"])
    assert e.value.code == 0


def test_unknown_subcommand_exits_one(capsys):
    with pytest.raises(SystemExit) as e:
        main(["frobnicate"])
    assert e.value.code == 1
    assert "usage" in capsys.readouterr().err.lower()


def test_unknown_flag_exits_one(capsys):
    with pytest.raises(SystemExit) as e:
        main(["synth", "--nope", "--out", "x"])
    assert e.value.code == 1


def test_no_subcommand_exits_one(capsys):
    assert main([]) == 1


def test_runtime_error_exits_two(tmp_path, capsys):
    # trains on a directory that lacks the class layout
    rc = main(["train", "--data", str(tmp_path), "--out", str(tmp_path / "out")])
    assert rc == 2
    assert "error" in capsys.readouterr().err.lower()


# ---------------------------------------------------------------------------
# synth
# ---------------------------------------------------------------------------

def test_synth_writes_layout_and_manifests(tmp_path, capsys):
    out = tmp_path / "data"
    rc = main(["synth", "--per-class", "3", "--seed", "7", "--out", str(out),
               "--image-size", "48"])
    assert rc == 0
    assert len(list(out.rglob("*.png"))) == 12
    assert (out / "manifest.json").exists()
    assert (out / "run_manifest.json").exists()
    run = json.loads((out / "run_manifest.json").read_text())
    assert run["command"] == "synth"
    assert run["parameters"]["seed"] == 7


def test_synth_reproducible_across_runs(tmp_path):
    args = ["--per-class", "2", "--seed", "3", "--image-size", "48"]
    main(["synth", *args, "--out", str(tmp_path / "a")])
    main(["synth", *args, "--out", str(tmp_path / "b")])
    ma = json.loads((tmp_path / "a" / "manifest.json").read_text())
    mb = json.loads((tmp_path / "b" / "manifest.json").read_text())
    assert [f["sha256"] for f in ma["files"]] == [f["sha256"] for f in mb["files"]]


# ---------------------------------------------------------------------------
# preprocess
# ---------------------------------------------------------------------------

def test_preprocess_writes_stage_panels(tmp_path):
    data = tmp_path / "data"
    main(["synth", "--per-class", "1", "--seed", "0", "--out", str(data),
          "--image-size", "64"])
    image = next((data / "green").glob("*.png"))
    out = tmp_path / "stages"
    rc = main(["preprocess", "--image", str(image), "--out", str(out)])
    assert rc == 0
    names = {p.name for p in out.glob("*.png")}
    assert names == {
        "01_original.png", "02_blurred.png", "03_hsv_falsecolor.png",
        "04_mask.png", "05_masked.png", "06_final.png",
    }


# ---------------------------------------------------------------------------
# train / evaluate / predict / kfold (tiny smoke runs)
# ---------------------------------------------------------------------------

@pytest.fixture(scope="module")
def tiny_run(tmp_path_factory):
    root = tmp_path_factory.mktemp("cli")
    data = root / "data"
    main(["synth", "--per-class", "5", "--seed", "1", "--out", str(data),
          "--image-size", "64"])
    out = root / "run"
    rc = main(["train", "--data", str(data), "--out", str(out),
               "--epochs", "1", "--seed", "1", "--backbone", "fallback_cnn",
               "--batch-size", "8"])
    assert rc == 0
    return data, out


def test_train_outputs(tiny_run):
    _, out = tiny_run
    assert (out / "model.h5").exists()
    assert (out / "history.json").exists()
    assert (out / "test_report.json").exists()
    assert (out / "curves.png").exists()
    run = json.loads((out / "run_manifest.json").read_text())
    assert run["parameters"]["learning_rate_used"] == 1e-3  # raised for the fallback CNN
    assert run["parameters"]["learning_rate_note"].startswith("raised")


def test_predict_output_contract(tiny_run, tmp_path, capsys):
    data, out = tiny_run
    image = next((data / "dark").glob("*.png"))
    rc = main(["predict", "--model", str(out / "model.h5"), "--image", str(image)])
    assert rc == 0
    line = capsys.readouterr().out.strip().splitlines()[-1]
    assert re.fullmatch(r"(green|light|medium|dark) \(\d+\.\d%\)", line)
    sidecar = Path(str(image) + ".prediction.json")
    assert sidecar.exists()
    doc = json.loads(sidecar.read_text())
    assert doc["predicted_class"] in ("green", "light", "medium", "dark")
    assert set(doc["probabilities"]) == {"green", "light", "medium", "dark"}


def test_evaluate_outputs(tiny_run, tmp_path):
    data, out = tiny_run
    eval_out = out / "eval"
    rc = main(["evaluate", "--model", str(out / "model.h5"), "--data", str(data),
               "--out", str(eval_out)])
    assert rc == 0
    report = json.loads((eval_out / "report.json").read_text())
    assert 0.0 <= report["accuracy"] <= 1.0
    assert (eval_out / "report.txt").exists()


def test_kfold_smoke(tmp_path, capsys):
    data = tmp_path / "data"
    main(["synth", "--per-class", "5", "--seed", "2", "--out", str(data),
          "--image-size", "64"])
    out = tmp_path / "kf"
    rc = main(["kfold", "--data", str(data), "--out", str(out), "--k", "2",
               "--epochs", "1", "--seed", "2", "--backbone", "fallback_cnn",
               "--batch-size", "8"])
    assert rc == 0
    summary = json.loads((out / "kfold_summary.json").read_text())
    assert len(summary["fold_accuracies"]) == 2
    assert (out / "fold_report_0.json").exists()
    assert (out / "fold_report_1.json").exists()
    printed = capsys.readouterr().out
    assert "mean fold accuracy" in printed


def test_train_reproducible_across_runs(tmp_path):
    # same seed, same data -> identical training history and predictions
    data = tmp_path / "data"
    main(["synth", "--per-class", "4", "--seed", "9", "--out", str(data),
          "--image-size", "64"])
    outs = []
    for name in ("r1", "r2"):
        out = tmp_path / name
        rc = main(["train", "--data", str(data), "--out", str(out),
                   "--epochs", "1", "--seed", "9", "--backbone", "fallback_cnn",
                   "--batch-size", "8"])
        assert rc == 0
        outs.append(out)
    h1 = json.loads((outs[0] / "history.json").read_text())
    h2 = json.loads((outs[1] / "history.json").read_text())
    assert h1 == h2

    from beanroast import PreprocessConfig, load_model, predict
    import numpy as np

    probe = next((data / "medium").glob("*.png"))
    p1 = predict(load_model(outs[0] / "model.h5"), probe, PreprocessConfig())
    p2 = predict(load_model(outs[1] / "model.h5"), probe, PreprocessConfig())
    assert np.array_equal(p1.probabilities, p2.probabilities)


def test_serve_requires_store(capsys, monkeypatch):
    monkeypatch.delenv("BEANROAST_STORE", raising=False)
    rc = main(["serve"])
    assert rc == 2
