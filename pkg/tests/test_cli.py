import csv
import json
import subprocess
import sys

import numpy as np
import pytest

from agflow.cli import main
from agflow.paths import read_path


@pytest.fixture
def workdir(tmp_path):
    data = tmp_path / "d.csv"
    assert main(["synth", "--n", "60", "--d", "40", "--out", str(data), "--seed", "1"]) == 0
    man = tmp_path / "m.json"
    assert main(["split", "--input", str(data), "--label-column", "label", "--out", str(man)]) == 0
    return tmp_path, data, man


def common(data, man):
    return ["--input", str(data), "--label-column", "label", "--manifest", str(man)]


def test_split_prints_class_counts(workdir, capsys):
    tmp, data, _ = workdir
    assert main(["split", "--input", str(data), "--label-column", "label", "--out", str(tmp / "m2.json")]) == 0
    out = capsys.readouterr().out
    assert "train=36 val=12 test=12" in out and "class 0: 18/6/6" in out


def test_full_pipeline(workdir, capsys):
    tmp, data, man = workdir
    out = tmp / "out"
    assert main(["fit-path", *common(data, man), "--iterations", "300", "--d-prime", "2",
                 "--stride", "3", "--format", "csv", "--out-dir", str(out)]) == 0
    pp = read_path(out / "agflow_path.csv")
    assert len(pp) == 100 and pp.d == 40 and pp.d_prime == 2
    meta = json.loads((out / "agflow_path.meta.json").read_text())
    assert meta["config"]["iterations"] == 300 and meta["schema_version"] == "1.0"
    assert meta["lambda_range"][1] == pytest.approx(1 / np.sqrt(0.5e-4))
    assert "wall_seconds" in meta

    assert main(["ridge-path", *common(data, man), "--d-prime", "2", "--grid", "0.01:100:7",
                 "--out-dir", str(out)]) == 0
    assert len(read_path(out / "ridge_path.npz")) == 7

    assert main(["select", *common(data, man), "--path", str(out / "agflow_path.csv"),
                 "--out-dir", str(out)]) == 0
    sel = json.loads((out / "agflow_selection.json").read_text())
    assert "test_score" not in sel and sel["best_k"] % 3 == 0
    assert main(["select", *common(data, man), "--path", str(out / "ridge_path.npz"),
                 "--learner", "knn", "--k-neighbors", "3", "--score-test", "--out-dir", str(out)]) == 0
    sel = json.loads((out / "ridge_selection.json").read_text())
    assert 0.0 <= sel["test_score"] <= 1.0 and sel["learner"] == "knn"
    rows = list(csv.reader(l for l in (out / "ridge_scores.csv").read_text().splitlines()
                           if not l.startswith("#")))
    assert rows[0] == ["k", "lambda", "score"] and len(rows) == 8
    assert np.loadtxt(out / "ridge_best_projection.csv", delimiter=",").shape == (40, 2)

    assert main(["baselines", *common(data, man), "--d-prime", "2", "--out-dir", str(out)]) == 0
    base = (out / "baselines.csv").read_text()
    assert base.count("\n") == 6 and "quasips" in base
    assert (out / "loadings_svd.csv").exists()


def test_seed_env_override(workdir, monkeypatch):
    tmp, data, man = workdir
    runs = []
    for env_seed in ("5", "5", "6"):
        monkeypatch.setenv("AGFLOW_SEED", env_seed)
        out = tmp / f"o{len(runs)}"
        assert main(["fit-path", *common(data, man), "--iterations", "40", "--d-prime", "1",
                     "--seed", "0", "--out-dir", str(out)]) == 0
        runs.append((out / "agflow_path.npz").read_bytes())
    assert runs[0] == runs[1] != runs[2]
    monkeypatch.setenv("AGFLOW_SEED", "abc")
    assert main(["fit-path", *common(data, man), "--out-dir", str(tmp / "bad")]) == 1


def test_exit_codes(workdir, capsys):
    tmp, data, man = workdir
    assert main(["fit-path", "--input", str(tmp / "missing.csv"), "--manifest", str(man),
                 "--out-dir", str(tmp / "o")]) == 2
    assert main(["fit-path", *common(data, tmp / "nope.json"), "--out-dir", str(tmp / "o")]) == 2
    assert "nope.json" in capsys.readouterr().err
    assert main(["fit-path", *common(data, man), "--step", "-1", "--out-dir", str(tmp / "o")]) == 1
    assert main(["ridge-path", *common(data, man), "--grid", "1:0:3", "--out-dir", str(tmp / "o")]) == 1
    assert main(["split", "--input", str(data), "--label-column", "label", "--ratios", "0.5,0.6,0",
                 "--out", str(tmp / "x.json")]) == 1
    (tmp / "junk.npz").write_text("not a zip")
    assert main(["select", *common(data, man), "--path", str(tmp / "junk.npz"), "--out-dir", str(tmp)]) == 1
    assert "not an .npz" in capsys.readouterr().err


def test_gd_mode_forces_full_batch(workdir):
    tmp, data, man = workdir
    out = tmp / "gd"
    assert main(["fit-path", *common(data, man), "--mode", "gd", "--batch", "5", "--iterations", "20",
                 "--d-prime", "1", "--out-dir", str(out)]) == 0
    meta = json.loads((out / "agflow_path.meta.json").read_text())
    assert meta["batch_size"] == 36
    assert meta["lambda_range"][1] == pytest.approx(1 / 0.5e-4)


def test_bench_commands(tmp_path):
    out = tmp_path / "b.csv"
    assert main(["bench", "--shapes", "20x50x2", "--iterations", "50", "--grid-size", "4", "--out", str(out)]) == 0
    lines = [l for l in out.read_text().splitlines() if not l.startswith("#")]
    assert lines[0] == "n,d,d_prime,method,models,seconds,seconds_per_model" and len(lines) == 3
    assert main(["bench-kernels", "--n", "20", "--d", "30", "--iterations", "20",
                 "--out", str(tmp_path / "k.csv")]) == 0
    assert main(["bench", "--shapes", "20x", "--out", str(out)]) == 1


def test_console_script_entry_point():
    r = subprocess.run([sys.executable, "-m", "agflow.cli", "--help"], capture_output=True, text=True)
    assert r.returncode == 0 and "fit-path" in r.stdout
