import json
import time

import numpy as np
import pytest

from fallfourier import synth
from fallfourier.cli import main
from fallfourier.errors import ConfigError
from fallfourier.evaluate import read_ledger
from fallfourier.experiment import ExperimentConfig, expand_grid, load_config, run_experiment, run_grid
from fallfourier.ingest import FORMAT_VERSION, write_windows
from fallfourier.records import Source

from conftest import write_tfall_file, write_ucihar_split


@pytest.fixture(scope="module")
def synth_file(tmp_path_factory):
    path = tmp_path_factory.mktemp("synth") / "mixed.jsonl"
    write_windows(path, synth.synthesize("mixed", 1000, seed=5))
    return path


def _pools(windows):
    return [w for w in windows if w.source is Source.TFALL], [w for w in windows if w.source is Source.UCIHAR]


# ---------------------------------------------------------------- config


def test_config_file_and_flag_override(tmp_path):
    cfg_path = tmp_path / "exp.cfg"
    cfg_path.write_text("collection = 3\nfeature = energy\nk = 5\nnormalize = yes\nwindows = a.jsonl, b.jsonl\n")
    cfg = load_config(cfg_path, k=7, feature=None).validate()
    assert (cfg.collection, cfg.feature, cfg.k, cfg.normalize) == ("3", "energy", 7, True)
    assert cfg.windows == ("a.jsonl", "b.jsonl")


@pytest.mark.parametrize(
    "text",
    ["window = 64\n", "classifier = forest\n", "k = 2\n", "folds = 1\n", "bogus = 1\n", "threshold_rule = percentile:150\n"],
)
def test_config_rejects_bad_values(tmp_path, text):
    path = tmp_path / "bad.cfg"
    path.write_text(text)
    with pytest.raises(ConfigError):
        load_config(path).validate()


def test_cell_hash_ignores_output_location():
    a = ExperimentConfig(out="x").validate()
    b = ExperimentConfig(out="y", workers=4).validate()
    assert a.cell_hash == b.cell_hash
    assert a.cell_hash != ExperimentConfig(seed=1).validate().cell_hash


# ---------------------------------------------------------------- exit codes


def test_usage_errors_exit_one(tmp_path, capsys):
    assert main(["run", "--window", "64"]) == 1
    assert main(["nonsense"]) == 1
    bad = tmp_path / "bad.cfg"
    bad.write_text("k = 2\n")
    assert main(["run", "--config", str(bad)]) == 1
    assert "two-class kNN" in capsys.readouterr().err


def test_ingest_both_dirs_missing(tmp_path, capsys):
    code = main(["ingest", "--tfall", str(tmp_path / "nope"), "--ucihar", str(tmp_path / "nada"), "--out", str(tmp_path)])
    assert code == 2
    assert "no dataset directory" in capsys.readouterr().err


def test_run_failure_names_stage(tmp_path, capsys):
    code = main(["run", "--windows", str(tmp_path / "missing.jsonl"), "--out", str(tmp_path / "o")])
    assert code == 2
    assert "load" in capsys.readouterr().err


# ---------------------------------------------------------------- ingest


def _fake_tfall(root, rng):
    t = np.arange(0, 6, 0.02)
    for i in range(3):
        acc = rng.normal(size=(len(t), 3)) * 0.1 + [0, 0, 1]
        acc[150 + i] = [0, 0, 3.5]
        write_tfall_file(root / "falls" / f"s{i:02d}" / "fwd.txt", t, acc)
        write_tfall_file(root / "adl" / f"s{i:02d}" / "walk.txt", t, rng.normal(size=(len(t), 3)) * 0.3 + [0, 0, 1])
    write_tfall_file(root / "adl" / "s09" / "blip.txt", t[:20], np.ones((20, 3)))


def test_ingest_writes_files_and_is_deterministic(tmp_path, rng, capsys):
    _fake_tfall(tmp_path / "tfall", rng)
    write_ucihar_split(tmp_path / "uci", "train", 6)
    write_ucihar_split(tmp_path / "uci", "test", 4, seed=1)
    args = ["ingest", "--tfall", str(tmp_path / "tfall"), "--ucihar", str(tmp_path / "uci"), "--window", "51"]
    assert main(args + ["--out", str(tmp_path / "a")]) == 0
    assert "dataset1: 6 windows (3 ADL, 3 FALL)" in capsys.readouterr().out
    assert main(args + ["--out", str(tmp_path / "b")]) == 0
    for name in ("dataset1_w51.jsonl", "dataset2_w51.jsonl"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()
    manifest = json.loads((tmp_path / "a" / "ingest_manifest.json").read_text())
    assert manifest["datasets"]["dataset1"]["too_short"] == 1
    assert manifest["datasets"]["dataset2"]["windows"] == 10
    assert manifest["format_version"] == FORMAT_VERSION


def test_ingest_single_dataset_ok(tmp_path):
    write_ucihar_split(tmp_path / "uci", "train", 3)
    assert main(["ingest", "--ucihar", str(tmp_path / "uci"), "--out", str(tmp_path / "o")]) == 0
    assert (tmp_path / "o" / "dataset2_w128.jsonl").exists()
    assert not (tmp_path / "o" / "dataset1_w128.jsonl").exists()


# ---------------------------------------------------------------- run


def test_run_c2_synthetic_report(synth_file, tmp_path, capsys):
    out = tmp_path / "run"
    code = main(["run", "--windows", str(synth_file), "--collection", "2", "--k", "1", "--seed", "7", "--scale", "0.05", "--out", str(out)])
    assert code == 0
    report = json.loads((out / "report.json").read_text())
    assert len(report["folds"]) == 10
    assert set(report["means"]) == {"sa", "maa", "se", "sp"}
    assert report["config"]["seed"] == 7
    assert report["config"]["format_version"] == FORMAT_VERSION
    for name in ("report.csv", "report.md", "manifest.json"):
        text = (out / name).read_text()
        assert '"seed": 7' in text and '"format_version": 1' in text
    assert "mean_SA" in capsys.readouterr().out


def test_energy_report_is_comparable(synth_file, tmp_path):
    base = dict(windows=(str(synth_file),), collection="1", classifier="knn2", scale=0.05, seed=7)
    f = run_experiment(ExperimentConfig(feature="fourier", out=str(tmp_path / "f"), **base))
    e = run_experiment(ExperimentConfig(feature="energy", out=str(tmp_path / "e"), **base))
    assert len(f.folds) == len(e.folds) == 10
    assert [x.counts.total for x in f.folds] == [x.counts.total for x in e.folds]


def test_two_folds_on_four_instances(tmp_path):
    windows = synth.synthesize("mixed", 4, seed=1, fall_fraction=0.5)
    cfg = ExperimentConfig(collection="all", folds=2, out=str(tmp_path))
    report = run_experiment(cfg, pools=_pools(windows))
    assert len(report.folds) == 2
    assert all(f.counts.total == 2 for f in report.folds)


def test_identical_runs_identical_ledgers(synth_file, tmp_path):
    cfg = dict(windows=(str(synth_file),), scale=0.03, seed=3)
    for d in ("a", "b"):
        run_experiment(ExperimentConfig(out=str(tmp_path / d), **cfg))
    assert (tmp_path / "a" / "results.jsonl").read_bytes() == (tmp_path / "b" / "results.jsonl").read_bytes()


def test_run_with_holdout(synth_file, tmp_path):
    cfg = ExperimentConfig(windows=(str(synth_file),), scale=0.05, holdout=True, out=str(tmp_path))
    run_experiment(cfg)
    holdout = json.loads((tmp_path / "holdout.json").read_text())
    assert len(holdout["folds"]) == 1


def test_run_thousand_windows_under_a_minute(tmp_path):
    path = tmp_path / "w.jsonl"
    start = time.perf_counter()
    assert main(["synth", "--count", "1000", "--seed", "2", "--out", str(path)]) == 0
    assert main(["run", "--windows", str(path), "--collection", "all", "--out", str(tmp_path / "o")]) == 0
    assert time.perf_counter() - start < 60


# ---------------------------------------------------------------- grid


def test_grid_nine_cells_and_restart(synth_file, tmp_path):
    base = ExperimentConfig(windows=(str(synth_file),), scale=0.03, folds=3, out=str(tmp_path))
    axes = {"collection": ["1", "2", "3"], "feature": ["raw", "energy", "fourier"]}
    rows = run_grid(base, axes)
    assert len(rows) == 9 and all(r["status"] == "ok" for r in rows)
    ledger = read_ledger(tmp_path / "results.jsonl")
    assert len(ledger) == 9
    assert len({r["config_hash"] for r in ledger}) == 9
    assert all((tmp_path / "cells" / r["config_hash"] / "report.json").exists() for r in ledger)
    assert run_grid(base, axes) == []
    assert len(read_ledger(tmp_path / "results.jsonl")) == 9


def test_grid_empty_axes_single_run(synth_file, tmp_path):
    base = ExperimentConfig(windows=(str(synth_file),), scale=0.03, folds=3, out=str(tmp_path))
    assert len(expand_grid(base, {})) == 1
    assert len(run_grid(base, {})) == 1


def test_grid_bad_axis_is_usage_error(synth_file, tmp_path):
    assert main(["grid", "--windows", str(synth_file), "--out", str(tmp_path), "--axis", "scale=1"]) == 1
    assert main(["grid", "--windows", str(synth_file), "--out", str(tmp_path), "--axis", "k=1,3,2"]) == 1


def test_grid_records_failed_cell_and_continues(synth_file, tmp_path, capsys):
    # at scale 0.5 collection 1 needs ~3500 ADL windows; the synthetic pool has 900
    args = ["grid", "--windows", str(synth_file), "--folds", "3", "--scale", "0.5", "--out", str(tmp_path)]
    assert main(args + ["--axis", "collection=1,all"]) == 2
    assert "1 failed" in capsys.readouterr().out
    rows = read_ledger(tmp_path / "results.jsonl")
    assert [r["status"] for r in rows] == ["error", "ok"]
    assert "ADL/TFALL" in rows[0]["error"]


def test_report_command(synth_file, tmp_path, capsys):
    run_experiment(ExperimentConfig(windows=(str(synth_file),), scale=0.03, out=str(tmp_path)))
    capsys.readouterr()
    assert main(["report", str(tmp_path / "report.json"), "--style", "csv"]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[-1].startswith("mean,")
    assert main(["report", str(tmp_path / "results.jsonl")]) == 0
    assert "mean_MAA" in capsys.readouterr().out
