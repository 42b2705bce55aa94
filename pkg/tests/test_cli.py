import json

import numpy as np
import pytest

from sffkit.cli import build_parser, main


@pytest.fixture
def corpus(tmp_path):
    out = tmp_path / "corpus"
    assert main(["synth", "--out", str(out), "--speakers-per-class", "2",
                 "--duration", "0.3", "--seed", "5"]) == 0
    return out / "manifest.csv"


def test_extract_then_evaluate(corpus, tmp_path, capsys):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"sff": {"delta_f_hz": 62.5}}))
    out = tmp_path / "features"
    assert main(["extract", "--manifest", str(corpus), "--features", "sffcc",
                 "--task", "read_text", "--config", str(cfg), "--out", str(out)]) == 0
    features = out / "features_sffcc_read_text.csv"
    assert features.is_file()

    results = tmp_path / "results"
    assert main(["evaluate", "--features-file", str(features), "--grid", "1e-1..1e1",
                 "--out", str(results)]) == 0
    report = json.loads((results / "report.json").read_text())
    assert report["fold_count"] == 6
    assert report["config"]["c_grid"] == [0.1, 1.0, 10.0]
    assert report["config"]["sff"]["delta_f_hz"] == 62.5
    assert "6 folds" in capsys.readouterr().out


def test_compare_prints_deltas(corpus, tmp_path, capsys):
    out = tmp_path / "cmp"
    assert main(["compare", "--manifest", str(corpus), "--kinds", "mfcc,sffcc",
                 "--grid", "1", "--out", str(out)]) == 0
    printed = capsys.readouterr().out
    assert "sffcc vs mfcc" in printed
    assert (out / "comparison.json").is_file()
    assert (out / "mfcc" / "confusion.csv").is_file()


def test_compare_per_task_writes_stacked_tables(corpus, tmp_path, capsys):
    out = tmp_path / "tasks"
    assert main(["compare", "--manifest", str(corpus), "--kinds", "mfcc,sffcc",
                 "--tasks", "read_text", "--grid", "1", "--out", str(out)]) == 0
    printed = capsys.readouterr().out
    assert "### Read text" in printed
    assert "[read_text] sffcc vs mfcc" in printed
    assert (out / "tasks.md").is_file()
    assert (out / "read_text" / "mfcc" / "confusion.csv").is_file()


def test_parser_rejects_unknown_task_list():
    with pytest.raises(SystemExit):
        build_parser().parse_args(["compare", "--manifest", "m.csv", "--tasks", "vowel,monologue"])


@pytest.mark.parametrize("method, bins", [("sff", 64), ("stft", 129)])
def test_spectrogram_export(corpus, tmp_path, method, bins):
    wav = next((corpus.parent / "audio").glob("*.wav"))
    out = tmp_path / f"{method}.csv"
    args = ["spectrogram", "--wav", str(wav), "--method", method, "--out", str(out)]
    if method == "sff":
        args += ["--delta-f", "62.5"]
    assert main(args) == 0
    assert np.loadtxt(out, delimiter=",").shape[1] == bins


def test_errors_exit_non_zero(tmp_path):
    assert main(["extract", "--manifest", str(tmp_path / "missing.csv"), "--out", str(tmp_path)]) == 1


def test_parser_rejects_unknown_feature_kind():
    with pytest.raises(SystemExit):
        build_parser().parse_args(["extract", "--manifest", "m.csv", "--features", "plp"])
