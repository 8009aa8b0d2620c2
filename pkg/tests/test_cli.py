"""CLI tests: subcommand behavior, exit codes, config file, streams.

Everything drives main(argv) in-process; the exit-code contract
(0 success, 2 data/model error, 64 usage error) is asserted throughout.
"""

import io
import json

import pytest

from dga_sentinel.cli import (
    EXIT_DATA,
    EXIT_OK,
    EXIT_USAGE,
    load_config_file,
    main,
)
from dga_sentinel.defaults import default_benign_corpus
from dga_sentinel.features import CSV_HEADER, is_hex


@pytest.fixture(scope="module")
def work(tmp_path_factory):
    """One shared workspace: domain lists, a feature CSV, a trained model."""
    root = tmp_path_factory.mktemp("cli")
    benign = list(default_benign_corpus().slds)[:60]
    (root / "benign.txt").write_text("\n".join(benign) + "\n")

    assert main([
        "generate", "--archetype", "hex", "--seed", "1", "--count", "60",
        "--length", "12", "--out", str(root / "hex.txt"),
    ]) == EXIT_OK
    mal = (root / "hex.txt").read_text().splitlines()

    (root / "all.txt").write_text("\n".join(benign + mal) + "\n")
    (root / "labels.txt").write_text(
        "\n".join(["benign"] * 60 + ["malicious,hex8"] * 60) + "\n"
    )
    assert main([
        "extract", "--in", str(root / "all.txt"), "--labels", str(root / "labels.txt"),
        "--out", str(root / "features.csv"),
    ]) == EXIT_OK
    assert main([
        "train", "--features", str(root / "features.csv"),
        "--out", str(root / "model.json"), "--seed", "5", "--trees", "20",
    ]) == EXIT_OK
    return root


# ---------------------------------------------------------------------------
# generate


def test_generate_hex_lines(work, tmp_path):
    out = tmp_path / "g.txt"
    assert main([
        "generate", "--archetype", "hex", "--seed", "9", "--count", "100",
        "--out", str(out),
    ]) == EXIT_OK
    lines = out.read_text().splitlines()
    assert len(lines) == 100
    assert all(is_hex(s) for s in lines)


def test_generate_deterministic(work, tmp_path):
    a, b = tmp_path / "a.txt", tmp_path / "b.txt"
    argv = ["generate", "--archetype", "random_char", "--seed", "4", "--count", "30",
            "--length", "10,14"]
    assert main(argv + ["--out", str(a)]) == EXIT_OK
    assert main(argv + ["--out", str(b)]) == EXIT_OK
    assert a.read_bytes() == b.read_bytes()


def test_generate_bad_archetype_is_usage_error(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["generate", "--archetype", "nonsense", "--count", "5"])
    assert exc.value.code == EXIT_USAGE


def test_generate_wordlist_and_tld(tmp_path):
    words = tmp_path / "words.txt"
    words.write_text("alpha\nbeta\n")
    out = tmp_path / "w.txt"
    assert main([
        "generate", "--archetype", "wordlist", "--wordlist", str(words),
        "--seed", "7", "--count", "12", "--tld", "net", "--out", str(out),
    ]) == EXIT_OK
    lines = out.read_text().splitlines()
    assert len(lines) == 12
    assert all(line.endswith(".net") for line in lines)
    assert all(
        line.removesuffix(".net") in
        {"alphaalpha", "alphabeta", "betaalpha", "betabeta"}
        for line in lines
    )


# ---------------------------------------------------------------------------
# extract


def test_extract_row_per_input_in_order(work, tmp_path, capsys):
    domains = tmp_path / "d.txt"
    domains.write_text("\n".join(f"dom{i:02d}" for i in range(10)) + "\n")
    assert main(["extract", "--in", str(domains)]) == EXIT_OK
    lines = capsys.readouterr().out.splitlines()
    assert lines[0] == ",".join(CSV_HEADER)
    assert len(lines) == 11
    assert [ln.rsplit(",", 3)[1] for ln in lines[1:]] == [f"dom{i:02d}" for i in range(10)]


def test_extract_no_dot_feature(work, tmp_path, capsys):
    domains = tmp_path / "d.txt"
    domains.write_text("mail.example.com\n")
    assert main(["extract", "--in", str(domains)]) == EXIT_OK
    dotted = capsys.readouterr().out.splitlines()[1].split(",")[3]
    assert main(["extract", "--in", str(domains), "--no-dot-feature"]) == EXIT_OK
    zeroed = capsys.readouterr().out.splitlines()[1].split(",")[3]
    assert dotted == "2.000000" and zeroed == "0.000000"


def test_extract_label_count_mismatch(work, tmp_path):
    domains = tmp_path / "d.txt"
    domains.write_text("aaa\nbbb\n")
    labels = tmp_path / "l.txt"
    labels.write_text("benign\n")
    assert main([
        "extract", "--in", str(domains), "--labels", str(labels),
    ]) == EXIT_DATA


# ---------------------------------------------------------------------------
# train


def test_train_binary_default_trees(work, tmp_path):
    out = tmp_path / "m.json"
    assert main([
        "train", "--features", str(work / "features.csv"), "--out", str(out),
    ]) == EXIT_OK
    assert json.loads(out.read_text())["params"]["n_trees"] == 100


def test_train_multiclass_default_trees(work, tmp_path):
    # family column carries the class: benign rows fall back to their label
    out = tmp_path / "m.json"
    assert main([
        "train", "--features", str(work / "features.csv"), "--out", str(out),
        "--multiclass",
    ]) == EXIT_OK
    doc = json.loads(out.read_text())
    assert doc["params"]["n_trees"] == 200
    assert doc["class_labels"] == ["benign", "hex8"]


def test_train_single_class_is_data_error(work, tmp_path, capsys):
    csv_text = (work / "features.csv").read_text().splitlines()
    header, rows = csv_text[0], csv_text[1:]
    one_class = [r for r in rows if r.endswith(",benign,")]
    degenerate = tmp_path / "one.csv"
    degenerate.write_text("\n".join([header] + one_class) + "\n")
    assert main([
        "train", "--features", str(degenerate), "--out", str(tmp_path / "m.json"),
    ]) == EXIT_DATA


# ---------------------------------------------------------------------------
# classify


def test_classify_batch_hex_is_malicious(work, tmp_path, capsys):
    agds = tmp_path / "agd.txt"
    agds.write_text("0a1b2c3d4e5f\n9f8e7d6c5b4a\n")
    assert main([
        "classify", "--model", str(work / "model.json"), "--in", str(agds),
    ]) == EXIT_OK
    lines = capsys.readouterr().out.splitlines()
    assert lines[0] == "sld,label,score"
    for line in lines[1:]:
        sld, label, score = line.split(",")
        assert label == "malicious" and float(score) > 0.5


def test_classify_stream_flushes_and_skips_empty(work, monkeypatch, capsys):
    monkeypatch.setattr("sys.stdin", io.StringIO("0a1b2c3d4e5f\n\nexample\n"))
    assert main([
        "classify", "--model", str(work / "model.json"), "--stdin-stream",
    ]) == EXIT_OK
    captured = capsys.readouterr()
    verdicts = captured.out.splitlines()
    assert len(verdicts) == 2  # one verdict per non-empty input
    assert "empty line" in captured.err
    assert verdicts[0].split(",")[1] == "malicious"


def test_classify_corrupt_model_is_data_error(work, tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{\"schema_version\": 99}")
    agds = tmp_path / "agd.txt"
    agds.write_text("abc\n")
    assert main([
        "classify", "--model", str(bad), "--in", str(agds),
    ]) == EXIT_DATA


def test_classify_requires_exactly_one_input_mode(work):
    with pytest.raises(SystemExit) as exc:
        main(["classify", "--model", str(work / "model.json")])
    assert exc.value.code == EXIT_USAGE


# ---------------------------------------------------------------------------
# evaluate


def test_evaluate_report_byte_identical(work, tmp_path, capsys):
    argv = [
        "evaluate", "--benign", str(work / "benign.txt"),
        "--malicious", str(work / "hex.txt"),
        "--reps", "2", "--folds", "5", "--trees", "8", "--seed", "3",
    ]
    r1, r2 = tmp_path / "r1.json", tmp_path / "r2.json"
    assert main(argv + ["--report", str(r1)]) == EXIT_OK
    assert main(argv + ["--report", str(r2)]) == EXIT_OK
    assert r1.read_bytes() == r2.read_bytes()
    doc = json.loads(r1.read_text())
    assert "hex" in doc["per_family"]
    assert doc["per_family"]["hex"]["sigma_f1"] >= 0
    out = capsys.readouterr().out
    assert "hex" in out and "weighted" in out


def test_evaluate_quota_unmet_is_data_error(work):
    assert main([
        "evaluate", "--benign", str(work / "benign.txt"),
        "--malicious", str(work / "hex.txt"),
        "--ratio", "1:100", "--reps", "1", "--folds", "2",
    ]) == EXIT_DATA


def test_evaluate_requires_benign_without_multiclass(work):
    with pytest.raises(SystemExit) as exc:
        main(["evaluate", "--malicious", str(work / "hex.txt")])
    assert exc.value.code == EXIT_USAGE


def test_evaluate_multiclass_flag(work, tmp_path, capsys):
    rand = tmp_path / "rand.txt"
    assert main([
        "generate", "--archetype", "random_char", "--seed", "2", "--count", "60",
        "--length", "12", "--out", str(rand),
    ]) == EXIT_OK
    assert main([
        "evaluate", "--multiclass",
        "--malicious", f"{work / 'hex.txt'},{rand}",
        "--folds", "5", "--trees", "8",
    ]) == EXIT_OK
    out = capsys.readouterr().out
    assert "hex" in out and "rand" in out


# ---------------------------------------------------------------------------
# bench


def test_bench_refuses_small_input(work):
    assert main([
        "bench", "--model", str(work / "model.json"), "--in", str(work / "hex.txt"),
    ]) == EXIT_DATA


def test_bench_force_emits_stats(work, capsys):
    assert main([
        "bench", "--model", str(work / "model.json"), "--in", str(work / "hex.txt"),
        "--force",
    ]) == EXIT_OK
    stats = json.loads(capsys.readouterr().out)
    assert stats["single_threaded"] is True
    assert stats["count"] == 60
    assert stats["mean_feature_ms"] > 0
    assert set(stats) >= {"mean_feature_ms", "p95_feature_ms",
                          "mean_predict_ms", "p95_predict_ms"}


# ---------------------------------------------------------------------------
# train-models


def test_train_models_writes_bundle_and_reruns_identically(work, tmp_path, capsys):
    out1, out2 = tmp_path / "m1", tmp_path / "m2"
    argv = ["train-models", "--benign", str(work / "benign.txt")]
    assert main(argv + ["--out", str(out1)]) == EXIT_OK
    assert main(argv + ["--out", str(out2)]) == EXIT_OK
    names = {p.name for p in out1.iterdir()}
    assert names == {"ngram3.json", "ngram4.json", "ngram5.json",
                     "word_model.json", "markov.json", "manifest.json"}
    assert (out1 / "manifest.json").read_bytes() == (out2 / "manifest.json").read_bytes()
    # the trained bundle round-trips through extract
    capsys.readouterr()
    domains = tmp_path / "d.txt"
    domains.write_text("example\n")
    assert main(["extract", "--models", str(out1), "--in", str(domains)]) == EXIT_OK
    assert capsys.readouterr().out.splitlines()[0] == ",".join(CSV_HEADER)


def test_train_models_empty_corpus(work, tmp_path):
    empty = tmp_path / "empty.txt"
    empty.write_text("# nothing here\n")
    assert main([
        "train-models", "--benign", str(empty), "--out", str(tmp_path / "m"),
    ]) == EXIT_DATA


# ---------------------------------------------------------------------------
# config file


def test_config_key_value_supplies_defaults(work, tmp_path, capsys):
    conf = tmp_path / "conf.kv"
    conf.write_text("count=3\nlength=\"6\"\n# comment\n")
    assert main([
        "--config", str(conf), "generate", "--archetype", "hex", "--seed", "1",
    ]) == EXIT_OK
    lines = capsys.readouterr().out.splitlines()
    assert len(lines) == 3 and all(len(s) == 6 for s in lines)


def test_config_flag_beats_config_file(work, tmp_path, capsys):
    conf = tmp_path / "conf.kv"
    conf.write_text("count=3\n")
    assert main([
        "--config", str(conf), "generate", "--archetype", "hex", "--seed", "1",
        "--count", "5",
    ]) == EXIT_OK
    assert len(capsys.readouterr().out.splitlines()) == 5


def test_config_json_object_and_env_var(work, tmp_path, capsys, monkeypatch):
    conf = tmp_path / "conf.json"
    conf.write_text(json.dumps({"count": 4, "seed": 2}))
    monkeypatch.setenv("DGA_SENTINEL_CONFIG", str(conf))
    assert main(["generate", "--archetype", "hex"]) == EXIT_OK
    assert len(capsys.readouterr().out.splitlines()) == 4


def test_config_unknown_key_is_usage_error(work, tmp_path):
    conf = tmp_path / "conf.kv"
    conf.write_text("not_a_flag=1\n")
    with pytest.raises(SystemExit) as exc:
        main(["--config", str(conf), "generate", "--archetype", "hex", "--count", "1"])
    assert exc.value.code == EXIT_USAGE


def test_config_loader_parses_values(tmp_path):
    conf = tmp_path / "c.kv"
    conf.write_text('a=1\nb=text\nc="quoted"\nd=1.5\n')
    assert load_config_file(str(conf)) == {"a": 1, "b": "text", "c": "quoted", "d": 1.5}


def test_missing_subcommand_is_usage_error():
    with pytest.raises(SystemExit) as exc:
        main([])
    assert exc.value.code == EXIT_USAGE
