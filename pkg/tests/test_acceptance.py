"""Acceptance suite: every shipped claim, at its stated tolerance.

One test per claim, one PASS/FAIL line per test (printed detail plus the
assertion).  The heavy experiments run at the sizes the claims pin
(thousands of SLDs, ten repetitions, ten folds), so this file dominates
suite runtime by design.

Claims covered:
  1. hex-archetype binary detection: mean F1 >= 0.99, sigma <= 0.01,
     5,000 vs 5,000 at 1:1, 10-fold, 10 repetitions, under 5 minutes.
  2. wordlist-archetype is measurably harder: mean F1 in [0.90, 1.00) and
     below the hex F1 in every one of the 10 paired repetitions.
  3. ratio robustness: random-char F1 at 1:10 and 1:100 within 3 points
     of the 1:1 F1.
  4. multiclass separation: hex8/rand12/dict2 at 2,000 each, 200 trees,
     10-fold, weighted F1 >= 0.95.
  5. latency: mean extraction <= 5 ms and prediction <= 2 ms per 16-char
     SLD over 10,000 SLDs after warm-up.
  6. property suites: segmentation and tree induction against exhaustive
     oracles, feature bounds over 100,000 fuzzed SLDs, byte-identical
     seeded end-to-end runs, the 50-case label-syntax fixture.
  7. ingest fidelity: the 1,000-line quirk fixture reproduces its
     hand-audited SLD list and drop counters exactly.
"""

import json
import math
import os
import time

import numpy as np
import pytest

from oracles import exhaustive_cart, exhaustive_min_segmentation, oracle_predict

from dga_sentinel.cli import EXIT_OK, main
from dga_sentinel.defaults import (
    default_benign_corpus,
    default_models,
    default_wordlist,
)
from dga_sentinel.evaluate import (
    EvalConfig,
    benchmark_latency,
    multiclass_evaluate,
    repeat_experiment,
)
from dga_sentinel.features import (
    FEATURE_INDEX,
    FEATURE_NAMES,
    FeatureExtractor,
)
from dga_sentinel.forest import ForestParams, predict_batch, train_forest
from dga_sentinel.normalize import ingest_benign_corpus, validate_rfc
from dga_sentinel.rng import SplitMix64
from dga_sentinel.synth import DgaSpec, generate
from dga_sentinel.textmodels import build_word_model, segment, segmentation_cost

GOLDEN = os.path.join(os.path.dirname(__file__), "golden")


def _verdict(name: str, ok: bool, detail: str) -> None:
    print(f"{name}: {'PASS' if ok else 'FAIL'} - {detail}")


@pytest.fixture(scope="module")
def models():
    return default_models()


@pytest.fixture(scope="module")
def extractor(models):
    # one shared memo across all experiments: the benign pool repeats
    return FeatureExtractor(models, cache_size=262144)


@pytest.fixture(scope="module")
def benign():
    return list(default_benign_corpus().slds)


@pytest.fixture(scope="module")
def hex5k():
    return generate(DgaSpec(archetype="hex", seed=101, count=5000, length=8))


@pytest.fixture(scope="module")
def rand5k():
    return generate(DgaSpec(archetype="random_char", seed=303, count=5000, length=12))


@pytest.fixture(scope="module")
def dict5k():
    words = tuple(w for w in default_wordlist()[200:] if 4 <= len(w) <= 8)[:500]
    assert len(words) == 500
    return generate(DgaSpec(archetype="wordlist", seed=202, count=5000, wordlist=words))


@pytest.fixture(scope="module")
def hex_experiment(benign, hex5k, models, extractor):
    """The criterion-1 experiment; criterion 2 reuses its repetition F1s."""
    config = EvalConfig(repetitions=10, folds=10, rng_seed=7)
    t0 = time.perf_counter()
    result = repeat_experiment(benign, hex5k, models, config, family="hex8",
                               extractor=extractor)
    return result, time.perf_counter() - t0


def test_criterion_1_hex_binary_detection(hex_experiment):
    result, wall = hex_experiment
    ok = result.metrics.f1 >= 0.99 and result.sigma_f1 <= 0.01 and wall < 300
    _verdict(
        "criterion 1 (hex vs benign, 1:1, 10x10-fold)",
        ok,
        f"mean F1={result.metrics.f1:.4f} (>=0.99), sigma={result.sigma_f1:.4f} "
        f"(<=0.01), wall={wall:.0f}s (<300s)",
    )
    assert result.metrics.f1 >= 0.99
    assert result.sigma_f1 <= 0.01
    assert wall < 300
    assert result.support == 50_000  # 10 reps x 5,000 malicious evaluated


def test_criterion_2_wordlist_archetype_is_harder(
    benign, dict5k, models, extractor, hex_experiment
):
    hex_result, _ = hex_experiment
    config = EvalConfig(repetitions=10, folds=10, rng_seed=7)
    result = repeat_experiment(benign, dict5k, models, config, family="dict2",
                               extractor=extractor)
    in_band = 0.90 <= result.metrics.f1 < 1.00
    ordered = all(
        d < h for d, h in zip(result.f1_series, hex_result.f1_series)
    )
    ok = in_band and ordered
    _verdict(
        "criterion 2 (dict2 harder than hex8)",
        ok,
        f"dict2 mean F1={result.metrics.f1:.4f} in [0.90,1.00), "
        f"below hex in {sum(d < h for d, h in zip(result.f1_series, hex_result.f1_series))}"
        f"/10 paired repetitions",
    )
    assert in_band
    assert ordered


def test_criterion_3_ratio_robustness(benign, rand5k, models, extractor):
    f1 = {}
    for ratio in ((1, 1), (1, 10), (1, 100)):
        config = EvalConfig(ratio=ratio, repetitions=5, folds=10, rng_seed=7)
        result = repeat_experiment(benign, rand5k, models, config,
                                   family="rand12", extractor=extractor)
        f1[ratio] = result.metrics.f1
    drift10 = abs(f1[(1, 10)] - f1[(1, 1)])
    drift100 = abs(f1[(1, 100)] - f1[(1, 1)])
    ok = drift10 <= 0.03 and drift100 <= 0.03
    _verdict(
        "criterion 3 (random-char ratio robustness)",
        ok,
        f"F1 1:1={f1[(1, 1)]:.4f}, 1:10={f1[(1, 10)]:.4f} (drift {drift10:.4f}), "
        f"1:100={f1[(1, 100)]:.4f} (drift {drift100:.4f}); both <= 0.03",
    )
    assert drift10 <= 0.03
    assert drift100 <= 0.03


def test_criterion_4_multiclass_separation(hex5k, rand5k, dict5k, models):
    config = EvalConfig(
        folds=10,
        rng_seed=7,
        forest_params=ForestParams(n_trees=200),
    )
    families = [
        ("hex8", hex5k[:2000]),
        ("rand12", rand5k[:2000]),
        ("dict2", dict5k[:2000]),
    ]
    report = multiclass_evaluate(families, models, config)
    ok = report.weighted.f1 >= 0.95
    per = ", ".join(
        f"{r.family}={r.metrics.f1:.4f}" for r in report.per_family
    )
    _verdict(
        "criterion 4 (3-family multiclass, 200 trees)",
        ok,
        f"weighted F1={report.weighted.f1:.4f} (>=0.95); per-family {per}",
    )
    assert report.weighted.f1 >= 0.95
    assert all(not r.flagged for r in report.per_family)


def test_criterion_5_latency(benign, hex5k, models, extractor):
    slds16 = generate(
        DgaSpec(archetype="random_char", seed=404, count=10_000, length=16)
    )
    X = np.stack([extractor.extract_sld(s).values for s in benign[:2000] + hex5k[:2000]])
    y = ["benign"] * 2000 + ["malicious"] * 2000
    forest = train_forest(X, y, ForestParams(n_trees=100, rng_seed=1))
    stats = benchmark_latency(slds16, models, forest)
    ok = stats["mean_feature_ms"] <= 5.0 and stats["mean_predict_ms"] <= 2.0
    _verdict(
        "criterion 5 (per-SLD latency, 16-char, n=10,000)",
        ok,
        f"extract mean={stats['mean_feature_ms']:.3f}ms (<=5), "
        f"p95={stats['p95_feature_ms']:.3f}ms; "
        f"predict mean={stats['mean_predict_ms']:.3f}ms (<=2), "
        f"p95={stats['p95_predict_ms']:.3f}ms; single-threaded",
    )
    assert stats["count"] == 10_000
    assert stats["mean_feature_ms"] <= 5.0
    assert stats["mean_predict_ms"] <= 2.0


# ---------------------------------------------------------------------------
# criterion 6: property suites


def test_criterion_6a_segmentation_matches_exhaustive_oracle():
    vocab = ["cat", "at", "cats", "sat", "a"]
    model = build_word_model(vocab)
    # closure of the vocabulary under concatenation, up to 12 chars
    seen = set()
    queue = [""]
    while queue:
        prefix = queue.pop()
        for w in vocab:
            s = prefix + w
            if len(s) <= 12 and s not in seen:
                seen.add(s)
                queue.append(s)
    # plus strings that need not decompose cleanly: random draws over the
    # vocabulary's alphabet extended by one letter no word contains
    rng = SplitMix64(505)
    alphabet = "catsx"
    random_mass = {
        "".join(alphabet[rng.rand_below(5)] for _ in range(1 + rng.rand_below(12)))
        for _ in range(300)
    }
    mismatches = 0
    for s in sorted(seen | random_mass):
        got = segment(s, model)
        best_cost, _ = exhaustive_min_segmentation(s, model)
        if "".join(got) != s or not math.isclose(
            segmentation_cost(got, model), best_cost, abs_tol=1e-12
        ):
            mismatches += 1
    _verdict(
        "criterion 6a (segmentation vs exhaustive oracle)",
        mismatches == 0,
        f"{len(seen)} concatenations <= 12 chars over 5-word vocabulary "
        f"+ {len(random_mass - seen)} random strings, {mismatches} mismatches",
    )
    assert len(seen) > 500
    assert mismatches == 0


def test_criterion_6b_tree_matches_exhaustive_split_oracle():
    rng = SplitMix64(606)
    cases = checked = 0
    for _ in range(40):
        n = 4 + rng.rand_below(13)        # 4..16 samples
        p = 1 + rng.rand_below(3)         # 1..3 features
        k = 2 + rng.rand_below(2)         # 2..3 classes
        X = np.array(
            [[float(rng.rand_below(4)) for _ in range(p)] for _ in range(n)]
        )
        y = [rng.rand_below(k) for _ in range(n)]
        if len(set(y)) < 2:
            continue
        params = ForestParams(
            n_trees=1, bootstrap=False, features_per_split=p, rng_seed=9
        )
        forest = train_forest(X, [str(c) for c in y], params)
        got, _ = predict_batch(forest, X)
        root = exhaustive_cart(X.tolist(), y, n_classes=k)
        want = [str(oracle_predict(root, row)) for row in X]
        assert got == want, (X.tolist(), y)
        cases += 1
        checked += n
    _verdict(
        "criterion 6b (tree induction vs exhaustive-split oracle)",
        True,
        f"{cases} seeded datasets <= 16 samples, {checked} predictions agree",
    )
    assert cases >= 30


def test_criterion_6c_feature_bounds_on_fuzzed_slds(models):
    alphabet = "abcdefghijklmnopqrstuvwxyz0123456789-"
    rng = SplitMix64(707)
    extractor = FeatureExtractor(models)
    count = 100_000
    mats = []
    batch = []
    for _ in range(count):
        n = 1 + rng.rand_below(32)
        batch.append("".join(alphabet[rng.rand_below(37)] for _ in range(n)))
        if len(batch) == 10_000:
            mats.append(np.stack([extractor.extract_sld(s).values for s in batch]))
            batch = []
    M = np.vstack(mats)
    assert M.shape == (count, len(FEATURE_NAMES))

    ratio_cols = [i for i, name in enumerate(FEATURE_NAMES)
                  if name.startswith("R-") or name.startswith("GIB-")]
    entropy_cols = [i for i, name in enumerate(FEATURE_NAMES) if name.startswith("E-")]
    length_cols = [FEATURE_INDEX[n] for n in
                   ("L-HEX", "L-LEN", "L-DIG", "L-DOT", "L-CON-MAX", "L-VOW-MAX",
                    "L-W2", "L-W3")]
    finite = bool(np.isfinite(M).all())
    ratios_ok = bool((M[:, ratio_cols] >= 0.0).all() and (M[:, ratio_cols] <= 1.0).all())
    entropy_ok = bool(
        (M[:, entropy_cols] >= 0.0).all()
        and (M[:, entropy_cols] <= math.log2(len(alphabet)) + 1e-9).all()
    )
    lengths_ok = bool((M[:, length_cols] >= 0.0).all())
    ok = finite and ratios_ok and entropy_ok and lengths_ok
    _verdict(
        "criterion 6c (bounds on 100,000 fuzzed SLDs)",
        ok,
        f"finite={finite}, ratios/gibberish in [0,1]={ratios_ok}, "
        f"entropies in [0, log2(37)]={entropy_ok}, counters >= 0={lengths_ok}",
    )
    assert finite and ratios_ok and entropy_ok and lengths_ok


def test_criterion_6d_seeded_end_to_end_is_byte_identical(benign, tmp_path):
    def run(root):
        root.mkdir()
        mal, ben = root / "mal.txt", root / "ben.txt"
        ben.write_text("\n".join(benign[:300]) + "\n")
        assert main(["generate", "--archetype", "hex", "--seed", "11",
                     "--count", "300", "--out", str(mal)]) == EXIT_OK
        both = root / "all.txt"
        both.write_text(ben.read_text() + mal.read_text())
        labels = root / "labels.txt"
        labels.write_text("\n".join(["benign"] * 300 + ["malicious,hex8"] * 300) + "\n")
        feats, model = root / "features.csv", root / "model.json"
        assert main(["extract", "--in", str(both), "--labels", str(labels),
                     "--out", str(feats)]) == EXIT_OK
        assert main(["train", "--features", str(feats), "--out", str(model),
                     "--trees", "20", "--seed", "5"]) == EXIT_OK
        probe = root / "probe.txt"
        assert main(["generate", "--archetype", "random_char", "--seed", "12",
                     "--count", "100", "--out", str(probe)]) == EXIT_OK
        verdicts = root / "verdicts.csv"
        assert main(["classify", "--model", str(model), "--in", str(probe),
                     "--out", str(verdicts)]) == EXIT_OK
        report = root / "report.json"
        assert main(["evaluate", "--benign", str(ben), "--malicious", str(mal),
                     "--reps", "2", "--folds", "5", "--trees", "8", "--seed", "3",
                     "--report", str(report)]) == EXIT_OK
        return {p.name: p.read_bytes() for p in
                (mal, feats, model, verdicts, report)}

    first = run(tmp_path / "run1")
    second = run(tmp_path / "run2")
    identical = [name for name in first if first[name] == second[name]]
    ok = len(identical) == len(first)
    _verdict(
        "criterion 6d (seeded end-to-end byte-identical)",
        ok,
        f"{len(identical)}/{len(first)} primary outputs identical across runs "
        f"({', '.join(sorted(first))})",
    )
    assert ok


def test_criterion_6e_label_syntax_fixture():
    with open(os.path.join(GOLDEN, "rfc_cases.json"), encoding="utf-8") as fh:
        cases = json.load(fh)
    assert len(cases) == 50
    mismatches = []
    for case in cases:
        verdict = validate_rfc(case["domain"])
        if verdict.valid != case["valid"] or list(verdict.violations) != case["violations"]:
            mismatches.append(case["domain"])
    has_xn = sum(1 for c in cases if "xn--" in c["domain"].lower())
    _verdict(
        "criterion 6e (50-case label-syntax fixture)",
        not mismatches,
        f"50 hand-audited cases ({has_xn} involving xn--), "
        f"mismatches: {mismatches or 'none'}",
    )
    assert has_xn >= 5
    assert not mismatches


def test_criterion_7_ingest_matches_hand_audited_golden():
    with open(os.path.join(GOLDEN, "ingest_fixture.txt"), encoding="utf-8") as fh:
        lines = fh.read().splitlines()
    with open(os.path.join(GOLDEN, "ingest_golden.json"), encoding="utf-8") as fh:
        golden = json.load(fh)
    assert len(lines) == 1000
    corpus = ingest_benign_corpus(lines)
    checks = {
        "slds": list(corpus.slds) == golden["slds"],
        "source_count": corpus.source_count == golden["source_count"],
        "dropped_duplicate": corpus.dropped_duplicate == golden["dropped_duplicate"],
        "dropped_idn": corpus.dropped_idn == golden["dropped_idn"],
        "dropped_invalid": corpus.dropped_invalid == golden["dropped_invalid"],
    }
    ok = all(checks.values())
    _verdict(
        "criterion 7 (1,000-line ingest fixture vs golden)",
        ok,
        f"{len(corpus.slds)} SLDs, dup={corpus.dropped_duplicate}, "
        f"idn={corpus.dropped_idn}, invalid={corpus.dropped_invalid}; "
        f"mismatched fields: {[k for k, v in checks.items() if not v] or 'none'}",
    )
    assert ok
    # ingest is idempotent over its own output
    again = ingest_benign_corpus([s + ".com" for s in corpus.slds])
    assert list(again.slds) == list(corpus.slds)
