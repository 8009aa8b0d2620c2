"""Evaluation harness: ratio sampling, repeated stratified CV, latency.

The pipeline mirrors the detector's intended methodology at desk scale:
draw class-ratio samples without replacement, run stratified k-fold
cross-validation with a fresh forest per fold, repeat with fresh samples,
and report mean metrics with the dispersion of F1 over repetitions.
Every random draw flows from the config seed through named derived
streams, so a report is a pure function of (data, config).
"""

from __future__ import annotations

import json
import math
import time
from dataclasses import dataclass, field, replace
from typing import Callable, Mapping, Sequence

import numpy as np

from dga_sentinel.errors import DataError, ShapeMismatchError
from dga_sentinel.features import FeatureExtractor
from dga_sentinel.forest import Forest, ForestParams, predict_batch, train_forest
from dga_sentinel.rng import SplitMix64, derive_stream, derive_substream
from dga_sentinel.synth import BENIGN_LABEL, MALICIOUS_LABEL
from dga_sentinel.textmodels import CorpusModels

DEFAULT_CACHE_SIZE = 262144


class InsufficientSamplesError(DataError):
    """A class cannot fill its ratio quota."""


class TooFewSamplesError(DataError):
    """A class has fewer members than the fold count."""


@dataclass(frozen=True, slots=True)
class EvalConfig:
    """Experiment shape; small defaults, production scale reachable."""

    ratio: tuple[int, int] = (1, 1)  # malicious : benign
    repetitions: int = 10
    folds: int = 10
    rng_seed: int = 0
    forest_params: ForestParams = field(default_factory=ForestParams)
    max_class_size: int | None = 5000

    def __post_init__(self) -> None:
        if self.folds < 2:
            raise ValueError("folds must be >= 2")
        if self.repetitions < 1:
            raise ValueError("repetitions must be >= 1")
        if self.ratio[0] < 1 or self.ratio[1] < 1:
            raise ValueError("ratio components must be >= 1")


@dataclass(frozen=True, slots=True)
class Metrics:
    """Binary or per-class metrics plus the confusion matrix behind them.

    confusion rows are truth, columns predictions, in class-label order
    (benign before malicious for the binary case).  zero_division marks a
    precision/recall denominator that was empty and scored 0.  leaked
    counts identity keys seen in both train and test of some fold.
    """

    precision: float
    recall: float
    f1: float
    auc: float
    confusion: tuple[tuple[int, ...], ...]
    zero_division: bool = False
    leaked: int = 0


@dataclass(frozen=True, slots=True)
class FamilyResult:
    family: str
    metrics: Metrics
    sigma_f1: float
    repetitions: int
    support: int  # truth-positive samples behind the confusion counts
    flagged: bool = False
    duplicates: int = 0  # repeated SLDs in the sampled datasets
    # the series sigma_f1 is computed over: per-repetition F1 means for
    # binary experiments, per-fold F1 for the single multiclass run
    f1_series: tuple[float, ...] = ()


@dataclass(frozen=True, slots=True)
class EvalReport:
    per_family: tuple[FamilyResult, ...]
    weighted: Metrics | None
    config_echo: dict
    wall_clock_s: float  # excluded from canonical JSON on purpose


# ---------------------------------------------------------------------------
# metrics


def _mw_auc(scores_pos: Sequence[float], scores_neg: Sequence[float]) -> float:
    """Mann-Whitney AUC with midrank tie handling; 0.5 if a side is empty."""
    n_pos, n_neg = len(scores_pos), len(scores_neg)
    if n_pos == 0 or n_neg == 0:
        return 0.5
    paired = sorted(
        [(s, 1) for s in scores_pos] + [(s, 0) for s in scores_neg],
        key=lambda t: t[0],
    )
    rank_sum_pos = 0.0
    i = 0
    while i < len(paired):
        j = i
        while j < len(paired) and paired[j][0] == paired[i][0]:
            j += 1
        midrank = (i + 1 + j) / 2  # ranks are 1-based, block is [i+1, j]
        rank_sum_pos += midrank * sum(flag for _, flag in paired[i:j])
        i = j
    u = rank_sum_pos - n_pos * (n_pos + 1) / 2
    return u / (n_pos * n_neg)


def compute_metrics(
    predictions: Sequence[str],
    truths: Sequence[str],
    scores: Sequence[float],
    positive: str = MALICIOUS_LABEL,
) -> Metrics:
    """Precision/recall/F1 on the positive class; AUC by rank statistic."""
    if not (len(predictions) == len(truths) == len(scores)):
        raise ShapeMismatchError(
            f"lengths differ: {len(predictions)} predictions, "
            f"{len(truths)} truths, {len(scores)} scores"
        )
    tp = fp = fn = tn = 0
    for pred, truth in zip(predictions, truths):
        if truth == positive:
            tp += pred == positive
            fn += pred != positive
        else:
            fp += pred == positive
            tn += pred != positive
    zero_division = (tp + fp == 0) or (tp + fn == 0)
    precision = tp / (tp + fp) if tp + fp else 0.0
    recall = tp / (tp + fn) if tp + fn else 0.0
    f1 = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
    auc = _mw_auc(
        [s for s, t in zip(scores, truths) if t == positive],
        [s for s, t in zip(scores, truths) if t != positive],
    )
    confusion = ((tn, fp), (fn, tp))
    return Metrics(precision, recall, f1, auc, confusion, zero_division)


def _mean(xs: Sequence[float]) -> float:
    return sum(xs) / len(xs)


def _sigma(xs: Sequence[float]) -> float:
    # population sigma; over a handful of repetition means, not folds
    m = _mean(xs)
    return math.sqrt(_mean([(x - m) ** 2 for x in xs]))


def _sum_confusions(mats: Sequence[tuple[tuple[int, ...], ...]]) -> tuple:
    total = np.sum([np.array(m, dtype=np.int64) for m in mats], axis=0)
    return tuple(tuple(int(v) for v in row) for row in total)


def _combine_fold_metrics(folds: Sequence[Metrics]) -> Metrics:
    return Metrics(
        precision=_mean([m.precision for m in folds]),
        recall=_mean([m.recall for m in folds]),
        f1=_mean([m.f1 for m in folds]),
        auc=_mean([m.auc for m in folds]),
        confusion=_sum_confusions([m.confusion for m in folds]),
        zero_division=any(m.zero_division for m in folds),
        leaked=sum(m.leaked for m in folds),
    )


# ---------------------------------------------------------------------------
# sampling and folding


def sample_ratio(
    benign: Sequence[str],
    malicious: Sequence[str],
    ratio: tuple[int, int],
    rng: SplitMix64,
    max_class_size: int | None = None,
) -> tuple[list[str], list[str]]:
    """Draw (benign_subset, malicious_subset) matching malicious:benign ratio.

    The smaller class drives the unit count k, giving exactly k*ratio[0]
    malicious and k*ratio[1] benign SLDs, both without replacement.
    Malicious is drawn before benign; changing that order changes every
    downstream fixture.
    """
    r_mal, r_ben = ratio
    if not benign or not malicious:
        raise InsufficientSamplesError("both classes must be non-empty")
    k = min(len(malicious) // r_mal, len(benign) // r_ben)
    if max_class_size is not None:
        k = min(k, max_class_size // r_mal, max_class_size // r_ben)
    if k < 1:
        raise InsufficientSamplesError(
            f"cannot draw ratio {r_mal}:{r_ben} from {len(malicious)} malicious "
            f"and {len(benign)} benign SLDs (cap {max_class_size})"
        )
    mal_sub = [malicious[i] for i in rng.sample_without_replacement(len(malicious), k * r_mal)]
    ben_sub = [benign[i] for i in rng.sample_without_replacement(len(benign), k * r_ben)]
    return ben_sub, mal_sub


def stratified_folds(labels: Sequence[str], folds: int, rng: SplitMix64) -> list[list[int]]:
    """Index partition preserving class ratios; fold sizes differ <= 1.

    Each class contributes floor(n_c/folds) indices per fold; its
    remainder goes to the folds that are currently smallest (ties by fold
    index), which keeps total sizes within one of each other while every
    class stays within one per fold.  Classes smaller than the fold count
    raise TooFewSamples.
    """
    classes = sorted(set(labels))
    out: list[list[int]] = [[] for _ in range(folds)]
    for cls in classes:
        idx = [i for i, lab in enumerate(labels) if lab == cls]
        if len(idx) < folds:
            raise TooFewSamplesError(
                f"class {cls!r} has {len(idx)} samples for {folds} folds"
            )
        rng.shuffle(idx)
        q, r = divmod(len(idx), folds)
        take = [q] * folds
        for f in sorted(range(folds), key=lambda f: (len(out[f]), f))[:r]:
            take[f] += 1
        pos = 0
        for f in range(folds):
            out[f].extend(idx[pos : pos + take[f]])
            pos += take[f]
    return out


# ---------------------------------------------------------------------------
# cross-validation


def cross_validate(
    X,
    y: Sequence[str],
    config: EvalConfig,
    keys: Sequence[str] | None = None,
) -> Metrics:
    """Stratified k-fold CV of a binary forest; returns fold-mean metrics.

    The positive class is the lexicographically last label (malicious
    sorts after benign).  When keys are given, any key present in both a
    fold's train and test sides is counted into Metrics.leaked, the
    duplicate audit for datasets with repeated SLDs.
    """
    X = np.asarray(X, dtype=np.float64)
    y = list(y)
    classes = sorted(set(y))
    if len(classes) != 2:
        raise DataError(f"binary cross_validate needs 2 classes, got {len(classes)}")
    positive = classes[-1]
    fold_rng = SplitMix64(derive_stream(config.rng_seed, "folds"))
    folds = stratified_folds(y, config.folds, fold_rng)

    results: list[Metrics] = []
    all_idx = set(range(len(y)))
    for f, test_idx in enumerate(folds):
        train_idx = sorted(all_idx - set(test_idx))
        assert not set(test_idx) & set(train_idx)
        leaked = 0
        if keys is not None:
            train_keys = {keys[i] for i in train_idx}
            leaked = sum(1 for i in test_idx if keys[i] in train_keys)
        params = replace(
            config.forest_params, rng_seed=derive_stream(config.rng_seed, f"forest:{f}")
        )
        forest = train_forest(X[train_idx], [y[i] for i in train_idx], params)
        pos_col = forest.class_labels.index(positive)
        labels, probs = predict_batch(forest, X[test_idx])
        fold_metrics = compute_metrics(
            labels, [y[i] for i in test_idx], probs[:, pos_col].tolist(), positive
        )
        results.append(replace(fold_metrics, leaked=leaked))
    return _combine_fold_metrics(results)


def repeat_experiment(
    benign_slds: Sequence[str],
    malicious_slds: Sequence[str],
    models: CorpusModels,
    config: EvalConfig,
    family: str = "malicious",
    extractor: FeatureExtractor | None = None,
) -> FamilyResult:
    """repetitions x (fresh ratio sample -> stratified CV); sigma over reps."""
    extractor = extractor or FeatureExtractor(models, cache_size=DEFAULT_CACHE_SIZE)
    base = derive_stream(config.rng_seed, f"family:{family}")
    rep_metrics: list[Metrics] = []
    duplicates = 0
    for rep in range(config.repetitions):
        rep_seed = derive_substream(base, rep)
        sample_rng = SplitMix64(derive_substream(rep_seed, 0))
        ben, mal = sample_ratio(
            benign_slds, malicious_slds, config.ratio, sample_rng, config.max_class_size
        )
        slds = ben + mal
        labels = [BENIGN_LABEL] * len(ben) + [MALICIOUS_LABEL] * len(mal)
        duplicates += len(slds) - len(set(slds))
        X = np.stack([extractor.extract_sld(s).values for s in slds])
        cv_config = replace(config, rng_seed=derive_substream(rep_seed, 1))
        rep_metrics.append(cross_validate(X, labels, cv_config, keys=slds))

    combined = Metrics(
        precision=_mean([m.precision for m in rep_metrics]),
        recall=_mean([m.recall for m in rep_metrics]),
        f1=_mean([m.f1 for m in rep_metrics]),
        auc=_mean([m.auc for m in rep_metrics]),
        confusion=_sum_confusions([m.confusion for m in rep_metrics]),
        zero_division=any(m.zero_division for m in rep_metrics),
        leaked=sum(m.leaked for m in rep_metrics),
    )
    support = int(np.sum([np.array(m.confusion)[1].sum() for m in rep_metrics]))
    return FamilyResult(
        family=family,
        metrics=combined,
        sigma_f1=_sigma([m.f1 for m in rep_metrics]),
        repetitions=config.repetitions,
        support=support,
        duplicates=duplicates,
        f1_series=tuple(m.f1 for m in rep_metrics),
    )


def evaluate_binary(
    benign_slds: Sequence[str],
    families: Sequence[tuple[str, Sequence[str]]],
    models: CorpusModels,
    config: EvalConfig,
) -> EvalReport:
    """One binary experiment per malicious family, plus the weighted row."""
    t0 = time.perf_counter()
    extractor = FeatureExtractor(models, cache_size=DEFAULT_CACHE_SIZE)
    results = [
        repeat_experiment(benign_slds, slds, models, config, family=name, extractor=extractor)
        for name, slds in families
    ]
    return EvalReport(
        per_family=tuple(results),
        weighted=_weighted_metrics([r for r in results if not r.flagged]),
        config_echo=_config_echo(config),
        wall_clock_s=time.perf_counter() - t0,
    )


def _weighted_metrics(results: Sequence[FamilyResult]) -> Metrics | None:
    included = [r for r in results if r.support > 0]
    if not included:
        return None
    total = sum(r.support for r in included)
    def wavg(get: Callable[[FamilyResult], float]) -> float:
        return sum(get(r) * r.support for r in included) / total
    return Metrics(
        precision=wavg(lambda r: r.metrics.precision),
        recall=wavg(lambda r: r.metrics.recall),
        f1=wavg(lambda r: r.metrics.f1),
        auc=wavg(lambda r: r.metrics.auc),
        confusion=_sum_confusions([r.metrics.confusion for r in included]),
        zero_division=any(r.metrics.zero_division for r in included),
        leaked=sum(r.metrics.leaked for r in included),
    )


# ---------------------------------------------------------------------------
# multiclass


def multiclass_evaluate(
    families: Sequence[tuple[str, Sequence[str]]],
    models: CorpusModels,
    config: EvalConfig,
) -> EvalReport:
    """One k-class forest under stratified CV; per-family rows from the
    aggregate confusion matrix.

    Families with fewer samples than folds cannot be stratified: they are
    excluded from training entirely, reported with zero metrics and
    flagged, and the weighted average renormalizes over included families
    only.
    """
    t0 = time.perf_counter()
    if len(families) < 2:
        raise DataError("multiclass evaluation needs >= 2 families")
    included = [(name, list(slds)) for name, slds in families if len(slds) >= config.folds]
    excluded = [(name, list(slds)) for name, slds in families if len(slds) < config.folds]
    if len(included) < 2:
        raise TooFewSamplesError("fewer than 2 families have enough samples to stratify")

    extractor = FeatureExtractor(models, cache_size=DEFAULT_CACHE_SIZE)
    slds = [s for _, fam_slds in included for s in fam_slds]
    y = [name for name, fam_slds in included for _ in fam_slds]
    X = np.stack([extractor.extract_sld(s).values for s in slds])
    class_order = sorted({name for name, _ in included})
    k = len(class_order)

    fold_rng = SplitMix64(derive_stream(config.rng_seed, "folds"))
    folds = stratified_folds(y, config.folds, fold_rng)
    agg = np.zeros((k, k), dtype=np.int64)
    fold_f1: dict[str, list[float]] = {name: [] for name in class_order}
    truths_all: list[str] = []
    probs_all: list[np.ndarray] = []
    all_idx = set(range(len(y)))
    for f, test_idx in enumerate(folds):
        train_idx = sorted(all_idx - set(test_idx))
        params = replace(
            config.forest_params, rng_seed=derive_stream(config.rng_seed, f"forest:{f}")
        )
        forest = train_forest(X[train_idx], [y[i] for i in train_idx], params)
        assert forest.class_labels == tuple(class_order)
        labels, probs = predict_batch(forest, X[test_idx])
        truth = [y[i] for i in test_idx]
        truths_all.extend(truth)
        probs_all.append(probs)
        for t_lab, p_lab in zip(truth, labels):
            agg[class_order.index(t_lab), class_order.index(p_lab)] += 1
        for ci, name in enumerate(class_order):
            m = compute_metrics(
                labels, truth, probs[:, ci].tolist(), positive=name
            )
            fold_f1[name].append(m.f1)

    probs_mat = np.vstack(probs_all)
    confusion = tuple(tuple(int(v) for v in row) for row in agg)
    results = []
    for ci, name in enumerate(class_order):
        tp = int(agg[ci, ci])
        fp = int(agg[:, ci].sum() - tp)
        fn = int(agg[ci, :].sum() - tp)
        support = tp + fn
        precision = tp / (tp + fp) if tp + fp else 0.0
        recall = tp / (tp + fn) if tp + fn else 0.0
        f1 = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
        auc = _mw_auc(
            [float(p[ci]) for p, t in zip(probs_mat, truths_all) if t == name],
            [float(p[ci]) for p, t in zip(probs_mat, truths_all) if t != name],
        )
        results.append(
            FamilyResult(
                family=name,
                metrics=Metrics(precision, recall, f1, auc, confusion,
                                zero_division=(tp + fp == 0) or (tp + fn == 0)),
                sigma_f1=_sigma(fold_f1[name]),
                repetitions=1,
                support=support,
                f1_series=tuple(fold_f1[name]),
            )
        )
    zero_conf = tuple(tuple(0 for _ in class_order) for _ in class_order)
    for name, fam_slds in excluded:
        results.append(
            FamilyResult(
                family=name,
                metrics=Metrics(0.0, 0.0, 0.0, 0.5, zero_conf, zero_division=True),
                sigma_f1=0.0,
                repetitions=0,
                support=0,
                flagged=True,
            )
        )
    results.sort(key=lambda r: r.family)
    return EvalReport(
        per_family=tuple(results),
        weighted=_weighted_metrics(results),
        config_echo=_config_echo(config),
        wall_clock_s=time.perf_counter() - t0,
    )


# ---------------------------------------------------------------------------
# latency


def benchmark_latency(
    slds: Sequence[str],
    models: CorpusModels,
    forest: Forest,
    clock: Callable[[], float] | None = None,
    force: bool = False,
    warmup: int = 100,
) -> dict:
    """Single-threaded per-SLD timing of extraction and prediction.

    The warm-up pass (first `warmup` SLDs, also compiling the predict
    kernel) is excluded from statistics.  Refuses fewer than 1,000 SLDs
    unless force is set; small batches give unstable percentiles.
    """
    if len(slds) < 1000 and not force:
        raise DataError(f"{len(slds)} SLDs is too few for stable timing (need 1000)")
    clock = clock or time.perf_counter
    extractor = FeatureExtractor(models)

    for s in list(slds)[: min(warmup, len(slds))]:
        vec = extractor.extract_sld(s)
        predict_batch(forest, vec.values.reshape(1, -1))

    feature_ms: list[float] = []
    predict_ms: list[float] = []
    for s in slds:
        t0 = clock()
        vec = extractor.extract_sld(s)
        t1 = clock()
        predict_batch(forest, vec.values.reshape(1, -1))
        t2 = clock()
        feature_ms.append((t1 - t0) * 1000.0)
        predict_ms.append((t2 - t1) * 1000.0)

    def p95(xs: list[float]) -> float:
        ordered = sorted(xs)
        return ordered[max(0, math.ceil(0.95 * len(ordered)) - 1)]

    return {
        "count": len(slds),
        "mean_feature_ms": _mean(feature_ms),
        "p95_feature_ms": p95(feature_ms),
        "mean_predict_ms": _mean(predict_ms),
        "p95_predict_ms": p95(predict_ms),
        "single_threaded": True,
    }


# ---------------------------------------------------------------------------
# report emission


def _config_echo(config: EvalConfig) -> dict:
    fp = config.forest_params
    return {
        "ratio": list(config.ratio),
        "repetitions": config.repetitions,
        "folds": config.folds,
        "rng_seed": config.rng_seed,
        "max_class_size": config.max_class_size,
        "forest_params": {
            "n_trees": fp.n_trees,
            "max_depth": fp.max_depth,
            "features_per_split": fp.features_per_split,
            "min_samples_split": fp.min_samples_split,
            "bootstrap": fp.bootstrap,
            "rng_seed": fp.rng_seed,
        },
    }


def _metrics_doc(m: Metrics) -> dict:
    return {
        "precision": m.precision,
        "recall": m.recall,
        "f1": m.f1,
        "auc": m.auc,
        "confusion": [list(row) for row in m.confusion],
        "zero_division": m.zero_division,
        "leaked": m.leaked,
    }


def report_to_doc(report: EvalReport) -> dict:
    """Canonical report document; wall-clock deliberately excluded so the
    same config and data always serialize byte-identically."""
    return {
        "config": report.config_echo,
        "per_family": {
            r.family: {
                "metrics": _metrics_doc(r.metrics),
                "sigma_f1": r.sigma_f1,
                "f1_series": list(r.f1_series),
                "repetitions": r.repetitions,
                "support": r.support,
                "flagged": r.flagged,
                "duplicates": r.duplicates,
            }
            for r in report.per_family
        },
        "weighted": _metrics_doc(report.weighted) if report.weighted else None,
    }


def report_json(report: EvalReport) -> bytes:
    return json.dumps(report_to_doc(report), sort_keys=True, separators=(",", ":")).encode(
        "ascii"
    )


def report_text(report: EvalReport) -> str:
    lines = [
        f"{'family':<12} {'prec':>7} {'recall':>7} {'f1':>7} {'auc':>7} "
        f"{'sigma_f1':>9} {'support':>8}  flags"
    ]
    for r in report.per_family:
        m = r.metrics
        flags = "FLAGGED" if r.flagged else ""
        if m.zero_division:
            flags = (flags + " zero-div").strip()
        if m.leaked:
            flags = (flags + f" leaked={m.leaked}").strip()
        lines.append(
            f"{r.family:<12} {m.precision:>7.4f} {m.recall:>7.4f} {m.f1:>7.4f} "
            f"{m.auc:>7.4f} {r.sigma_f1:>9.4f} {r.support:>8d}  {flags}"
        )
    if report.weighted:
        w = report.weighted
        lines.append(
            f"{'weighted':<12} {w.precision:>7.4f} {w.recall:>7.4f} {w.f1:>7.4f} "
            f"{w.auc:>7.4f} {'':>9} {'':>8}"
        )
    lines.append(f"wall clock: {report.wall_clock_s:.2f}s")
    return "\n".join(lines)
