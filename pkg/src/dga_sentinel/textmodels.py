"""Auxiliary text models backing the feature extractor.

Three model families live here:

* benign character n-gram sets (n = 3, 4, 5) trained on a benign corpus,
* a unigram-frequency word segmenter driven by a ranked English wordlist,
* two gibberish scorers: a 2-character Markov chain over [a-z]+space and a
  band-based heuristic (unique chars, vowels, word coverage).

All models are immutable after training; scoring and segmentation are pure
functions and safe to call concurrently.  Each model serializes to a single
JSON document carrying a schema_version.
"""

from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass, field

import numpy as np

from dga_sentinel.errors import (
    CorruptDocumentError,
    DataError,
    ModelMissingError,
    SchemaVersionMismatchError,
)
from dga_sentinel.normalize import BenignCorpus

SCHEMA_VERSION = 1
VALID_GRAM_SIZES = (3, 4, 5)

MARKOV_ALPHABET = "abcdefghijklmnopqrstuvwxyz "
_MARKOV_INDEX = {ch: i for i, ch in enumerate(MARKOV_ALPHABET)}

_LETTERS = frozenset("abcdefghijklmnopqrstuvwxyz")
VOWELS = frozenset("aeiou")

MODEL_FILES = {
    "ngram3": "ngram3.json",
    "ngram4": "ngram4.json",
    "ngram5": "ngram5.json",
    "word": "word_model.json",
    "markov": "markov.json",
}


class BadGramLengthError(DataError):
    """n-gram size outside {3, 4, 5}."""


class CalibrationOverlapError(DataError):
    """Good/gibberish calibration scores overlap; training data unusable."""


# ---------------------------------------------------------------------------
# n-gram sets


@dataclass(frozen=True, slots=True)
class NGramModel:
    n: int
    grams: frozenset[str]
    training_sld_count: int


def train_ngram_model(corpus: BenignCorpus, n: int) -> NGramModel:
    """Collect every contiguous n-character window over the corpus SLDs.

    Windows are taken on the SLD verbatim, digits and hyphens included, to
    match how lookups happen at extraction time.  Membership only, the
    downstream features are ratios of known grams, so counts carry nothing.
    """
    if n not in VALID_GRAM_SIZES:
        raise BadGramLengthError(f"n must be one of {VALID_GRAM_SIZES}, got {n}")
    grams: set[str] = set()
    for sld in corpus.slds:
        for i in range(len(sld) - n + 1):
            grams.add(sld[i : i + n])
    return NGramModel(n=n, grams=frozenset(grams), training_sld_count=len(corpus.slds))


def sld_grams(s: str, n: int) -> list[str]:
    """All contiguous n-char windows of s, with multiplicity, in order."""
    return [s[i : i + n] for i in range(len(s) - n + 1)]


# ---------------------------------------------------------------------------
# word segmentation


@dataclass(frozen=True, slots=True)
class SegmenterConfig:
    """w = minimum length for a word to count as significant downstream.

    Splitting itself always works on the full vocabulary; the stricter
    length-2/length-3 thresholds of the derived-string variants are applied
    by the feature layer.
    """

    w: int = 1

    def __post_init__(self) -> None:
        if self.w < 1:
            raise ValueError("w must be >= 1")


@dataclass(frozen=True, slots=True)
class WordModel:
    """Word -> cost table derived from a frequency-ranked wordlist.

    cost(word at 1-based rank r) = ln(r * ln(vocab_size)); an unknown single
    character costs one more than the worst-ranked word, and unknown longer
    substrings are not admissible at all.  Costs are therefore strictly
    positive and non-decreasing in rank.
    """

    costs: dict[str, float] = field(repr=False)
    words: tuple[str, ...] = field(repr=False)
    max_word_len: int
    vocab_size: int
    oov_cost: float

    def piece_cost(self, piece: str) -> float | None:
        """Cost of one candidate segment, or None if inadmissible."""
        c = self.costs.get(piece)
        if c is not None:
            return c
        if len(piece) == 1:
            return self.oov_cost
        return None


def build_word_model(ranked_words) -> WordModel:
    """Build a WordModel from words in descending frequency order.

    Duplicates keep their first (best) rank; words are lowercased.  Raises
    DataError on an empty list.
    """
    seen: dict[str, float] = {}
    order: list[str] = []
    for w in ranked_words:
        w = w.strip().lower()
        if w and w not in seen:
            seen[w] = 0.0
            order.append(w)
    if not order:
        raise DataError("wordlist is empty")
    vocab_size = len(order)
    log_v = math.log(vocab_size) if vocab_size > 1 else 1.0
    for rank, w in enumerate(order, start=1):
        seen[w] = math.log(rank * log_v)
    worst = seen[order[-1]]
    return WordModel(
        costs=seen,
        words=tuple(order),
        max_word_len=max(len(w) for w in order),
        vocab_size=vocab_size,
        oov_cost=worst + 1.0,
    )


def segment(s: str, model: WordModel) -> list[str]:
    """Minimum-cost split of a lowercase letter string into words.

    Dynamic program over prefix lengths: position i holds the cheapest parse
    of s[:i], considering every admissible final segment up to max_word_len.
    Unknown single characters fall back to the OOV cost so a parse always
    exists; the concatenation of the result always equals the input.  Cost
    ties keep the longer final word.
    """
    if not s:
        return []
    n = len(s)
    maxlen = model.max_word_len
    costs = model.costs
    oov = model.oov_cost
    inf = math.inf
    best = [0.0] + [inf] * n
    split_at = [0] * (n + 1)
    for i in range(1, n + 1):
        best_cost = inf
        best_j = i - 1
        for j in range(max(0, i - maxlen), i):
            piece_cost = costs.get(s[j:i])
            if piece_cost is None:
                if i - j != 1:
                    continue
                piece_cost = oov
            total = best[j] + piece_cost
            if total < best_cost:
                best_cost = total
                best_j = j
        best[i] = best_cost
        split_at[i] = best_j
    words: list[str] = []
    i = n
    while i > 0:
        j = split_at[i]
        words.append(s[j:i])
        i = j
    words.reverse()
    return words


def segmentation_cost(words, model: WordModel) -> float:
    """Total cost of a proposed segmentation (inf if any piece inadmissible)."""
    total = 0.0
    for w in words:
        c = model.piece_cost(w)
        if c is None:
            return math.inf
        total += c
    return total


def significant_words(words, config: SegmenterConfig) -> list[str]:
    """Drop words shorter than the configured minimum length."""
    if config.w <= 1:
        return list(words)
    return [w for w in words if len(w) >= config.w]


# ---------------------------------------------------------------------------
# Markov-chain gibberish scorer


@dataclass(frozen=True, eq=False)
class MarkovGibberishModel:
    """Add-one-smoothed character bigram model over [a-z]+space.

    `threshold` is the calibrated decision boundary in average-log-probability
    space; exp(threshold) is the neutral score handed back for strings too
    short to have a transition.
    """

    log_prob: np.ndarray  # 27x27, rows sum to 1 after exp
    threshold: float


def _markov_filter(s: str) -> list[int]:
    return [_MARKOV_INDEX[ch] for ch in s.lower() if ch in _MARKOV_INDEX]


def _avg_log_prob(s: str, log_prob: np.ndarray) -> float | None:
    idx = _markov_filter(s)
    if len(idx) < 2:
        return None
    total = 0.0
    prev = idx[0]
    for cur in idx[1:]:
        total += log_prob[prev, cur]
        prev = cur
    return total / (len(idx) - 1)


def markov_train(good_text: str, good_lines, bad_lines) -> MarkovGibberishModel:
    """Train the bigram matrix on English text and calibrate the threshold.

    Counts start at one (add-one smoothing) so unseen transitions keep a
    small nonzero probability.  The threshold is the midpoint between the
    worst good-line average log-probability and the best bad-line one; if
    the clusters overlap the training data cannot separate the classes and
    CalibrationOverlapError is raised.
    """
    if len(good_text) < 10_000:
        raise DataError("markov training text must be at least 10,000 chars")
    if not good_lines or not bad_lines:
        raise DataError("calibration line lists must be non-empty")

    k = len(MARKOV_ALPHABET)
    counts = np.ones((k, k), dtype=np.float64)
    idx = _markov_filter(good_text)
    for a, b in zip(idx, idx[1:]):
        counts[a, b] += 1.0
    log_prob = np.log(counts / counts.sum(axis=1, keepdims=True))

    good_scores = [v for v in (_avg_log_prob(s, log_prob) for s in good_lines) if v is not None]
    bad_scores = [v for v in (_avg_log_prob(s, log_prob) for s in bad_lines) if v is not None]
    if not good_scores or not bad_scores:
        raise DataError("calibration lines too short to score")
    lo_good = min(good_scores)
    hi_bad = max(bad_scores)
    if lo_good <= hi_bad:
        raise CalibrationOverlapError(
            f"calibration clusters overlap: min(good)={lo_good:.4f} <= max(bad)={hi_bad:.4f}"
        )
    threshold = (lo_good + hi_bad) / 2.0
    return MarkovGibberishModel(log_prob=log_prob, threshold=threshold)


def markov_score(s: str, model: MarkovGibberishModel) -> float:
    """Geometric mean of transition probabilities, in (0, 1].

    Characters outside [a-z ] are dropped first; fewer than two surviving
    characters means no transition exists, and the neutral exp(threshold)
    is returned.
    """
    avg = _avg_log_prob(s, model.log_prob)
    if avg is None:
        return math.exp(model.threshold)
    return math.exp(avg)


# ---------------------------------------------------------------------------
# heuristic gibberish scorer


@dataclass(frozen=True, slots=True)
class HeuristicBands:
    """Healthy-range bands for the heuristic scorer (calibration defaults)."""

    unique_lo: float = 0.3
    unique_hi: float = 0.8
    vowel_lo: float = 0.25
    vowel_hi: float = 0.55


DEFAULT_BANDS = HeuristicBands()


def _band_penalty(x: float, lo: float, hi: float) -> float:
    # 0 inside [lo, hi]; outside, distance to the violated edge scaled so
    # the penalty reaches exactly 1.0 at the ends of [0, 1].
    if x < lo:
        return (lo - x) / lo if lo > 0 else 1.0
    if x > hi:
        return (x - hi) / (1.0 - hi) if hi < 1 else 1.0
    return 0.0


def heuristic_gibberish_score(
    s: str,
    word_model: WordModel,
    bands: HeuristicBands = DEFAULT_BANDS,
) -> float:
    """Three-band gibberish score in [0, 1]; 0 reads English-like.

    Mean of three penalties: unique-character ratio outside its band, vowel
    ratio outside its band, and the share of letters NOT covered by
    segmented words of length >= 2.  Ratios are computed over non-space
    characters; spaces pre-split the string into tokens which are segmented
    independently.  The empty string scores 1.0 by convention.
    """
    content = s.replace(" ", "")
    if not content:
        return 1.0
    n = len(content)
    unique_ratio = len(set(content)) / n
    vowel_ratio = sum(1 for ch in content if ch in VOWELS) / n
    pen_unique = _band_penalty(unique_ratio, bands.unique_lo, bands.unique_hi)
    pen_vowel = _band_penalty(vowel_ratio, bands.vowel_lo, bands.vowel_hi)

    letters = 0
    covered = 0
    token: list[str] = []
    for ch in s:
        if ch in _LETTERS:
            token.append(ch)
            continue
        if token:
            letters += len(token)
            covered += sum(len(w) for w in segment("".join(token), word_model) if len(w) >= 2)
            token.clear()
    if token:
        letters += len(token)
        covered += sum(len(w) for w in segment("".join(token), word_model) if len(w) >= 2)
    coverage = covered / letters if letters else 0.0
    pen_cover = min(1.0, max(0.0, 1.0 - coverage))

    return (pen_unique + pen_vowel + pen_cover) / 3.0


# ---------------------------------------------------------------------------
# serialization


def ngram_to_doc(model: NGramModel) -> dict:
    return {
        "schema_version": SCHEMA_VERSION,
        "kind": "ngram",
        "n": model.n,
        "training_sld_count": model.training_sld_count,
        "grams": sorted(model.grams),
    }


def word_model_to_doc(model: WordModel) -> dict:
    # Ranked words only; costs are a pure function of rank and vocab size,
    # so reloading rebuilds bit-identical floats.
    return {
        "schema_version": SCHEMA_VERSION,
        "kind": "word_costs",
        "vocab_size": model.vocab_size,
        "words": list(model.words),
    }


def markov_to_doc(model: MarkovGibberishModel) -> dict:
    return {
        "schema_version": SCHEMA_VERSION,
        "kind": "markov_bigram",
        "alphabet": MARKOV_ALPHABET,
        "threshold": model.threshold,
        "log_prob": [[float(v) for v in row] for row in model.log_prob],
    }


def model_from_doc(doc: dict):
    """Rebuild any model from its JSON document; dispatches on "kind"."""
    if not isinstance(doc, dict) or "kind" not in doc:
        raise CorruptDocumentError("model document has no kind field")
    version = doc.get("schema_version")
    if version != SCHEMA_VERSION:
        raise SchemaVersionMismatchError(f"unsupported schema_version {version!r}")
    kind = doc["kind"]
    try:
        if kind == "ngram":
            grams = frozenset(doc["grams"])
            n = doc["n"]
            if any(len(g) != n for g in grams):
                raise CorruptDocumentError("gram length differs from n")
            return NGramModel(n=n, grams=grams, training_sld_count=doc["training_sld_count"])
        if kind == "word_costs":
            return build_word_model(doc["words"])
        if kind == "markov_bigram":
            if doc.get("alphabet") != MARKOV_ALPHABET:
                raise CorruptDocumentError("unexpected markov alphabet")
            matrix = np.array(doc["log_prob"], dtype=np.float64)
            if matrix.shape != (27, 27):
                raise CorruptDocumentError("markov matrix must be 27x27")
            return MarkovGibberishModel(log_prob=matrix, threshold=float(doc["threshold"]))
    except KeyError as exc:
        raise CorruptDocumentError(f"model document missing field {exc}") from exc
    raise CorruptDocumentError(f"unknown model kind {kind!r}")


def dump_model_json(doc: dict) -> str:
    """Canonical JSON form: sorted keys, no whitespace; byte-stable."""
    return json.dumps(doc, sort_keys=True, separators=(",", ":"))


def load_model_file(path: str):
    if not os.path.exists(path):
        raise ModelMissingError(f"model file not found: {path}")
    try:
        with open(path, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
    except json.JSONDecodeError as exc:
        raise CorruptDocumentError(f"not valid JSON: {path}") from exc
    return model_from_doc(doc)


@dataclass(frozen=True, eq=False)
class CorpusModels:
    """The full model bundle the feature extractor needs."""

    ngram3: NGramModel
    ngram4: NGramModel
    ngram5: NGramModel
    word: WordModel
    markov: MarkovGibberishModel

    def ngram(self, n: int) -> NGramModel:
        return {3: self.ngram3, 4: self.ngram4, 5: self.ngram5}[n]


def save_models_dir(models: CorpusModels, out_dir: str) -> dict[str, str]:
    """Write the five model JSONs plus a manifest of sha256 content hashes.

    Returns the manifest mapping.  File bytes are canonical, so re-running
    with identical inputs reproduces identical hashes.
    """
    import hashlib

    os.makedirs(out_dir, exist_ok=True)
    docs = {
        MODEL_FILES["ngram3"]: ngram_to_doc(models.ngram3),
        MODEL_FILES["ngram4"]: ngram_to_doc(models.ngram4),
        MODEL_FILES["ngram5"]: ngram_to_doc(models.ngram5),
        MODEL_FILES["word"]: word_model_to_doc(models.word),
        MODEL_FILES["markov"]: markov_to_doc(models.markov),
    }
    manifest: dict[str, str] = {}
    for name, doc in docs.items():
        payload = dump_model_json(doc).encode("utf-8")
        with open(os.path.join(out_dir, name), "wb") as fh:
            fh.write(payload)
        manifest[name] = hashlib.sha256(payload).hexdigest()
    manifest_doc = {"schema_version": SCHEMA_VERSION, "files": manifest}
    with open(os.path.join(out_dir, "manifest.json"), "wb") as fh:
        fh.write(dump_model_json(manifest_doc).encode("utf-8"))
    return manifest


def load_models_dir(models_dir: str) -> CorpusModels:
    """Load the model bundle written by save_models_dir."""
    loaded = {}
    for key, name in MODEL_FILES.items():
        loaded[key] = load_model_file(os.path.join(models_dir, name))
    bundle = CorpusModels(**loaded)
    for n in VALID_GRAM_SIZES:
        if bundle.ngram(n).n != n:
            raise CorruptDocumentError(f"model file for {n}-grams holds n={bundle.ngram(n).n}")
    return bundle
