"""Per-domain feature extraction.

Turns a normalized SLD into a fixed-width numeric vector: length and
character-class counts, known-n-gram ratios against a benign corpus, word
segmentation coverage ratios, two gibberish scores, and Shannon entropy,
each of the last three applied to six derived strings.  FEATURE_NAMES is
the single source of truth for vector order; the CSV schema, the model
serialization, and every consumer index through it.
"""

from __future__ import annotations

import csv
import math
import threading
from collections import Counter, OrderedDict
from dataclasses import dataclass, field
from typing import Iterable, TextIO

import numpy as np

from dga_sentinel.errors import CorruptDocumentError, ModelMissingError
from dga_sentinel.normalize import DomainRecord
from dga_sentinel.textmodels import (
    DEFAULT_BANDS,
    VOWELS,
    CorpusModels,
    HeuristicBands,
    SegmenterConfig,
    WordModel,
    heuristic_gibberish_score,
    markov_score,
    segment,
    significant_words,
    sld_grams,
)

LETTERS = frozenset("abcdefghijklmnopqrstuvwxyz")
DIGITS = frozenset("0123456789")
HEX_CHARS = frozenset("0123456789abcdef")

CONSONANT = "consonant"
VOWEL = "vowel"

# Canonical vector order.  Append-only; never reorder.
FEATURE_NAMES: tuple[str, ...] = (
    "L-HEX",
    "L-LEN",
    "L-DIG",
    "L-DOT",
    "L-CON-MAX",
    "L-VOW-MAX",
    "L-W2",
    "L-W3",
    "R-CON-VOW",
    "R-Dom-3G",
    "R-Dom-4G",
    "R-Dom-5G",
    "R-VOW-3G",
    "R-VOW-4G",
    "R-VOW-5G",
    "R-WS-LEN",
    "R-WD-LEN",
    "R-WDS-LEN",
    "R-W2-LEN",
    "R-W2-LEN-D",
    "R-W3-LEN",
    "R-W3-LEN-D",
    "GIB-1-Dom",
    "GIB-1-Dom-WS",
    "GIB-1-Dom-D",
    "GIB-1-Dom-WDS",
    "GIB-1-Dom-W2",
    "GIB-1-Dom-W3",
    "GIB-2-Dom",
    "GIB-2-Dom-WS",
    "GIB-2-Dom-D",
    "GIB-2-Dom-WDS",
    "GIB-2-Dom-W2",
    "GIB-2-Dom-W3",
    "E-Dom",
    "E-Dom-WS",
    "E-Dom-D",
    "E-Dom-WDS",
    "E-Dom-W2",
    "E-Dom-W3",
)

FEATURE_INDEX: dict[str, int] = {name: i for i, name in enumerate(FEATURE_NAMES)}

CSV_METADATA_COLUMNS: tuple[str, ...] = ("sld", "label", "family")
CSV_HEADER: tuple[str, ...] = FEATURE_NAMES + CSV_METADATA_COLUMNS


@dataclass(frozen=True, slots=True)
class FeatureConfig:
    """Extraction knobs; the defaults reproduce the canonical vector."""

    enable_dot: bool = True
    bands: HeuristicBands = DEFAULT_BANDS
    segmenter: SegmenterConfig = field(default_factory=SegmenterConfig)


@dataclass(frozen=True, slots=True)
class DerivedStrings:
    """The intermediate strings every downstream feature reads from.

    dom is the SLD verbatim; dom_d strips digits; words segments the
    letters of dom; the dom_w* family concatenates (optionally length-
    filtered) words with or without spaces.  grams are windows over dom
    verbatim, multiplicity preserved.
    """

    dom: str
    dom_d: str
    grams3: tuple[str, ...]
    grams4: tuple[str, ...]
    grams5: tuple[str, ...]
    words: tuple[str, ...]
    words_d: tuple[str, ...]
    dom_w: str
    dom_ws: str
    dom_wd: str
    dom_wds: str
    dom_w2: str
    dom_w3: str


@dataclass(frozen=True, slots=True, eq=False)
class FeatureVector:
    """One extracted domain: 40 floats in FEATURE_NAMES order plus metadata."""

    values: np.ndarray
    sld: str
    label: str | None = None
    family: str | None = None

    def value(self, name: str) -> float:
        return float(self.values[FEATURE_INDEX[name]])


# ---------------------------------------------------------------------------
# character-level ops


def shannon_entropy(s: str) -> float:
    """Entropy in bits of the character distribution of s; empty gives 0."""
    if not s:
        return 0.0
    n = len(s)
    return -sum(c / n * math.log2(c / n) for c in Counter(s).values())


def max_consecutive_run(s: str, kind: str) -> int:
    """Longest run of consonants or vowels; any other character breaks runs."""
    if kind == CONSONANT:
        member = LETTERS - VOWELS
    elif kind == VOWEL:
        member = VOWELS
    else:
        raise ValueError(f"kind must be {CONSONANT!r} or {VOWEL!r}, got {kind!r}")
    best = run = 0
    for ch in s:
        run = run + 1 if ch in member else 0
        if run > best:
            best = run
    return best


def is_hex(s: str) -> bool:
    """True when s is nonempty and every character is a hex digit."""
    return bool(s) and all(ch in HEX_CHARS for ch in s)


def gram_ratio(grams: Iterable[str], known: frozenset[str]) -> float:
    """Fraction of grams (with multiplicity) present in the known set."""
    grams = list(grams)
    if not grams:
        return 0.0
    return sum(1 for g in grams if g in known) / len(grams)


def vowel_gram_ratio(grams: Iterable[str]) -> float:
    """Fraction of grams containing at least one vowel; empty gives 0."""
    grams = list(grams)
    if not grams:
        return 0.0
    return sum(1 for g in grams if any(ch in VOWELS for ch in g)) / len(grams)


# ---------------------------------------------------------------------------
# derived strings


def derive_strings(
    record: DomainRecord,
    word_model: WordModel,
    config: FeatureConfig | None = None,
) -> DerivedStrings:
    """Build every intermediate string the feature table reads.

    Digits and hyphens never reach the segmenter: words come from the
    letters of the SLD in order.  Stripping digits cannot change which
    letters remain, so words_d equals words and the _d strings differ from
    their plain counterparts only through the dom_d denominator.
    """
    cfg = config or FeatureConfig()
    dom = record.sld
    dom_d = "".join(ch for ch in dom if ch not in DIGITS)
    letters = "".join(ch for ch in dom if ch in LETTERS)
    words = tuple(segment(letters, word_model)) if letters else ()
    words_d = words

    kept = tuple(significant_words(words, cfg.segmenter))
    kept_d = tuple(significant_words(words_d, cfg.segmenter))
    w2 = [w for w in words if len(w) >= 3]
    w3 = [w for w in words if len(w) >= 4]

    return DerivedStrings(
        dom=dom,
        dom_d=dom_d,
        grams3=tuple(sld_grams(dom, 3)),
        grams4=tuple(sld_grams(dom, 4)),
        grams5=tuple(sld_grams(dom, 5)),
        words=words,
        words_d=words_d,
        dom_w="".join(kept),
        dom_ws=" ".join(kept),
        dom_wd="".join(kept_d),
        dom_wds=" ".join(kept_d),
        dom_w2="".join(w2),
        dom_w3="".join(w3),
    )


# ---------------------------------------------------------------------------
# the vector


def _letter_count(s: str) -> int:
    return sum(1 for ch in s if ch in LETTERS)


def extract_features(
    record: DomainRecord,
    models: CorpusModels,
    config: FeatureConfig | None = None,
) -> FeatureVector:
    """Extract the full canonical vector for one normalized domain.

    All ratio denominators guard against zero by returning 0.0.  Empty
    derived strings score neutral on the Markov gibberish scorer, 1.0 on
    the heuristic one, and 0.0 entropy.
    """
    cfg = config or FeatureConfig()
    if any(m is None for m in (models.ngram3, models.ngram4, models.ngram5, models.word, models.markov)):
        raise ModelMissingError("extraction needs all five corpus models")
    ds = derive_strings(record, models.word, cfg)
    dom = ds.dom
    length = len(dom)

    vowels = sum(1 for ch in dom if ch in VOWELS)
    consonants = sum(1 for ch in dom if ch in LETTERS and ch not in VOWELS)
    con_vow = min(consonants / max(1, vowels), length) / length if length else 0.0

    def ratio(num: int) -> float:
        return num / length if length else 0.0

    def ratio_d(num: int) -> float:
        return num / len(ds.dom_d) if ds.dom_d else 0.0

    gib_targets = (ds.dom, ds.dom_ws, ds.dom_d, ds.dom_wds, ds.dom_w2, ds.dom_w3)

    values = np.empty(len(FEATURE_NAMES), dtype=np.float64)
    values[0] = 1.0 if is_hex(dom) else 0.0
    values[1] = float(length)
    values[2] = float(sum(1 for ch in dom if ch in DIGITS))
    values[3] = float(record.dot_count) if cfg.enable_dot else 0.0
    values[4] = float(max_consecutive_run(dom, CONSONANT))
    values[5] = float(max_consecutive_run(dom, VOWEL))
    values[6] = float(sum(1 for w in ds.words if len(w) >= 3))
    values[7] = float(sum(1 for w in ds.words if len(w) >= 4))
    values[8] = con_vow
    values[9] = gram_ratio(ds.grams3, models.ngram(3).grams)
    values[10] = gram_ratio(ds.grams4, models.ngram(4).grams)
    values[11] = gram_ratio(ds.grams5, models.ngram(5).grams)
    values[12] = vowel_gram_ratio(ds.grams3)
    values[13] = vowel_gram_ratio(ds.grams4)
    values[14] = vowel_gram_ratio(ds.grams5)
    values[15] = ratio(_letter_count(ds.dom_w))
    values[16] = ratio(_letter_count(ds.dom_wd))
    values[17] = ratio(_letter_count(ds.dom_wds))
    values[18] = ratio(_letter_count(ds.dom_w2))
    values[19] = ratio_d(_letter_count(ds.dom_w2))
    values[20] = ratio(_letter_count(ds.dom_w3))
    values[21] = ratio_d(_letter_count(ds.dom_w3))
    for i, s in enumerate(gib_targets):
        values[22 + i] = markov_score(s, models.markov)
        values[28 + i] = heuristic_gibberish_score(s, models.word, cfg.bands) if s else 1.0
        values[34 + i] = shannon_entropy(s)

    return FeatureVector(
        values=values,
        sld=record.sld,
        label=None,
        family=None,
    )


class FeatureExtractor:
    """Extraction with an optional bounded memo keyed by SLD.

    The cache is an LRU over (sld, dot_count); correctness never depends on
    a hit.  Mutation is lock-guarded so one writer and many readers can
    share an instance; cached vectors are immutable so hits need no lock.
    """

    def __init__(
        self,
        models: CorpusModels,
        config: FeatureConfig | None = None,
        cache_size: int = 0,
    ) -> None:
        if cache_size < 0:
            raise ValueError("cache_size must be >= 0")
        self.models = models
        self.config = config or FeatureConfig()
        self._cache_size = cache_size
        self._cache: OrderedDict[tuple[str, int], FeatureVector] = OrderedDict()
        self._lock = threading.Lock()
        self.hits = 0
        self.misses = 0

    def extract(self, record: DomainRecord) -> FeatureVector:
        key = (record.sld, record.dot_count if self.config.enable_dot else 0)
        if self._cache_size:
            hit = self._cache.get(key)
            if hit is not None:
                self.hits += 1
                return hit
        vec = extract_features(record, self.models, self.config)
        if self._cache_size:
            with self._lock:
                self.misses += 1
                self._cache[key] = vec
                self._cache.move_to_end(key)
                while len(self._cache) > self._cache_size:
                    self._cache.popitem(last=False)
        return vec

    def extract_sld(
        self,
        sld: str,
        label: str | None = None,
        family: str | None = None,
    ) -> FeatureVector:
        """Extract for a bare SLD string (dot count zero), tagging metadata."""
        record = DomainRecord(raw=sld, sld=sld, label_count=1, dot_count=0, is_idn=False)
        vec = self.extract(record)
        if label is None and family is None:
            return vec
        return FeatureVector(values=vec.values, sld=vec.sld, label=label, family=family)


def with_metadata(vec: FeatureVector, label: str | None, family: str | None) -> FeatureVector:
    return FeatureVector(values=vec.values, sld=vec.sld, label=label, family=family)


# ---------------------------------------------------------------------------
# CSV schema


def write_feature_csv(out: TextIO, vectors: Iterable[FeatureVector]) -> None:
    """Write vectors in the canonical column order, floats as %.6f.

    The header and float formatting are part of the schema: the same
    vectors always serialize to the same bytes.
    """
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    for vec in vectors:
        row = ["%.6f" % v for v in vec.values]
        row.append(vec.sld)
        row.append(vec.label or "")
        row.append(vec.family or "")
        writer.writerow(row)


def read_feature_csv(src: TextIO) -> list[FeatureVector]:
    """Read a CSV produced by write_feature_csv; validates the header."""
    reader = csv.reader(src)
    header = next(reader, None)
    if header is None or tuple(header) != CSV_HEADER:
        raise CorruptDocumentError("unrecognized feature CSV header")
    out: list[FeatureVector] = []
    n = len(FEATURE_NAMES)
    for row in reader:
        values = np.array([float(x) for x in row[:n]], dtype=np.float64)
        out.append(
            FeatureVector(
                values=values,
                sld=row[n],
                label=row[n + 1] or None,
                family=row[n + 2] or None,
            )
        )
    return out
