"""Domain string normalization and benign-corpus ingestion.

Every downstream stage (feature extraction, training, evaluation) operates on
second-level domains, so this module is the single place where raw entries
from a domain list are lowercased, stripped of their public suffix, checked
against the DNS syntax rules, and deduplicated.

Records that violate the RFC rules are flagged, never dropped: adversarial
domain generators are known to emit syntactically invalid names and the
detector must still score them.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from importlib import resources

from dga_sentinel.errors import DataError

# Validity rule identifiers, in reporting order.
LEADING_HYPHEN = "LEADING_HYPHEN"
TRAILING_HYPHEN = "TRAILING_HYPHEN"
IDN_HYPHEN_34 = "IDN_HYPHEN_34"
BAD_CHAR = "BAD_CHAR"
LABEL_TOO_LONG = "LABEL_TOO_LONG"
EMPTY_LABEL = "EMPTY_LABEL"

RULE_ORDER = (
    LEADING_HYPHEN,
    TRAILING_HYPHEN,
    IDN_HYPHEN_34,
    BAD_CHAR,
    LABEL_TOO_LONG,
    EMPTY_LABEL,
)

_LABEL_CHARS = frozenset("abcdefghijklmnopqrstuvwxyz0123456789-")
MAX_LABEL_LEN = 63


class EmptyInputError(DataError):
    """Input line is blank (or has no usable label) after trimming."""


class NonAsciiError(DataError):
    """Input contains a non-ASCII byte outside an "xn--" label."""


class EmptyCorpusError(DataError):
    """No SLD survived corpus ingestion."""


@dataclass(frozen=True, slots=True)
class DomainRecord:
    """One normalized domain entry.

    `sld` is the unit every feature operates on; `raw` keeps the lowercased
    original so dot statistics survive suffix stripping.
    """

    raw: str
    sld: str
    label_count: int
    dot_count: int
    is_idn: bool


@dataclass(frozen=True, slots=True)
class ValidityVerdict:
    valid: bool
    violations: tuple[str, ...]


@dataclass(frozen=True, slots=True)
class BenignCorpus:
    """Deduplicated benign SLDs in first-occurrence order, plus drop counters.

    Immutable after construction; safe to share across threads.
    """

    slds: tuple[str, ...]
    source_count: int
    dropped_idn: int
    dropped_duplicate: int
    dropped_invalid: int


@lru_cache(maxsize=1)
def _cc_second_level() -> frozenset[str]:
    # Editable list of labels that act as a second-level public suffix when
    # followed by a 2-letter country code ("google.co.in" -> "google").
    text = resources.files("dga_sentinel.data").joinpath("cc_second_level.txt").read_text("utf-8")
    return frozenset(
        line.strip() for line in text.splitlines() if line.strip() and not line.startswith("#")
    )


def parse_domain(raw: str) -> DomainRecord:
    """Normalize one raw domain entry into a DomainRecord.

    The rightmost label is always treated as the TLD.  A second label is
    stripped as well when it is a known country-code second-level suffix
    (see data/cc_second_level.txt) sitting in front of a 2-letter TLD.  A
    bare label (no dots) is its own SLD.

    Raises:
        EmptyInputError: blank after trimming, or only empty labels.
        NonAsciiError: non-ASCII byte outside an "xn--" label.
    """
    trimmed = raw.strip().lower()
    if not trimmed:
        raise EmptyInputError("blank input line")

    all_labels = trimmed.split(".")
    for label in all_labels:
        if not label.isascii() and not label.startswith("xn--"):
            raise NonAsciiError(f"non-ascii label in {trimmed!r}")

    # Empty labels (stray dots, trailing root dot) carry no name content;
    # ignore them when picking the SLD but keep raw counts honest.
    labels = [lab for lab in all_labels if lab]
    if not labels:
        raise EmptyInputError("no non-empty label")

    if len(labels) == 1:
        sld = labels[0]
    elif (
        len(labels) >= 3
        and labels[-2] in _cc_second_level()
        and len(labels[-1]) == 2
    ):
        sld = labels[-3]
    else:
        sld = labels[-2]

    return DomainRecord(
        raw=trimmed,
        sld=sld,
        label_count=len(all_labels),
        dot_count=trimmed.count("."),
        is_idn=any(lab.startswith("xn--") for lab in labels),
    )


def validate_rfc(raw: str) -> ValidityVerdict:
    """Check a domain against DNS label syntax rules.

    Flags hyphens at a label's start or end, the reserved hyphen pair at
    positions 3-4 of a label unless it starts with "xn", characters outside
    [a-z0-9-], labels over 63 chars, and empty labels.  Each rule id is
    reported at most once.  Always returns a verdict.
    """
    trimmed = raw.strip().lower()
    hits: set[str] = set()
    for label in trimmed.split("."):
        if not label:
            hits.add(EMPTY_LABEL)
            continue
        if label[0] == "-":
            hits.add(LEADING_HYPHEN)
        if label[-1] == "-":
            hits.add(TRAILING_HYPHEN)
        if len(label) >= 4 and label[2] == "-" and label[3] == "-" and not label.startswith("xn"):
            hits.add(IDN_HYPHEN_34)
        if any(ch not in _LABEL_CHARS for ch in label):
            hits.add(BAD_CHAR)
        if len(label) > MAX_LABEL_LEN:
            hits.add(LABEL_TOO_LONG)
    violations = tuple(rule for rule in RULE_ORDER if rule in hits)
    return ValidityVerdict(valid=not violations, violations=violations)


def ingest_benign_corpus(lines) -> BenignCorpus:
    """Build a deduplicated benign SLD corpus from raw domain lines.

    Blank lines and '#' comment lines are not entries and are skipped before
    any counting.  Lines containing '/' or ':' (paths, ports, schemes) are
    rejected as invalid.  Internationalised entries (any "xn--" label) are
    dropped wholesale.  Deduplication is on the SLD, first occurrence wins,
    so localized variants of one site collapse to a single record.

    Raises:
        EmptyCorpusError: nothing survived.
    """
    slds: list[str] = []
    seen: set[str] = set()
    source_count = 0
    dropped_idn = 0
    dropped_duplicate = 0
    dropped_invalid = 0

    for line in lines:
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        source_count += 1
        if "/" in stripped or ":" in stripped:
            dropped_invalid += 1
            continue
        try:
            record = parse_domain(stripped)
        except (EmptyInputError, NonAsciiError):
            dropped_invalid += 1
            continue
        if record.is_idn:
            dropped_idn += 1
            continue
        if record.sld in seen:
            dropped_duplicate += 1
            continue
        seen.add(record.sld)
        slds.append(record.sld)

    if not slds:
        raise EmptyCorpusError("no SLD survived ingestion")
    return BenignCorpus(
        slds=tuple(slds),
        source_count=source_count,
        dropped_idn=dropped_idn,
        dropped_duplicate=dropped_duplicate,
        dropped_invalid=dropped_invalid,
    )
