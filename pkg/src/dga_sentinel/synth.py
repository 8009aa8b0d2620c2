"""Synthetic AGD generators for three archetypes: hex, random-char, wordlist.

These stand in for real malware families at desk scale.  Family names in
fixtures are archetype labels (hex8, rand12, dict2), never real family
names; the generators are statistical analogues, not reverse-engineered
DGAs.  All draws come from the package SplitMix64 stream seeded by the
spec, so a spec generates the same list on every platform.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

from dga_sentinel.errors import DataError
from dga_sentinel.normalize import BenignCorpus
from dga_sentinel.rng import SplitMix64

HEX = "hex"
RANDOM_CHAR = "random_char"
WORDLIST = "wordlist"
ARCHETYPES = (HEX, RANDOM_CHAR, WORDLIST)

_HEX_DIGITS = "0123456789abcdef"

BENIGN_LABEL = "benign"
MALICIOUS_LABEL = "malicious"


class InvalidSpecError(DataError):
    """A DgaSpec violates its archetype's invariants."""


class EmptyClassError(DataError):
    """A labeled dataset needs at least one SLD per class."""


@dataclass(frozen=True, slots=True)
class DgaSpec:
    """One synthetic family: archetype, seed, size, and shape knobs.

    length applies to HEX (fixed int) and RANDOM_CHAR (int, or an
    inclusive (lo, hi) range); charset to RANDOM_CHAR; wordlist and
    words_per_domain to WORDLIST.  tld is carried for emission only and
    never affects the generated SLDs.
    """

    archetype: str
    seed: int
    count: int
    length: int | tuple[int, int] = 8
    charset: str = "abcdefghijklmnopqrstuvwxyz"
    wordlist: tuple[str, ...] = ()
    words_per_domain: int = 2
    tld: str = "com"

    def __post_init__(self) -> None:
        if self.archetype not in ARCHETYPES:
            raise InvalidSpecError(f"unknown archetype {self.archetype!r}")
        if self.count < 1:
            raise InvalidSpecError("count must be >= 1")
        if self.archetype == HEX:
            if not isinstance(self.length, int):
                raise InvalidSpecError("hex archetype takes a fixed integer length")
            if self.length < 4:
                raise InvalidSpecError("hex length must be >= 4")
        elif self.archetype == RANDOM_CHAR:
            lo, hi = self._length_range()
            if lo < 1 or hi < lo:
                raise InvalidSpecError(f"bad length range ({lo}, {hi})")
            if not self.charset:
                raise InvalidSpecError("random_char needs a non-empty charset")
        else:
            if len(self.wordlist) < 2:
                raise InvalidSpecError("wordlist archetype needs >= 2 words")
            if self.words_per_domain < 1:
                raise InvalidSpecError("words_per_domain must be >= 1")

    def _length_range(self) -> tuple[int, int]:
        if isinstance(self.length, int):
            return self.length, self.length
        lo, hi = self.length
        return int(lo), int(hi)


def generate(spec: DgaSpec) -> list[str]:
    """Exactly spec.count SLDs, deterministically from spec.seed."""
    rng = SplitMix64(spec.seed)
    out: list[str] = []
    if spec.archetype == HEX:
        for _ in range(spec.count):
            out.append("".join(_HEX_DIGITS[rng.rand_below(16)] for _ in range(spec.length)))
    elif spec.archetype == RANDOM_CHAR:
        lo, hi = spec._length_range()
        cs = spec.charset
        for _ in range(spec.count):
            n = rng.rand_range(lo, hi)
            out.append("".join(cs[rng.rand_below(len(cs))] for _ in range(n)))
    else:
        words = spec.wordlist
        for _ in range(spec.count):
            out.append(
                "".join(words[rng.rand_below(len(words))] for _ in range(spec.words_per_domain))
            )
    return out


def emit_domains(slds: Iterable[str], tld: str) -> list[str]:
    """Append a fixed TLD for full-domain emission."""
    suffix = f".{tld}" if tld else ""
    return [s + suffix for s in slds]


@dataclass(frozen=True, slots=True)
class LabeledRecord:
    sld: str
    label: str  # benign | malicious
    family: str | None


@dataclass(frozen=True, slots=True)
class LabeledDataset:
    """Benign + malicious records with the cross-class overlap removed.

    An AGD colliding with a benign SLD is dropped (the benign reading
    wins) and counted in overlap_dropped.  Within-class duplicates are
    kept; they are the caller's sampling concern, and the eval layer's
    duplicate audit reports them.
    """

    records: tuple[LabeledRecord, ...]
    overlap_dropped: int

    def by_label(self, label: str) -> list[LabeledRecord]:
        return [r for r in self.records if r.label == label]


def label_dataset(
    benign: BenignCorpus | Sequence[str],
    malicious: Sequence[tuple[str, Sequence[str]]],
) -> LabeledDataset:
    """Merge one benign corpus with per-family AGD lists into one stream.

    Record order: all benign SLDs in corpus order, then each family's
    surviving SLDs in the given order.
    """
    benign_slds = list(benign.slds) if isinstance(benign, BenignCorpus) else list(benign)
    mal_total = sum(len(slds) for _, slds in malicious)
    if not benign_slds or mal_total == 0:
        raise EmptyClassError("need at least one benign and one malicious SLD")

    benign_set = frozenset(benign_slds)
    records = [LabeledRecord(s, BENIGN_LABEL, None) for s in benign_slds]
    overlap = 0
    for family, slds in malicious:
        for s in slds:
            if s in benign_set:
                overlap += 1
                continue
            records.append(LabeledRecord(s, MALICIOUS_LABEL, family))
    if len(records) == len(benign_slds):
        raise EmptyClassError("every malicious SLD collided with the benign corpus")
    return LabeledDataset(records=tuple(records), overlap_dropped=overlap)
