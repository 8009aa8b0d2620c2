"""Rebuild the shipped text assets derived from data/wordlist_en.txt.

Everything here is deterministic (fixed seeds, package PRNG) so the shipped
files are reproducible from the wordlist alone:

* gibberish_train.txt  - English-like text for the bigram scorer, sampled
  from the wordlist with Zipf weights.  Real prose is not redistributed;
  character bigram statistics only need realistic word material.
* gibberish_good.txt   - calibration lines of common words.
* gibberish_bad.txt    - calibration lines of consonant-heavy noise.
* benign_sample.txt    - a plausible benign domain corpus (word, word+word,
  hyphenated, affixed, digit-suffixed, acronym, brandable patterns) with a
  realistic TLD mix, including a sprinkle of localized duplicates.

The script trains the Markov scorer on its own output and asserts the
calibration clusters separate before writing anything.

Usage: python tools/build_shipped_data.py [--data-dir src/dga_sentinel/data]
"""

from __future__ import annotations

import argparse
import math
import sys
from bisect import bisect_right
from pathlib import Path

from dga_sentinel.rng import SplitMix64, derive_stream
from dga_sentinel.textmodels import markov_score, markov_train

SEED = 0x5EED_DA7A

CONSONANTS = "bcdfghjklmnpqrstvwxz"
VOWELS = "aeiou"
LETTERS = "abcdefghijklmnopqrstuvwxyz"

SUFFIXES = [
    "ly", "ify", "io", "hub", "lab", "labs", "box", "kit", "zone", "base",
    "ware", "soft", "tech", "shop", "store", "media", "cloud", "app", "apps",
    "ster", "ity", "ful", "net", "web", "line", "spot", "point", "works",
]
PREFIXES = ["my", "get", "go", "the", "i", "e", "top", "best", "all", "pro"]

TLDS = [
    ("com", 560), ("net", 80), ("org", 75), ("io", 40), ("co", 25),
    ("info", 30), ("biz", 15), ("us", 10), ("de", 20), ("fr", 10),
    ("ru", 15), ("nl", 8), ("it", 8), ("es", 8), ("ca", 8), ("au", 6),
    ("co.uk", 30), ("co.in", 10), ("co.jp", 8), ("com.br", 8), ("edu", 8),
    ("gov", 4), ("tv", 6), ("me", 8), ("cc", 4),
]


class WeightedPicker:
    """Cumulative-weight sampling with integer weights and the package PRNG."""

    def __init__(self, items, weights):
        self.items = list(items)
        self.cum = []
        total = 0
        for w in weights:
            total += w
            self.cum.append(total)
        self.total = total

    def pick(self, rng: SplitMix64):
        return self.items[bisect_right(self.cum, rng.rand_below(self.total))]


def zipf_picker(words, floor=30):
    weights = [max(1, int(1_000_000 / (rank + floor))) for rank in range(1, len(words) + 1)]
    return WeightedPicker(words, weights)


def build_gibberish_train(words, rng) -> str:
    pool = [w for w in words[:40_000] if len(w) >= 2]
    picker = zipf_picker(pool)
    lines, line, width = [], [], 0
    for _ in range(30_000):
        w = picker.pick(rng)
        line.append(w)
        width += len(w) + 1
        if width > 70:
            lines.append(" ".join(line))
            line, width = [], 0
    if line:
        lines.append(" ".join(line))
    return "\n".join(lines) + "\n"


def build_good_lines(words, rng) -> list[str]:
    pool = [w for w in words[:2_500] if len(w) >= 2]
    picker = zipf_picker(pool)
    return [" ".join(picker.pick(rng) for _ in range(6)) for _ in range(80)]


def build_bad_lines(rng) -> list[str]:
    lines = []
    for _ in range(80):
        n = rng.rand_range(10, 18)
        chars = []
        for _ in range(n):
            if rng.rand_below(100) < 15:
                chars.append(VOWELS[rng.rand_below(5)])
            else:
                chars.append(CONSONANTS[rng.rand_below(len(CONSONANTS))])
        lines.append("".join(chars))
    return lines


def benign_word_pool(words):
    return [w for w in words[50:8_000] if 3 <= len(w) <= 9 and w.isalpha()]


def make_brand(rng) -> str:
    # alternating consonant/vowel skeleton, 4-7 chars
    n = rng.rand_range(4, 7)
    out = []
    for i in range(n):
        out.append(CONSONANTS[rng.rand_below(len(CONSONANTS))] if i % 2 == 0 else VOWELS[rng.rand_below(5)])
    return "".join(out)


def mutate(word, rng) -> str:
    mode = rng.rand_below(3)
    if mode == 0 and any(v in word[1:] for v in VOWELS):
        # drop one interior vowel (flickr style)
        pos = [i for i, ch in enumerate(word) if ch in VOWELS and i > 0]
        i = pos[rng.rand_below(len(pos))]
        return word[:i] + word[i + 1 :]
    if mode == 1:
        i = rng.rand_below(len(word))
        return word[: i + 1] + word[i:]
    return word.replace("c", "k", 1) if "c" in word else word + "z"


def build_benign(words, rng, target=24_000) -> list[str]:
    pool = benign_word_pool(words)
    picker = zipf_picker(pool, floor=120)
    tld_picker = WeightedPicker([t for t, _ in TLDS], [w for _, w in TLDS])
    pattern_picker = WeightedPicker(
        ["word", "two", "hyphen", "affix", "digits", "three", "acro", "brand", "glue", "short"],
        [26, 19, 7, 11, 7, 4, 6, 6, 4, 10],
    )

    seen = set()
    lines = []
    while len(seen) < target:
        kind = pattern_picker.pick(rng)
        w1 = picker.pick(rng)
        w2 = picker.pick(rng)
        if kind == "word":
            sld = w1
        elif kind == "two":
            sld = w1 + w2
        elif kind == "hyphen":
            sld = w1 + "-" + w2
        elif kind == "affix":
            if rng.rand_below(100) < 30:
                sld = PREFIXES[rng.rand_below(len(PREFIXES))] + w1
            else:
                sld = w1 + SUFFIXES[rng.rand_below(len(SUFFIXES))]
        elif kind == "digits":
            if rng.rand_below(100) < 25:
                sld = w1 + str(rng.rand_range(1990, 2025))
            else:
                sld = w1 + str(rng.rand_below(1000))
        elif kind == "three":
            sld = w1 + w2 + picker.pick(rng)
        elif kind == "acro":
            sld = "".join(LETTERS[rng.rand_below(26)] for _ in range(rng.rand_range(3, 5)))
        elif kind == "brand":
            sld = make_brand(rng)
        elif kind == "glue":
            glue = ("and", "of", "for", "to")[rng.rand_below(4)]
            sld = w1 + glue + w2
        else:  # short
            sld = w1[: rng.rand_range(3, 5)] + w2[: rng.rand_range(2, 4)]
        if len(sld) > 40 or sld in seen:
            continue
        seen.add(sld)
        host = sld
        if rng.rand_below(100) < 6:
            host = "www." + host
        lines.append(f"{host}.{tld_picker.pick(rng)}")
        # occasional localized duplicate of the same site
        if rng.rand_below(1000) < 12:
            lines.append(f"{sld}.co.{('uk','in','za','nz')[rng.rand_below(4)]}")
    return lines


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--data-dir", default="src/dga_sentinel/data")
    args = ap.parse_args(argv)
    data_dir = Path(args.data_dir)

    words = (data_dir / "wordlist_en.txt").read_text("utf-8").split()

    train_text = build_gibberish_train(words, SplitMix64(derive_stream(SEED, "markov-text")))
    good = build_good_lines(words, SplitMix64(derive_stream(SEED, "markov-good")))
    bad = build_bad_lines(SplitMix64(derive_stream(SEED, "markov-bad")))

    model = markov_train(train_text, good, bad)  # raises on calibration overlap
    good_scores = sorted(markov_score(s, model) for s in good)
    bad_scores = sorted(markov_score(s, model) for s in bad)
    margin = math.log(good_scores[0]) - math.log(bad_scores[-1])
    print(f"markov text: {len(train_text)} chars; calibration margin {margin:.3f} nats")
    print(f"  good scores [{good_scores[0]:.4f} .. {good_scores[-1]:.4f}]")
    print(f"  bad scores  [{bad_scores[0]:.4f} .. {bad_scores[-1]:.4f}]")
    assert margin > 0.2, "calibration margin too thin to ship"

    benign = build_benign(words, SplitMix64(derive_stream(SEED, "benign-corpus")))
    print(f"benign corpus: {len(benign)} lines")

    (data_dir / "gibberish_train.txt").write_text(train_text, "utf-8")
    (data_dir / "gibberish_good.txt").write_text("\n".join(good) + "\n", "utf-8")
    (data_dir / "gibberish_bad.txt").write_text("\n".join(bad) + "\n", "utf-8")
    (data_dir / "benign_sample.txt").write_text(
        "# Synthetic benign domain sample; regenerate with tools/build_shipped_data.py\n"
        + "\n".join(benign)
        + "\n",
        "utf-8",
    )
    return 0


if __name__ == "__main__":
    sys.exit(main())
