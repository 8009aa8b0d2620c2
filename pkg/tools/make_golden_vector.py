#!/usr/bin/env python3
"""One-shot generator for tests/golden/whatisthis_vector.json.

Every coordinate is recomputed here straight from its definition with
deliberately separate throwaway code: exhaustive minimum-cost search
instead of the segmentation DP, hand-rolled entropy/run/ratio loops, and
direct reads of the shipped model tables.  dga_sentinel.features is never
imported, so the frozen file is an independent oracle for it.
"""

from __future__ import annotations

import itertools
import json
import math
from collections import Counter
from pathlib import Path

from dga_sentinel.defaults import default_models

SLD = "whatisthis"
VOWELS = set("aeiou")
LETTERS = set("abcdefghijklmnopqrstuvwxyz")
MARKOV_ALPHABET = "abcdefghijklmnopqrstuvwxyz "

NAMES = [
    "L-HEX", "L-LEN", "L-DIG", "L-DOT", "L-CON-MAX", "L-VOW-MAX", "L-W2", "L-W3",
    "R-CON-VOW", "R-Dom-3G", "R-Dom-4G", "R-Dom-5G", "R-VOW-3G", "R-VOW-4G",
    "R-VOW-5G", "R-WS-LEN", "R-WD-LEN", "R-WDS-LEN", "R-W2-LEN", "R-W2-LEN-D",
    "R-W3-LEN", "R-W3-LEN-D",
    "GIB-1-Dom", "GIB-1-Dom-WS", "GIB-1-Dom-D", "GIB-1-Dom-WDS", "GIB-1-Dom-W2",
    "GIB-1-Dom-W3",
    "GIB-2-Dom", "GIB-2-Dom-WS", "GIB-2-Dom-D", "GIB-2-Dom-WDS", "GIB-2-Dom-W2",
    "GIB-2-Dom-W3",
    "E-Dom", "E-Dom-WS", "E-Dom-D", "E-Dom-WDS", "E-Dom-W2", "E-Dom-W3",
]

MODELS = default_models()
WM = MODELS.word


def piece_cost(w: str) -> float | None:
    c = WM.costs.get(w)
    if c is not None:
        return c
    if len(w) == 1:
        return WM.oov_cost
    return None


def exhaustive_segment(s: str) -> list[str]:
    best_cost = math.inf
    best: list[list[str]] = []
    for mask in itertools.product((0, 1), repeat=len(s) - 1):
        parts, start = [], 0
        for i, cut in enumerate(mask, start=1):
            if cut:
                parts.append(s[start:i])
                start = i
        parts.append(s[start:])
        costs = [piece_cost(p) for p in parts]
        if any(c is None for c in costs):
            continue
        total = sum(costs)
        if total < best_cost - 1e-12:
            best_cost, best = total, [parts]
        elif abs(total - best_cost) <= 1e-12:
            best.append(parts)
    assert len(best) == 1, f"ambiguous min-cost split for {s!r}: {best}"
    return best[0]


def entropy(s: str) -> float:
    if not s:
        return 0.0
    n = len(s)
    return -sum(c / n * math.log2(c / n) for c in Counter(s).values())


def longest_run(s: str, members: set[str]) -> int:
    best = run = 0
    for ch in s:
        run = run + 1 if ch in members else 0
        best = max(best, run)
    return best


def markov(s: str) -> float:
    idx = {ch: i for i, ch in enumerate(MARKOV_ALPHABET)}
    kept = [ch for ch in s if ch in idx]
    if len(kept) < 2:
        return math.exp(MODELS.markov.threshold)
    total = 0.0
    for a, b in zip(kept, kept[1:]):
        total += float(MODELS.markov.log_prob[idx[a], idx[b]])
    return math.exp(total / (len(kept) - 1))


def band(x: float, lo: float, hi: float) -> float:
    if x < lo:
        return (lo - x) / lo
    if x > hi:
        return (x - hi) / (1.0 - hi)
    return 0.0


def heuristic(s: str) -> float:
    content = s.replace(" ", "")
    if not content:
        return 1.0
    uniq = len(set(content)) / len(content)
    vow = sum(1 for ch in content if ch in VOWELS) / len(content)
    letters = covered = 0
    for token in "".join(ch if ch in LETTERS else " " for ch in s).split():
        letters += len(token)
        covered += sum(len(w) for w in exhaustive_segment(token) if len(w) >= 2)
    cover_pen = 1.0 - (covered / letters if letters else 0.0)
    return (band(uniq, 0.3, 0.8) + band(vow, 0.25, 0.55) + min(1.0, max(0.0, cover_pen))) / 3.0


def main() -> None:
    dom = SLD
    dom_d = "".join(ch for ch in dom if not ch.isdigit())
    letters_only = "".join(ch for ch in dom if ch in LETTERS)
    words = exhaustive_segment(letters_only)
    dom_w = "".join(words)
    dom_ws = " ".join(words)
    dom_wd, dom_wds = dom_w, dom_ws
    dom_w2 = "".join(w for w in words if len(w) >= 3)
    dom_w3 = "".join(w for w in words if len(w) >= 4)
    print("words:", words)

    n_len = len(dom)
    grams = {n: [dom[i : i + n] for i in range(n_len - n + 1)] for n in (3, 4, 5)}
    vows = sum(1 for ch in dom if ch in VOWELS)
    cons = sum(1 for ch in dom if ch in LETTERS and ch not in VOWELS)

    def lcount(s: str) -> int:
        return sum(1 for ch in s if ch in LETTERS)

    vals: dict[str, float] = {}
    vals["L-HEX"] = 1.0 if dom and all(ch in "0123456789abcdef" for ch in dom) else 0.0
    vals["L-LEN"] = float(n_len)
    vals["L-DIG"] = float(sum(ch.isdigit() for ch in dom))
    vals["L-DOT"] = 0.0
    vals["L-CON-MAX"] = float(longest_run(dom, LETTERS - VOWELS))
    vals["L-VOW-MAX"] = float(longest_run(dom, VOWELS))
    vals["L-W2"] = float(sum(len(w) >= 3 for w in words))
    vals["L-W3"] = float(sum(len(w) >= 4 for w in words))
    vals["R-CON-VOW"] = min(cons / max(1, vows), n_len) / n_len
    for n in (3, 4, 5):
        known = MODELS.ngram(n).grams
        gs = grams[n]
        vals[f"R-Dom-{n}G"] = sum(g in known for g in gs) / len(gs) if gs else 0.0
    for n in (3, 4, 5):
        gs = grams[n]
        vals[f"R-VOW-{n}G"] = (
            sum(any(ch in VOWELS for ch in g) for g in gs) / len(gs) if gs else 0.0
        )
    vals["R-WS-LEN"] = lcount(dom_w) / n_len
    vals["R-WD-LEN"] = lcount(dom_wd) / n_len
    vals["R-WDS-LEN"] = lcount(dom_wds) / n_len
    vals["R-W2-LEN"] = lcount(dom_w2) / n_len
    vals["R-W2-LEN-D"] = lcount(dom_w2) / len(dom_d) if dom_d else 0.0
    vals["R-W3-LEN"] = lcount(dom_w3) / n_len
    vals["R-W3-LEN-D"] = lcount(dom_w3) / len(dom_d) if dom_d else 0.0
    six = [dom, dom_ws, dom_d, dom_wds, dom_w2, dom_w3]
    tags = ["Dom", "Dom-WS", "Dom-D", "Dom-WDS", "Dom-W2", "Dom-W3"]
    for tag, s in zip(tags, six):
        vals[f"GIB-1-{tag}"] = markov(s)
    for tag, s in zip(tags, six):
        vals[f"GIB-2-{tag}"] = heuristic(s) if s else 1.0
    for tag, s in zip(tags, six):
        vals[f"E-{tag}"] = entropy(s)

    assert list(vals) == NAMES
    out = Path(__file__).resolve().parents[1] / "tests" / "golden" / "whatisthis_vector.json"
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(json.dumps({"sld": SLD, "values": vals}, indent=1) + "\n")
    print(f"wrote {out}")
    for k, v in vals.items():
        print(f"  {k:14s} {v!r}")


if __name__ == "__main__":
    main()
