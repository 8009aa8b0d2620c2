"""Rebuild data/wordlist_en.txt from a local documentation corpus.

The segmenter needs an English wordlist in descending frequency order.  This
environment has no dictionary packages, so we mine prose from documentation
that is reliably present on any Python development box: docstrings and
comments of the standard library and of the scientific packages in
site-packages, plus their bundled .rst/.md/.txt docs.

Counting [a-z]+ tokens over that corpus gives a very ordinary Zipf ranking
(the, a, of, to, is, ...) with a technical flavor in the mid ranks, which is
harmless for segmenting domain names.  Output is one word per line, best
rank first.  Any other descending-frequency list can be dropped in instead;
the file format is the whole contract.

Usage: python tools/build_wordlist.py [out_path] [--top N]
"""

from __future__ import annotations

import argparse
import re
import site
import sys
import sysconfig
from collections import Counter
from pathlib import Path

TRIPLE = re.compile(r'"""(.*?)"""|\'\'\'(.*?)\'\'\'', re.S)
COMMENT = re.compile(r"(?m)^[ \t]*#(.*)$")
WORD = re.compile(r"[a-z]+")

# Unix command names that the corpus ranks as if they were English words and
# that shadow an ordinary two-word phrase ("what is ..."). Curated, tiny.
EXCLUDE = {"whatis"}

def iter_source_dirs():
    stdlib = Path(sysconfig.get_paths()["stdlib"])
    yield stdlib
    for sp in site.getsitepackages():
        sp = Path(sp)
        if sp.is_dir() and sp != stdlib:
            yield sp


def harvest(counter: Counter, text: str) -> None:
    for match in WORD.finditer(text.lower()):
        w = match.group()
        if 1 <= len(w) <= 24:
            counter[w] += 1


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("out", nargs="?", default="src/dga_sentinel/data/wordlist_en.txt")
    ap.add_argument("--top", type=int, default=125_000)
    args = ap.parse_args(argv)

    counts: Counter[str] = Counter()
    n_files = 0
    for base in iter_source_dirs():
        for path in sorted(base.rglob("*.py")):
            try:
                content = path.read_text("utf-8", errors="ignore")
            except OSError:
                continue
            n_files += 1
            for m in TRIPLE.finditer(content):
                harvest(counts, m.group(1) or m.group(2) or "")
            for m in COMMENT.finditer(content):
                harvest(counts, m.group(1))
        for pattern in ("*.rst", "*.md", "*.txt"):
            for path in sorted(base.rglob(pattern)):
                try:
                    harvest(counts, path.read_text("utf-8", errors="ignore"))
                except OSError:
                    continue
                n_files += 1

    for junk in EXCLUDE:
        counts.pop(junk, None)
    ranked = sorted(counts.items(), key=lambda kv: (-kv[1], kv[0]))
    top = ranked[: args.top]
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text("\n".join(w for w, _ in top) + "\n", "utf-8")

    print(f"scanned {n_files} files, {len(counts)} unique tokens, wrote {len(top)} -> {out}")
    for probe in ("the", "what", "is", "this", "face", "book", "home", "information"):
        rank = next((i + 1 for i, (w, _) in enumerate(top) if w == probe), None)
        print(f"  rank[{probe}] = {rank}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
