"""Build the 1,000-line benign-list ingest fixture and its golden answer.

The fixture mimics the quirks of public top-sites lists: localized
duplicates of one site across many country TLDs, punycode entries, mixed
and upper case, www/sub prefixes, comment and blank lines, and junk lines
carrying paths or ports.

The golden file is written from construction intent: the builder decides
up front what each line IS (a new site, a duplicate of an earlier one, a
punycode drop, an invalid line) and records the expected SLD list and
drop counters from that plan.  It never calls the ingest code, so the
two sides stay independent.

Usage: python tools/make_ingest_fixture.py  (writes into tests/golden/)
"""

import json
import os
import sys

sys.path.insert(0, os.path.join(os.path.dirname(__file__), "..", "src"))

from dga_sentinel.rng import SplitMix64  # PRNG only; no ingest logic imported

OUT_DIR = os.path.join(os.path.dirname(__file__), "..", "tests", "golden")

QUOTA = {"keep": 580, "dup": 170, "idn": 90, "invalid": 80, "comment": 50, "blank": 30}

SYLLABLES = (
    "ba ce di fo gu ha ki lo mu ne po ra su ti vo wa ye zo "
    "chan ster field port gate mark land shop news blue tech"
).split()

TLDS = ("com", "net", "org", "de", "io", "fr", "ru", "jp", "br")
CC_SECOND = ("co.uk", "com.au", "co.in", "ac.jp", "gov.uk", "org.nz", "edu.cn")
SUBS = ("www", "mail", "api", "cdn", "shop")
COMMENT_WORDS = ("snapshot", "export", "regional", "mirror", "batch", "review")


def make_names(rng: SplitMix64, count: int) -> list[str]:
    names: list[str] = []
    seen = set()
    while len(names) < count:
        parts = [SYLLABLES[rng.rand_below(len(SYLLABLES))] for _ in range(2 + rng.rand_below(2))]
        name = "".join(parts)
        if name not in seen:
            seen.add(name)
            names.append(name)
    return names


def style_case(rng: SplitMix64, text: str) -> str:
    roll = rng.rand_below(10)
    if roll < 7:
        return text
    if roll < 9:  # MiXeD
        return "".join(c.upper() if rng.rand_below(2) else c for c in text)
    return text.upper()


def decorate(rng: SplitMix64, name: str) -> str:
    """Wrap a site name in one of the list's host shapes; SLD stays `name`."""
    roll = rng.rand_below(10)
    if roll < 6:
        host = f"{name}.{TLDS[rng.rand_below(len(TLDS))]}"
    elif roll < 8:
        host = f"www.{name}.{TLDS[rng.rand_below(len(TLDS))]}"
    elif roll < 9:
        host = f"{name}.{CC_SECOND[rng.rand_below(len(CC_SECOND))]}"
    else:
        sub = SUBS[rng.rand_below(len(SUBS))]
        host = f"{sub}.{name}.{TLDS[rng.rand_below(len(TLDS))]}"
    return style_case(rng, host)


def idn_line(rng: SplitMix64, name: str) -> str:
    roll = rng.rand_below(3)
    if roll == 0:
        return f"xn--{name}-p1a.{TLDS[rng.rand_below(len(TLDS))]}"
    if roll == 1:
        return f"www.xn--{name}-kva.{TLDS[rng.rand_below(len(TLDS))]}"
    # punycode subdomain over a clean name: still dropped wholesale
    return f"xn--{SYLLABLES[rng.rand_below(len(SYLLABLES))]}.{name}.com"


def invalid_line(rng: SplitMix64, name: str) -> str:
    tld = TLDS[rng.rand_below(len(TLDS))]
    roll = rng.rand_below(4)
    if roll == 0:
        return f"{name}.{tld}/index.html"
    if roll == 1:
        return f"https://{name}.{tld}"
    if roll == 2:
        return f"{name}.{tld}:8080"
    return f"café{name}.{tld}"  # non-ascii outside any xn-- label


def main() -> None:
    rng = SplitMix64(20240817)
    names = make_names(rng, QUOTA["keep"])

    lines: list[str] = []
    golden_slds: list[str] = []
    kept: list[str] = []
    remaining = dict(QUOTA)

    # scripted edge entries first: a bare cc-second pair keeps its first
    # label, and a 2-letter TLD line later duplicates an existing site
    lines.append("co.uk")
    golden_slds.append("co")
    kept.append("co")
    remaining["keep"] -= 1
    next_name = iter(names)

    scripted_dup_pending = True
    while sum(remaining.values()) > 0:
        # "co" (kept[0]) never joins the dup pool: decorating it with a
        # www prefix would shift the SLD to "www" under the cc-second rule
        choices = [k for k, n in remaining.items() if n > 0 and (k != "dup" or len(kept) > 1)]
        kind = choices[rng.rand_below(len(choices))]
        remaining[kind] -= 1
        if kind == "keep":
            name = next(next_name)
            lines.append(decorate(rng, name))
            golden_slds.append(name)
            kept.append(name)
        elif kind == "dup":
            name = kept[1 + rng.rand_below(len(kept) - 1)]
            if scripted_dup_pending and name != "co":
                lines.append(f"{name}.co")  # '.co' is a plain 2-letter TLD here
                scripted_dup_pending = False
            else:
                lines.append(decorate(rng, name))
        elif kind == "idn":
            lines.append(idn_line(rng, names[rng.rand_below(len(names))]))
        elif kind == "invalid":
            lines.append(invalid_line(rng, names[rng.rand_below(len(names))]))
        elif kind == "comment":
            word = COMMENT_WORDS[rng.rand_below(len(COMMENT_WORDS))]
            lines.append(f"# {word} {rng.rand_below(1000):03d}")
        else:
            lines.append("   " if rng.rand_below(4) == 0 else "")

    assert len(lines) == 1000, len(lines)
    assert len(golden_slds) == QUOTA["keep"] == len(set(golden_slds))
    assert not scripted_dup_pending

    golden = {
        "slds": golden_slds,
        "source_count": 1000 - QUOTA["comment"] - QUOTA["blank"],
        "dropped_duplicate": QUOTA["dup"],
        "dropped_idn": QUOTA["idn"],
        "dropped_invalid": QUOTA["invalid"],
    }
    with open(os.path.join(OUT_DIR, "ingest_fixture.txt"), "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")
    with open(os.path.join(OUT_DIR, "ingest_golden.json"), "w", encoding="utf-8") as fh:
        json.dump(golden, fh, indent=1, ensure_ascii=True)
        fh.write("\n")
    print(f"wrote 1000 lines, {len(golden_slds)} golden slds")


if __name__ == "__main__":
    main()
