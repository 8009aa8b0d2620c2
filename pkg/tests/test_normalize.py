"""Domain parsing, RFC validity, and corpus ingestion."""

from __future__ import annotations

import pytest
from hypothesis import given, strategies as st

from dga_sentinel.normalize import (
    BAD_CHAR,
    EMPTY_LABEL,
    IDN_HYPHEN_34,
    LABEL_TOO_LONG,
    LEADING_HYPHEN,
    TRAILING_HYPHEN,
    EmptyCorpusError,
    EmptyInputError,
    NonAsciiError,
    ingest_benign_corpus,
    parse_domain,
    validate_rfc,
)

LABEL_ALPHABET = "abcdefghijklmnopqrstuvwxyz0123456789-"

labels_st = st.text(alphabet=LABEL_ALPHABET, min_size=1, max_size=12)
domains_st = st.lists(labels_st, min_size=1, max_size=4).map(".".join)


class TestParseDomain:
    def test_single_tld_strip(self):
        rec = parse_domain("google.com")
        assert rec.sld == "google"
        assert rec.dot_count == 1
        assert rec.label_count == 2

    def test_sld_is_label_left_of_tld(self):
        rec = parse_domain("blog.example.co")
        assert rec.sld == "example"
        assert rec.dot_count == 2

    def test_bare_label_passthrough(self):
        rec = parse_domain("xkcd")
        assert rec.sld == "xkcd"
        assert rec.dot_count == 0
        assert rec.label_count == 1

    def test_cc_second_level_suffix(self):
        assert parse_domain("google.co.in").sld == "google"
        assert parse_domain("example.gov.uk").sld == "example"
        assert parse_domain("www.example.ac.jp").sld == "example"

    def test_cc_rule_needs_two_letter_tld(self):
        # "co" in front of a 3-letter TLD is an ordinary SLD.
        assert parse_domain("foo.co.com").sld == "co"

    def test_lowercases(self):
        rec = parse_domain("GoOgLe.CoM")
        assert rec.raw == "google.com"
        assert rec.sld == "google"

    def test_trailing_root_dot(self):
        rec = parse_domain("example.com.")
        assert rec.sld == "example"
        assert rec.dot_count == 2
        assert rec.label_count == 3

    def test_stray_empty_label_skipped_for_sld(self):
        assert parse_domain("a..com").sld == "a"

    def test_idn_flag(self):
        assert parse_domain("xn--p1ai.ru").is_idn
        assert parse_domain("www.xn--p1ai.ru").is_idn
        assert not parse_domain("plain.ru").is_idn

    def test_blank_raises(self):
        with pytest.raises(EmptyInputError):
            parse_domain("   ")

    def test_only_dots_raises(self):
        with pytest.raises(EmptyInputError):
            parse_domain("...")

    def test_non_ascii_raises(self):
        with pytest.raises(NonAsciiError):
            parse_domain("münchen.de")

    @given(domains_st)
    def test_sld_never_has_dot_or_uppercase(self, raw):
        try:
            rec = parse_domain(raw)
        except EmptyInputError:
            return
        assert "." not in rec.sld
        assert rec.sld == rec.sld.lower()
        assert rec.sld

    @given(domains_st)
    def test_dot_count_is_exact(self, raw):
        try:
            rec = parse_domain(raw)
        except EmptyInputError:
            return
        assert rec.dot_count == raw.count(".")
        assert rec.dot_count == rec.label_count - 1


class TestValidateRfc:
    def test_leading_hyphen(self):
        verdict = validate_rfc("-badstart.com")
        assert not verdict.valid
        assert verdict.violations == (LEADING_HYPHEN,)

    def test_hyphen_positions_three_four(self):
        verdict = validate_rfc("ab--cd.com")
        assert not verdict.valid
        assert verdict.violations == (IDN_HYPHEN_34,)

    def test_xn_prefix_exempts_positions_three_four(self):
        assert validate_rfc("xn--bcher-kva.com").valid

    def test_trailing_hyphen(self):
        assert validate_rfc("bad-.com").violations == (TRAILING_HYPHEN,)

    def test_both_hyphen_rules_reported_once_each(self):
        verdict = validate_rfc("-a-.b-.com")
        assert verdict.violations == (LEADING_HYPHEN, TRAILING_HYPHEN)

    def test_bad_char(self):
        assert validate_rfc("under_score.com").violations == (BAD_CHAR,)

    def test_label_too_long(self):
        assert validate_rfc("a" * 64 + ".com").violations == (LABEL_TOO_LONG,)
        assert validate_rfc("a" * 63 + ".com").valid

    def test_empty_label(self):
        assert EMPTY_LABEL in validate_rfc("a..com").violations

    def test_uppercase_tolerated(self):
        assert validate_rfc("Example.COM").valid

    @given(st.text(alphabet=LABEL_ALPHABET + "._ ", min_size=1, max_size=40))
    def test_valid_iff_no_violations(self, raw):
        verdict = validate_rfc(raw)
        assert verdict.valid == (len(verdict.violations) == 0)


class TestIngest:
    def test_localized_duplicates_collapse(self):
        corpus = ingest_benign_corpus(["google.com", "google.co.in"])
        assert corpus.slds == ("google",)
        assert corpus.dropped_duplicate == 1

    def test_idn_dropped(self):
        with pytest.raises(EmptyCorpusError):
            ingest_benign_corpus(["xn--p1ai.ru"])
        corpus = ingest_benign_corpus(["xn--p1ai.ru", "ok.com"])
        assert corpus.slds == ("ok",)
        assert corpus.dropped_idn == 1

    def test_dedupe_on_sld(self):
        corpus = ingest_benign_corpus(["a.com", "b.com", "a.org"])
        assert corpus.slds == ("a", "b")
        assert corpus.dropped_duplicate == 1

    def test_comments_and_blanks_are_not_entries(self):
        corpus = ingest_benign_corpus(["# header", "", "  ", "a.com"])
        assert corpus.source_count == 1
        assert corpus.slds == ("a",)

    def test_paths_and_ports_rejected(self):
        corpus = ingest_benign_corpus(["a.com/path", "b.com:8080", "http://c.com", "d.com"])
        assert corpus.slds == ("d",)
        assert corpus.dropped_invalid == 3

    def test_conservation_invariant(self):
        lines = ["a.com", "a.net", "xn--x.ru", "bad domain here/", "b.org", "münchen.de"]
        corpus = ingest_benign_corpus(lines)
        total = (
            len(corpus.slds)
            + corpus.dropped_idn
            + corpus.dropped_duplicate
            + corpus.dropped_invalid
        )
        assert corpus.source_count == total

    def test_order_preserved(self):
        corpus = ingest_benign_corpus(["zed.com", "alpha.com", "mid.com"])
        assert corpus.slds == ("zed", "alpha", "mid")

    @given(st.lists(domains_st, min_size=1, max_size=30))
    def test_ingest_idempotent(self, lines):
        try:
            first = ingest_benign_corpus(lines)
        except EmptyCorpusError:
            return
        again = ingest_benign_corpus([sld + ".com" for sld in first.slds])
        assert again.slds == first.slds

    @given(st.lists(st.one_of(domains_st, st.just(""), st.just("# c")), min_size=0, max_size=30))
    def test_conservation_property(self, lines):
        try:
            corpus = ingest_benign_corpus(lines)
        except EmptyCorpusError:
            return
        assert corpus.source_count == (
            len(corpus.slds)
            + corpus.dropped_idn
            + corpus.dropped_duplicate
            + corpus.dropped_invalid
        )
