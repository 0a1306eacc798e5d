# -*- coding: utf-8-*-
import datetime
import functools
import math

import numpy as np
import pytest

# Local imports
from conftest import make_block
from InvoiceReader.DocModel import AnnotationKind, FieldLabel
from InvoiceReader.Errors import ConfigError
from InvoiceReader.PipelineConfig import MATCHER_REGEX, MATCHER_SIMILARITY
from InvoiceReader.TextAnnotator import (
    ConfusionTable,
    KeywordSet,
    annotate_datatypes,
    annotate_keywords,
    find_keyword_exact,
    find_keyword_similar,
    ico_mod11,
    iban_mod97,
    load_confusion_table,
    load_datatype_patterns,
    load_keyword_set,
    parse_date,
    swift_bic,
    validate_and_correct,
    weighted_edit_distance,
)


@pytest.fixture(scope="module")
def table():
    return load_confusion_table()


def test_confused_letters_are_cheap(table):
    assert weighted_edit_distance("fotal", "total", table) == pytest.approx(0.1)
    assert weighted_edit_distance("lnvoice", "invoice", table) == pytest.approx(0.1)


def test_distance_is_case_insensitive(table):
    assert weighted_edit_distance("TOTAL", "total", table) == 0


def test_unrelated_substitution_costs_one(table):
    assert weighted_edit_distance("cat", "bat", table) == pytest.approx(1.0)


def test_digraph_confusion(table):
    assert weighted_edit_distance("nurnber", "number", table) == pytest.approx(0.1)


def test_punctuation_insertion_is_cheap(table):
    assert weighted_edit_distance("total:", "total", table) == pytest.approx(0.1)


def test_distance_is_symmetric(table):
    for a, b in [("fotal due", "total due"), ("lBAN", "IBAN"), ("5W1FT", "SWIFT")]:
        assert weighted_edit_distance(a, b, table) == pytest.approx(weighted_edit_distance(b, a, table))


def test_confusion_costs_are_ordered():
    with pytest.raises(ConfigError):
        ConfusionTable(frozenset({frozenset("ab")}), frozenset("."), common_cost=1.0, default_cost=1.0)


def test_similar_keyword_span(cfg, table):
    span, dist = find_keyword_similar("Fotal due: 120.00", "total due", cfg, table)
    assert span == (0, 9)
    assert dist == pytest.approx(0.1)


def test_similar_keyword_above_threshold(cfg, table):
    assert find_keyword_similar("Subject to change", "total due", cfg, table) is None


def test_line_initial_phrases(cfg, table):
    assert find_keyword_exact("Page 1 of 2", "page", line_initial=True) == (0, 4)
    assert find_keyword_exact("Homepage 1", "page", line_initial=True) is None
    assert find_keyword_similar("See page 2", "page", cfg, table, line_initial=True) is None


def test_keyword_phrases_must_be_lowercase():
    with pytest.raises(ConfigError):
        KeywordSet("en", {"IBAN": ("IBAN",)})
    with pytest.raises(ConfigError):
        KeywordSet("en", {"NOT A LABEL": ("iban",)})


def test_longer_phrase_wins_overlap(cfg):
    block = make_block(0, ["Invoice number: 2024-001"])
    labels = annotate_keywords(block, load_keyword_set("en"), MATCHER_REGEX, cfg).labels(AnnotationKind.KEYWORD)
    assert "INVOICE NUMBER" in labels
    assert "INVOICE" not in labels


def test_similarity_mode_tolerates_ocr_errors(cfg):
    block = make_block(0, ["lnvoice nurnber: 2024-001"])
    keywords = load_keyword_set("en")
    regex = annotate_keywords(block, keywords, MATCHER_REGEX, cfg)
    similar = annotate_keywords(block, keywords, MATCHER_SIMILARITY, cfg)
    assert "INVOICE NUMBER" not in regex.labels(AnnotationKind.KEYWORD)
    found = [a for a in similar.annotations if a.label == "INVOICE NUMBER"]
    assert len(found) == 1
    assert found[0].matched_text == "lnvoice nurnber"
    assert 0 < found[0].score < 1


def test_unknown_matcher(cfg):
    with pytest.raises(ConfigError):
        annotate_keywords(make_block(0, ["x"]), load_keyword_set("en"), "FUZZY", cfg)


def test_datatypes():
    block = make_block(0, ["IBAN: GB82 WEST 1234 5698 7654 32", "Email: info&&acme.com"])
    annotated = annotate_datatypes(block, load_datatype_patterns())
    by_label = {a.label: a.matched_text for a in annotated.annotations}
    assert by_label["IBAN"] == "GB82 WEST 1234 5698 7654 32"
    assert by_label["EMAIL"] == "info&&acme.com"


def test_datatype_annotations_do_not_overlap():
    block = make_block(0, ["Due 12.03.2024 total 1 250,00 Kč"])
    annotated = annotate_datatypes(block, load_datatype_patterns())
    spans = sorted((a.start, a.end) for a in annotated.annotations)
    for (s1, e1), (s2, e2) in zip(spans, spans[1:]):
        assert e1 <= s2
    assert "DATE" in annotated.labels(AnnotationKind.DATATYPE)


def test_iban_checksum():
    assert iban_mod97("GB82WEST12345698765432")
    assert iban_mod97("GB82 WEST 1234 5698 7654 32")
    assert not iban_mod97("GB82WEST12345698765433")


def test_czech_company_id_checksum():
    assert ico_mod11("00176150")
    assert ico_mod11("27082440")
    assert not ico_mod11("00176151")
    assert not ico_mod11("1234567")


def test_swift():
    assert swift_bic("GIBACZPX")
    assert swift_bic("DEUTDEFF500")
    assert not swift_bic("GIBA1ZPX")


@pytest.mark.parametrize("text,expected", [
    ("15.01.2024", datetime.date(2024, 1, 15)),
    ("2024-03-09", datetime.date(2024, 3, 9)),
    ("15. ledna 2024", datetime.date(2024, 1, 15)),
    ("March 5, 2024", datetime.date(2024, 3, 5)),
    ("31.02.2024", None),
])
def test_parse_date(text, expected):
    assert parse_date(text) == expected


def test_vat_prefix_repair():
    value, log = validate_and_correct("C200176150", FieldLabel.VAT_NUMBER)
    assert value == "CZ00176150"
    assert log


def test_email_symbol_repair():
    value, log = validate_and_correct("info&&acme.com", FieldLabel.EMAIL)
    assert value == "info@acme.com"
    assert log


def test_ambiguous_code_is_left_alone():
    value, log = validate_and_correct("BXOEF24CA4E2", FieldLabel.INVOICE_NUMBER)
    assert value == "BXOEF24CA4E2"
    assert any("ambiguous" in entry for entry in log)


def test_numeric_iban_repair():
    value, _ = validate_and_correct("CZ65 08OO 0000 1920 0014 5399", FieldLabel.IBAN)
    assert value == "CZ65 0800 0000 1920 0014 5399"
    assert iban_mod97(value)


def test_legal_form_repair():
    value, _ = validate_and_correct("Novák s.r.0.", FieldLabel.COMPANY_NAME)
    assert value == "Novák s.r.o."


def test_digit_field_repair():
    assert validate_and_correct("OO176150", FieldLabel.COMPANY_ID)[0] == "00176150"
    value, log = validate_and_correct("00X76150", FieldLabel.COMPANY_ID)
    assert value == "00X76150"
    assert any("ambiguous" in entry for entry in log)


@pytest.mark.parametrize("value,label", [
    ("C200176150", FieldLabel.VAT_NUMBER),
    ("info&&acme.com", FieldLabel.EMAIL),
    ("Novák s.r.0.", FieldLabel.COMPANY_NAME),
    ("1 25O,00", FieldLabel.TOTAL_DUE),
])
def test_correction_is_idempotent(value, label):
    once, _ = validate_and_correct(value, label)
    assert validate_and_correct(once, label)[0] == once


def test_documented_distances(table):
    assert weighted_edit_distance("invoice", "invoice", table) == 0
    assert weighted_edit_distance("invoice:", "invoice", table) == pytest.approx(0.1)
    assert weighted_edit_distance("rate", "date", table) == pytest.approx(1.0)


def test_similar_span_with_confused_letter(cfg, table):
    span, dist = find_keyword_similar("Date ot issue: 1.1.2020", "date of issue", cfg, table)
    assert span == (0, 13)
    assert dist == pytest.approx(0.1)
    assert find_keyword_similar("rate", "date", cfg, table) is None


def test_long_phrase_tolerates_one_full_edit(cfg):
    block = make_block(0, ["Datc of issue"])
    annotated = annotate_keywords(block, load_keyword_set("en"), MATCHER_SIMILARITY, cfg)
    assert "INVOICE DATE" in annotated.labels(AnnotationKind.KEYWORD)


def test_line_initial_flag_on_suffix():
    assert find_keyword_exact("subtotal", "total") == (3, 8)
    assert find_keyword_exact("subtotal", "total", line_initial=True) is None


def test_similar_search_finds_the_best_window(cfg, table):
    rng = np.random.default_rng(7)
    alphabet = list("tflo0 m.rnb")
    for _ in range(150):
        text = "".join(rng.choice(alphabet, size=int(rng.integers(1, 14))))
        phrase = "".join(rng.choice(alphabet[:6] + ["m", "n"], size=int(rng.integers(3, 9)))).strip() or "tot"
        m = len(phrase)
        window = math.ceil(cfg.similarity_threshold_ratio * m)
        best = min((weighted_edit_distance(text[s:s + n], phrase, table)
                    for n in range(max(1, m - window), m + window + 1)
                    for s in range(0, len(text) - n + 1)), default=None)
        found = find_keyword_similar(text, phrase, cfg, table)
        if best is None or best > cfg.similarity_threshold_ratio * m + 1e-9:
            assert found is None
        else:
            assert found is not None
            assert found[1] == pytest.approx(best)


def test_regex_matches_are_found_by_similarity(cfg):
    block = make_block(0, ["Invoice number: 42", "Due date: 30 days", "IBAN: CZ65 0800"])
    keywords = load_keyword_set("en")
    regex = annotate_keywords(block, keywords, MATCHER_REGEX, cfg)
    similar = annotate_keywords(block, keywords, MATCHER_SIMILARITY, cfg)
    assert {(a.label, a.span) for a in regex.annotations} <= {(a.label, a.span) for a in similar.annotations}


def _closed_costs(table):
    """Floyd-Warshall over the raw cheap edits, the empty string standing for indels"""
    nodes = sorted({c for pair in table.pairs for c in pair} | set(table.punctuation)) + [""]
    dist = {(a, b): 0.0 if a == b else table.default_cost for a in nodes for b in nodes}
    for pair in table.pairs:
        a, b = sorted(pair)
        dist[a, b] = dist[b, a] = table.common_cost
    for p in table.punctuation:
        dist[p, ""] = dist["", p] = table.common_cost
    for k in nodes:
        for a in nodes:
            for b in nodes:
                dist[a, b] = min(dist[a, b], dist[a, k] + dist[k, b])
    return dist


def _recursive_distance(a, b, table, dist):
    def sub(x, y):
        return 0.0 if x == y else dist.get((x, y), table.default_cost)

    def indel(x):
        return dist.get((x, ""), table.default_cost)

    @functools.lru_cache(maxsize=None)
    def rest(i, j):
        if i == len(a) and j == len(b):
            return 0.0
        options = []
        if i < len(a):
            options.append(indel(a[i]) + rest(i + 1, j))
        if j < len(b):
            options.append(indel(b[j]) + rest(i, j + 1))
        if i < len(a) and j < len(b):
            options.append(sub(a[i], b[j]) + rest(i + 1, j + 1))
            for two, one in table.digraphs:
                if a[i:i + 2] == two and b[j] == one:
                    options.append(table.common_cost + rest(i + 2, j + 1))
                if b[j:j + 2] == two and a[i] == one:
                    options.append(table.common_cost + rest(i + 1, j + 2))
        return min(options)

    return rest(0, 0)


def test_distance_matches_recursive_minimum(table):
    dist = _closed_costs(table)
    alphabet = list("tlf1i0osb5z8uvmrn .:-xa")
    rng = np.random.default_rng(12)
    for _ in range(10000):
        a = "".join(rng.choice(alphabet, size=int(rng.integers(0, 11))))
        b = "".join(rng.choice(alphabet, size=int(rng.integers(0, 11))))
        assert weighted_edit_distance(a, b, table) == pytest.approx(_recursive_distance(a, b, table, dist), abs=1e-9)


def test_chained_confusions_cost_less_than_default(table):
    assert weighted_edit_distance("t", "1", table) == pytest.approx(0.2)
    assert weighted_edit_distance("t", "i", table) == pytest.approx(0.2)


@pytest.mark.parametrize("language", ["en", "cs"])
def test_keywords_survive_one_confused_character(language, cfg, table):
    partners = {}
    for pair in table.pairs:
        a, b = sorted(pair)
        partners.setdefault(a, []).append(b)
        partners.setdefault(b, []).append(a)
    tried = 0
    for label, phrase in load_keyword_set(language).phrases():
        for i, ch in enumerate(phrase.text):
            for other in partners.get(ch, ()):
                text = phrase.text[:i] + other + phrase.text[i + 1:]
                found = find_keyword_similar(text, phrase.text, cfg, table, line_initial=phrase.line_initial)
                assert found is not None, (label, text)
                assert found[1] <= table.common_cost + 1e-9
                tried += 1
    assert tried > 0


@pytest.mark.parametrize("check,value,expected", [
    (iban_mod97, "GB82 WEST 1234 5698 7654 32", True),
    (iban_mod97, "DE89 3704 0044 0532 0130 00", True),
    (iban_mod97, "FR14 2004 1010 0505 0001 3M02 606", True),
    (iban_mod97, "NL91 ABNA 0417 1643 00", True),
    (iban_mod97, "BE68 5390 0754 7034", True),
    (iban_mod97, "CH93 0076 2011 6238 5295 7", True),
    (iban_mod97, "CZ65 0800 0000 1920 0014 5399", True),
    (iban_mod97, "AT61 1904 3002 3457 3201", True),
    (iban_mod97, "ES91 2100 0418 4502 0005 1332", True),
    (iban_mod97, "SK31 1200 0000 1987 4263 7541", True),
    (iban_mod97, "DE89 3704 0044 0532 0130 01", False),
    (iban_mod97, "CZ65 0800 0000 1920 0014 5398", False),
    (iban_mod97, "CH93 0076 2011 6238 5295 8", False),
    (ico_mod11, "00176150", True),
    (ico_mod11, "27082440", True),
    (ico_mod11, "45274649", True),
    (ico_mod11, "00006947", True),
    (ico_mod11, "60193336", True),
    (ico_mod11, "45274648", False),
    (ico_mod11, "6019333", False),
])
def test_published_checksum_examples(check, value, expected):
    assert check(value) == expected
