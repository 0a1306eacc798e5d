# -*- coding: utf-8-*-
import numpy as np
import pytest

# Local imports
from InvoiceReader.DocModel import ExtractedField, FieldLabel, Role
from InvoiceReader.Errors import ConfigError, InvariantError, MissingReportError, SchemaError
from InvoiceReader.Evaluation import (
    AblationDrop,
    GoldItem,
    GoldRecord,
    MatchClass,
    NoiseModel,
    ScoreTable,
    classify_match,
    evaluate_corpus,
    generate_corpus,
    gold_jsonl,
    read_corpus,
    read_gold_jsonl,
    run_ablation,
    score_run,
)
from InvoiceReader.Helpers.Corpus_Maker import load_templates
from InvoiceReader.InfoExtractor import ExtractionReport
from InvoiceReader.PipelineConfig import MATCHER_REGEX


@pytest.mark.parametrize("gold,extracted,field,expected", [
    ("BXOEF24CA4E2", "BXOEF24CA4E2", FieldLabel.INVOICE_NUMBER, MatchClass.MATCH),
    ("BX0EF24CA4E2", "BXOEF24CA4E2", FieldLabel.INVOICE_NUMBER, MatchClass.PARTIAL),
    ("2024-001", "2024-999", FieldLabel.INVOICE_NUMBER, MatchClass.MISMATCH),
    ("Atlassian Pty Ltd", "Atlassian", FieldLabel.COMPANY_NAME, MatchClass.MATCH),
    ("Novák s.r.o.", "Novák s.r.0.", FieldLabel.COMPANY_NAME, MatchClass.MATCH),
    ("Atlassian Pty Ltd", "Globex", FieldLabel.COMPANY_NAME, MatchClass.MISMATCH),
    ("12 High Street, London", "12 High Street", FieldLabel.ADDRESS, MatchClass.MATCH),
    ("GB82WEST12345698765432", None, FieldLabel.IBAN, MatchClass.MISMATCH),
])
def test_classify_match(gold, extracted, field, expected, cfg):
    assert classify_match(gold, extracted, field, cfg) == expected


def test_containment_only_for_names_and_addresses(cfg):
    assert classify_match("Bank transfer", "Bank transfer only", FieldLabel.PAYMENT_METHOD, cfg) \
        == MatchClass.MISMATCH


def test_score_table():
    table = ScoreTable()
    for result in (MatchClass.MATCH, MatchClass.MATCH, MatchClass.MATCH, MatchClass.PARTIAL):
        table.add("IBAN", result)
    table.add("SWIFT", MatchClass.MISMATCH)
    assert table.rate("IBAN") == 75.0
    assert table.rate("IBAN", MatchClass.PARTIAL) == 25.0
    assert table.total() == 5
    assert table.rate() == 60.0
    assert table.rate("PAGE NUMBER") == 0.0
    lines = table.to_csv().splitlines()
    assert lines[0] == "field,total,MATCH,PARTIAL,MISMATCH,MATCH_pct,PARTIAL_pct,MISMATCH_pct"
    assert lines[1] == "IBAN,4,3,1,0,75.00,25.00,0.00"
    assert lines[-1].startswith("ALL,5,")
    assert table.to_dict()["SWIFT"]["MISMATCH_pct"] == 100.0


def _report(*fields):
    return ExtractionReport("inv-1", "en", "SIMILARITY", fields)


def test_score_run_requires_matching_role(cfg):
    gold = [GoldRecord("inv-1", [GoldItem(FieldLabel.COMPANY_NAME, Role.SELLER, "Acme Ltd"),
                                 GoldItem(FieldLabel.IBAN, Role.NONE, "GB82WEST12345698765432")])]
    wrong_role = ExtractedField(FieldLabel.COMPANY_NAME, Role.BUYER, "Acme Ltd", 0.0, 0.8, 0.8, (1, 0, 0))
    iban = ExtractedField(FieldLabel.IBAN, Role.NONE, "GB82WEST12345698765432", 1.0, 1.0, 1.0, (1, 1, 0))
    table = score_run(gold, [_report(wrong_role, iban)], cfg)
    assert table.rate("SELLER COMPANY NAME", MatchClass.MISMATCH) == 100.0
    assert table.rate("IBAN") == 100.0


def test_score_run_missing_report(cfg):
    gold = [GoldRecord("inv-2", [GoldItem(FieldLabel.IBAN, Role.NONE, "x")])]
    with pytest.raises(MissingReportError):
        score_run(gold, [_report()], cfg)


def test_gold_jsonl_roundtrip():
    records = [GoldRecord("a", [GoldItem("IBAN", "NONE", "GB82")]),
               GoldRecord("b", [GoldItem("COMPANY NAME", "BUYER", "Novák s.r.o.")])]
    assert read_gold_jsonl(gold_jsonl(records)) == records


def test_gold_errors():
    with pytest.raises(InvariantError):
        GoldRecord("a", [GoldItem("IBAN", "NONE", "1"), GoldItem("IBAN", "NONE", "2")])
    with pytest.raises(SchemaError) as err:
        read_gold_jsonl('{"source_id": "a", "items": []}\n{broken\n')
    assert err.value.path == "row 2"
    with pytest.raises(SchemaError):
        read_gold_jsonl('{"source_id": "a", "items": [{"field": "COLOUR", "role": "NONE", "value": "x"}]}')


def test_noise_model_checks_probabilities():
    with pytest.raises(InvariantError):
        NoiseModel(char_substitution=1.5)


def test_clean_noise_is_identity():
    assert NoiseModel().apply("Invoice", np.random.default_rng(0)) == "Invoice"


def test_noise_operations():
    rng = np.random.default_rng(0)
    assert NoiseModel(char_substitution=1.0, confusions=(("O", "0"),), symbols=()).apply("OO", rng) == "00"
    assert NoiseModel(digit_duplication=1.0, confusions=()).apply("12", rng) == "1122"
    assert NoiseModel(punctuation_drop=1.0, confusions=()).apply("a.b", rng) == "ab"
    assert NoiseModel(punctuation_drop=1.0, confusions=()).apply(".", rng) == "."


def _files(folder):
    return {p.relative_to(folder): p.read_bytes() for p in sorted(folder.rglob("*")) if p.is_file()}


def test_generated_corpus_is_reproducible(tmp_path):
    noise = NoiseModel(char_substitution=0.02, punctuation_drop=0.02, digit_duplication=0.02)
    generate_corpus(6, noise=noise, seed=4, out_dir=tmp_path / "a", continuation_ratio=0.5)
    generate_corpus(6, noise=noise, seed=4, out_dir=tmp_path / "b", continuation_ratio=0.5)
    first = _files(tmp_path / "a")
    assert first == _files(tmp_path / "b")
    assert len([name for name in first if name.parts[0] == "docs"]) == 6


def test_corpus_reads_back(tmp_path):
    corpus = generate_corpus(3, out_dir=tmp_path, continuation_ratio=1.0)
    again = read_corpus(tmp_path)
    assert again.gold == corpus.gold
    assert again.page_labels == corpus.page_labels
    assert [s for s, _ in again.documents] == [s for s, _ in corpus.documents]
    assert all(first == (page == 1) for _, page, first in again.page_labels)


def test_corpus_errors(tmp_path):
    with pytest.raises(ConfigError):
        generate_corpus(1, templates=[])
    with pytest.raises(ConfigError):
        generate_corpus(1, continuation_ratio=2.0)
    with pytest.raises(ConfigError):
        read_corpus(tmp_path)


def test_gold_values_are_clean():
    noisy = generate_corpus(2, noise=NoiseModel(char_substitution=0.5), seed=1)
    clean = generate_corpus(2, seed=1)
    assert noisy.gold == clean.gold


@pytest.fixture(scope="module")
def clean_corpus():
    return generate_corpus(len(load_templates()), seed=2)


def test_clean_corpus_scores_well(clean_corpus):
    table, reports = evaluate_corpus(clean_corpus)
    assert len(reports) == len(clean_corpus.documents)
    assert table.total() == sum(len(record.items) for record in clean_corpus.gold)
    for label in table.fields():
        assert table.rate(label) == 100.0, label


def test_keyword_ablation_loses_invoice_numbers(clean_corpus):
    result = run_ablation(clean_corpus, drop=AblationDrop.KEYWORD_ANNOTS)
    assert result.ablated.rate("INVOICE NUMBER") == 0.0
    assert result.deltas()["INVOICE NUMBER"] <= -50.0
    assert result.to_dict()["drop"] == "KEYWORD_ANNOTS"


@pytest.fixture(scope="module")
def noisy_corpus():
    return generate_corpus(50, noise=NoiseModel(char_substitution=0.02))


def _address_match_rate(table):
    labels = [label for label in table.fields() if label.endswith("ADDRESS")]
    total = sum(table.total(label) for label in labels)
    matched = sum(table.counts[label][MatchClass.MATCH] for label in labels)
    return 100.0 * matched / total


def test_noisy_corpus_with_similarity_matcher(noisy_corpus, cfg):
    similar, _ = evaluate_corpus(noisy_corpus, cfg)
    regex, _ = evaluate_corpus(noisy_corpus, cfg.with_overrides(matcher=MATCHER_REGEX))
    assert similar.rate() + similar.rate(result=MatchClass.PARTIAL) >= 85.0
    assert similar.rate(result=MatchClass.MISMATCH) <= regex.rate(result=MatchClass.MISMATCH)


def test_noisy_corpus_ablations(noisy_corpus, cfg):
    keywords = run_ablation(noisy_corpus, cfg, drop=AblationDrop.KEYWORD_ANNOTS)
    assert keywords.deltas()["INVOICE NUMBER"] <= -50.0
    datatypes = run_ablation(noisy_corpus, cfg, drop=AblationDrop.DATATYPE_ANNOTS)
    assert _address_match_rate(datatypes.ablated) <= _address_match_rate(datatypes.baseline) - 30.0
