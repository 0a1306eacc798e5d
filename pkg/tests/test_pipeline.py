# -*- coding: utf-8-*-
import numpy as np
import pytest

# Local imports
from InvoiceReader.DocModel import FieldLabel, Role
from InvoiceReader.Errors import ConfigError
from InvoiceReader.Helpers.Corpus_Maker import Corpus_Maker, load_templates, load_value_pool, make_invoice_values
from InvoiceReader.Pipeline import InvoicePipeline
from InvoiceReader.PipelineConfig import MATCHER_REGEX, PipelineConfig


@pytest.fixture(scope="module")
def pipeline():
    return InvoicePipeline()


def _invoice(name, seed=0):
    template = next(t for t in load_templates() if t.name == name)
    values = make_invoice_values(load_value_pool(template.language), np.random.default_rng(seed))
    return Corpus_Maker(template).create(values), values


def test_analyze_keeps_pages(pipeline):
    pages, _ = _invoice("en_inline")
    doc = pipeline.analyze(pages, "en-1")
    assert doc.source_id == "en-1"
    assert doc.main_language == pipeline.cfg.fallback_language
    assert [p.number for p in doc.pages] == [1]
    assert all(not b.annotations for b in doc.pages[0].blocks)


@pytest.mark.parametrize("name,language", [("en_inline", "en"), ("cs_inline", "cs")])
def test_language_is_detected(pipeline, name, language):
    pages, _ = _invoice(name)
    assert pipeline.detect_language(pipeline.analyze(pages, name)) == language


def test_process_pages(pipeline):
    pages, values = _invoice("en_inline", seed=3)
    doc, report = pipeline.process_pages(pages, "en-3")
    assert doc.main_language == "en"
    roles = {b.role for b in doc.pages[0].blocks}
    assert {Role.SELLER, Role.BUYER} <= roles
    assert report.get(FieldLabel.INVOICE_NUMBER).value == values["invoice_number"]


def test_annotation_is_repeatable(pipeline):
    pages, _ = _invoice("en_inline")
    doc = pipeline.annotate(pipeline.analyze(pages, "en-0"))
    assert pipeline.annotate(doc) == doc


def test_regex_mode_is_reported():
    pipeline = InvoicePipeline(PipelineConfig(matcher=MATCHER_REGEX))
    pages, _ = _invoice("en_inline")
    _, report = pipeline.process_pages(pages, "en-0", lang="en")
    assert report.matcher == MATCHER_REGEX
    assert report.language == "en"


def test_unknown_language(pipeline):
    pages, _ = _invoice("en_inline")
    with pytest.raises(ConfigError):
        pipeline.annotate(pipeline.analyze(pages, "x"), lang="xx")
    with pytest.raises(ConfigError):
        InvoicePipeline(languages=("xx",))
