# -*- coding: utf-8-*-
"""
Module : Pipeline
Author : InvoiceReader team
Description :
    Runs the stages on one document: layout analysis, language detection,
    keyword/data-type/entity/address annotation, block types, roles,
    optional first-page classification and extraction.
    Every stage returns new immutable values. Per-language resources are
    loaded once per pipeline.
"""
import logging
from dataclasses import replace
from pathlib import Path
from typing import Dict, Optional, Sequence, Tuple, Union

# Local imports
from InvoiceReader.DocModel import Block, Document, Page
from InvoiceReader.EntityAnnotator import (AddressParser, EntityAnnotator, annotate_addresses, ensemble_locations,
                                           make_address_parser, make_entity_annotator)
from InvoiceReader.Errors import ConfigError
from InvoiceReader.InfoExtractor import DEFAULT_FIELD_SPECS, ExtractionReport, FieldSpec, extract_all
from InvoiceReader.LayoutAnalyzer import analyze_page
from InvoiceReader.OCRIngest import OCRPage, detect_main_language, load_term_dictionary
from InvoiceReader.PipelineConfig import MATCHER_SIMILARITY, PipelineConfig, available_languages
from InvoiceReader.RuleEngine import Rule, classify_roles, detect_block_types, load_rules
from InvoiceReader.TextAnnotator import (KeywordSet, annotate_datatypes, annotate_keywords, load_confusion_table,
                                         load_datatype_patterns, load_keyword_set)

__all__ = ["InvoicePipeline", "LANG_AUTO"]

logger = logging.getLogger(__name__)

LANG_AUTO = "auto"


class InvoicePipeline:
    """
    InvoicePipeline : stage driver for one configuration.
    cfg : pipeline configuration
    languages : languages taking part in detection, defaults to cfg.languages
    base : override directory for the packaged resources
    classifier : optional (model, vocabulary) pair used to mark first pages
    """

    def __init__(self, cfg: Optional[PipelineConfig] = None, languages: Optional[Sequence[str]] = None,
                 base: Union[str, Path, None] = None, classifier=None):
        self.cfg = cfg or PipelineConfig()
        self.languages = tuple(languages or self.cfg.languages)
        self.base = base
        self.classifier = classifier
        known = available_languages(base)
        missing = [lang for lang in self.languages if lang not in known]
        if missing:
            raise ConfigError(f"no keyword dictionaries for language(s) {', '.join(missing)}")
        self._keywords: Dict[str, KeywordSet] = {}
        self._entities: Dict[str, EntityAnnotator] = {}
        self._addresses: Dict[str, AddressParser] = {}
        self._patterns = load_datatype_patterns(base)
        self._table = load_confusion_table(self.cfg, base)
        self._block_rules: Tuple[Rule, ...] = tuple(load_rules("block_types", base))
        self._role_rules: Tuple[Rule, ...] = tuple(load_rules("roles", base))
        self._global_rules: Tuple[Rule, ...] = tuple(load_rules("global", base))

    # ------------------------------------------------------------ layout --

    def analyze(self, pages: Sequence[OCRPage], source_id: str) -> Document:
        """Layout analysis of every page; the language is set to the fallback until annotate runs"""
        analyzed = [analyze_page(p.words, p.width, p.height, p.number, self.cfg) for p in pages]
        logger.debug("%s: %d page(s) analyzed", source_id, len(analyzed))
        return Document(tuple(analyzed), self.cfg.fallback_language, source_id)

    # -------------------------------------------------------- annotation --

    def detect_language(self, doc: Document) -> str:
        dicts = [load_term_dictionary(lang, self.base) for lang in self.languages]
        return detect_main_language(doc.text, dicts, self.cfg.fallback_language)

    def _resources(self, lang: str):
        if lang not in self._keywords:
            if lang not in available_languages(self.base):
                raise ConfigError(f"unknown language '{lang}': no keyword dictionary")
            self._keywords[lang] = load_keyword_set(lang, self.base)
            self._entities[lang] = make_entity_annotator(self.cfg.entity_annotator, lang, self.base)
            self._addresses[lang] = make_address_parser(self.cfg.address_parser, lang, self.base)
        return self._keywords[lang], self._entities[lang], self._addresses[lang]

    def annotate_block(self, block: Block, lang: str, mode: str) -> Block:
        keywords, entities, addresses = self._resources(lang)
        block = replace(block, annotations=(), block_types=frozenset(), role=None)
        if self.cfg.enable_keyword_annotations:
            block = annotate_keywords(block, keywords, mode, self.cfg,
                                      self._table if mode == MATCHER_SIMILARITY else None)
        if self.cfg.enable_datatype_annotations:
            block = annotate_datatypes(block, self._patterns)
            block = ensemble_locations(block, entities.annotate(block.lines),
                                       annotate_addresses(block.lines, addresses), self.cfg)
        return block

    def annotate(self, doc: Document, lang: str = LANG_AUTO, mode: Optional[str] = None) -> Document:
        """
        Annotates every block, then detects block types and roles page by page.
        lang : language code or "auto"
        mode : REGEX or SIMILARITY keyword matcher, defaults to cfg.matcher
        """
        mode = mode or self.cfg.matcher
        lang = self.detect_language(doc) if lang == LANG_AUTO else lang
        logger.debug("%s: language %s, matcher %s", doc.source_id, lang, mode)
        pages = []
        for page in doc.pages:
            page = replace(page, blocks=tuple(self.annotate_block(b, lang, mode) for b in page.blocks))
            page = detect_block_types(page, self._block_rules)
            page = classify_roles(page, self._role_rules, self._global_rules)
            pages.append(self._classify_page(page))
        return replace(doc, pages=tuple(pages), main_language=lang)

    def _classify_page(self, page: Page) -> Page:
        if self.classifier is None:
            return page
        # Local import, the classifier module is only needed with a trained model
        from InvoiceReader.PageClassifier import STAGE_WITH_ANNOTATIONS, extract_features, predict
        model, vocab = self.classifier
        vector = extract_features(page, vocab, STAGE_WITH_ANNOTATIONS, model.schema.groups)
        label, probability = predict(model, vector)
        logger.debug("Page %d: first page %s (p=%.3f)", page.number, bool(label), probability)
        return replace(page, is_invoice_first_page=bool(label))

    # -------------------------------------------------------- extraction --

    def extract(self, doc: Document, specs: Sequence[FieldSpec] = DEFAULT_FIELD_SPECS) -> ExtractionReport:
        return extract_all(doc, specs, self.cfg)

    def process_pages(self, pages: Sequence[OCRPage], source_id: str, lang: str = LANG_AUTO,
                      mode: Optional[str] = None) -> Tuple[Document, ExtractionReport]:
        """Whole chain from OCR words to the extraction report"""
        doc = self.annotate(self.analyze(pages, source_id), lang, mode)
        return doc, self.extract(doc)
