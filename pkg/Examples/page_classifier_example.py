# -*- coding: utf-8-*-
"""
Module : page_classifier_example
Author : InvoiceReader team
Description :
    Trains the first-page classifiers on a generated corpus with two-page
    invoices and prints cross validated precision, recall and F1 for each
    feature set.
"""
from InvoiceReader.EntityAnnotator import load_gazetteer
from InvoiceReader.Evaluation import generate_corpus
from InvoiceReader.PageClassifier import (GROUP_ANNOTATIONS, GROUP_TITLE_PAGE, GROUP_WORDS, KIND_LOGISTIC_REGRESSION,
                                          KIND_NAIVE_BAYES, STAGE_LAYOUT_ONLY, STAGE_WITH_ANNOTATIONS,
                                          cross_validate, extract_features)
from InvoiceReader.Pipeline import InvoicePipeline
from InvoiceReader.Tools.generate_keyword_vocabulary import build_vocabulary, load_stop_words

if __name__ == "__main__":
    corpus = generate_corpus(40, seed=5, continuation_ratio=0.5)
    texts = [" ".join(w.text for w in page.words) for _, pages in corpus.documents for page in pages]
    vocab = build_vocabulary(texts, 150, load_stop_words(), [load_gazetteer("en"), load_gazetteer("cs")])
    labels = {(s, p): first for s, p, first in corpus.page_labels}

    pipeline = InvoicePipeline()
    pages = []
    for source_id, ocr_pages in corpus.documents:
        doc = pipeline.annotate(pipeline.analyze(ocr_pages, source_id))
        pages.extend((page, int(labels[(source_id, page.number)])) for page in doc.pages)

    feature_sets = {
        "words": (STAGE_LAYOUT_ONLY, (GROUP_WORDS,)),
        "words+title": (STAGE_LAYOUT_ONLY, (GROUP_WORDS, GROUP_TITLE_PAGE)),
        "all": (STAGE_WITH_ANNOTATIONS, (GROUP_WORDS, GROUP_TITLE_PAGE, GROUP_ANNOTATIONS)),
    }
    for name, (stage, groups) in feature_sets.items():
        dataset = [(extract_features(page, vocab, stage, groups), label) for page, label in pages]
        for kind in (KIND_NAIVE_BAYES, KIND_LOGISTIC_REGRESSION):
            precision, recall, f1 = cross_validate(dataset, kind, 5)
            print(f"{name:12s} {kind:20s} P={precision:.3f} R={recall:.3f} F1={f1:.3f}")
