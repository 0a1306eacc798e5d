# -*- coding: utf-8-*-
"""
Module : corpus_evaluation_example
Author : InvoiceReader team
Description :
    Generates a noisy synthetic corpus, scores both keyword matchers on it
    and reruns the extraction without keyword and without data type
    annotations.
"""
import logging

from InvoiceReader.Evaluation import AblationDrop, NoiseModel, evaluate_corpus, generate_corpus, run_ablation
from InvoiceReader.PipelineConfig import MATCHER_REGEX, MATCHER_SIMILARITY, PipelineConfig

if __name__ == "__main__":
    logging.basicConfig(level=logging.WARNING)
    noise = NoiseModel(char_substitution=0.02, punctuation_drop=0.02, digit_duplication=0.02)
    corpus = generate_corpus(50, noise=noise, seed=0)

    for matcher in (MATCHER_REGEX, MATCHER_SIMILARITY):
        table, _ = evaluate_corpus(corpus, PipelineConfig(matcher=matcher))
        print(f"--- {matcher}")
        print(table.to_csv())

    for drop in (AblationDrop.KEYWORD_ANNOTS, AblationDrop.DATATYPE_ANNOTS):
        result = run_ablation(corpus, drop=drop)
        print(f"--- without {drop.value}")
        for label, delta in sorted(result.deltas().items()):
            print(f"{label:25s} {delta:+7.2f}")
