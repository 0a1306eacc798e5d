# -*- coding: utf-8-*-
"""
Module : generate_keyword_vocabulary
Author : InvoiceReader team
Description :
    Builds the frequent-word vocabulary used by the page classifier.
    Counts words over a page collection, keeps the most frequent ones and
    drops stop words, numbers and names found in the gazetteers.
    Run as a script on OCR files to print or write the vocabulary file.
"""
import argparse
import logging
from collections import Counter
from pathlib import Path
from typing import Iterable, List, Optional, Sequence, Union

# Local imports
from InvoiceReader.EntityAnnotator import Gazetteer, load_gazetteer, normalize
from InvoiceReader.Errors import ConfigError
from InvoiceReader.OCRIngest import read_ocr_file
from InvoiceReader.PageClassifier import word_tokens
from InvoiceReader.PipelineConfig import resource_path

__all__ = ["build_vocabulary", "load_stop_words", "page_texts", "vocabulary_text"]

logger = logging.getLogger(__name__)


def load_stop_words(base: Union[str, Path, None] = None) -> frozenset:
    path = resource_path("vocabulary_stop_words.txt", base=base)
    try:
        lines = path.read_text(encoding="utf-8").splitlines()
    except OSError as e:
        raise ConfigError(f"cannot read stop words {path}: {e}") from e
    return frozenset(normalize(w.strip()) for w in lines if w.strip() and not w.startswith("#"))


def _is_name(word: str, gazetteers: Sequence[Gazetteer]) -> bool:
    key = normalize(word)
    return any(key in g.first_names or (key,) in g.cities or (key,) in g.countries for g in gazetteers)


def build_vocabulary(texts: Iterable[str], top_n: int = 150, stop_words: Iterable[str] = (),
                     gazetteers: Sequence[Gazetteer] = ()) -> List[str]:
    """
    The top_n most frequent words of the texts, ties broken alphabetically,
    minus stop words, numeric tokens and gazetteer names.
    """
    if top_n < 1:
        raise ConfigError(f"top_n must be >= 1, got {top_n}")
    counts = Counter()
    for text in texts:
        counts.update(word_tokens(text))
    ranked = sorted(counts.items(), key=lambda kv: (-kv[1], kv[0]))[:top_n]
    stop = {normalize(w) for w in stop_words}
    vocab = [w for w, _ in ranked
             if normalize(w) not in stop and not any(c.isdigit() for c in w) and not _is_name(w, gazetteers)]
    logger.info("Vocabulary: %d of the %d most frequent words kept", len(vocab), len(ranked))
    return vocab


def page_texts(paths: Iterable[Union[str, Path]]) -> List[str]:
    """One text per OCR page of every TSV or word-box JSON file"""
    texts = []
    for path in paths:
        for page in read_ocr_file(path):
            texts.append(" ".join(w.text for w in page.words))
    return texts


def vocabulary_text(vocab: Iterable[str]) -> str:
    return "".join(f"{w}\n" for w in vocab)


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = argparse.ArgumentParser(description="Build the frequent-word vocabulary of a page collection")
    parser.add_argument("inputs", nargs="+", type=Path, help="TSV or word-box JSON files, or directories of them")
    parser.add_argument("--top", type=int, default=150, help="number of most frequent words considered")
    parser.add_argument("--lang", action="append", default=None, help="gazetteer language(s) for name removal")
    parser.add_argument("--out", type=Path, default=None, help="vocabulary file, stdout when omitted")
    args = parser.parse_args(argv)
    files = []
    for item in args.inputs:
        files.extend(sorted(p for p in item.rglob("*") if p.suffix in (".json", ".tsv")) if item.is_dir() else [item])
    gazetteers = [load_gazetteer(lang) for lang in (args.lang or ["en", "cs"])]
    vocab = build_vocabulary(page_texts(files), args.top, load_stop_words(), gazetteers)
    if args.out is None:
        print(vocabulary_text(vocab), end="")
    else:
        args.out.write_text(vocabulary_text(vocab), encoding="utf-8")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
