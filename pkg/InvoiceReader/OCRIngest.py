# -*- coding: utf-8-*-
"""
Module : OCRIngest
Author : InvoiceReader team
Description :
    Reads OCR output into word boxes and detects the main language of a
    document from field-name term dictionaries.
    Two inputs are understood: Tesseract TSV (only level-5 word rows are kept,
    Tesseract's own block/paragraph/line grouping is discarded) and the
    canonical word-box JSON written by the corpus generator.
"""
import json
import logging
import re
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, List, Optional, Sequence, Tuple, Union

# Local imports
from InvoiceReader.DocModel import BBox, WordBox
from InvoiceReader.Errors import ConfigError, SchemaError
from InvoiceReader.PipelineConfig import read_json_resource

__all__ = [
    "OCRPage",
    "TermDictionary",
    "TESSERACT_COLUMNS",
    "parse_tesseract_tsv",
    "parse_wordbox_json",
    "wordbox_json",
    "detect_main_language",
    "load_term_dictionary",
    "read_ocr_file",
]

logger = logging.getLogger(__name__)

TESSERACT_COLUMNS = ("level", "page_num", "block_num", "par_num", "line_num", "word_num",
                     "left", "top", "width", "height", "conf", "text")
_WORD_LEVEL = 5
_PAGE_LEVEL = 1


@dataclass(frozen=True)
class OCRPage:
    """Page dimensions and the words of one page in source order"""

    number: int
    width: int
    height: int
    words: Tuple[WordBox, ...]


@dataclass(frozen=True)
class TermDictionary:
    language: str
    terms: frozenset

    def __post_init__(self):
        if not self.terms:
            raise ConfigError(f"term dictionary '{self.language}' is empty")
        bad = sorted(t for t in self.terms if t != t.lower())
        if bad:
            raise ConfigError(f"term dictionary '{self.language}' has non-lowercase terms: {bad[:3]}")
        object.__setattr__(self, "terms", frozenset(self.terms))


def _to_int(value: str, column: str, row: int) -> int:
    try:
        number = float(value)
    except ValueError:
        raise SchemaError(f"column '{column}' is not numeric: {value!r}", f"row {row}") from None
    if number != int(number):
        raise SchemaError(f"column '{column}' is not an integer: {value!r}", f"row {row}")
    return int(number)


def parse_tesseract_tsv(data: Union[bytes, str]) -> List[OCRPage]:
    """
    Parses Tesseract TSV output.
    Returns one OCRPage per page that has a level-1 row, words in source order.
    """
    text = data.decode("utf-8") if isinstance(data, bytes) else data
    rows = text.splitlines()
    if not rows:
        return []
    header = rows[0].rstrip("\r").split("\t")
    if tuple(h.strip() for h in header) != TESSERACT_COLUMNS:
        raise SchemaError(f"expected the {len(TESSERACT_COLUMNS)} Tesseract columns, got {header}", "row 1")
    dims = {}
    words = {}
    for row_number, raw in enumerate(rows[1:], start=2):
        if not raw.strip():
            continue
        cells = raw.rstrip("\r").split("\t")
        if len(cells) != len(TESSERACT_COLUMNS):
            raise SchemaError(f"expected {len(TESSERACT_COLUMNS)} columns, got {len(cells)}", f"row {row_number}")
        level = _to_int(cells[0], "level", row_number)
        page = _to_int(cells[1], "page_num", row_number)
        left, top, width, height = (_to_int(cells[i], TESSERACT_COLUMNS[i], row_number) for i in range(6, 10))
        if level == _PAGE_LEVEL:
            dims[page] = (width, height)
            words.setdefault(page, [])
        elif level == _WORD_LEVEL:
            word_text = cells[11].strip()
            if not word_text:
                continue
            try:
                conf = float(cells[10])
            except ValueError:
                raise SchemaError(f"column 'conf' is not numeric: {cells[10]!r}", f"row {row_number}") from None
            confidence = None if conf < 0 else min(1.0, conf / 100.0)
            words.setdefault(page, []).append(WordBox(word_text, BBox(left, top, width, height), confidence))
    pages = []
    for number in sorted(words):
        if number not in dims:
            raise SchemaError(f"page {number} has words but no level-1 page row", f"page {number}")
        width, height = dims[number]
        pages.append(OCRPage(number, width, height, tuple(words[number])))
    logger.debug("Parsed %d page(s) from Tesseract TSV", len(pages))
    return pages


def parse_wordbox_json(data: Union[bytes, str]) -> List[OCRPage]:
    """
    Parses the canonical word-box JSON
    {pages: [{number, width, height, words: [{text, left, top, width, height, conf?, font_height?}]}]}
    conf is a fraction in [0, 1].
    """
    try:
        parsed = json.loads(data.decode("utf-8") if isinstance(data, bytes) else data)
    except (UnicodeDecodeError, json.JSONDecodeError) as e:
        raise SchemaError(f"malformed JSON: {e}", "document") from e
    if not isinstance(parsed, dict) or not isinstance(parsed.get("pages"), list):
        raise SchemaError("expected an object with a 'pages' list", "document")
    pages = []
    for i, page in enumerate(parsed["pages"]):
        path = f"pages[{i}]"
        if not isinstance(page, dict):
            raise SchemaError("expected an object", path)
        number, width, height = (_json_int(page, key, path) for key in ("number", "width", "height"))
        raw_words = page.get("words", [])
        if not isinstance(raw_words, list):
            raise SchemaError("'words' must be a list", path)
        words = []
        for j, word in enumerate(raw_words):
            word_path = f"{path}.words[{j}]"
            if not isinstance(word, dict) or not isinstance(word.get("text"), str):
                raise SchemaError("word must be an object with a 'text' string", word_path)
            if not word["text"].strip():
                continue
            bbox = BBox(*(_json_int(word, key, word_path) for key in ("left", "top", "width", "height")))
            conf = word.get("conf")
            if conf is not None and (isinstance(conf, bool) or not isinstance(conf, (int, float))):
                raise SchemaError("'conf' must be a number", word_path)
            font_height = _json_int(word, "font_height", word_path) if "font_height" in word else None
            words.append(WordBox(word["text"], bbox, None if conf is None else float(conf), font_height))
        pages.append(OCRPage(number, width, height, tuple(words)))
    return pages


def _json_int(data: dict, key: str, path: str) -> int:
    value = data.get(key)
    if isinstance(value, bool) or not isinstance(value, (int, float)) or int(value) != value:
        raise SchemaError(f"'{key}' must be an integer", f"{path}.{key}")
    return int(value)


def wordbox_json(pages: Sequence[OCRPage]) -> bytes:
    """Writes pages in the canonical word-box JSON, byte-stable for identical input"""
    out = {"pages": []}
    for page in pages:
        words = []
        for word in page.words:
            item = {"text": word.text, "left": word.bbox.left, "top": word.bbox.top,
                    "width": word.bbox.width, "height": word.bbox.height}
            if word.ocr_confidence is not None:
                item["conf"] = word.ocr_confidence
            if word.font_height != word.bbox.height:
                item["font_height"] = word.font_height
            words.append(item)
        out["pages"].append({"number": page.number, "width": page.width, "height": page.height, "words": words})
    return json.dumps(out, ensure_ascii=False, indent=1, sort_keys=True).encode("utf-8")


def read_ocr_file(path: Union[str, Path], format: Optional[str] = None) -> List[OCRPage]:
    """Reads a TSV or word-box JSON file, format guessed from the extension when not given"""
    path = Path(path)
    fmt = (format or ("tsv" if path.suffix.lower() == ".tsv" else "json")).lower()
    data = path.read_bytes()
    if fmt == "tsv":
        return parse_tesseract_tsv(data)
    if fmt == "json":
        return parse_wordbox_json(data)
    raise ConfigError(f"unknown OCR input format {format!r}")


def _term_pattern(term: str) -> "re.Pattern":
    return re.compile(r"(?<!\w)" + re.escape(term) + r"(?!\w)")


def detect_main_language(doc_text: str, dicts: Iterable[TermDictionary], fallback: str = "en") -> str:
    """
    Returns the language whose dictionary has the most distinct whole-phrase
    hits in the text. Ties go to the dictionary listed first; no hits at all
    gives the fallback language.
    """
    dicts = list(dicts)
    if not dicts:
        raise ConfigError("language detection needs at least one term dictionary")
    folded = doc_text.casefold()
    best_language, best_hits = None, 0
    for dictionary in dicts:
        hits = sum(1 for term in dictionary.terms if _term_pattern(term.casefold()).search(folded))
        logger.debug("Language %s: %d term hit(s)", dictionary.language, hits)
        if hits > best_hits:
            best_language, best_hits = dictionary.language, hits
    if best_language is None:
        logger.info("No dictionary term found, falling back to '%s'", fallback)
        return fallback
    return best_language


def load_term_dictionary(language: str, base: Union[str, Path, None] = None) -> TermDictionary:
    data = read_json_resource("keywords", language, "terms.json", base=base)
    try:
        return TermDictionary(language, frozenset(data["terms"]))
    except (KeyError, TypeError) as e:
        raise ConfigError(f"term dictionary for '{language}' must hold a 'terms' list") from e
