# -*- coding: utf-8-*-
"""
Module : TextAnnotator
Author : InvoiceReader team
Description :
    Keyword and structured data annotation of block lines.
    Keywords are found either by exact (regular expression) search or by
    similarity search with an OCR-aware weighted edit distance, where common
    character confusions and punctuation edits are cheap.
    Structured data (dates, prices, IBAN, VAT numbers, ...) is found with
    validated patterns, and extracted values are repaired with field-specific
    OCR correction tables.
"""
import datetime
import logging
import math
import re
from dataclasses import dataclass, field, replace
from functools import lru_cache
from pathlib import Path
from typing import Callable, Dict, Iterable, List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np

# Local imports
from InvoiceReader.DocModel import Annotation, AnnotationKind, Block, FieldLabel
from InvoiceReader.Errors import ConfigError
from InvoiceReader.InvoiceReader_Repairs_Translation import (
    InvoiceReader_Digit_translation,
    InvoiceReader_Email_symbol_translation,
    InvoiceReader_Legal_form_translation,
    InvoiceReader_Letter_translation,
    InvoiceReader_Numeric_IBAN_countries,
)
from InvoiceReader.PipelineConfig import MATCHER_REGEX, MATCHER_SIMILARITY, PipelineConfig, read_json_resource

__all__ = [
    "KEYWORD_LABELS",
    "DATA_LABELS",
    "ConfusionTable",
    "KeywordPhrase",
    "KeywordSet",
    "DataTypePattern",
    "VALIDATORS",
    "weighted_edit_distance",
    "find_keyword_similar",
    "find_keyword_exact",
    "annotate_keywords",
    "annotate_datatypes",
    "validate_and_correct",
    "parse_date",
    "iban_mod97",
    "ico_mod11",
    "swift_bic",
    "load_confusion_table",
    "load_keyword_set",
    "load_datatype_patterns",
]

logger = logging.getLogger(__name__)

KEYWORD_LABELS = frozenset({
    "INVOICE", "INVOICE NUMBER", "INVOICE DATE", "DUE DATE", "PAYMENT DATE", "SELLER", "BUYER",
    "DELIVERY", "ORDER NUMBER", "PAYMENT METHOD", "TOTAL DUE", "AMOUNT PAID", "VAT NUMBER",
    "COMPANY ID", "IBAN", "SWIFT", "ACCOUNT NUMBER", "BANK", "PAGE NUMBER", "EMAIL", "PHONE",
    "WEBSITE", "CONTACT",
})

DATA_LABELS = frozenset({
    "DATE", "PRICE", "NUMBER", "VAT NUMBER", "IBAN", "SWIFT", "EMAIL", "PHONE", "URL",
    "ACCOUNT NUMBER", "PAGE NUMBER", "COMPANY ID",
})

_EPS = 1e-9
_EMPTY = ""


def _fold(text: str) -> str:
    """Lowercases char by char so offsets stay aligned with the original text"""
    out = []
    for ch in text:
        low = ch.lower()
        out.append(low if len(low) == 1 else ch)
    return "".join(out)


@dataclass(frozen=True)
class ConfusionTable:
    """
    ConfusionTable : cheap OCR edits for the weighted edit distance.
    pairs : symmetric character pairs whose substitution is cheap
    punctuation : characters whose insertion or deletion is cheap
    digraphs : (two chars, one char) pairs such as ("rn", "m") replaced at the cheap cost
    Substitution costs are closed over chains of cheap edits so the distance
    stays a metric when digraphs are disabled.
    """

    pairs: frozenset
    punctuation: frozenset
    digraphs: Tuple[Tuple[str, str], ...] = ()
    common_cost: float = 0.1
    default_cost: float = 1.0

    def __post_init__(self):
        if not 0 < self.common_cost < self.default_cost:
            raise ConfigError("confusion costs must satisfy 0 < common < default")
        pairs = frozenset(frozenset(_fold(c) for c in pair) for pair in self.pairs)
        if any(len(p) != 2 or any(len(c) != 1 for c in p) for p in pairs):
            raise ConfigError("confusion pairs must hold two distinct single characters")
        object.__setattr__(self, "pairs", pairs)
        object.__setattr__(self, "punctuation", frozenset(self.punctuation))
        object.__setattr__(self, "digraphs", tuple((_fold(a), _fold(b)) for a, b in self.digraphs))
        self._close()

    def _close(self):
        chars = sorted({c for p in self.pairs for c in p} | set(self.punctuation))
        nodes = chars + [_EMPTY]
        index = {c: i for i, c in enumerate(nodes)}
        size = len(nodes)
        dist = np.full((size, size), self.default_cost)
        np.fill_diagonal(dist, 0.0)
        for pair in self.pairs:
            a, b = sorted(pair)
            dist[index[a], index[b]] = dist[index[b], index[a]] = self.common_cost
        for p in self.punctuation:
            dist[index[p], index[_EMPTY]] = dist[index[_EMPTY], index[p]] = self.common_cost
        for k in range(size):
            dist = np.minimum(dist, dist[:, k:k + 1] + dist[k:k + 1, :])
        substitution = {}
        partners: Dict[str, List[Tuple[str, float]]] = {}
        for a in chars:
            for b in chars:
                cost = float(dist[index[a], index[b]])
                if a != b and cost < self.default_cost - _EPS:
                    substitution[(a, b)] = cost
                    partners.setdefault(a, []).append((b, cost))
        indel = {c: float(dist[index[c], index[_EMPTY]]) for c in chars
                 if dist[index[c], index[_EMPTY]] < self.default_cost - _EPS}
        object.__setattr__(self, "_substitution", substitution)
        object.__setattr__(self, "_partners", {k: tuple(v) for k, v in partners.items()})
        object.__setattr__(self, "_indel", indel)

    def substitution_cost(self, a: str, b: str) -> float:
        if a == b:
            return 0.0
        return self._substitution.get((a, b), self.default_cost)

    def indel_cost(self, c: str) -> float:
        return self._indel.get(c, self.default_cost)

    def partners(self, c: str) -> Tuple[Tuple[str, float], ...]:
        return self._partners.get(c, ())

    @classmethod
    def from_dict(cls, data: Mapping, cfg: Optional[PipelineConfig] = None) -> "ConfusionTable":
        cfg = cfg or PipelineConfig()
        try:
            pairs = frozenset(frozenset(p) for p in data["pairs"])
            punctuation = frozenset(data["punctuation"])
            digraphs = tuple(tuple(d) for d in data.get("digraphs", ())) if cfg.use_digraph_confusions else ()
        except (KeyError, TypeError) as e:
            raise ConfigError(f"confusion table needs 'pairs' and 'punctuation': {e}") from e
        return cls(pairs, punctuation, digraphs, cfg.similarity_common_cost, cfg.similarity_default_cost)


@lru_cache(maxsize=16)
def _load_confusion_table(common: float, default: float, digraphs: bool, base: Optional[str]) -> ConfusionTable:
    cfg = PipelineConfig(similarity_common_cost=common, similarity_default_cost=default,
                         use_digraph_confusions=digraphs)
    return ConfusionTable.from_dict(read_json_resource("confusions.json", base=base), cfg)


def load_confusion_table(cfg: Optional[PipelineConfig] = None, base: Union[str, Path, None] = None) -> ConfusionTable:
    cfg = cfg or PipelineConfig()
    return _load_confusion_table(cfg.similarity_common_cost, cfg.similarity_default_cost,
                                 cfg.use_digraph_confusions, None if base is None else str(base))


def weighted_edit_distance(a: str, b: str, table: ConfusionTable) -> float:
    """
    Levenshtein distance (insert, delete, substitute; no transposition) with
    cheap costs for confusion pairs, punctuation and whitespace indels and
    digraph confusions. Comparison is case-insensitive.
    """
    a, b = _fold(a), _fold(b)
    n, m = len(a), len(b)
    sub, indel = table.substitution_cost, table.indel_cost
    rows = [[0.0] * (m + 1)]
    for j in range(1, m + 1):
        rows[0][j] = rows[0][j - 1] + indel(b[j - 1])
    for i in range(1, n + 1):
        prev = rows[i - 1]
        ca = a[i - 1]
        cur = [prev[0] + indel(ca)]
        for j in range(1, m + 1):
            cb = b[j - 1]
            best = min(prev[j] + indel(ca), cur[j - 1] + indel(cb), prev[j - 1] + sub(ca, cb))
            for two, one in table.digraphs:
                if i >= 2 and cb == one and a[i - 2:i] == two:
                    best = min(best, rows[i - 2][j - 1] + table.common_cost)
                if j >= 2 and ca == one and b[j - 2:j] == two:
                    best = min(best, prev[j - 2] + table.common_cost)
            cur.append(best)
        rows.append(cur)
    return rows[n][m]


def _best_suffix_costs(text: str, phrase: str, table: ConfusionTable) -> np.ndarray:
    """
    Semi-global alignment: entry j is the smallest distance between the phrase
    and any substring of text ending at j. Rows are computed with numpy, the
    left-to-right insertion chain with a running minimum.
    """
    n = len(text)
    codes = np.fromiter((ord(c) for c in text), dtype=np.int64, count=n)
    ins = np.fromiter((table.indel_cost(c) for c in text), dtype=float, count=n)
    cum = np.concatenate(([0.0], np.cumsum(ins)))
    digraph_ends = {}
    for two, one in table.digraphs:
        ends = np.zeros(n + 1, dtype=bool)
        for j in range(2, n + 1):
            ends[j] = text[j - 2:j] == two
        digraph_ends[two] = ends
    rows = [np.zeros(n + 1)]
    for i, p in enumerate(phrase, start=1):
        prev = rows[-1]
        subs = np.where(codes == ord(p), 0.0, table.default_cost)
        for partner, cost in table.partners(p):
            subs = np.where(codes == ord(partner), np.minimum(subs, cost), subs)
        step = np.empty(n + 1)
        step[0] = prev[0] + table.indel_cost(p)
        step[1:] = np.minimum(prev[1:] + table.indel_cost(p), prev[:-1] + subs)
        for two, one in table.digraphs:
            if p == one and n >= 2:
                mask = digraph_ends[two]
                step[2:] = np.where(mask[2:], np.minimum(step[2:], prev[:-2] + table.common_cost), step[2:])
            if i >= 2 and phrase[i - 2:i] == two:
                back = rows[-2]
                is_one = np.concatenate(([False], codes == ord(one)))
                step[1:] = np.where(is_one[1:], np.minimum(step[1:], back[:-1] + table.common_cost), step[1:])
        rows.append(cum + np.minimum.accumulate(step - cum))
    return rows[-1]


@lru_cache(maxsize=200000)
def _similar_span(text: str, phrase: str, table: ConfusionTable, ratio: float,
                  line_initial: bool) -> Optional[Tuple[int, int, float]]:
    folded, target = _fold(text), _fold(phrase)
    m = len(target)
    threshold = ratio * m
    window = math.ceil(ratio * m)
    if not folded:
        return None
    ends = _best_suffix_costs(folded, target, table)
    best = None
    for end in np.nonzero(ends <= threshold + _EPS)[0]:
        end = int(end)
        for length in range(max(1, m - window), m + window + 1):
            start = end - length
            if start < 0 or (line_initial and start != 0):
                continue
            dist = weighted_edit_distance(folded[start:end], target, table)
            if dist > threshold + _EPS:
                continue
            key = (round(dist, 9), start, abs(length - m))
            if best is None or key < best[0]:
                best = (key, start, end, dist)
    if best is None:
        return None
    return best[1], best[2], best[3]


def find_keyword_similar(line_text: str, phrase: str, cfg: PipelineConfig,
                         table: Optional[ConfusionTable] = None,
                         line_initial: bool = False) -> Optional[Tuple[Tuple[int, int], float]]:
    """
    Finds the substring of line_text closest to phrase under the weighted
    edit distance, accepted when the distance is at most
    similarity_threshold_ratio x len(phrase). Candidate lengths stay within
    ceil(ratio x len(phrase)) of the phrase length. Lowest distance wins,
    then the leftmost start, then the length closest to the phrase.
    Returns ((start, end), distance) or None.
    """
    if not phrase:
        raise ValueError("phrase must be non-empty")
    table = table or load_confusion_table(cfg)
    found = _similar_span(line_text, phrase, table, cfg.similarity_threshold_ratio, line_initial)
    if found is None:
        return None
    start, end, dist = found
    return (start, end), dist


def find_keyword_exact(line_text: str, phrase: str, line_initial: bool = False) -> Optional[Tuple[int, int]]:
    """Leftmost case-insensitive occurrence of phrase, only at offset 0 when line_initial"""
    pattern = re.compile(re.escape(_fold(phrase)))
    folded = _fold(line_text)
    match = pattern.match(folded) if line_initial else pattern.search(folded)
    return match.span() if match else None


@dataclass(frozen=True)
class KeywordPhrase:
    text: str
    line_initial: bool = False


@dataclass(frozen=True)
class KeywordSet:
    """
    KeywordSet : per-language keyword phrases by label.
    entries : label -> tuple of KeywordPhrase
    """

    language: str
    entries: Mapping[str, Tuple[KeywordPhrase, ...]] = field(default_factory=dict)

    def __post_init__(self):
        entries = {}
        for label, phrases in dict(self.entries).items():
            if label not in KEYWORD_LABELS:
                raise ConfigError(f"unknown keyword label '{label}' in '{self.language}' keywords")
            phrases = tuple(p if isinstance(p, KeywordPhrase) else KeywordPhrase(p) for p in phrases)
            for phrase in phrases:
                if not phrase.text or phrase.text != phrase.text.lower():
                    raise ConfigError(f"keyword phrase {phrase.text!r} must be non-empty lowercase")
            entries[label] = phrases
        object.__setattr__(self, "entries", entries)

    def phrases(self) -> List[Tuple[str, KeywordPhrase]]:
        return [(label, phrase) for label, phrases in self.entries.items() for phrase in phrases]

    @classmethod
    def from_dict(cls, language: str, data: Mapping) -> "KeywordSet":
        entries = {}
        for label, items in data.items():
            phrases = []
            for item in items:
                if isinstance(item, str):
                    phrases.append(KeywordPhrase(item))
                elif isinstance(item, dict) and isinstance(item.get("phrase"), str):
                    phrases.append(KeywordPhrase(item["phrase"], bool(item.get("line_initial", False))))
                else:
                    raise ConfigError(f"bad keyword entry {item!r} for label '{label}'")
            entries[label] = tuple(phrases)
        return cls(language, entries)


def load_keyword_set(language: str, base: Union[str, Path, None] = None) -> KeywordSet:
    return KeywordSet.from_dict(language, read_json_resource("keywords", language, "keywords.json", base=base))


def annotate_keywords(block: Block, ks: KeywordSet, mode: str, cfg: PipelineConfig,
                      table: Optional[ConfusionTable] = None) -> Block:
    """
    Adds KEYWORD annotations to a block. Each phrase yields at most one match
    per line. Overlaps are resolved with exact matches first, then longer
    phrases, then lower distance, so REGEX results are kept in SIMILARITY mode.
    """
    if mode not in (MATCHER_REGEX, MATCHER_SIMILARITY):
        raise ConfigError(f"unknown keyword matcher {mode!r}")
    if mode == MATCHER_SIMILARITY:
        table = table or load_confusion_table(cfg)
    found = []
    for line_index, line in enumerate(block.lines):
        for label, phrase in ks.phrases():
            if mode == MATCHER_REGEX:
                span = find_keyword_exact(line.text, phrase.text, phrase.line_initial)
                dist = 0.0
            else:
                hit = find_keyword_similar(line.text, phrase.text, cfg, table, phrase.line_initial)
                span, dist = hit if hit else (None, None)
            if span is not None:
                found.append((line_index, span[0], span[1], label, phrase.text, dist))
    found.sort(key=lambda f: (f[0], f[5] > _EPS, -len(f[4]), f[5], f[1], f[3]))
    accepted: List[Tuple[int, int, int, str, str, float]] = []
    for cand in found:
        if any(a[0] == cand[0] and a[1] < cand[2] and cand[1] < a[2] for a in accepted):
            continue
        accepted.append(cand)
    accepted.sort(key=lambda f: (f[0], f[1]))
    source = "keyword-regex" if mode == MATCHER_REGEX else "keyword-similarity"
    new = tuple(
        Annotation(AnnotationKind.KEYWORD, label, (li, s, e), block.lines[li].text[s:e],
                   max(0.0, 1.0 - dist / len(phrase)), source)
        for li, s, e, label, phrase, dist in accepted
    )
    return replace(block, annotations=block.annotations + new)


# ---------------------------------------------------------- validators -----

_COUNTRY_CODES = frozenset("""
AD AE AF AG AL AM AO AR AT AU AZ BA BB BD BE BF BG BH BI BJ BN BO BR BS BT BW BY BZ CA CD CF CG CH CI
CL CM CN CO CR CU CV CY CZ DE DJ DK DM DO DZ EC EE EG ER ES ET FI FJ FO FR GA GB GD GE GH GI GL GM GN
GR GT GW GY HK HN HR HT HU ID IE IL IN IQ IR IS IT JM JO JP KE KG KH KM KN KR KW KZ LA LB LC LI LK LR
LS LT LU LV LY MA MC MD ME MG MK ML MM MN MO MR MT MU MV MW MX MY MZ NA NE NG NI NL NO NP NZ OM PA PE
PG PH PK PL PS PT PY QA RO RS RU RW SA SC SD SE SG SI SK SL SM SN SO SR SV SY SZ TD TG TH TJ TM TN TO
TR TT TW TZ UA UG US UY UZ VA VE VN YE ZA ZM ZW
""".split())

_MONTHS = {
    "january": 1, "jan": 1, "february": 2, "feb": 2, "march": 3, "mar": 3, "april": 4, "apr": 4,
    "may": 5, "june": 6, "jun": 6, "july": 7, "jul": 7, "august": 8, "aug": 8, "september": 9,
    "sep": 9, "sept": 9, "october": 10, "oct": 10, "november": 11, "nov": 11, "december": 12, "dec": 12,
    "ledna": 1, "února": 2, "března": 3, "dubna": 4, "května": 5, "června": 6, "července": 7,
    "srpna": 8, "září": 9, "října": 10, "listopadu": 11, "prosince": 12,
}


def iban_mod97(value: str) -> bool:
    """IBAN check: move the first four characters to the end, letters to numbers, remainder mod 97 is 1"""
    iban = re.sub(r"\s", "", value).upper()
    if not re.fullmatch(r"[A-Z]{2}\d{2}[A-Z0-9]{11,30}", iban):
        return False
    rearranged = iban[4:] + iban[:4]
    digits = "".join(str(int(c, 36)) for c in rearranged)
    return int(digits) % 97 == 1


def ico_mod11(value: str) -> bool:
    """Czech company id: 8 digits, weights 8..2 on the first seven, mod-11 check digit"""
    digits = re.sub(r"\s", "", value)
    if not re.fullmatch(r"\d{8}", digits):
        return False
    total = sum(int(d) * w for d, w in zip(digits[:7], range(8, 1, -1)))
    return (11 - total % 11) % 10 == int(digits[7])


def swift_bic(value: str) -> bool:
    """8 or 11 characters: bank code letters, ISO country, location, optional branch"""
    bic = value.strip().upper()
    if not re.fullmatch(r"[A-Z]{4}[A-Z]{2}[A-Z0-9]{2}(?:[A-Z0-9]{3})?", bic):
        return False
    return bic[4:6] in _COUNTRY_CODES


def parse_date(value: str) -> Optional[datetime.date]:
    """Parses the date formats recognized by the DATE pattern"""
    text = value.strip().lower()
    patterns = (
        (r"(\d{1,2})\.\s?(\d{1,2})\.\s?(\d{4})", ("d", "m", "y")),
        (r"(\d{4})-(\d{2})-(\d{2})", ("y", "m", "d")),
        (r"(\d{1,2})/(\d{1,2})/(\d{4})", ("d", "m", "y")),
        (r"(\d{1,2})\.?\s+([^\W\d_]+)\.?\s+(\d{4})", ("d", "M", "y")),
        (r"([^\W\d_]+)\.?\s+(\d{1,2}),\s*(\d{4})", ("M", "d", "y")),
    )
    for pattern, order in patterns:
        match = re.fullmatch(pattern, text)
        if not match:
            continue
        parts = dict(zip(order, match.groups()))
        month = _MONTHS.get(parts["M"]) if "M" in parts else int(parts["m"])
        if month is None:
            return None
        try:
            return datetime.date(int(parts["y"]), month, int(parts["d"]))
        except ValueError:
            return None
    return None


VALIDATORS: Dict[str, Callable[[str], bool]] = {
    "iban_mod97": iban_mod97,
    "ico_mod11": ico_mod11,
    "swift_bic": swift_bic,
    "date": lambda text: parse_date(text) is not None,
}


@dataclass(frozen=True)
class DataTypePattern:
    """
    DataTypePattern : one structured data recognizer.
    When the pattern has a group named 'value', only that group is annotated.
    """

    label: str
    pattern: str
    validator: Optional[str] = None

    def __post_init__(self):
        if self.label not in DATA_LABELS:
            raise ConfigError(f"unknown data type label '{self.label}'")
        try:
            object.__setattr__(self, "_compiled", re.compile(self.pattern))
        except re.error as e:
            raise ConfigError(f"pattern for {self.label} does not compile: {e}") from e
        if self.validator is not None and self.validator not in VALIDATORS:
            raise ConfigError(f"unknown validator '{self.validator}' for {self.label}")

    def finditer(self, text: str) -> Iterable[Tuple[int, int]]:
        check = VALIDATORS.get(self.validator) if self.validator else None
        for match in self._compiled.finditer(text):
            span = match.span("value") if "value" in self._compiled.groupindex else match.span()
            if span[1] <= span[0]:
                continue
            if check is None or check(text[span[0]:span[1]]):
                yield span


def load_datatype_patterns(base: Union[str, Path, None] = None) -> List[DataTypePattern]:
    data = read_json_resource("datatypes.json", base=base)
    try:
        return [DataTypePattern(item["label"], item["pattern"], item.get("validator")) for item in data["patterns"]]
    except (KeyError, TypeError) as e:
        raise ConfigError(f"datatypes.json must hold a 'patterns' list of label/pattern objects: {e}") from e


def annotate_datatypes(block: Block, patterns: Sequence[DataTypePattern]) -> Block:
    """Adds non-overlapping DATATYPE annotations; earlier patterns take precedence"""
    new = []
    for line_index, line in enumerate(block.lines):
        taken: List[Tuple[int, int]] = []
        for dtp in patterns:
            for start, end in dtp.finditer(line.text):
                if any(start < e and s < end for s, e in taken):
                    continue
                taken.append((start, end))
                new.append(Annotation(AnnotationKind.DATATYPE, dtp.label, (line_index, start, end),
                                      line.text[start:end], 1.0, "datatype"))
    new.sort(key=lambda a: a.span)
    return replace(block, annotations=block.annotations + tuple(new))


# ---------------------------------------------------------- correction -----

_DATE_FIELDS = {FieldLabel.INVOICE_DATE, FieldLabel.DUE_DATE, FieldLabel.PAYMENT_DATE}
_PRICE_FIELDS = {FieldLabel.TOTAL_DUE, FieldLabel.AMOUNT_PAID}
_DIGIT_FIELDS = {FieldLabel.COMPANY_ID, FieldLabel.ACCOUNT_NUMBER, FieldLabel.PHONE_NUMBER}
_CODE_FIELDS = {FieldLabel.INVOICE_NUMBER, FieldLabel.ORDER_NUMBER}
_AMBIGUOUS = set("O0Il1")


def _to_digits(text: str) -> str:
    return "".join(InvoiceReader_Digit_translation.get(c, c) for c in text)


def _to_letters(text: str) -> str:
    return "".join(InvoiceReader_Letter_translation.get(c, c) for c in text)


def _repair_vat(value: str, log: List[str]) -> str:
    match = re.fullmatch(r"(\S{2})(\s?)(\S{8,12})", value)
    if not match:
        return value
    prefix, space, body = match.groups()
    fixed = _to_letters(prefix).upper() + space + _to_digits(body)
    if fixed != value and re.fullmatch(r"[A-Z]{2}\s?\d{8,12}", fixed):
        log.append(f"VAT NUMBER: {value!r} -> {fixed!r}")
        return fixed
    return value


def _repair_email(value: str, log: List[str]) -> str:
    if "@" in value:
        return value
    for symbol in InvoiceReader_Email_symbol_translation:
        match = re.fullmatch(r"([\w.+-]+?)" + re.escape(symbol) + r"([\w-]+(?:\.[\w-]+)*\.[A-Za-z]{2,})", value)
        if match:
            fixed = f"{match.group(1)}@{match.group(2)}"
            log.append(f"EMAIL: {symbol!r} -> '@'")
            return fixed
    return value


def _repair_iban(value: str, log: List[str]) -> str:
    compact = re.sub(r"\s", "", value)
    if len(compact) < 15:
        return value
    country = _to_letters(compact[:2]).upper()
    numeric_bban = country in InvoiceReader_Numeric_IBAN_countries
    out = []
    position = 0
    for ch in value:
        if ch.isspace():
            out.append(ch)
            continue
        if position < 2:
            out.append(_to_letters(ch).upper())
        elif position < 4 or numeric_bban:
            out.append(_to_digits(ch))
        else:
            out.append(ch)
        position += 1
    fixed = "".join(out)
    if fixed != value:
        log.append(f"IBAN: {value!r} -> {fixed!r}")
    return fixed


def _repair_digit_runs(value: str, label: str, log: List[str]) -> str:
    def fix(match):
        run = match.group(0)
        return _to_digits(run) if any(c.isdigit() for c in run) else run

    fixed = re.sub(r"[\dOoIlSB]+(?:[.,/ -][\dOoIlSB]+)*", fix, value)
    if fixed != value:
        log.append(f"{label}: {value!r} -> {fixed!r}")
    return fixed


def _repair_digits_only(value: str, label: str, log: List[str]) -> str:
    letters = [c for c in value if c.isalpha()]
    if not letters:
        return value
    if not all(c in InvoiceReader_Digit_translation for c in letters):
        log.append(f"{label}: {value!r} ambiguous, left unchanged")
        return value
    fixed = _to_digits(value)
    log.append(f"{label}: {value!r} -> {fixed!r}")
    return fixed


def _repair_legal_form(value: str, log: List[str]) -> str:
    stripped = value.rstrip()
    for wrong, right in InvoiceReader_Legal_form_translation.items():
        if stripped.endswith(wrong) and (len(stripped) == len(wrong) or not stripped[-len(wrong) - 1].isalnum()):
            fixed = stripped[:-len(wrong)] + right
            log.append(f"COMPANY NAME: legal form {wrong!r} -> {right!r}")
            return fixed
    return value


def validate_and_correct(value: str, label: Union[FieldLabel, str]) -> Tuple[str, List[str]]:
    """
    Repairs OCR misreadings in an extracted value where the field format
    constrains a position to a digit or a letter. Returns the value and a log
    of applied (or refused as ambiguous) repairs. Applying it twice changes nothing.
    """
    try:
        label = FieldLabel(label)
    except ValueError:
        return value, []
    log: List[str] = []
    fixed = value
    if label == FieldLabel.VAT_NUMBER:
        fixed = _repair_vat(value.strip(), log)
    elif label == FieldLabel.EMAIL:
        fixed = _repair_email(value.strip(), log)
    elif label == FieldLabel.IBAN:
        fixed = _repair_iban(value.strip(), log)
    elif label in _DATE_FIELDS:
        if re.fullmatch(r"[\dOoIlSB .\-/]+", value.strip()):
            fixed = _repair_digit_runs(value.strip(), label.value, log)
    elif label in _PRICE_FIELDS:
        fixed = _repair_digit_runs(value, label.value, log)
    elif label in _DIGIT_FIELDS:
        fixed = _repair_digits_only(value, label.value, log)
    elif label == FieldLabel.COMPANY_NAME:
        fixed = _repair_legal_form(value, log)
    elif label in _CODE_FIELDS:
        if any(c.isalpha() for c in value) and any(c.isdigit() for c in value) and _AMBIGUOUS & set(value):
            log.append(f"{label.value}: {value!r} has ambiguous O/0 or l/1 positions, left unchanged")
    for entry in log:
        if "ambiguous" in entry:
            logger.info(entry)
        else:
            logger.debug(entry)
    return fixed, log
