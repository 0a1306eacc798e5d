# -*- coding: utf-8-*-
"""
Module : Evaluation
Author : InvoiceReader team
Description :
    Scores extraction reports against gold records with the
    match / partial match / mismatch protocol, generates synthetic noisy
    invoice corpora from the layout templates and reruns the pipeline with
    one annotation type switched off.
"""
import csv
import io
import json
import logging
from collections import Counter
from dataclasses import dataclass, field, replace
from enum import Enum
from pathlib import Path
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np

# String distance imports
from rapidfuzz.distance import Levenshtein

# Local imports
from InvoiceReader.DocModel import FieldLabel, Role
from InvoiceReader.EntityAnnotator import load_gazetteer, normalize
from InvoiceReader.Errors import ConfigError, InvariantError, MissingReportError, SchemaError
from InvoiceReader.Helpers.Corpus_Maker import Corpus_Maker, InvoiceTemplate, load_templates, load_value_pool, \
    make_invoice_values
from InvoiceReader.InfoExtractor import ExtractionReport
from InvoiceReader.OCRIngest import OCRPage, parse_wordbox_json, wordbox_json
from InvoiceReader.PipelineConfig import PipelineConfig, read_json_resource
from InvoiceReader.TextAnnotator import validate_and_correct

__all__ = [
    "MatchClass",
    "AblationDrop",
    "GoldItem",
    "GoldRecord",
    "ScoreTable",
    "NoiseModel",
    "Corpus",
    "AblationResult",
    "classify_match",
    "score_run",
    "generate_corpus",
    "read_corpus",
    "evaluate_corpus",
    "run_ablation",
    "gold_jsonl",
    "read_gold_jsonl",
]

logger = logging.getLogger(__name__)

_CONTAINMENT_FIELDS = {FieldLabel.COMPANY_NAME, FieldLabel.ADDRESS}
_EDGE_PUNCT = ".,;:()[]{}\"'!?«»„“”"


class MatchClass(str, Enum):
    MATCH = "MATCH"
    PARTIAL = "PARTIAL"
    MISMATCH = "MISMATCH"


class AblationDrop(str, Enum):
    NONE = "NONE"
    KEYWORD_ANNOTS = "KEYWORD_ANNOTS"
    DATATYPE_ANNOTS = "DATATYPE_ANNOTS"


# ---------------------------------------------------------------- gold ------

@dataclass(frozen=True)
class GoldItem:
    field: FieldLabel
    role: Role
    value: str

    def __post_init__(self):
        object.__setattr__(self, "field", FieldLabel(self.field))
        object.__setattr__(self, "role", Role(self.role))


@dataclass(frozen=True)
class GoldRecord:
    """GoldRecord : the annotated metadata items of one invoice"""

    source_id: str
    items: Tuple[GoldItem, ...]

    def __post_init__(self):
        object.__setattr__(self, "items", tuple(self.items))
        keys = [(i.field, i.role) for i in self.items]
        if len(keys) != len(set(keys)):
            raise InvariantError(f"gold record {self.source_id} repeats a (field, role) pair")

    def to_dict(self) -> dict:
        return {"source_id": self.source_id,
                "items": [{"field": i.field.value, "role": i.role.value, "value": i.value} for i in self.items]}

    @classmethod
    def from_dict(cls, data: Mapping, path: str = "gold") -> "GoldRecord":
        try:
            items = tuple(GoldItem(i["field"], i["role"], str(i["value"])) for i in data["items"])
            return cls(str(data["source_id"]), items)
        except (KeyError, TypeError, ValueError) as e:
            raise SchemaError(f"malformed gold record: {e}", path) from e


def gold_jsonl(records: Iterable[GoldRecord]) -> bytes:
    lines = [json.dumps(r.to_dict(), ensure_ascii=False, sort_keys=True) for r in records]
    return ("\n".join(lines) + "\n").encode("utf-8") if lines else b""


def read_gold_jsonl(data: Union[bytes, str]) -> List[GoldRecord]:
    if isinstance(data, bytes):
        data = data.decode("utf-8")
    records = []
    for row, line in enumerate(data.splitlines(), start=1):
        if not line.strip():
            continue
        try:
            parsed = json.loads(line)
        except json.JSONDecodeError as e:
            raise SchemaError(f"gold line is not valid JSON: {e}", f"row {row}") from e
        records.append(GoldRecord.from_dict(parsed, f"row {row}"))
    return records


# ------------------------------------------------------------ matching ------

def _words(text: str) -> List[str]:
    out = []
    for raw in text.split():
        core = normalize(raw.strip(_EDGE_PUNCT))
        if core:
            out.append(core)
    return out


def _main_tokens(text: str, legal_forms: Iterable[Tuple[str, ...]]) -> List[str]:
    """Word tokens with legal-form sequences removed, longest form first"""
    tokens = _words(text)
    forms = sorted(legal_forms, key=len, reverse=True)
    out = []
    i = 0
    while i < len(tokens):
        for form in forms:
            if tuple(tokens[i:i + len(form)]) == form:
                i += len(form)
                break
        else:
            out.append(tokens[i])
            i += 1
    return out


def _contains(whole: str, part: str, legal_forms) -> bool:
    main = Counter(_main_tokens(part, legal_forms))
    if not main:
        return False
    full = Counter(_words(whole))
    return all(full[token] >= count for token, count in main.items())


def classify_match(gold: str, extracted: Optional[str], field: Union[FieldLabel, str],
                   cfg: Optional[PipelineConfig] = None) -> MatchClass:
    """
    MATCH at plain Levenshtein distance 0, PARTIAL below
    cfg.partial_match_levenshtein, MISMATCH otherwise. Company names and
    addresses also match when either side holds every main token of the other.
    """
    cfg = cfg or PipelineConfig()
    field = FieldLabel(field)
    if extracted is None or not extracted.strip():
        return MatchClass.MISMATCH if gold.strip() else MatchClass.MATCH
    if field in _CONTAINMENT_FIELDS:
        if field == FieldLabel.COMPANY_NAME:
            extracted, _ = validate_and_correct(extracted, field)
        legal_forms = load_gazetteer(cfg.fallback_language).legal_forms
        if _contains(extracted, gold, legal_forms) or _contains(gold, extracted, legal_forms):
            return MatchClass.MATCH
    distance = Levenshtein.distance(gold, extracted)
    if distance == 0:
        return MatchClass.MATCH
    if distance < cfg.partial_match_levenshtein:
        return MatchClass.PARTIAL
    return MatchClass.MISMATCH


# ------------------------------------------------------------- scoring ------

_ALL = "ALL"


@dataclass
class ScoreTable:
    """
    ScoreTable : match class counts per field plus the overall row.
    counts : field label (or ALL) -> {MatchClass: count}
    """

    counts: Dict[str, Dict[MatchClass, int]] = field(default_factory=dict)

    def add(self, label: str, result: MatchClass):
        for key in (label, _ALL):
            row = self.counts.setdefault(key, {m: 0 for m in MatchClass})
            row[result] += 1

    def total(self, label: str = _ALL) -> int:
        return sum(self.counts.get(label, {}).values())

    def rate(self, label: str = _ALL, result: MatchClass = MatchClass.MATCH) -> float:
        """Percentage of the label's gold items in the given class, 0 for an unseen label"""
        total = self.total(label)
        return 100.0 * self.counts[label][result] / total if total else 0.0

    def fields(self) -> List[str]:
        return sorted(k for k in self.counts if k != _ALL) + ([_ALL] if _ALL in self.counts else [])

    def to_dict(self) -> dict:
        out = {}
        for label in self.fields():
            row = {m.value: self.counts[label][m] for m in MatchClass}
            row.update({f"{m.value}_pct": round(self.rate(label, m), 2) for m in MatchClass})
            row["total"] = self.total(label)
            out[label] = row
        return out

    def to_json(self) -> bytes:
        return json.dumps(self.to_dict(), indent=1, sort_keys=True).encode("utf-8")

    def to_csv(self) -> str:
        buffer = io.StringIO()
        writer = csv.writer(buffer, lineterminator="\n")
        writer.writerow(["field", "total"] + [m.value for m in MatchClass] + [f"{m.value}_pct" for m in MatchClass])
        for label in self.fields():
            writer.writerow([label, self.total(label)] + [self.counts[label][m] for m in MatchClass]
                            + [f"{self.rate(label, m):.2f}" for m in MatchClass])
        return buffer.getvalue()


def _row_label(item: GoldItem) -> str:
    return item.field.value if item.role == Role.NONE else f"{item.role.value} {item.field.value}"


def score_run(gold: Sequence[GoldRecord], reports: Sequence[ExtractionReport],
              cfg: Optional[PipelineConfig] = None) -> ScoreTable:
    """
    Compares every gold item with the report field of the same label and
    role. A value extracted under another role counts as missing.
    """
    cfg = cfg or PipelineConfig()
    by_id = {r.source_id: r for r in reports}
    table = ScoreTable()
    for record in gold:
        report = by_id.get(record.source_id)
        if report is None:
            raise MissingReportError(record.source_id)
        for item in record.items:
            found = report.get(item.field, item.role)
            result = classify_match(item.value, found.value if found is not None else None, item.field, cfg)
            if result != MatchClass.MATCH:
                logger.debug("%s %s: gold %r, extracted %r -> %s", record.source_id, _row_label(item),
                             item.value, found.value if found is not None else None, result.value)
            table.add(_row_label(item), result)
    return table


# --------------------------------------------------------------- noise ------

@dataclass(frozen=True)
class NoiseModel:
    """
    NoiseModel : per-character OCR error probabilities.
    confusions : substitution pairs, both directions; the packaged confusion pairs when None
    symbols : character -> replacements it is misread as
    """

    char_substitution: float = 0.0
    punctuation_drop: float = 0.0
    digit_duplication: float = 0.0
    confusions: Optional[Tuple[Tuple[str, str], ...]] = None
    symbols: Tuple[Tuple[str, Tuple[str, ...]], ...] = (("@", ("©", "&&")),)

    def __post_init__(self):
        for name in ("char_substitution", "punctuation_drop", "digit_duplication"):
            value = getattr(self, name)
            if not 0.0 <= value <= 1.0:
                raise InvariantError(f"{name} must be in [0, 1], got {value}")
        if self.confusions is None:
            pairs = read_json_resource("confusions.json")["pairs"]
            object.__setattr__(self, "confusions", tuple(tuple(p) for p in pairs))
        substitutes: Dict[str, List[str]] = {}
        for a, b in self.confusions:
            if len(a) == 1 and len(b) == 1:
                substitutes.setdefault(a, []).append(b)
                substitutes.setdefault(b, []).append(a)
        for symbol, replacements in self.symbols:
            substitutes.setdefault(symbol, []).extend(replacements)
        object.__setattr__(self, "_substitutes", {k: tuple(sorted(set(v))) for k, v in substitutes.items()})

    @property
    def is_clean(self) -> bool:
        return self.char_substitution == self.punctuation_drop == self.digit_duplication == 0.0

    def apply(self, text: str, rng: np.random.Generator) -> str:
        """Corrupts one word; the result is never empty"""
        if self.is_clean:
            return text
        out = []
        for ch in text:
            draws = rng.random(3)
            if ch in _EDGE_PUNCT + "-/" and draws[0] < self.punctuation_drop:
                continue
            options = self._substitutes.get(ch)
            if options and draws[1] < self.char_substitution:
                ch = options[int(rng.integers(len(options)))]
            out.append(ch)
            if ch.isdigit() and draws[2] < self.digit_duplication:
                out.append(ch)
        return "".join(out) or text


# -------------------------------------------------------------- corpus ------

@dataclass(frozen=True)
class Corpus:
    """
    Corpus : generated invoices in source_id order.
    documents : (source_id, pages)
    page_labels : (source_id, page number, is first page)
    """

    documents: Tuple[Tuple[str, Tuple[OCRPage, ...]], ...]
    gold: Tuple[GoldRecord, ...]
    page_labels: Tuple[Tuple[str, int, bool], ...] = ()


def _pages_jsonl(labels: Iterable[Tuple[str, int, bool]]) -> bytes:
    lines = [json.dumps({"source_id": s, "page": p, "first_page": f}, sort_keys=True) for s, p, f in labels]
    return ("\n".join(lines) + "\n").encode("utf-8") if lines else b""


def _write_corpus(corpus: Corpus, out_dir: Path):
    docs_dir = out_dir / "docs"
    docs_dir.mkdir(parents=True, exist_ok=True)
    for source_id, pages in corpus.documents:
        (docs_dir / f"{source_id}.json").write_bytes(wordbox_json(pages))
    (out_dir / "gold.jsonl").write_bytes(gold_jsonl(corpus.gold))
    (out_dir / "pages.jsonl").write_bytes(_pages_jsonl(corpus.page_labels))
    logger.info("Wrote %d invoice(s) to %s", len(corpus.documents), out_dir)


def generate_corpus(n: int, templates: Optional[Sequence[InvoiceTemplate]] = None,
                    noise: Optional[NoiseModel] = None, seed: int = 0,
                    out_dir: Union[str, Path, None] = None, continuation_ratio: float = 0.0,
                    base: Union[str, Path, None] = None) -> Corpus:
    """
    Builds n invoices cycling through the templates. Values and noise come
    from per-invoice generators seeded by (seed, index), so the output
    depends only on the arguments. Gold values are the clean values.
    continuation_ratio : share of invoices given a second, continuation page
    """
    templates = list(templates) if templates is not None else load_templates(base=base)
    if not templates:
        raise ConfigError("corpus generation needs at least one template")
    if not 0.0 <= continuation_ratio <= 1.0:
        raise ConfigError(f"continuation_ratio must be in [0, 1], got {continuation_ratio}")
    noise = noise or NoiseModel()
    pools = {}
    documents, gold, labels = [], [], []
    for index in range(n):
        template = templates[index % len(templates)]
        if template.language not in pools:
            pools[template.language] = load_value_pool(template.language, base)
        rng = np.random.default_rng([seed, index])
        noise_rng = np.random.default_rng([seed, index, 1])
        values = make_invoice_values(pools[template.language], rng)
        page_count = 2 if template.continuation and rng.random() < continuation_ratio else 1
        maker = Corpus_Maker(template, corrupt=lambda word: noise.apply(word, noise_rng))
        pages = tuple(maker.create(values, page_count))
        source_id = f"{template.name}_{index:05d}"
        documents.append((source_id, pages))
        gold.append(GoldRecord(source_id, tuple(GoldItem(f, r, v) for f, r, v in maker.gold(values, page_count))))
        labels.extend((source_id, p.number, p.number == 1) for p in pages)
    corpus = Corpus(tuple(documents), tuple(gold), tuple(labels))
    if out_dir is not None:
        _write_corpus(corpus, Path(out_dir))
    return corpus


def read_corpus(directory: Union[str, Path]) -> Corpus:
    """Reads a corpus written by generate_corpus"""
    directory = Path(directory)
    docs = sorted((directory / "docs").glob("*.json"))
    if not docs:
        raise ConfigError(f"no documents under {directory / 'docs'}")
    documents = tuple((p.stem, tuple(parse_wordbox_json(p.read_bytes()))) for p in docs)
    gold_path = directory / "gold.jsonl"
    gold = tuple(read_gold_jsonl(gold_path.read_bytes())) if gold_path.is_file() else ()
    labels = []
    pages_path = directory / "pages.jsonl"
    if pages_path.is_file():
        for row, line in enumerate(pages_path.read_text(encoding="utf-8").splitlines(), start=1):
            if not line.strip():
                continue
            try:
                item = json.loads(line)
                labels.append((str(item["source_id"]), int(item["page"]), bool(item["first_page"])))
            except (json.JSONDecodeError, KeyError, TypeError, ValueError) as e:
                raise SchemaError(f"malformed page label: {e}", f"pages.jsonl row {row}") from e
    return Corpus(documents, gold, tuple(labels))


# ---------------------------------------------------------- experiments -----

def evaluate_corpus(corpus: Corpus, cfg: Optional[PipelineConfig] = None, mode: Optional[str] = None,
                    base: Union[str, Path, None] = None) -> Tuple[ScoreTable, List[ExtractionReport]]:
    """Runs the whole pipeline on every corpus invoice and scores the reports"""
    # Local import, Pipeline imports every stage module
    from InvoiceReader.Pipeline import InvoicePipeline

    cfg = cfg or PipelineConfig()
    pipeline = InvoicePipeline(cfg, base=base)
    reports = [pipeline.process_pages(pages, source_id, mode=mode)[1] for source_id, pages in corpus.documents]
    return score_run(corpus.gold, reports, cfg), reports


@dataclass(frozen=True)
class AblationResult:
    drop: AblationDrop
    baseline: ScoreTable
    ablated: ScoreTable

    def deltas(self, result: MatchClass = MatchClass.MATCH) -> Dict[str, float]:
        """Ablated minus baseline percentage points per field"""
        return {label: self.ablated.rate(label, result) - self.baseline.rate(label, result)
                for label in self.baseline.fields()}

    def to_dict(self) -> dict:
        return {"drop": self.drop.value, "baseline": self.baseline.to_dict(), "ablated": self.ablated.to_dict(),
                "match_delta": {k: round(v, 2) for k, v in self.deltas().items()}}


def run_ablation(corpus: Corpus, cfg: Optional[PipelineConfig] = None,
                 drop: Union[AblationDrop, str] = AblationDrop.NONE,
                 base: Union[str, Path, None] = None) -> AblationResult:
    """Scores the corpus with and without one annotation type"""
    cfg = cfg or PipelineConfig()
    drop = AblationDrop(drop)
    baseline, _ = evaluate_corpus(corpus, cfg, base=base)
    if drop == AblationDrop.NONE:
        return AblationResult(drop, baseline, baseline)
    if drop == AblationDrop.KEYWORD_ANNOTS:
        ablated_cfg = replace(cfg, enable_keyword_annotations=False)
    else:
        ablated_cfg = replace(cfg, enable_datatype_annotations=False)
    ablated, _ = evaluate_corpus(corpus, ablated_cfg, base=base)
    logger.info("Ablation %s: overall match %.2f%% -> %.2f%%", drop.value, baseline.rate(), ablated.rate())
    return AblationResult(drop, baseline, ablated)
