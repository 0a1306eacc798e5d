# -*- coding: utf-8-*-
"""
Module : InfoExtractor
Author : InvoiceReader team
Description :
    Metadata extraction over an annotated document.
    A field is searched from its keyword: data on the keyword line, then on
    the line below, then in the right or bottom/bottom-right neighbor block
    chosen by a weighted score. Without data the rest of the keyword line is
    taken, and structured values with a unique format are also found without
    any keyword. Party information (company, address, VAT number...) is
    collected from the blocks classified as seller, buyer or delivery.
"""
import json
import logging
from dataclasses import dataclass
from enum import Enum
from typing import Any, Dict, Iterable, List, Mapping, Optional, Sequence, Tuple, Union

# Local imports
from InvoiceReader.DocModel import (Annotation, AnnotationKind, Block, BlockType, Direction, Document, ExtractedField,
                                    FieldLabel, Page, Role)
from InvoiceReader.Errors import InvariantError, SchemaError
from InvoiceReader.PipelineConfig import PipelineConfig
from InvoiceReader.TextAnnotator import validate_and_correct

__all__ = [
    "FieldCategory",
    "FieldSpec",
    "DEFAULT_FIELD_SPECS",
    "PARTY_ROLES",
    "neighbor_score",
    "extract_field",
    "extract_address_span",
    "assemble_role_groups",
    "ExtractionReport",
    "extract_all",
    "reports_json",
    "read_reports",
]

logger = logging.getLogger(__name__)

PARTY_ROLES = (Role.SELLER, Role.BUYER, Role.DELIVERY)
_DATA_KINDS = (AnnotationKind.DATATYPE, AnnotationKind.ENTITY, AnnotationKind.ADDRESS_PART)
_PATTERN_LABELS = frozenset({"DATE", "PRICE", "NUMBER", "VAT NUMBER", "IBAN", "SWIFT", "EMAIL", "PHONE", "URL",
                             "ACCOUNT NUMBER", "PAGE NUMBER", "COMPANY ID"})
_TAIL_STRIP = " \t:;,-–#=."
_ADDRESS_START = ("road", "house_number")
_ADDRESS_RANK = ("country", "city", "city_district", "suburb", "postcode", "road", "house_number", "house")
_LOCATION_ENTITIES = frozenset({"LOCATION", "CITY", "COUNTRY"})


class FieldCategory(str, Enum):
    DATE = "DATE"
    PRICE = "PRICE"
    NUMBER = "NUMBER"
    GENERAL = "GENERAL"


@dataclass(frozen=True)
class FieldSpec:
    """
    FieldSpec : how one metadata field is searched.
    keywords : keyword labels that point at the value
    data_labels : annotation labels accepted as the value, preferred first
    keyword_required : False when the data format alone identifies the field
    party : True for fields collected per seller/buyer/delivery block group
    """

    field: FieldLabel
    keywords: Tuple[str, ...]
    data_labels: Tuple[str, ...]
    category: FieldCategory
    keyword_required: bool = True
    party: bool = False

    def __post_init__(self):
        object.__setattr__(self, "field", FieldLabel(self.field))
        object.__setattr__(self, "category", FieldCategory(self.category))
        object.__setattr__(self, "keywords", tuple(self.keywords))
        object.__setattr__(self, "data_labels", tuple(self.data_labels))
        patterns = _PATTERN_LABELS.intersection(self.data_labels)
        if self.category == FieldCategory.DATE and "DATE" not in self.data_labels:
            raise InvariantError(f"{self.field.value}: DATE fields expect DATE data")
        if self.category == FieldCategory.PRICE and "PRICE" not in self.data_labels:
            raise InvariantError(f"{self.field.value}: PRICE fields expect PRICE data")
        if self.category == FieldCategory.NUMBER and not patterns - {"DATE", "PRICE"}:
            raise InvariantError(f"{self.field.value}: NUMBER fields expect a structured data label")
        if self.category == FieldCategory.GENERAL and patterns:
            raise InvariantError(f"{self.field.value}: GENERAL fields have no data pattern")
        if not self.keywords and not self.data_labels and self.field != FieldLabel.ADDRESS:
            raise InvariantError(f"{self.field.value}: a field needs keywords or data labels")


_F = FieldLabel
_C = FieldCategory
DEFAULT_FIELD_SPECS: Tuple[FieldSpec, ...] = (
    FieldSpec(_F.INVOICE_NUMBER, ("INVOICE NUMBER",), ("NUMBER", "COMPANY ID"), _C.NUMBER),
    FieldSpec(_F.ORDER_NUMBER, ("ORDER NUMBER",), ("NUMBER", "COMPANY ID"), _C.NUMBER),
    FieldSpec(_F.INVOICE_DATE, ("INVOICE DATE",), ("DATE",), _C.DATE),
    FieldSpec(_F.DUE_DATE, ("DUE DATE",), ("DATE",), _C.DATE),
    FieldSpec(_F.PAYMENT_DATE, ("PAYMENT DATE",), ("DATE",), _C.DATE),
    FieldSpec(_F.TOTAL_DUE, ("TOTAL DUE",), ("PRICE",), _C.PRICE),
    FieldSpec(_F.AMOUNT_PAID, ("AMOUNT PAID",), ("PRICE",), _C.PRICE),
    FieldSpec(_F.PAYMENT_METHOD, ("PAYMENT METHOD",), (), _C.GENERAL),
    FieldSpec(_F.IBAN, ("IBAN",), ("IBAN",), _C.NUMBER, keyword_required=False),
    FieldSpec(_F.SWIFT, ("SWIFT",), ("SWIFT",), _C.NUMBER, keyword_required=False),
    FieldSpec(_F.ACCOUNT_NUMBER, ("ACCOUNT NUMBER",), ("ACCOUNT NUMBER",), _C.NUMBER, keyword_required=False),
    FieldSpec(_F.PAGE_NUMBER, ("PAGE NUMBER",), ("PAGE NUMBER",), _C.NUMBER, keyword_required=False),
    FieldSpec(_F.COMPANY_NAME, (), ("ORGANIZATION",), _C.GENERAL, keyword_required=False, party=True),
    FieldSpec(_F.ADDRESS, (), (), _C.GENERAL, keyword_required=False, party=True),
    FieldSpec(_F.VAT_NUMBER, ("VAT NUMBER",), ("VAT NUMBER",), _C.NUMBER, keyword_required=False, party=True),
    FieldSpec(_F.COMPANY_ID, ("COMPANY ID",), ("COMPANY ID", "NUMBER"), _C.NUMBER, party=True),
    FieldSpec(_F.EMAIL, ("EMAIL",), ("EMAIL",), _C.NUMBER, keyword_required=False, party=True),
    FieldSpec(_F.PHONE_NUMBER, ("PHONE",), ("PHONE",), _C.NUMBER, keyword_required=False, party=True),
    FieldSpec(_F.WEBSITE, ("WEBSITE",), ("URL",), _C.NUMBER, keyword_required=False, party=True),
    FieldSpec(_F.CONTACTS, ("CONTACT",), ("PERSON",), _C.GENERAL, party=True),
)


# ---------------------------------------------------------- helpers --------

@dataclass(frozen=True)
class _Located:
    page: Page
    block: Block
    annotation: Annotation


def _page_order(doc: Document) -> List[Page]:
    """Pages classified as first pages come first, then by number"""
    return sorted(doc.pages, key=lambda p: (p.is_invoice_first_page is not True, p.number))


def _block_order(blocks: Iterable[Block]) -> List[Block]:
    return sorted(blocks, key=lambda b: (b.bbox.top, b.bbox.left, b.id))


def _data_annotations(block: Block, labels: Sequence[str]) -> List[Annotation]:
    """Data annotations with one of labels, preferred label first, then position"""
    rank = {label: i for i, label in enumerate(labels)}
    found = [a for a in block.annotations if a.kind in _DATA_KINDS and a.label in rank]
    return sorted(found, key=lambda a: (rank[a.label], a.span))


def neighbor_score(block: Block, expected: Sequence[str], cfg: PipelineConfig) -> float:
    """
    Sums over the annotations of a candidate block: expected data scores
    high, other data low, keywords are a penalty.
    """
    score = 0.0
    for annot in block.annotations:
        if annot.kind == AnnotationKind.KEYWORD:
            score += cfg.neighbor_keyword_penalty
        elif annot.label in expected:
            score += cfg.neighbor_expected_weight
        else:
            score += cfg.neighbor_other_data_weight
    return score


def _make_field(spec: FieldSpec, role: Role, value: str, key_conf: float, data_conf: float, combine_conf: float,
                source: Tuple[int, int, int]) -> Optional[ExtractedField]:
    fixed, log = validate_and_correct(value.strip(), spec.field)
    if not fixed:
        return None
    return ExtractedField(spec.field, role, fixed, round(key_conf, 6), round(data_conf, 6), combine_conf,
                          source, tuple(log))


def _role_of(block: Block) -> Role:
    return block.role or Role.NONE


# ------------------------------------------------------ keyword search -----

def _keyword_candidates(pages: Sequence[Page], spec: FieldSpec, blocks: Optional[Sequence[Block]] = None
                        ) -> List[_Located]:
    """
    Keyword occurrences for the field, GENERAL_INFO blocks first, then by
    page preference and position.
    """
    out = []
    for page_rank, page in enumerate(pages):
        for block in (blocks if blocks is not None else page.blocks):
            for annot in block.annotations_of(AnnotationKind.KEYWORD):
                if annot.label in spec.keywords:
                    out.append(((BlockType.GENERAL_INFO not in block.block_types, page_rank, block.bbox.top,
                                 block.bbox.left, block.id, annot.span), _Located(page, block, annot)))
    return [located for _, located in sorted(out, key=lambda item: item[0])]


def _same_line_data(located: _Located, spec: FieldSpec) -> Optional[Annotation]:
    keyword = located.annotation
    after = [a for a in _data_annotations(located.block, spec.data_labels)
             if a.line_index == keyword.line_index and a.start >= keyword.end]
    if not after:
        return None
    rank = {label: i for i, label in enumerate(spec.data_labels)}
    return min(after, key=lambda a: (a.start, rank[a.label]))


def _next_line_data(located: _Located, spec: FieldSpec) -> Optional[Annotation]:
    """Data on the line right below the keyword, overlapping it horizontally"""
    keyword, block = located.annotation, located.block
    below = keyword.line_index + 1
    if below >= len(block.lines):
        return None
    key_box = block.lines[keyword.line_index].span_bbox(keyword.start, keyword.end)
    line = block.lines[below]
    for annot in _data_annotations(block, spec.data_labels):
        if annot.line_index == below and line.span_bbox(annot.start, annot.end).horizontal_overlap(key_box) > 0:
            return annot
    return None


def _neighbor_data(located: _Located, spec: FieldSpec, cfg: PipelineConfig) -> Optional[Tuple[Block, Annotation]]:
    """
    Scores the right, bottom and bottom-right neighbors separately; the
    highest positive score holding expected data wins, right first on ties.
    Right data must share the keyword row, bottom data the first line.
    """
    keyword, block, page = located.annotation, located.block, located.page
    key_line = block.lines[keyword.line_index]
    scored = []
    for priority, direction in enumerate((Direction.RIGHT, Direction.BOTTOM, Direction.BOTTOM_RIGHT)):
        neighbor_id = block.neighbor(direction)
        neighbor = page.block_by_id(neighbor_id) if neighbor_id is not None else None
        if neighbor is None:
            continue
        matches = _data_annotations(neighbor, spec.data_labels)
        if direction == Direction.RIGHT:
            # the value sits on the row of the keyword
            rows = {i for i, line in enumerate(neighbor.lines) if line.bbox.vertical_overlap(key_line.bbox) > 0}
            matches = [a for a in matches if a.line_index in rows]
        else:
            matches = [a for a in matches if a.line_index == 0]
        score = neighbor_score(neighbor, spec.data_labels, cfg)
        if matches and score > 0:
            scored.append((-score, priority, neighbor, matches, direction))
    if not scored:
        return None
    _, _, neighbor, matches, _ = min(scored, key=lambda s: (s[0], s[1]))
    rank = {label: i for i, label in enumerate(spec.data_labels)}
    return neighbor, min(matches, key=lambda a: (a.line_index, rank[a.label], a.start))


def _tail_text(located: _Located) -> str:
    """Text after the keyword up to the next keyword on the line, trimmed of separators"""
    keyword, block = located.annotation, located.block
    text = block.lines[keyword.line_index].text
    stop = len(text)
    for other in block.annotations_of(AnnotationKind.KEYWORD):
        if other.line_index == keyword.line_index and keyword.end <= other.start < stop:
            stop = other.start
    return text[keyword.end:stop].strip(_TAIL_STRIP)


def _right_line_text(located: _Located) -> Optional[Tuple[int, str]]:
    """Line of the right neighbor on the keyword's row, when it carries no keyword"""
    keyword, block, page = located.annotation, located.block, located.page
    neighbor_id = block.neighbor(Direction.RIGHT)
    neighbor = page.block_by_id(neighbor_id) if neighbor_id is not None else None
    if neighbor is None:
        return None
    key_box = block.lines[keyword.line_index].bbox
    for index, line in enumerate(neighbor.lines):
        if line.bbox.vertical_overlap(key_box) > 0:
            if any(a.line_index == index for a in neighbor.annotations_of(AnnotationKind.KEYWORD)):
                return None
            return index, line.text
    return None


def _first_data(pages: Sequence[Page], labels: Sequence[str], blocks: Optional[Sequence[Block]] = None
                ) -> Optional[_Located]:
    for page in pages:
        for block in _block_order(blocks if blocks is not None else page.blocks):
            matches = _data_annotations(block, labels)
            if matches:
                rank = {label: i for i, label in enumerate(labels)}
                return _Located(page, block, min(matches, key=lambda a: (rank[a.label], a.span)))
    return None


def _search(pages: Sequence[Page], spec: FieldSpec, cfg: PipelineConfig, role: Optional[Role] = None,
            blocks: Optional[Sequence[Block]] = None, neighbors: bool = True) -> Optional[ExtractedField]:
    def tag(block: Block) -> Role:
        if not spec.party:
            return Role.NONE
        return role if role is not None else _role_of(block)

    candidates = _keyword_candidates(pages, spec, blocks) if spec.keywords else []
    if spec.data_labels:
        for located in candidates:
            keyword, block = located.annotation, located.block
            data = _same_line_data(located, spec) or _next_line_data(located, spec)
            if data is not None:
                return _make_field(spec, tag(block), data.matched_text, keyword.score, data.score, 1.0,
                                   (located.page.number, block.id, data.line_index))
            if not neighbors:
                continue
            hit = _neighbor_data(located, spec, cfg)
            if hit is not None:
                neighbor, data = hit
                return _make_field(spec, tag(block), data.matched_text, keyword.score, data.score, 1.0,
                                   (located.page.number, neighbor.id, data.line_index))
    for located in candidates:
        tail = _tail_text(located)
        line_index, block_id = located.annotation.line_index, located.block.id
        if not tail and neighbors and not spec.data_labels:
            right = _right_line_text(located)
            if right is not None:
                line_index, tail = right[0], right[1].strip(_TAIL_STRIP)
                block_id = located.block.neighbor(Direction.RIGHT)
        if tail:
            return _make_field(spec, tag(located.block), tail, cfg.key_conf_only, 0.0, cfg.key_conf_only,
                               (located.page.number, block_id, line_index))
    if candidates and spec.keyword_required:
        logger.debug("%s: keyword found without a value", spec.field.value)
    if spec.keyword_required:
        return None
    if spec.field == FieldLabel.ADDRESS:
        return _first_address(pages, spec, cfg, role, blocks)
    located = _first_data(pages, spec.data_labels, blocks) if spec.data_labels else None
    if located is None:
        return None
    return _make_field(spec, tag(located.block), located.annotation.matched_text, 0.0, cfg.data_conf_only,
                       cfg.data_conf_only, (located.page.number, located.block.id, located.annotation.line_index))


def extract_field(doc: Document, spec: FieldSpec, cfg: Optional[PipelineConfig] = None) -> Optional[ExtractedField]:
    """
    Searches one field over the whole document. Returns None when the field
    is absent. The role tag is the role of the block the value came from.
    """
    cfg = cfg or PipelineConfig()
    return _search(_page_order(doc), spec, cfg)


# ------------------------------------------------------------- address -----

def extract_address_span(block: Block, cfg: Optional[PipelineConfig] = None) -> Optional[Tuple[str, float, int]]:
    """
    Address lines of a block: from the first line holding a road or house
    number to the line holding the highest ranked address label at or after
    it. Returns (value, confidence, first line index) or None.
    """
    cfg = cfg or PipelineConfig()
    parts = block.annotations_of(AnnotationKind.ADDRESS_PART)
    starts = [a.line_index for a in parts if a.label in _ADDRESS_START]
    if not starts:
        return None
    start = min(starts)
    after = [a for a in parts if a.line_index >= start and a.label in _ADDRESS_RANK]
    best = min(_ADDRESS_RANK.index(a.label) for a in after)
    end = max(start, min(a.line_index for a in after if _ADDRESS_RANK.index(a.label) == best))
    value = ", ".join(block.lines[i].text.strip().rstrip(",") for i in range(start, end + 1))
    labels = {a.label for a in after if a.line_index <= end}
    confidence = cfg.address_conf_strong if labels & {"country", "city"} else cfg.address_conf_weak
    if any(a.label in _LOCATION_ENTITIES and start <= a.line_index <= end
           for a in block.annotations_of(AnnotationKind.ENTITY)):
        confidence = min(1.0, confidence + cfg.address_entity_bonus)
    return value, confidence, start


def _first_address(pages: Sequence[Page], spec: FieldSpec, cfg: PipelineConfig, role: Optional[Role],
                   blocks: Optional[Sequence[Block]]) -> Optional[ExtractedField]:
    for page in pages:
        for block in _block_order(blocks if blocks is not None else page.blocks):
            span = extract_address_span(block, cfg)
            if span is not None:
                value, confidence, line_index = span
                return _make_field(spec, role if role is not None else _role_of(block), value, 0.0,
                                   round(confidence, 6), cfg.data_conf_only, (page.number, block.id, line_index))
    return None


# --------------------------------------------------------- role groups -----

def assemble_role_groups(doc: Document, cfg: Optional[PipelineConfig] = None,
                         specs: Sequence[FieldSpec] = DEFAULT_FIELD_SPECS) -> List[ExtractedField]:
    """
    Party fields per role. A party can spread over several blocks; each field
    is reported once per role, from the first block that holds it.
    """
    cfg = cfg or PipelineConfig()
    pages = _page_order(doc)
    out = []
    for role in PARTY_ROLES:
        for page in pages:
            blocks = [b for b in page.blocks if b.role == role]
            if not blocks:
                continue
            have = {f.field for f in out if f.role == role}
            for spec in specs:
                if not spec.party or spec.field in have:
                    continue
                found = _search([page], spec, cfg, role=role, blocks=_block_order(blocks), neighbors=False)
                if found is not None:
                    out.append(found)
    logger.debug("%s: %d party field(s)", doc.source_id, len(out))
    return out


# -------------------------------------------------------------- report -----

@dataclass(frozen=True)
class ExtractionReport:
    source_id: str
    language: str
    matcher: str
    fields: Tuple[ExtractedField, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "fields", tuple(self.fields))

    def get(self, label: Union[FieldLabel, str], role: Role = Role.NONE) -> Optional[ExtractedField]:
        label, role = FieldLabel(label), Role(role)
        for item in self.fields:
            if item.field == label and item.role == role:
                return item
        return None

    def to_dict(self) -> Dict[str, Any]:
        return {
            "source_id": self.source_id,
            "language": self.language,
            "matcher": self.matcher,
            "fields": [f.to_dict() for f in self.fields],
            "corrections": [{"field": f.field.value, "role": f.role.value, "log": list(f.corrections)}
                            for f in self.fields if f.corrections],
        }

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "ExtractionReport":
        try:
            logs = {(c["field"], c["role"]): tuple(c["log"]) for c in data.get("corrections", ())}
            fields = []
            for item in data["fields"]:
                extracted = ExtractedField.from_dict(item)
                key = (extracted.field.value, extracted.role.value)
                fields.append(ExtractedField(extracted.field, extracted.role, extracted.value, extracted.key_conf,
                                             extracted.data_conf, extracted.combine_conf, extracted.source,
                                             logs.get(key, ())))
            return cls(str(data["source_id"]), str(data.get("language", "")), str(data.get("matcher", "")),
                       tuple(fields))
        except (KeyError, TypeError, ValueError) as e:
            raise SchemaError(f"malformed extraction report: {e}", "report") from e


def extract_all(doc: Document, specs: Sequence[FieldSpec] = DEFAULT_FIELD_SPECS,
                cfg: Optional[PipelineConfig] = None) -> ExtractionReport:
    """
    Document fields, then the party groups. A party field no role block
    provides is searched over the whole document.
    """
    cfg = cfg or PipelineConfig()
    fields: List[ExtractedField] = []
    for spec in specs:
        if not spec.party:
            found = extract_field(doc, spec, cfg)
            if found is not None:
                fields.append(found)
    groups = assemble_role_groups(doc, cfg, specs)
    covered = {f.field for f in groups}
    fields.extend(groups)
    for spec in specs:
        if spec.party and spec.field not in covered:
            found = extract_field(doc, spec, cfg)
            if found is not None:
                fields.append(found)
    logger.info("%s: %d field(s) extracted", doc.source_id, len(fields))
    return ExtractionReport(doc.source_id, doc.main_language, cfg.matcher, tuple(fields))


def reports_json(reports: Sequence[ExtractionReport]) -> bytes:
    return json.dumps([r.to_dict() for r in reports], ensure_ascii=False, indent=1).encode("utf-8")


def read_reports(data: Union[bytes, str]) -> List[ExtractionReport]:
    """Reads a report list, or a single report object"""
    try:
        parsed = json.loads(data)
    except (json.JSONDecodeError, UnicodeDecodeError) as e:
        raise SchemaError(f"reports are not valid JSON: {e}", "reports") from e
    if isinstance(parsed, dict):
        parsed = [parsed]
    if not isinstance(parsed, list):
        raise SchemaError("reports must be a JSON list", "reports")
    return [ExtractionReport.from_dict(item) for item in parsed]
