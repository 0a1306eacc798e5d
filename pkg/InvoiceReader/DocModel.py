# -*- coding: utf-8-*-
"""
Module : DocModel
Author : InvoiceReader team
Description :
    The document object model shared by every stage: boxes, words, lines,
    blocks, pages and documents, their annotations and extracted fields.
    All types are frozen; stages build enriched copies with dataclasses.replace.
    JSON and XML (de)serialization with a mandatory schema version lives here too.
"""
import json
import logging
import re
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Dict, Iterable, List, Mapping, Optional, Tuple

# XML imports
from lxml import etree

# Local imports
from InvoiceReader.Errors import ConfigError, InvariantError, SchemaError

__all__ = [
    "SCHEMA_VERSION",
    "BBox",
    "WordBox",
    "Line",
    "Annotation",
    "AnnotationKind",
    "Block",
    "BlockType",
    "Direction",
    "ZoneV",
    "ZoneH",
    "Page",
    "Document",
    "Role",
    "FieldLabel",
    "ExtractedField",
    "serialize_document",
    "deserialize_document",
    "FORMAT_JSON",
    "FORMAT_XML",
]

logger = logging.getLogger(__name__)

SCHEMA_VERSION = "1.0"
FORMAT_JSON = "JSON"
FORMAT_XML = "XML"


class AnnotationKind(str, Enum):
    KEYWORD = "KEYWORD"
    DATATYPE = "DATATYPE"
    ENTITY = "ENTITY"
    ADDRESS_PART = "ADDRESS_PART"


class ZoneV(str, Enum):
    HEADER = "header"
    TOP = "top"
    MIDDLE = "middle"
    BOTTOM = "bottom"
    FOOTER = "footer"


class ZoneH(str, Enum):
    LEFT = "left"
    RIGHT = "right"


class Direction(str, Enum):
    TOP = "top"
    BOTTOM = "bottom"
    LEFT = "left"
    RIGHT = "right"
    BOTTOM_RIGHT = "bottom_right"


class BlockType(str, Enum):
    GENERAL_INFO = "GENERAL_INFO"
    SELLER_INFO = "SELLER_INFO"
    BUYER_INFO = "BUYER_INFO"
    DELIVERY_INFO = "DELIVERY_INFO"
    BANK_INFO = "BANK_INFO"
    TITLE = "TITLE"
    PAGE_NUMBER = "PAGE_NUMBER"
    EMPTY = "EMPTY"


class Role(str, Enum):
    SELLER = "SELLER"
    BUYER = "BUYER"
    DELIVERY = "DELIVERY"
    NONE = "NONE"


class FieldLabel(str, Enum):
    INVOICE_NUMBER = "INVOICE NUMBER"
    ORDER_NUMBER = "ORDER NUMBER"
    SWIFT = "SWIFT"
    ACCOUNT_NUMBER = "ACCOUNT NUMBER"
    PAGE_NUMBER = "PAGE NUMBER"
    INVOICE_DATE = "INVOICE DATE"
    DUE_DATE = "DUE DATE"
    PAYMENT_DATE = "PAYMENT DATE"
    TOTAL_DUE = "TOTAL DUE"
    IBAN = "IBAN"
    PAYMENT_METHOD = "PAYMENT METHOD"
    COMPANY_NAME = "COMPANY NAME"
    CONTACTS = "CONTACTS"
    ADDRESS = "ADDRESS"
    VAT_NUMBER = "VAT NUMBER"
    EMAIL = "EMAIL"
    WEBSITE = "WEBSITE"
    PHONE_NUMBER = "PHONE NUMBER"
    COMPANY_ID = "COMPANY ID"
    AMOUNT_PAID = "AMOUNT PAID"


_LINE_BREAKS = re.compile(r"[\r\n\x0b\x0c\x85\u2028\u2029]")
_SPACES = re.compile(r"\s+")


def _normalize_ws(text: str) -> str:
    return _SPACES.sub(" ", text).strip()


@dataclass(frozen=True)
class BBox:
    """Axis-aligned box in page pixels, origin top-left, y grows downward"""

    left: int
    top: int
    width: int
    height: int

    def __post_init__(self):
        if self.width <= 0 or self.height <= 0:
            raise InvariantError(f"bbox must have positive size, got {self.width}x{self.height}")
        if self.left < 0 or self.top < 0:
            raise InvariantError(f"bbox origin must be non-negative, got ({self.left}, {self.top})")

    @property
    def right(self) -> int:
        return self.left + self.width

    @property
    def bottom(self) -> int:
        return self.top + self.height

    @property
    def center_x(self) -> float:
        return self.left + self.width / 2

    @property
    def center_y(self) -> float:
        return self.top + self.height / 2

    def contains(self, other: "BBox") -> bool:
        return (self.left <= other.left and self.top <= other.top
                and other.right <= self.right and other.bottom <= self.bottom)

    def horizontal_overlap(self, other: "BBox") -> int:
        return max(0, min(self.right, other.right) - max(self.left, other.left))

    def vertical_overlap(self, other: "BBox") -> int:
        return max(0, min(self.bottom, other.bottom) - max(self.top, other.top))

    @staticmethod
    def enclosing(boxes: Iterable["BBox"]) -> "BBox":
        boxes = list(boxes)
        if not boxes:
            raise InvariantError("cannot enclose an empty set of boxes")
        left = min(b.left for b in boxes)
        top = min(b.top for b in boxes)
        right = max(b.right for b in boxes)
        bottom = max(b.bottom for b in boxes)
        return BBox(left, top, right - left, bottom - top)


@dataclass(frozen=True)
class WordBox:
    """
    One OCR word.
    ocr_confidence : fraction in [0, 1] or None when the engine gave none
    font_height : style height in pixels, defaults to the bbox height
    """

    text: str
    bbox: BBox
    ocr_confidence: Optional[float] = None
    font_height: Optional[int] = None

    def __post_init__(self):
        if not self.text or not self.text.strip():
            raise InvariantError("word text must be non-empty")
        if _LINE_BREAKS.search(self.text):
            raise InvariantError(f"word text contains a line break: {self.text!r}")
        if self.ocr_confidence is not None and not 0.0 <= self.ocr_confidence <= 1.0:
            raise InvariantError(f"ocr confidence out of range: {self.ocr_confidence}")
        if self.font_height is None:
            object.__setattr__(self, "font_height", self.bbox.height)
        elif self.font_height <= 0:
            raise InvariantError("font height must be positive")


@dataclass(frozen=True)
class Line:
    words: Tuple[WordBox, ...]
    bbox: BBox
    text: str

    def __post_init__(self):
        if not self.words:
            raise InvariantError("a line needs at least one word")
        lefts = [w.bbox.left for w in self.words]
        if lefts != sorted(lefts):
            raise InvariantError("line words must be sorted by left edge")
        if not all(self.bbox.contains(w.bbox) for w in self.words):
            raise InvariantError("line bbox must enclose every word")
        if self.text != " ".join(w.text for w in self.words):
            raise InvariantError("line text must be its words joined by single spaces")

    @classmethod
    def from_words(cls, words: Iterable[WordBox]) -> "Line":
        words = tuple(words)
        if not words:
            raise InvariantError("a line needs at least one word")
        return cls(words, BBox.enclosing(w.bbox for w in words), " ".join(w.text for w in words))

    @property
    def font_height(self) -> int:
        return max(w.font_height for w in self.words)

    def span_bbox(self, start: int, end: int) -> "BBox":
        """Box of the words covering chars start..end of the line text"""
        boxes, offset = [], 0
        for word in self.words:
            word_end = offset + len(word.text)
            if offset < end and start < word_end:
                boxes.append(word.bbox)
            offset = word_end + 1
        return BBox.enclosing(boxes) if boxes else self.bbox


@dataclass(frozen=True)
class Annotation:
    """
    A labelled span of one line of a block.
    span : (line index in the block, char start, char end)
    """

    kind: AnnotationKind
    label: str
    span: Tuple[int, int, int]
    matched_text: str
    score: float = 1.0
    source: str = ""

    def __post_init__(self):
        object.__setattr__(self, "kind", AnnotationKind(self.kind))
        object.__setattr__(self, "span", tuple(int(v) for v in self.span))
        if len(self.span) != 3:
            raise InvariantError("annotation span must be (line, start, end)")
        line, start, end = self.span
        if line < 0 or start < 0 or end <= start:
            raise InvariantError(f"invalid annotation span {self.span}")
        if not 0.0 <= self.score <= 1.0:
            raise InvariantError(f"annotation score out of range: {self.score}")

    @property
    def line_index(self) -> int:
        return self.span[0]

    @property
    def start(self) -> int:
        return self.span[1]

    @property
    def end(self) -> int:
        return self.span[2]

    def overlaps(self, other: "Annotation") -> bool:
        return self.line_index == other.line_index and self.start < other.end and other.start < self.end


@dataclass(frozen=True)
class Block:
    id: int
    lines: Tuple[Line, ...]
    bbox: BBox
    zone_v: Optional[ZoneV] = None
    zone_h: Optional[ZoneH] = None
    neighbors: Mapping[Direction, Optional[int]] = field(default_factory=dict)
    annotations: Tuple[Annotation, ...] = ()
    block_types: frozenset = frozenset()
    role: Optional[Role] = None

    def __post_init__(self):
        if not self.lines:
            raise InvariantError(f"block {self.id} has no lines")
        tops = [line.bbox.top for line in self.lines]
        if tops != sorted(tops):
            raise InvariantError(f"block {self.id} lines must be sorted by top")
        if not all(self.bbox.contains(line.bbox) for line in self.lines):
            raise InvariantError(f"block {self.id} bbox must enclose its lines")
        object.__setattr__(self, "lines", tuple(self.lines))
        object.__setattr__(self, "annotations", tuple(self.annotations))
        object.__setattr__(self, "zone_v", ZoneV(self.zone_v) if self.zone_v is not None else None)
        object.__setattr__(self, "zone_h", ZoneH(self.zone_h) if self.zone_h is not None else None)
        object.__setattr__(self, "role", Role(self.role) if self.role is not None else None)
        neighbors = {Direction(k): v for k, v in dict(self.neighbors).items() if v is not None}
        if self.id in neighbors.values():
            raise InvariantError(f"block {self.id} cannot be its own neighbor")
        object.__setattr__(self, "neighbors", neighbors)
        types = frozenset(BlockType(t) for t in self.block_types)
        if BlockType.EMPTY in types and len(types) > 1:
            raise InvariantError(f"block {self.id}: EMPTY cannot co-occur with other block types")
        object.__setattr__(self, "block_types", types)
        for annot in self.annotations:
            line_index, start, end = annot.span
            if line_index >= len(self.lines) or end > len(self.lines[line_index].text):
                raise InvariantError(f"block {self.id}: annotation span {annot.span} outside its line")
            sliced = self.lines[line_index].text[start:end]
            if _normalize_ws(sliced) != _normalize_ws(annot.matched_text):
                raise InvariantError(
                    f"block {self.id}: annotation text {annot.matched_text!r} does not match span {sliced!r}"
                )

    @classmethod
    def from_lines(cls, block_id: int, lines: Iterable[Line]) -> "Block":
        lines = tuple(lines)
        return cls(block_id, lines, BBox.enclosing(line.bbox for line in lines))

    @property
    def text(self) -> str:
        return "\n".join(line.text for line in self.lines)

    def neighbor(self, direction: Direction) -> Optional[int]:
        return self.neighbors.get(Direction(direction))

    def annotations_of(self, kind: AnnotationKind) -> List[Annotation]:
        return [a for a in self.annotations if a.kind == kind]

    def labels(self, *kinds: AnnotationKind) -> frozenset:
        kinds = kinds or tuple(AnnotationKind)
        return frozenset(a.label for a in self.annotations if a.kind in kinds)


@dataclass(frozen=True)
class Page:
    number: int
    width: int
    height: int
    blocks: Tuple[Block, ...] = ()
    is_invoice_first_page: Optional[bool] = None

    def __post_init__(self):
        if self.number < 1:
            raise InvariantError(f"page numbers are 1-based, got {self.number}")
        if self.width <= 0 or self.height <= 0:
            raise InvariantError(f"page {self.number} must have a positive size")
        object.__setattr__(self, "blocks", tuple(self.blocks))
        ids = [b.id for b in self.blocks]
        if len(set(ids)) != len(ids):
            raise InvariantError(f"page {self.number} has duplicate block ids")
        known = set(ids)
        for block in self.blocks:
            if block.bbox.right > self.width or block.bbox.bottom > self.height:
                raise InvariantError(f"page {self.number}: block {block.id} lies outside the page")
            for direction, ref in block.neighbors.items():
                if ref not in known:
                    raise InvariantError(
                        f"page {self.number}: block {block.id} {direction.value} neighbor {ref} does not exist"
                    )

    def block_by_id(self, block_id: int) -> Optional[Block]:
        for block in self.blocks:
            if block.id == block_id:
                return block
        return None

    @property
    def text(self) -> str:
        return "\n".join(block.text for block in self.blocks)


@dataclass(frozen=True)
class Document:
    pages: Tuple[Page, ...]
    main_language: str
    source_id: str

    def __post_init__(self):
        object.__setattr__(self, "pages", tuple(self.pages))
        numbers = [p.number for p in self.pages]
        if numbers != list(range(1, len(numbers) + 1)):
            raise InvariantError(f"page numbers must be consecutive from 1, got {numbers}")
        if not self.main_language:
            raise InvariantError("main language must be set")

    @property
    def text(self) -> str:
        return "\n".join(page.text for page in self.pages)


@dataclass(frozen=True)
class ExtractedField:
    """
    One extracted metadata item with its confidence triple.
    source : (page number, block id, line index)
    """

    field: FieldLabel
    role: Role
    value: str
    key_conf: float
    data_conf: float
    combine_conf: float
    source: Tuple[int, int, int]
    corrections: Tuple[str, ...] = field(default=(), compare=False)

    def __post_init__(self):
        object.__setattr__(self, "field", FieldLabel(self.field))
        object.__setattr__(self, "role", Role(self.role))
        object.__setattr__(self, "source", tuple(self.source))
        object.__setattr__(self, "corrections", tuple(self.corrections))
        for name in ("key_conf", "data_conf", "combine_conf"):
            if not 0.0 <= getattr(self, name) <= 1.0:
                raise InvariantError(f"{name} out of range: {getattr(self, name)}")
        both = self.key_conf > 0 and self.data_conf > 0
        if both != (self.combine_conf == 1.0):
            raise InvariantError(
                f"combine_conf must be 1.0 exactly when keyword and data were both found ({self.field.value})"
            )

    def to_dict(self) -> Dict[str, Any]:
        page, block, line = self.source
        return {
            "field": self.field.value,
            "role": self.role.value,
            "value": self.value,
            "key_conf": self.key_conf,
            "data_conf": self.data_conf,
            "combine_conf": self.combine_conf,
            "page": page,
            "block": block,
            "line": line,
        }

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "ExtractedField":
        return cls(
            FieldLabel(data["field"]),
            Role(data["role"]),
            data["value"],
            float(data["key_conf"]),
            float(data["data_conf"]),
            float(data["combine_conf"]),
            (int(data["page"]), int(data["block"]), int(data["line"])),
        )


# ---------------------------------------------------------------- JSON -----

def _word_to_dict(word: WordBox) -> Dict[str, Any]:
    out = {
        "text": word.text,
        "left": word.bbox.left,
        "top": word.bbox.top,
        "width": word.bbox.width,
        "height": word.bbox.height,
        "font_height": word.font_height,
    }
    if word.ocr_confidence is not None:
        out["conf"] = word.ocr_confidence
    return out


def _annotation_to_dict(annot: Annotation) -> Dict[str, Any]:
    line, start, end = annot.span
    return {
        "kind": annot.kind.value,
        "label": annot.label,
        "line": line,
        "start": start,
        "end": end,
        "text": annot.matched_text,
        "score": annot.score,
        "source": annot.source,
    }


def _block_to_dict(block: Block) -> Dict[str, Any]:
    return {
        "id": block.id,
        "bbox": [block.bbox.left, block.bbox.top, block.bbox.width, block.bbox.height],
        "zone_v": block.zone_v.value if block.zone_v else None,
        "zone_h": block.zone_h.value if block.zone_h else None,
        "role": block.role.value if block.role else None,
        "neighbors": {d.value: ref for d, ref in sorted(block.neighbors.items(), key=lambda kv: kv[0].value)},
        "block_types": sorted(t.value for t in block.block_types),
        "lines": [{"text": line.text, "words": [_word_to_dict(w) for w in line.words]} for line in block.lines],
        "annotations": [_annotation_to_dict(a) for a in block.annotations],
    }


def _document_to_dict(doc: Document) -> Dict[str, Any]:
    return {
        "schema_version": SCHEMA_VERSION,
        "source_id": doc.source_id,
        "main_language": doc.main_language,
        "pages": [
            {
                "number": page.number,
                "width": page.width,
                "height": page.height,
                "is_invoice_first_page": page.is_invoice_first_page,
                "blocks": [_block_to_dict(b) for b in page.blocks],
            }
            for page in doc.pages
        ],
    }


class _Reader:
    """Typed accessors over parsed JSON that raise SchemaError with the element path"""

    @staticmethod
    def get(data: Any, key: str, path: str, kind=None, optional: bool = False):
        if not isinstance(data, dict):
            raise SchemaError("expected an object", path)
        if key not in data or data[key] is None:
            if optional:
                return None
            raise SchemaError(f"missing '{key}'", path)
        value = data[key]
        if kind is int:
            if isinstance(value, bool) or not isinstance(value, (int, float)) or int(value) != value:
                raise SchemaError(f"'{key}' must be an integer", f"{path}.{key}")
            return int(value)
        if kind is float:
            if isinstance(value, bool) or not isinstance(value, (int, float)):
                raise SchemaError(f"'{key}' must be a number", f"{path}.{key}")
            return float(value)
        if kind is not None and not isinstance(value, kind):
            raise SchemaError(f"'{key}' has the wrong type", f"{path}.{key}")
        return value


def _enum(enum_type, value, path: str):
    try:
        return enum_type(value)
    except ValueError as e:
        raise SchemaError(f"unknown value {value!r}", path) from e


def _word_from_dict(data: Any, path: str) -> WordBox:
    r = _Reader
    bbox = BBox(r.get(data, "left", path, int), r.get(data, "top", path, int),
                r.get(data, "width", path, int), r.get(data, "height", path, int))
    return WordBox(
        r.get(data, "text", path, str),
        bbox,
        r.get(data, "conf", path, float, optional=True),
        r.get(data, "font_height", path, int, optional=True),
    )


def _annotation_from_dict(data: Any, path: str) -> Annotation:
    r = _Reader
    return Annotation(
        _enum(AnnotationKind, r.get(data, "kind", path, str), f"{path}.kind"),
        r.get(data, "label", path, str),
        (r.get(data, "line", path, int), r.get(data, "start", path, int), r.get(data, "end", path, int)),
        r.get(data, "text", path, str),
        r.get(data, "score", path, float),
        r.get(data, "source", path, str, optional=True) or "",
    )


def _block_from_dict(data: Any, path: str) -> Block:
    r = _Reader
    lines = []
    for i, line in enumerate(r.get(data, "lines", path, list)):
        line_path = f"{path}.lines[{i}]"
        words = [_word_from_dict(w, f"{line_path}.words[{j}]")
                 for j, w in enumerate(r.get(line, "words", line_path, list))]
        lines.append(Line.from_words(words))
    box = r.get(data, "bbox", path, list)
    if len(box) != 4 or not all(isinstance(v, int) and not isinstance(v, bool) for v in box):
        raise SchemaError("bbox must be four integers", f"{path}.bbox")
    zone_v = r.get(data, "zone_v", path, str, optional=True)
    zone_h = r.get(data, "zone_h", path, str, optional=True)
    role = r.get(data, "role", path, str, optional=True)
    neighbors = {}
    for key, ref in (r.get(data, "neighbors", path, dict, optional=True) or {}).items():
        if isinstance(ref, bool) or not isinstance(ref, int):
            raise SchemaError("neighbor reference must be an integer block id", f"{path}.neighbors.{key}")
        neighbors[_enum(Direction, key, f"{path}.neighbors")] = ref
    return Block(
        r.get(data, "id", path, int),
        tuple(lines),
        BBox(*box),
        _enum(ZoneV, zone_v, f"{path}.zone_v") if zone_v else None,
        _enum(ZoneH, zone_h, f"{path}.zone_h") if zone_h else None,
        neighbors,
        tuple(_annotation_from_dict(a, f"{path}.annotations[{i}]")
              for i, a in enumerate(r.get(data, "annotations", path, list, optional=True) or [])),
        frozenset(_enum(BlockType, t, f"{path}.block_types")
                  for t in r.get(data, "block_types", path, list, optional=True) or []),
        _enum(Role, role, f"{path}.role") if role else None,
    )


def _document_from_dict(data: Any) -> Document:
    r = _Reader
    version = r.get(data, "schema_version", "document", str)
    if version != SCHEMA_VERSION:
        raise SchemaError(f"unsupported schema version {version!r}", "document.schema_version")
    pages = []
    for i, page in enumerate(r.get(data, "pages", "document", list)):
        path = f"pages[{i}]"
        first = r.get(page, "is_invoice_first_page", path, bool, optional=True)
        pages.append(Page(
            r.get(page, "number", path, int),
            r.get(page, "width", path, int),
            r.get(page, "height", path, int),
            tuple(_block_from_dict(b, f"{path}.blocks[{j}]")
                  for j, b in enumerate(r.get(page, "blocks", path, list))),
            first,
        ))
    return Document(tuple(pages), r.get(data, "main_language", "document", str),
                    r.get(data, "source_id", "document", str))


# ----------------------------------------------------------------- XML -----

def _set(element, **attrs):
    for key, value in attrs.items():
        if value is not None:
            element.set(key, str(value))


def _document_to_xml(doc: Document) -> bytes:
    root = etree.Element("document")
    _set(root, schema_version=SCHEMA_VERSION, source_id=doc.source_id, main_language=doc.main_language)
    for page in doc.pages:
        page_el = etree.SubElement(root, "page")
        first = None if page.is_invoice_first_page is None else str(page.is_invoice_first_page).lower()
        _set(page_el, number=page.number, width=page.width, height=page.height, first_page=first)
        for block in page.blocks:
            block_el = etree.SubElement(page_el, "block")
            _set(block_el, id=block.id, left=block.bbox.left, top=block.bbox.top,
                 width=block.bbox.width, height=block.bbox.height,
                 zone_v=block.zone_v.value if block.zone_v else None,
                 zone_h=block.zone_h.value if block.zone_h else None,
                 role=block.role.value if block.role else None)
            for direction, ref in sorted(block.neighbors.items(), key=lambda kv: kv[0].value):
                _set(etree.SubElement(block_el, "neighbor"), direction=direction.value, ref=ref)
            for block_type in sorted(t.value for t in block.block_types):
                etree.SubElement(block_el, "type").text = block_type
            for line in block.lines:
                line_el = etree.SubElement(block_el, "line")
                for word in line.words:
                    word_el = etree.SubElement(line_el, "word")
                    _set(word_el, left=word.bbox.left, top=word.bbox.top, width=word.bbox.width,
                         height=word.bbox.height, font_height=word.font_height,
                         conf=None if word.ocr_confidence is None else repr(word.ocr_confidence))
                    word_el.text = word.text
            for annot in block.annotations:
                annot_el = etree.SubElement(block_el, "annotation")
                line, start, end = annot.span
                _set(annot_el, kind=annot.kind.value, label=annot.label, line=line, start=start,
                     end=end, score=repr(annot.score), source=annot.source)
                annot_el.text = annot.matched_text
    return etree.tostring(root, xml_declaration=True, encoding="UTF-8", pretty_print=True)


def _attr(element, name: str, path: str, kind=str, optional: bool = False):
    value = element.get(name)
    if value is None:
        if optional:
            return None
        raise SchemaError(f"missing attribute '{name}'", path)
    try:
        return kind(value)
    except ValueError as e:
        raise SchemaError(f"attribute '{name}' has an invalid value {value!r}", path) from e


def _children(element, tag: str):
    return [child for child in element if child.tag == tag]


def _document_from_xml(data: bytes) -> Document:
    parser = etree.XMLParser(resolve_entities=False, no_network=True, remove_blank_text=False)
    try:
        root = etree.fromstring(data, parser)
    except etree.XMLSyntaxError as e:
        raise SchemaError(f"malformed XML: {e}", "document") from e
    if root.tag != "document":
        raise SchemaError(f"root element must be 'document', got '{root.tag}'", "document")
    version = _attr(root, "schema_version", "document")
    if version != SCHEMA_VERSION:
        raise SchemaError(f"unsupported schema version {version!r}", "document.schema_version")
    pages = []
    for i, page_el in enumerate(_children(root, "page")):
        path = f"pages[{i}]"
        blocks = []
        for j, block_el in enumerate(_children(page_el, "block")):
            block_path = f"{path}.blocks[{j}]"
            lines = []
            for k, line_el in enumerate(_children(block_el, "line")):
                words = []
                for m, word_el in enumerate(_children(line_el, "word")):
                    word_path = f"{block_path}.lines[{k}].words[{m}]"
                    bbox = BBox(_attr(word_el, "left", word_path, int), _attr(word_el, "top", word_path, int),
                                _attr(word_el, "width", word_path, int), _attr(word_el, "height", word_path, int))
                    words.append(WordBox(word_el.text or "", bbox,
                                         _attr(word_el, "conf", word_path, float, optional=True),
                                         _attr(word_el, "font_height", word_path, int, optional=True)))
                lines.append(Line.from_words(words))
            neighbors = {}
            for n_el in _children(block_el, "neighbor"):
                direction = _enum(Direction, _attr(n_el, "direction", block_path), f"{block_path}.neighbor")
                neighbors[direction] = _attr(n_el, "ref", block_path, int)
            annotations = []
            for k, a_el in enumerate(_children(block_el, "annotation")):
                a_path = f"{block_path}.annotations[{k}]"
                annotations.append(Annotation(
                    _enum(AnnotationKind, _attr(a_el, "kind", a_path), a_path),
                    _attr(a_el, "label", a_path),
                    (_attr(a_el, "line", a_path, int), _attr(a_el, "start", a_path, int),
                     _attr(a_el, "end", a_path, int)),
                    a_el.text or "",
                    _attr(a_el, "score", a_path, float),
                    _attr(a_el, "source", a_path, optional=True) or "",
                ))
            zone_v = _attr(block_el, "zone_v", block_path, optional=True)
            zone_h = _attr(block_el, "zone_h", block_path, optional=True)
            role = _attr(block_el, "role", block_path, optional=True)
            blocks.append(Block(
                _attr(block_el, "id", block_path, int),
                tuple(lines),
                BBox(_attr(block_el, "left", block_path, int), _attr(block_el, "top", block_path, int),
                     _attr(block_el, "width", block_path, int), _attr(block_el, "height", block_path, int)),
                _enum(ZoneV, zone_v, block_path) if zone_v else None,
                _enum(ZoneH, zone_h, block_path) if zone_h else None,
                neighbors,
                tuple(annotations),
                frozenset(_enum(BlockType, t.text, block_path) for t in _children(block_el, "type")),
                _enum(Role, role, block_path) if role else None,
            ))
        first = _attr(page_el, "first_page", path, optional=True)
        if first not in (None, "true", "false"):
            raise SchemaError(f"first_page must be true or false, got {first!r}", path)
        pages.append(Page(_attr(page_el, "number", path, int), _attr(page_el, "width", path, int),
                          _attr(page_el, "height", path, int), tuple(blocks),
                          None if first is None else first == "true"))
    return Document(tuple(pages), _attr(root, "main_language", "document"), _attr(root, "source_id", "document"))


def serialize_document(doc: Document, format: str = FORMAT_JSON) -> bytes:
    """Serializes a document to UTF-8 JSON or XML bytes"""
    if format.upper() == FORMAT_JSON:
        return json.dumps(_document_to_dict(doc), ensure_ascii=False, indent=1).encode("utf-8")
    if format.upper() == FORMAT_XML:
        return _document_to_xml(doc)
    raise ConfigError(f"unknown document format {format!r}")


def deserialize_document(data: bytes, format: str = FORMAT_JSON) -> Document:
    """
    Reads a document written by serialize_document.
    Raises SchemaError for malformed input and InvariantError for
    well-formed input that breaks a model invariant.
    """
    if format.upper() == FORMAT_XML:
        return _document_from_xml(data)
    if format.upper() != FORMAT_JSON:
        raise ConfigError(f"unknown document format {format!r}")
    try:
        parsed = json.loads(data.decode("utf-8") if isinstance(data, bytes) else data)
    except (UnicodeDecodeError, json.JSONDecodeError) as e:
        raise SchemaError(f"malformed JSON: {e}", "document") from e
    return _document_from_dict(parsed)
