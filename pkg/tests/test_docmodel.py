# -*- coding: utf-8-*-
import json

import pytest

# Local imports
from conftest import annotate, make_block, make_line
from InvoiceReader.DocModel import (
    FORMAT_JSON,
    FORMAT_XML,
    Annotation,
    AnnotationKind,
    BBox,
    Block,
    BlockType,
    Direction,
    Document,
    ExtractedField,
    FieldLabel,
    Line,
    Page,
    Role,
    WordBox,
    ZoneH,
    ZoneV,
    deserialize_document,
    serialize_document,
)
from InvoiceReader.Errors import ConfigError, InvariantError, SchemaError


def _document():
    seller = make_block(0, ["Seller:", "Acme Trading Ltd"], left=80, top=200)
    seller = Block(seller.id, seller.lines, seller.bbox, ZoneV.TOP, ZoneH.LEFT, {Direction.RIGHT: 1},
                   (annotate(seller, AnnotationKind.KEYWORD, "SELLER", 0, "Seller"),),
                   frozenset({BlockType.SELLER_INFO}), Role.SELLER)
    buyer = make_block(1, ["Bill to:", "Jane Smith"], left=700, top=200)
    buyer = Block(buyer.id, buyer.lines, buyer.bbox, ZoneV.TOP, ZoneH.RIGHT, {Direction.LEFT: 0},
                  block_types=frozenset({BlockType.EMPTY}))
    return Document((Page(1, 1240, 1754, (seller, buyer), True),), "en", "sample")


def test_bbox_edges_and_overlap():
    a = BBox(10, 20, 100, 50)
    b = BBox(60, 40, 100, 50)
    assert (a.right, a.bottom) == (110, 70)
    assert a.horizontal_overlap(b) == 50
    assert a.vertical_overlap(b) == 30
    assert BBox.enclosing([a, b]) == BBox(10, 20, 150, 70)
    assert BBox(0, 0, 200, 200).contains(a)


@pytest.mark.parametrize("args", [(0, 0, 0, 5), (0, 0, 5, -1), (-1, 0, 5, 5)])
def test_bbox_rejects_bad_geometry(args):
    with pytest.raises(InvariantError):
        BBox(*args)


def test_word_defaults_font_height_to_box_height():
    word = WordBox("Invoice", BBox(0, 0, 70, 22))
    assert word.font_height == 22


@pytest.mark.parametrize("text", ["", "  ", "a\nb"])
def test_word_rejects_bad_text(text):
    with pytest.raises(InvariantError):
        WordBox(text, BBox(0, 0, 10, 10))


def test_line_text_is_words_joined():
    line = make_line("Invoice number 2024-001")
    assert line.text == "Invoice number 2024-001"
    assert line.bbox.contains(line.words[-1].bbox)


def test_line_rejects_unsorted_words():
    first = WordBox("b", BBox(50, 0, 10, 10))
    second = WordBox("a", BBox(10, 0, 10, 10))
    with pytest.raises(InvariantError):
        Line((first, second), BBox(10, 0, 50, 10), "b a")


def test_line_span_bbox_covers_touched_words():
    line = make_line("Total due 120.00", left=0, char_width=10)
    box = line.span_bbox(6, 16)
    assert box.left == line.words[1].bbox.left
    assert box.right == line.words[2].bbox.right


def test_annotation_must_match_its_span():
    block = make_block(0, ["IBAN GB82 WEST"])
    good = annotate(block, AnnotationKind.KEYWORD, "IBAN", 0, "IBAN")
    Block(block.id, block.lines, block.bbox, annotations=(good,))
    bad = Annotation(AnnotationKind.KEYWORD, "IBAN", (0, 0, 4), "SWIFT")
    with pytest.raises(InvariantError):
        Block(block.id, block.lines, block.bbox, annotations=(bad,))


def test_annotation_span_outside_line():
    block = make_block(0, ["IBAN"])
    bad = Annotation(AnnotationKind.KEYWORD, "IBAN", (1, 0, 4), "IBAN")
    with pytest.raises(InvariantError):
        Block(block.id, block.lines, block.bbox, annotations=(bad,))


def test_empty_block_type_is_exclusive():
    block = make_block(0, ["Thank you"])
    with pytest.raises(InvariantError):
        Block(block.id, block.lines, block.bbox, block_types=frozenset({BlockType.EMPTY, BlockType.TITLE}))


def test_block_cannot_neighbor_itself():
    block = make_block(3, ["x"])
    with pytest.raises(InvariantError):
        Block(block.id, block.lines, block.bbox, neighbors={Direction.TOP: 3})


def test_page_checks_neighbor_references():
    block = make_block(0, ["x"])
    block = Block(block.id, block.lines, block.bbox, neighbors={Direction.BOTTOM: 7})
    with pytest.raises(InvariantError):
        Page(1, 1240, 1754, (block,))


def test_page_rejects_blocks_outside():
    block = make_block(0, ["far away"], left=1200)
    with pytest.raises(InvariantError):
        Page(1, 1240, 1754, (block,))


def test_document_pages_are_consecutive():
    with pytest.raises(InvariantError):
        Document((Page(2, 100, 100),), "en", "x")


def test_block_labels_filter_by_kind(two_block_page):
    seller = two_block_page.blocks[0]
    assert seller.labels(AnnotationKind.KEYWORD) == frozenset({"SELLER"})
    assert seller.labels() == frozenset({"SELLER", "ORGANIZATION"})


def test_extracted_field_combine_conf_rule():
    ExtractedField(FieldLabel.IBAN, Role.NONE, "GB82WEST12345698765432", 1.0, 1.0, 1.0, (1, 0, 0))
    ExtractedField(FieldLabel.IBAN, Role.NONE, "GB82WEST12345698765432", 0.0, 0.8, 0.8, (1, 0, 0))
    with pytest.raises(InvariantError):
        ExtractedField(FieldLabel.IBAN, Role.NONE, "x", 1.0, 1.0, 0.9, (1, 0, 0))
    with pytest.raises(InvariantError):
        ExtractedField(FieldLabel.IBAN, Role.NONE, "x", 0.7, 0.0, 1.0, (1, 0, 0))


@pytest.mark.parametrize("fmt", [FORMAT_JSON, FORMAT_XML])
def test_serialization_keeps_the_document(fmt):
    doc = _document()
    assert deserialize_document(serialize_document(doc, fmt), fmt) == doc


def test_unknown_format():
    with pytest.raises(ConfigError):
        serialize_document(_document(), "yaml")


def test_json_schema_error_has_path():
    data = json.loads(serialize_document(_document()))
    data["pages"][0]["blocks"][1]["lines"][0]["words"][0]["width"] = "wide"
    with pytest.raises(SchemaError) as err:
        deserialize_document(json.dumps(data).encode("utf-8"))
    assert err.value.path == "pages[0].blocks[1].lines[0].words[0].width"


def test_json_invariant_violation_is_not_a_schema_error():
    data = json.loads(serialize_document(_document()))
    data["pages"][0]["blocks"][0]["neighbors"] = {"right": 42}
    with pytest.raises(InvariantError):
        deserialize_document(json.dumps(data).encode("utf-8"))


def test_malformed_xml():
    with pytest.raises(SchemaError):
        deserialize_document(b"<document><page>", FORMAT_XML)
