# -*- coding: utf-8-*-
"""
Shared builders for the InvoiceReader tests.
"""
import pytest

# Local imports
from InvoiceReader.DocModel import Annotation, AnnotationKind, BBox, Block, Line, Page, WordBox
from InvoiceReader.PipelineConfig import PipelineConfig


def make_line(text, left=100, top=100, char_width=10, height=20):
    """Line of words laid out left to right, one char_width per character"""
    words = []
    x = left
    for token in text.split():
        width = max(1, len(token) * char_width)
        words.append(WordBox(token, BBox(x, top, width, height), 0.95))
        x += width + char_width
    return Line.from_words(words)


def make_block(block_id, texts, left=100, top=100, height=20, pitch=28, annotations=(), **kwargs):
    lines = [make_line(text, left, top + i * pitch, height=height) for i, text in enumerate(texts)]
    block = Block.from_lines(block_id, lines)
    if annotations or kwargs:
        block = Block(block.id, block.lines, block.bbox, annotations=tuple(annotations), **kwargs)
    return block


def annotate(block, kind, label, line_index, fragment):
    """Annotation over the first occurrence of fragment in one line of block"""
    text = block.lines[line_index].text
    start = text.index(fragment)
    return Annotation(kind, label, (line_index, start, start + len(fragment)), fragment, 1.0, "test")


@pytest.fixture
def cfg():
    return PipelineConfig()


@pytest.fixture
def two_block_page():
    seller = make_block(0, ["Seller:", "Acme Trading Ltd", "12 High Street"], left=80, top=200)
    seller = Block(seller.id, seller.lines, seller.bbox, annotations=(
        annotate(seller, AnnotationKind.KEYWORD, "SELLER", 0, "Seller"),
        annotate(seller, AnnotationKind.ENTITY, "ORGANIZATION", 1, "Acme Trading Ltd"),
    ))
    buyer = make_block(1, ["Bill to:", "Jane Smith"], left=700, top=200)
    return Page(1, 1240, 1754, (seller, buyer))


__all__ = ["make_line", "make_block", "annotate", "AnnotationKind"]
