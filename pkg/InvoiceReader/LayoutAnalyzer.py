# -*- coding: utf-8-*-
"""
Module : LayoutAnalyzer
Author : InvoiceReader team
Description :
    Bottom-up physical layout analysis of one page:
    words are grouped into lines by alignment, style and distance,
    lines into blocks by alignment, font size and vertical gap.
    Blocks then get an absolute position (vertical and horizontal zone)
    and a relative one (the top/bottom/left/right/bottom-right neighbor graph).
"""
import logging
from dataclasses import replace
from typing import Dict, List, Optional, Sequence

# Local imports
from InvoiceReader.DocModel import BBox, Block, Direction, Line, Page, WordBox, ZoneH, ZoneV
from InvoiceReader.PipelineConfig import PipelineConfig

__all__ = [
    "reading_order",
    "group_words_into_lines",
    "group_lines_into_blocks",
    "assign_zones",
    "compute_neighbors",
    "analyze_page",
]

logger = logging.getLogger(__name__)

_ZONES = (ZoneV.HEADER, ZoneV.TOP, ZoneV.MIDDLE, ZoneV.BOTTOM, ZoneV.FOOTER)


def reading_order(words: Sequence[WordBox]) -> List[WordBox]:
    """
    Sorts words by (top bucketed to half a word height, left).
    A bucket is opened by its topmost word and spans half of that word's height.
    """
    ordered = sorted(words, key=lambda w: (w.bbox.top, w.bbox.left))
    rows: List[List[WordBox]] = []
    anchor_top, span = None, 0.0
    for word in ordered:
        if anchor_top is None or word.bbox.top > anchor_top + span:
            rows.append([])
            anchor_top, span = word.bbox.top, word.bbox.height / 2
        rows[-1].append(word)
    return [w for row in rows for w in sorted(row, key=lambda w: (w.bbox.left, w.bbox.top))]


def _joins_line(word: WordBox, words: List[WordBox], line_box: BBox, cfg: PipelineConfig) -> bool:
    first = words[0]
    last = words[-1]
    aligned = line_box.vertical_overlap(word.bbox) >= cfg.line_overlap_ratio * min(line_box.height, word.bbox.height)
    similar = abs(word.font_height - first.font_height) <= cfg.font_tolerance * first.font_height
    close = word.bbox.left - last.bbox.right < cfg.line_gap_factor * first.bbox.height
    return aligned and similar and close


def group_words_into_lines(words: Sequence[WordBox], cfg: PipelineConfig) -> List[Line]:
    """Groups the words of one page into lines, scanning them in reading order"""
    lines: List[Line] = []
    current: List[WordBox] = []
    box: Optional[BBox] = None
    for word in reading_order(words):
        if current and _joins_line(word, current, box, cfg):
            current.append(word)
            box = BBox.enclosing((box, word.bbox))
            continue
        if current:
            lines.append(Line.from_words(current))
        current, box = [word], word.bbox
    if current:
        lines.append(Line.from_words(current))
    return lines


def _char_width(line: Line) -> float:
    return line.bbox.width / max(1, len(line.text))


def _continues_block(prev: Line, line: Line, cfg: PipelineConfig) -> bool:
    if line.bbox.top <= prev.bbox.top:
        return False
    tolerance = _char_width(prev)
    pb, lb = prev.bbox, line.bbox
    aligned = (pb.horizontal_overlap(lb) > 0
               or abs(pb.left - lb.left) <= tolerance
               or abs(pb.center_x - lb.center_x) <= tolerance
               or abs(pb.right - lb.right) <= tolerance)
    similar = abs(line.font_height - prev.font_height) <= cfg.font_tolerance * prev.font_height
    gap = lb.top - pb.bottom
    close = gap < cfg.block_gap_factor * pb.height
    return aligned and similar and close


def group_lines_into_blocks(lines: Sequence[Line], cfg: PipelineConfig) -> List[Block]:
    """
    Groups lines (sorted by top) into blocks. A line joins the open block
    whose last line it continues with the smallest vertical gap.
    Block ids follow creation order.
    """
    groups: List[List[Line]] = []
    for line in sorted(lines, key=lambda l: (l.bbox.top, l.bbox.left)):
        best, best_key = None, None
        for index, group in enumerate(groups):
            prev = group[-1]
            if not _continues_block(prev, line, cfg):
                continue
            key = (line.bbox.top - prev.bbox.bottom, -prev.bbox.horizontal_overlap(line.bbox), index)
            if best_key is None or key < best_key:
                best, best_key = index, key
        if best is None:
            groups.append([line])
        else:
            groups[best].append(line)
    return [Block.from_lines(i, group) for i, group in enumerate(groups)]


def assign_zones(page: Page, cfg: PipelineConfig) -> Page:
    """Vertical zone from the block's vertical center, horizontal zone from the page midline (ties go left)"""
    blocks = []
    for block in page.blocks:
        ratio = block.bbox.center_y / page.height
        zone_v = _ZONES[-1]
        for zone, boundary in zip(_ZONES, cfg.zone_boundaries):
            if ratio < boundary:
                zone_v = zone
                break
        zone_h = ZoneH.LEFT if block.bbox.center_x <= page.width / 2 else ZoneH.RIGHT
        blocks.append(replace(block, zone_v=zone_v, zone_h=zone_h))
    return replace(page, blocks=tuple(blocks))


def _projection_ratio(a: BBox, b: BBox, vertical: bool) -> float:
    if vertical:
        return a.vertical_overlap(b) / min(a.height, b.height)
    return a.horizontal_overlap(b) / min(a.width, b.width)


def _gap(a: BBox, b: BBox, direction: Direction) -> Optional[int]:
    """Distance from a to b in one direction, None when b is not on that side"""
    if direction == Direction.BOTTOM:
        gap = b.top - a.bottom
    elif direction == Direction.TOP:
        gap = a.top - b.bottom
    elif direction == Direction.RIGHT:
        gap = b.left - a.right
    else:
        gap = a.left - b.right
    return gap if gap >= 0 else None


_AXIS_DIRECTIONS = (Direction.TOP, Direction.BOTTOM, Direction.LEFT, Direction.RIGHT)


def compute_neighbors(page: Page, cfg: Optional[PipelineConfig] = None) -> Page:
    """
    Builds the neighbor graph. For each block and each of top, bottom, left
    and right the neighbor is the nearest block on that side whose projection
    overlaps the block's by at least neighbor_overlap_ratio on the other axis.
    Ties go to the better aligned center, then to the lower id.
    bottom_right is the nearest block entirely below and to the right, with
    no overlap requirement.
    """
    cfg = cfg or PipelineConfig()
    blocks = list(page.blocks)
    links: Dict[int, Dict[Direction, int]] = {b.id: {} for b in blocks}

    for block in blocks:
        a = block.bbox
        for direction in _AXIS_DIRECTIONS:
            vertical = direction in (Direction.TOP, Direction.BOTTOM)
            best_key, best_id = None, None
            for other in blocks:
                if other.id == block.id:
                    continue
                b = other.bbox
                gap = _gap(a, b, direction)
                if gap is None or _projection_ratio(a, b, vertical=not vertical) < cfg.neighbor_overlap_ratio:
                    continue
                offset = abs(a.center_x - b.center_x) if vertical else abs(a.center_y - b.center_y)
                key = (gap, offset, other.id)
                if best_key is None or key < best_key:
                    best_key, best_id = key, other.id
            if best_id is not None:
                links[block.id][direction] = best_id

        best_key, best_id = None, None
        for other in blocks:
            b = other.bbox
            if other.id == block.id or b.top < a.bottom or b.left < a.right:
                continue
            key = ((b.left - a.right) ** 2 + (b.top - a.bottom) ** 2, other.id)
            if best_key is None or key < best_key:
                best_key, best_id = key, other.id
        if best_id is not None:
            links[block.id][Direction.BOTTOM_RIGHT] = best_id

    return replace(page, blocks=tuple(replace(b, neighbors=links[b.id]) for b in blocks))


def analyze_page(words: Sequence[WordBox], width: int, height: int, number: int, cfg: PipelineConfig) -> Page:
    """Runs the whole layout stage for one page"""
    lines = group_words_into_lines(words, cfg)
    blocks = group_lines_into_blocks(lines, cfg)
    logger.debug("Page %d: %d words, %d lines, %d blocks", number, len(words), len(lines), len(blocks))
    page = Page(number, width, height, tuple(blocks))
    return compute_neighbors(assign_zones(page, cfg), cfg)
