# -*- coding: utf-8-*-
"""
Module : QInvoiceWidget
Author : InvoiceReader team
Description :
    This is the QWidget to be inserted in your standard PyQt5 application.
    It shows one page of an analyzed Document: block rectangles colored by
    block type, annotation spans and the extracted field values.
    Clicking a block emits blockSelected with its id.
"""
import logging
from typing import Dict, Iterable, Optional

# PyQt imports
from PyQt5.QtCore import QPointF, QRectF, QSize, Qt, pyqtSignal
from PyQt5.QtGui import QBrush, QColor, QFont, QPainter, QPen
from PyQt5.QtWidgets import QWidget

# Local imports
from InvoiceReader.DocModel import AnnotationKind, BBox, Block, BlockType, Document, ExtractedField, Page
from InvoiceReader.Errors import InvariantError

__all__ = ["QInvoiceWidget", "BLOCK_COLORS", "ANNOTATION_COLORS"]

logger = logging.getLogger(__name__)

BLOCK_COLORS = {
    BlockType.TITLE: QColor(120, 120, 120),
    BlockType.GENERAL_INFO: QColor(30, 110, 200),
    BlockType.SELLER_INFO: QColor(40, 160, 70),
    BlockType.BUYER_INFO: QColor(220, 120, 20),
    BlockType.DELIVERY_INFO: QColor(150, 60, 180),
    BlockType.BANK_INFO: QColor(200, 40, 60),
    BlockType.PAGE_NUMBER: QColor(90, 90, 160),
    BlockType.EMPTY: QColor(180, 180, 180),
}
_TYPE_ORDER = (BlockType.SELLER_INFO, BlockType.BUYER_INFO, BlockType.DELIVERY_INFO, BlockType.BANK_INFO,
               BlockType.GENERAL_INFO, BlockType.TITLE, BlockType.PAGE_NUMBER, BlockType.EMPTY)

ANNOTATION_COLORS = {
    AnnotationKind.KEYWORD: QColor(255, 220, 0, 90),
    AnnotationKind.DATATYPE: QColor(0, 200, 255, 70),
    AnnotationKind.ENTITY: QColor(0, 220, 100, 70),
    AnnotationKind.ADDRESS_PART: QColor(255, 100, 180, 60),
}


def _block_color(block: Block) -> QColor:
    for block_type in _TYPE_ORDER:
        if block_type in block.block_types:
            return BLOCK_COLORS[block_type]
    return BLOCK_COLORS[BlockType.EMPTY]


class QInvoiceWidget(QWidget):
    """
    A layout viewer QWidget
    parent : Parent QT Widget
    debug: Switch logging the clicked block on/off
    """

    blockSelected = pyqtSignal(int)

    def __init__(self, parent=None, debug=False):
        QWidget.__init__(self, parent)
        self.setFocusPolicy(Qt.StrongFocus)
        self.paintSurface = QPainter()
        self.document: Optional[Document] = None
        self.page: Optional[Page] = None
        self.fields: Dict[tuple, ExtractedField] = {}
        self.debug = debug

    # ------------------------------------------------------------ content --

    def set_document(self, doc: Document, page_number: int = 1):
        self.document = doc
        self.set_page(page_number)

    def set_page(self, n: int):
        if self.document is None:
            raise InvariantError("set_page needs a document")
        if not 1 <= n <= len(self.document.pages):
            raise InvariantError(f"page {n} not in 1..{len(self.document.pages)}")
        self.page = self.document.pages[n - 1]
        self.update()

    def set_fields(self, fields: Iterable[ExtractedField]):
        """Fields are drawn next to their source line on the shown page"""
        self.fields = {}
        for item in fields:
            self.fields.setdefault(item.source, item)
        self.update()

    # ---------------------------------------------------------- geometry --

    def _transform(self):
        """Scale and offsets mapping page coordinates to the widget, aspect ratio kept"""
        scale = min(self.width() / self.page.width, self.height() / self.page.height)
        dx = (self.width() - self.page.width * scale) / 2
        dy = (self.height() - self.page.height * scale) / 2
        return scale, dx, dy

    def _rect(self, box: BBox) -> QRectF:
        scale, dx, dy = self._transform()
        return QRectF(dx + box.left * scale, dy + box.top * scale, box.width * scale, box.height * scale)

    def to_page(self, x: float, y: float):
        """Widget position to page coordinates"""
        scale, dx, dy = self._transform()
        return (x - dx) / scale, (y - dy) / scale

    def block_at(self, x: float, y: float) -> Optional[Block]:
        """Smallest block containing the page point (x, y)"""
        if self.page is None:
            return None
        hits = [b for b in self.page.blocks
                if b.bbox.left <= x <= b.bbox.right and b.bbox.top <= y <= b.bbox.bottom]
        return min(hits, key=lambda b: (b.bbox.width * b.bbox.height, b.id)) if hits else None

    # ------------------------------------------------------------- events --

    def mousePressEvent(self, evt):
        if self.page is None:
            return
        x, y = self.to_page(evt.x(), evt.y())
        block = self.block_at(x, y)
        if block is None:
            return
        if self.debug:
            logger.debug("Block %d %s role=%s: %r", block.id, sorted(t.value for t in block.block_types),
                         block.role.value if block.role else None, block.text)
        self.blockSelected.emit(block.id)

    def minimumSizeHint(self):
        return QSize(400, 300)

    def paintEvent(self, event):
        self.paintSurface.begin(self)
        self.paintSurface.fillRect(self.rect(), QColor(255, 255, 255))
        if self.page is not None:
            self.paintSurface.setPen(QPen(QColor(0, 0, 0), 1))
            self.paintSurface.drawRect(self._rect(BBox(0, 0, self.page.width, self.page.height)))
            for block in self.page.blocks:
                self._paint_block(block)
        self.paintSurface.end()

    def _paint_block(self, block: Block):
        painter = self.paintSurface
        for annot in block.annotations:
            line = block.lines[annot.line_index]
            painter.fillRect(self._rect(line.span_bbox(annot.start, annot.end)),
                             QBrush(ANNOTATION_COLORS[annot.kind]))
        painter.setPen(QPen(_block_color(block), 2))
        painter.setBrush(Qt.NoBrush)
        painter.drawRect(self._rect(block.bbox))
        scale, _, _ = self._transform()
        painter.setPen(QPen(QColor(20, 20, 20)))
        for index, line in enumerate(block.lines):
            rect = self._rect(line.bbox)
            painter.setFont(QFont("Sans", max(1, int(line.font_height * scale * 0.8))))
            painter.drawText(QPointF(rect.left(), rect.bottom()), line.text)
            found = self.fields.get((self.page.number, block.id, index))
            if found is not None:
                painter.setPen(QPen(QColor(200, 0, 0)))
                painter.drawText(QPointF(rect.right() + 4, rect.bottom()), f"[{found.field.value}]")
                painter.setPen(QPen(QColor(20, 20, 20)))
