# -*- coding: utf-8-*-
"""
Module : layout_viewer_example
Author : InvoiceReader team
Description :
    Shows an analyzed invoice inside a QMainWindow. Blocks are colored by
    type, extracted values are drawn next to their source line and clicking
    a block prints its annotations in the line edit below.
    Usage : python layout_viewer_example.py [document.json]
"""
import sys
from pathlib import Path

import numpy as np
# import PyQt5 stuff
from PyQt5.QtWidgets import QApplication, QHBoxLayout, QLineEdit, QMainWindow, QVBoxLayout, QWidget

from InvoiceReader.DocModel import FORMAT_JSON, deserialize_document
from InvoiceReader.Helpers.Corpus_Maker import Corpus_Maker, load_templates, load_value_pool, make_invoice_values
from InvoiceReader.Pipeline import InvoicePipeline
from InvoiceReader.QInvoiceWidget import QInvoiceWidget


def sample_document(pipeline):
    template = load_templates()[0]
    values = make_invoice_values(load_value_pool(template.language), np.random.default_rng(1))
    return pipeline.analyze(Corpus_Maker(template).create(values), template.name)


if __name__ == "__main__":
    pipeline = InvoicePipeline()
    if len(sys.argv) > 1:
        doc = deserialize_document(Path(sys.argv[1]).read_bytes(), FORMAT_JSON)
    else:
        doc = sample_document(pipeline)
    doc = pipeline.annotate(doc)
    report = pipeline.extract(doc)

    app = QApplication(sys.argv)
    appw = QMainWindow()
    appw.setGeometry(50, 50, 800, 1000)
    main_widget = QWidget()
    main_widget.setLayout(QVBoxLayout())

    viewer = QInvoiceWidget(debug=True)
    viewer.set_document(doc)
    viewer.set_fields(report.fields)
    info_widget = QWidget()
    info_widget.setMaximumHeight(50)
    info_widget.setLayout(QHBoxLayout())
    le_block = QLineEdit("")
    info_widget.layout().addWidget(le_block)
    main_widget.layout().addWidget(viewer)
    main_widget.layout().addWidget(info_widget)

    def show_block(block_id):
        block = viewer.page.block_by_id(block_id)
        labels = ", ".join(f"{a.kind.value}:{a.label}" for a in block.annotations)
        le_block.setText(f"block {block_id}: {labels or 'no annotations'}")

    viewer.blockSelected.connect(show_block)
    appw.setCentralWidget(main_widget)
    appw.show()
    sys.exit(app.exec_())
