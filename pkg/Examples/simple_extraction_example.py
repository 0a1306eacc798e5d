# -*- coding: utf-8-*-
"""
Module : simple_extraction_example
Author : InvoiceReader team
Description :
    Renders one synthetic invoice, runs the whole pipeline on it and prints
    the extracted fields with their confidences.
"""
import logging
import sys

import numpy as np

from InvoiceReader.Helpers.Corpus_Maker import Corpus_Maker, load_templates, load_value_pool, make_invoice_values
from InvoiceReader.Pipeline import InvoicePipeline

if __name__ == "__main__":
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(name)s: %(message)s")
    name = sys.argv[1] if len(sys.argv) > 1 else "en_inline"
    template = next(t for t in load_templates() if t.name == name)
    values = make_invoice_values(load_value_pool(template.language), np.random.default_rng(0))
    pages = Corpus_Maker(template).create(values)

    pipeline = InvoicePipeline()
    doc, report = pipeline.process_pages(pages, name)
    for block in doc.pages[0].blocks:
        types = ",".join(sorted(t.value for t in block.block_types))
        print(f"block {block.id:2d} [{types}] role={block.role.value if block.role else '-'}: "
              f"{block.lines[0].text}")
    print()
    for item in report.fields:
        print(f"{item.role.value:8s} {item.field.value:15s} {item.value!r:40s} "
              f"key={item.key_conf:.2f} data={item.data_conf:.2f} combined={item.combine_conf:.2f}")
