name="InvoiceReader"
__all__ = ["Corpus_Maker"]
