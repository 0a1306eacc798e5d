name="InvoiceReader"
__all__ = ["generate_keyword_vocabulary"]
