# -*- coding: utf-8-*-
"""
Module : InvoiceReader_Repairs_Translation
Author : InvoiceReader team
Description :
    Translation tables used to repair typical OCR misreadings in extracted
    values once the field format tells whether a position holds a digit or a letter.
"""

__all__ = [
    "InvoiceReader_Digit_translation",
    "InvoiceReader_Letter_translation",
    "InvoiceReader_Email_symbol_translation",
    "InvoiceReader_Legal_form_translation",
    "InvoiceReader_Numeric_IBAN_countries",
]

# letter read where the format requires a digit
InvoiceReader_Digit_translation = {
    "O": "0",
    "o": "0",
    "D": "0",
    "Q": "0",
    "I": "1",
    "l": "1",
    "|": "1",
    "i": "1",
    "Z": "2",
    "z": "2",
    "S": "5",
    "s": "5",
    "G": "6",
    "B": "8",
    "g": "9",
}

# digit read where the format requires a letter
InvoiceReader_Letter_translation = {
    "0": "O",
    "1": "I",
    "2": "Z",
    "5": "S",
    "6": "G",
    "8": "B",
}

# separators seen in place of the at sign, longest first
InvoiceReader_Email_symbol_translation = {
    "&&": "@",
    "(c)": "@",
    "©": "@",
    "&": "@",
    "Q": "@",
}

# misread legal-form suffixes at the end of a company name
InvoiceReader_Legal_form_translation = {
    "s.r.0.": "s.r.o.",
    "s.r.0": "s.r.o.",
    "s.r,o.": "s.r.o.",
    "s,r.o.": "s.r.o.",
    "a.5.": "a.s.",
    "a,s.": "a.s.",
    "Gmbh": "GmbH",
    "GrnbH": "GmbH",
    "Ltd,": "Ltd",
    "Pty Ltd,": "Pty Ltd",
}

# IBAN countries whose bank account part is purely numeric
InvoiceReader_Numeric_IBAN_countries = {
    "AT", "BE", "CZ", "DE", "DK", "EE", "ES", "FI", "HR", "HU", "LT", "PL", "PT", "SE", "SI", "SK",
}
