# -*- coding: utf-8-*-
"""
Module : Errors
Author : InvoiceReader team
Description :
    Exception hierarchy shared by every stage of the pipeline.
    All errors derive from InvoiceReaderError so callers can catch one type.
"""
from typing import Iterable, Optional

__all__ = [
    "InvoiceReaderError",
    "SchemaError",
    "InvariantError",
    "ConfigError",
    "ParseError",
    "EvalError",
    "StageError",
    "DegenerateDataError",
    "SchemaMismatchError",
    "MissingReportError",
]


class InvoiceReaderError(Exception):
    """Root of all InvoiceReader errors"""


class SchemaError(InvoiceReaderError):
    """
    Input is malformed.
    path : location of the offending element ("pages[0].words[3].width", "row 12", ...)
    """

    def __init__(self, message: str, path: Optional[str] = None):
        self.path = path
        self.message = message
        super().__init__(f"{path}: {message}" if path else message)


class InvariantError(InvoiceReaderError):
    """Input is well formed but violates a document model invariant"""


class ConfigError(InvoiceReaderError):
    """Bad configuration value or missing resource"""


class ParseError(InvoiceReaderError):
    """
    Rule text does not follow the rule grammar.
    line, column : 1-based position of the failure
    expected : set of token kinds that would have been accepted
    """

    def __init__(self, message: str, line: int, column: int, expected: Iterable[str] = ()):
        self.line = line
        self.column = column
        self.expected = frozenset(expected)
        self.message = message
        detail = f" (expected one of: {', '.join(sorted(self.expected))})" if self.expected else ""
        super().__init__(f"line {line}, column {column}: {message}{detail}")


class EvalError(InvoiceReaderError):
    """A parsed rule references an accessor that cannot be evaluated"""


class StageError(InvoiceReaderError):
    """A stage was asked for data that an earlier stage has not produced"""


class DegenerateDataError(InvoiceReaderError):
    """Training data cannot support the requested model or evaluation"""


class SchemaMismatchError(InvoiceReaderError):
    """Feature vector and model were built from different feature schemas"""


class MissingReportError(InvoiceReaderError):
    """No extraction report exists for a gold record"""

    def __init__(self, source_id: str):
        self.source_id = source_id
        super().__init__(f"no extraction report for source '{source_id}'")
