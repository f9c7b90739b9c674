"""Exception hierarchy shared by every module."""

from __future__ import annotations


class BlockSvdError(Exception):
    """Base class for all package errors."""


class InvalidInputError(BlockSvdError, ValueError):
    """Input data is malformed: wrong shape, NaN/Inf entries, mismatched columns."""


class InvalidParameterError(BlockSvdError, ValueError):
    """A tuning parameter (block size, threshold, stride, ...) is out of its domain."""


class RangeError(BlockSvdError, IndexError):
    """A requested time range is empty, reversed, or outside the stored rows."""


class ContractViolation(BlockSvdError, RuntimeError):
    """An internal precondition was broken, e.g. updating an already full block."""


class CsvParseError(BlockSvdError, ValueError):
    def __init__(self, message: str, line: int) -> None:
        super().__init__(f"line {line}: {message}")
        self.line = line


class SchemaError(BlockSvdError, ValueError):
    """CSV column count differs from what the caller expected."""


class StoreFormatError(BlockSvdError):
    """Store file has the wrong magic bytes or an unsupported version."""


class StoreCorruptionError(BlockSvdError):
    """Store file is truncated, inconsistent, or holds invalid factors."""
