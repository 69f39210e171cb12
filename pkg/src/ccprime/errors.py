"""Exception hierarchy shared by all modules.

Every domain failure carries a ``witness`` dict so the CLI can serialize the
reason for a rejection without re-deriving it.
"""

from __future__ import annotations

from typing import Any


class CCError(Exception):
    """Base class for all domain errors."""

    def __init__(self, message: str, witness: dict[str, Any] | None = None):
        super().__init__(message)
        self.witness = witness or {}

    @property
    def kind(self) -> str:
        return type(self).__name__

    def to_dict(self) -> dict[str, Any]:
        return {"error": self.kind, "message": str(self), "witness": self.witness}


class MalformedMatrix(CCError):
    pass


class DiagonalNotUnion(CCError):
    pass


class TransposeNotClosed(CCError):
    pass


class NonConstantIntersection(CCError):
    pass


class EmptySelection(CCError):
    pass


class NotOffDiagonal(CCError):
    pass


class WrongFiberCount(CCError):
    pass


class UnequalFibers(CCError):
    pass


class NotBijection(CCError):
    pass


class NotAPartition(CCError):
    pass


class NotEquitable(CCError):
    pass


class TooLarge(CCError):
    pass


class BadParameters(CCError):
    pass


class NotIntegral(CCError):
    pass


class BadInstance(CCError):
    pass


class ConsistencyError(CCError):
    """Raised when an internally guaranteed property fails; indicates a bug."""
