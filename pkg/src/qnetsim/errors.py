"""Domain error hierarchy shared by all qnetsim modules.

Every error carries a stable ``code`` (used verbatim by the HTTP service and
CLI) and an optional ``path`` pointing at the offending element, e.g.
``nodes[1].name`` for document errors or a node name for graph errors.
"""

from __future__ import annotations


class QnetError(Exception):
    """Base class for all domain errors."""

    code = "QnetError"

    def __init__(self, message: str, path: str | None = None):
        super().__init__(message)
        self.path = path

    def __str__(self) -> str:
        base = super().__str__()
        if self.path:
            return f"{base} (at {self.path})"
        return base


# -- topology ---------------------------------------------------------------

class DuplicateName(QnetError):
    code = "DuplicateName"


class InvalidName(QnetError):
    code = "InvalidName"


class UnknownTemplate(QnetError):
    code = "UnknownTemplate"


class TemplateTypeMismatch(QnetError):
    code = "TemplateTypeMismatch"


class ReservedType(QnetError):
    code = "ReservedType"


class UnknownEndpoint(QnetError):
    code = "UnknownEndpoint"


class SelfLoop(QnetError):
    code = "SelfLoop"


class DuplicateEdge(QnetError):
    code = "DuplicateEdge"


class UnknownElement(QnetError):
    code = "UnknownElement"


class NegativeValue(QnetError):
    code = "NegativeValue"


class NonIntegralValue(QnetError):
    code = "NonIntegralValue"


class DiagonalWrite(QnetError):
    code = "DiagonalWrite"


# -- layout -----------------------------------------------------------------

class EmptyTopology(QnetError):
    code = "EmptyTopology"


# -- hardware ---------------------------------------------------------------

class SlotBusy(QnetError):
    code = "SlotBusy"


class SlotOutOfRange(QnetError):
    code = "SlotOutOfRange"


class CoincidenceWindowViolation(QnetError):
    code = "CoincidenceWindowViolation"


# -- simulation kernel ------------------------------------------------------

class PastEvent(QnetError):
    code = "PastEvent"


class HandlerFailure(QnetError):
    code = "HandlerFailure"

    def __init__(self, message: str, target: str, event=None):
        super().__init__(message, path=target)
        self.target = target
        self.event = event


# -- random request application ----------------------------------------------

class InsufficientRouters(QnetError):
    code = "InsufficientRouters"


class Unreachable(QnetError):
    code = "Unreachable"


class TemplateResolutionError(QnetError):
    code = "TemplateResolutionError"


# -- templates ----------------------------------------------------------------

class DanglingReference(QnetError):
    code = "DanglingReference"


class ShapeMismatch(QnetError):
    code = "ShapeMismatch"


class CyclicReference(QnetError):
    code = "CyclicReference"


class TemplateInUse(QnetError):
    code = "TemplateInUse"


# -- serialization ------------------------------------------------------------

class ParseError(QnetError):
    code = "ParseError"


class SchemaError(QnetError):
    code = "SchemaError"


class InvariantViolation(QnetError):
    code = "InvariantViolation"


class RunExists(QnetError):
    code = "RunExists"


class IoError(QnetError):
    code = "IoError"
