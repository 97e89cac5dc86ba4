"""Exception hierarchy shared by every pipeline stage."""

from __future__ import annotations


class SpecimetaError(Exception):
    """Base class for all pipeline errors."""


class UnknownPrefix(SpecimetaError, KeyError):
    def __init__(self, prefix: str):
        super().__init__(prefix)
        self.prefix = prefix

    def __str__(self) -> str:
        return f"unknown namespace prefix {self.prefix!r}"


class UncompactableIri(SpecimetaError, ValueError):
    def __init__(self, iri: str):
        super().__init__(iri)
        self.iri = iri

    def __str__(self) -> str:
        return f"no registered namespace covers {self.iri!r}"


class InvalidValue(SpecimetaError, ValueError):
    """A domain value violates its own invariants (bad term, bad literal...)."""


# ingest


class MissingHeader(SpecimetaError):
    pass


class DuplicateSourceId(SpecimetaError):
    def __init__(self, source_id: str, row: int):
        super().__init__(f"duplicate source id {source_id!r} at row {row}")
        self.source_id = source_id
        self.row = row


class MalformedCsv(SpecimetaError):
    def __init__(self, row: int, reason: str):
        super().__init__(f"row {row}: {reason}")
        self.row = row
        self.reason = reason


class CoercionError(SpecimetaError, ValueError):
    def __init__(self, raw: str, datatype: object):
        name = getattr(datatype, "value", datatype)
        super().__init__(f"cannot coerce {raw!r} to {name}")
        self.raw = raw
        self.datatype = datatype


# crosswalk


class RuleSyntax(SpecimetaError):
    def __init__(self, line: int, reason: str):
        super().__init__(f"rules line {line}: {reason}")
        self.line = line
        self.reason = reason


class DuplicatePattern(SpecimetaError):
    def __init__(self, pattern: str, line: int):
        super().__init__(f"rules line {line}: duplicate pattern {pattern!r}")
        self.pattern = pattern
        self.line = line


class MissingClassDeclaration(SpecimetaError):
    pass


# ark


class NotAnArk(SpecimetaError, ValueError):
    pass


class BadCheckChar(NotAnArk):
    pass


class BadQualifier(NotAnArk):
    pass


class BadNaan(SpecimetaError, ValueError):
    pass


class EmptyKey(SpecimetaError, ValueError):
    pass


# graph


class OrphanChild(SpecimetaError):
    def __init__(self, key: str, entity_class: object = None):
        super().__init__(f"no parent entity for key {key!r}")
        self.key = key
        self.entity_class = entity_class


class DuplicateEntity(SpecimetaError):
    def __init__(self, entity_class: object, key: str):
        super().__init__(f"{entity_class} {key!r} asserted twice with different statements")
        self.entity_class = entity_class
        self.key = key


class UnknownSubject(SpecimetaError, KeyError):
    def __str__(self) -> str:
        return f"subject not in graph: {self.args[0]}"


class ParseError(SpecimetaError):
    def __init__(self, line: int, reason: str):
        super().__init__(f"line {line}: {reason}")
        self.line = line
        self.reason = reason


class UnboundSelect(SpecimetaError):
    pass


class QuerySyntax(SpecimetaError, ValueError):
    pass


# validate


class EmptyLabel(SpecimetaError):
    pass


class WrongClass(SpecimetaError):
    pass


# export


class UnknownRoot(SpecimetaError, KeyError):
    def __str__(self) -> str:
        return f"root not in graph: {self.args[0]}"
