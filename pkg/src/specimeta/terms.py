"""Namespaces, terms, literals and statements: the shared EAV vocabulary."""

from __future__ import annotations

import enum
import re
from dataclasses import dataclass, field
from datetime import datetime, timedelta, timezone
from decimal import Decimal, InvalidOperation
from typing import Iterable

from .errors import InvalidValue, UncompactableIri, UnknownPrefix

PREFIX_RE = re.compile(r"[A-Za-z][A-Za-z0-9]*\Z")
LOCAL_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_]*\Z")
BLANK_RE = re.compile(r"_:[A-Za-z0-9]+\Z")
_ABSOLUTE_IRI_RE = re.compile(r"[A-Za-z][A-Za-z0-9+.\-]*:[^\s<>\"{}|\\^`]+\Z")

XSD = "http://www.w3.org/2001/XMLSchema#"
DEFAULT_PROJECT_IRI = "https://bgnn.example.org/ns#"

# Standards adopted for the image-metadata graph, verbatim.
STANDARD_NAMESPACES: tuple[tuple[str, str], ...] = (
    ("ac", "http://rs.tdwg.org/ac/terms/"),
    ("crs", "http://ns.adobe.com/camera-raw-settings/1.0/"),
    ("dwc", "http://rs.tdwg.org/dwc/terms/"),
    ("dwciri", "http://rs.tdwg.org/dwc/iri/"),
    ("exif", "http://ns.adobe.com/exif/1.0/"),
    ("Iptc4xmpCore", "http://iptc.org/std/Iptc4xmpCore/1.0/xmlns/"),
    ("photoshop", "http://ns.adobe.com/photoshop/1.0/"),
    ("plus", "http://ns.useplus.org/ldf/xmp/1.0/"),
    ("xmp", "http://ns.adobe.com/xap/1.0/"),
    ("xmpBJ", "http://ns.adobe.com/xap/1.0/bj/"),
    ("xmpMM", "http://ns.adobe.com/xap/1.0/mm/"),
)

SUPPORT_NAMESPACES: tuple[tuple[str, str], ...] = (
    ("dcterms", "http://purl.org/dc/terms/"),
    ("rdf", "http://www.w3.org/1999/02/22-rdf-syntax-ns#"),
    ("rdfs", "http://www.w3.org/2000/01/rdf-schema#"),
    ("owl", "http://www.w3.org/2002/07/owl#"),
)

PROJECT_PREFIX = "bgnn"


def is_absolute_iri(text: str) -> bool:
    return bool(_ABSOLUTE_IRI_RE.match(text))


@dataclass(frozen=True, slots=True)
class Namespace:
    prefix: str
    iri: str

    def __post_init__(self):
        if not PREFIX_RE.match(self.prefix):
            raise InvalidValue(f"bad namespace prefix {self.prefix!r}")
        if not is_absolute_iri(self.iri) or self.iri[-1] not in "/#":
            raise InvalidValue(f"namespace IRI must be absolute and end in '/' or '#': {self.iri!r}")


@dataclass(frozen=True, slots=True, order=True)
class Term:
    """A prefixed name such as ``dwc:genus``."""

    prefix: str
    local: str

    def __post_init__(self):
        if not PREFIX_RE.match(self.prefix):
            raise InvalidValue(f"bad term prefix {self.prefix!r}")
        if not LOCAL_RE.match(self.local):
            raise InvalidValue(f"bad term local name {self.local!r}")

    @classmethod
    def parse(cls, text: str) -> "Term":
        prefix, sep, local = text.partition(":")
        if not sep:
            raise InvalidValue(f"not a prefixed name: {text!r}")
        return cls(prefix, local)

    def __str__(self) -> str:
        return f"{self.prefix}:{self.local}"


@dataclass(frozen=True, slots=True, order=True)
class IRI:
    value: str

    def __post_init__(self):
        if not is_absolute_iri(self.value):
            raise InvalidValue(f"not an absolute IRI: {self.value!r}")

    def __str__(self) -> str:
        return self.value


@dataclass(frozen=True, slots=True, order=True)
class BlankNode:
    label: str

    def __post_init__(self):
        if not BLANK_RE.match(self.label):
            raise InvalidValue(f"bad blank node label {self.label!r}")

    def __str__(self) -> str:
        return self.label


class Datatype(enum.Enum):
    STRING = "string"
    INTEGER = "integer"
    DECIMAL = "decimal"
    BOOLEAN = "boolean"
    DATETIME = "dateTime"
    ANYURI = "anyURI"

    @property
    def iri(self) -> str:
        return XSD + self.value

    @classmethod
    def from_name(cls, name: str) -> "Datatype":
        try:
            return cls(name)
        except ValueError:
            raise InvalidValue(f"unsupported datatype {name!r}") from None

    @classmethod
    def from_iri(cls, iri: str) -> "Datatype":
        if not iri.startswith(XSD):
            raise InvalidValue(f"unsupported datatype IRI {iri!r}")
        return cls.from_name(iri[len(XSD):])


_INTEGER_RE = re.compile(r"[+-]?[0-9]+\Z")
_DECIMAL_RE = re.compile(r"[+-]?([0-9]+(\.[0-9]*)?|\.[0-9]+)\Z")
_DATETIME_RE = re.compile(
    r"(-?[0-9]{4,})-([0-9]{2})-([0-9]{2})T([0-9]{2}):([0-9]{2}):([0-9]{2})(\.[0-9]+)?"
    r"(Z|[+-][0-9]{2}:[0-9]{2})?\Z"
)


def _valid_datetime(text: str) -> bool:
    m = _DATETIME_RE.match(text)
    if not m:
        return False
    year, month, day, hour, minute, second = (int(g) for g in m.groups()[:6])
    try:
        datetime(year, month, day, hour, minute, second)
    except ValueError:
        return False
    tz = m.group(8)
    if tz and tz != "Z":
        offset = timedelta(hours=int(tz[1:3]), minutes=int(tz[4:6]))
        if offset > timedelta(hours=14) or int(tz[4:6]) > 59:
            return False
    return True


def lexical_is_valid(lexical: str, datatype: Datatype) -> bool:
    if datatype is Datatype.STRING:
        return True
    if datatype is Datatype.INTEGER:
        return bool(_INTEGER_RE.match(lexical))
    if datatype is Datatype.DECIMAL:
        if not _DECIMAL_RE.match(lexical):
            return False
        try:
            Decimal(lexical)
        except InvalidOperation:
            return False
        return True
    if datatype is Datatype.BOOLEAN:
        return lexical in ("true", "false")
    if datatype is Datatype.DATETIME:
        return _valid_datetime(lexical)
    return is_absolute_iri(lexical)


@dataclass(frozen=True, slots=True, order=True)
class Literal:
    lexical: str
    datatype: Datatype = Datatype.STRING

    def __post_init__(self):
        if not lexical_is_valid(self.lexical, self.datatype):
            raise InvalidValue(f"{self.lexical!r} is not a valid {self.datatype.value}")

    def __str__(self) -> str:
        return self.lexical


class EntityClass(enum.Enum):
    """The five node kinds of the restructured image database."""

    MULTIMEDIA = "Multimedia"
    COLLECTION_EVENT = "CollectionEvent"
    IQ_METADATA = "IQMetadata"
    EXTENDED_IMAGE_METADATA = "ExtendedImageMetadata"
    BATCH = "Batch"

    @classmethod
    def from_name(cls, name: str) -> "EntityClass":
        norm = re.sub(r"\s+", "", name).lower()
        for member in cls:
            if member.value.lower() == norm:
                return member
        raise InvalidValue(f"unknown entity class {name!r}")

    @property
    def is_image_child(self) -> bool:
        return self in _IMAGE_CHILDREN


_IMAGE_CHILDREN = frozenset(
    {EntityClass.COLLECTION_EVENT, EntityClass.IQ_METADATA, EntityClass.EXTENDED_IMAGE_METADATA}
)


@dataclass(frozen=True, slots=True)
class Statement:
    """One entity-attribute-value fact.

    ``subject`` is an ``ArkId``, ``IRI`` or ``BlankNode``; ``obj`` is a
    ``Literal``, ``IRI`` or ``ArkId``.
    """

    subject: object
    predicate: Term
    obj: object


@dataclass(frozen=True)
class NamespaceRegistry:
    """Immutable prefix <-> IRI bijection, always seeded with the standard rows."""

    entries: tuple[Namespace, ...]
    _by_prefix: dict = field(init=False, repr=False, compare=False)
    _by_iri: dict = field(init=False, repr=False, compare=False)
    _longest_first: tuple = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        by_prefix: dict[str, Namespace] = {}
        by_iri: dict[str, Namespace] = {}
        for ns in self.entries:
            if ns.prefix in by_prefix:
                raise InvalidValue(f"duplicate prefix {ns.prefix!r}")
            if ns.iri in by_iri:
                raise InvalidValue(f"duplicate namespace IRI {ns.iri!r}")
            by_prefix[ns.prefix] = ns
            by_iri[ns.iri] = ns
        for prefix, iri in STANDARD_NAMESPACES:
            if by_prefix.get(prefix) != Namespace(prefix, iri):
                raise InvalidValue(f"standard namespace {prefix!r} is mandatory")
        object.__setattr__(self, "_by_prefix", by_prefix)
        object.__setattr__(self, "_by_iri", by_iri)
        ordered = tuple(sorted(self.entries, key=lambda ns: (-len(ns.iri), ns.iri)))
        object.__setattr__(self, "_longest_first", ordered)

    @classmethod
    def default(cls, project_iri: str = DEFAULT_PROJECT_IRI) -> "NamespaceRegistry":
        rows = STANDARD_NAMESPACES + SUPPORT_NAMESPACES + ((PROJECT_PREFIX, project_iri),)
        return cls(tuple(Namespace(p, i) for p, i in rows))

    def with_namespaces(self, extra: Iterable[Namespace]) -> "NamespaceRegistry":
        return NamespaceRegistry(self.entries + tuple(extra))

    def without(self, prefix: str) -> "NamespaceRegistry":
        if any(prefix == p for p, _ in STANDARD_NAMESPACES):
            raise InvalidValue(f"standard namespace {prefix!r} cannot be removed")
        self.resolve_prefix(prefix)
        return NamespaceRegistry(tuple(ns for ns in self.entries if ns.prefix != prefix))

    def __contains__(self, prefix: str) -> bool:
        return prefix in self._by_prefix

    def __iter__(self):
        return iter(self.entries)

    def resolve_prefix(self, prefix: str) -> Namespace:
        try:
            return self._by_prefix[prefix]
        except KeyError:
            raise UnknownPrefix(prefix) from None

    def namespace_for_iri(self, iri: str) -> Namespace:
        try:
            return self._by_iri[iri]
        except KeyError:
            raise UncompactableIri(iri) from None

    def expand(self, term: Term) -> str:
        return self.resolve_prefix(term.prefix).iri + term.local

    def compact(self, iri: str) -> Term:
        for ns in self._longest_first:
            if iri.startswith(ns.iri):
                local = iri[len(ns.iri):]
                if LOCAL_RE.match(local):
                    return Term(ns.prefix, local)
                break
        raise UncompactableIri(iri)

    def check_term(self, term: Term) -> Term:
        self.resolve_prefix(term.prefix)
        return term

    @property
    def project(self) -> Namespace:
        return self.resolve_prefix(PROJECT_PREFIX)

    def class_iri(self, cls: EntityClass) -> IRI:
        return IRI(self.project.iri + cls.value)

    def ontology_iri(self) -> IRI:
        return IRI(self.project.iri.rstrip("#/"))

    def class_for_iri(self, iri: IRI) -> EntityClass | None:
        base = self.project.iri
        if not iri.value.startswith(base):
            return None
        try:
            return EntityClass(iri.value[len(base):])
        except ValueError:
            return None


DEFAULT_REGISTRY = NamespaceRegistry.default()

RDF_TYPE = Term("rdf", "type")
RDFS_COMMENT = Term("rdfs", "comment")
DCT_LICENSE = Term("dcterms", "license")
DCT_IS_PART_OF = Term("dcterms", "isPartOf")
DCT_HAS_PART = Term("dcterms", "hasPart")
OWL_CLASS = "http://www.w3.org/2002/07/owl#Class"
OWL_ONTOLOGY = "http://www.w3.org/2002/07/owl#Ontology"


def resolve_prefix(registry: NamespaceRegistry, prefix: str) -> Namespace:
    return registry.resolve_prefix(prefix)


def expand_term(registry: NamespaceRegistry, term: Term) -> str:
    return registry.expand(term)


def compact_iri(registry: NamespaceRegistry, iri: str) -> Term:
    return registry.compact(iri)


def utc_now() -> datetime:
    return datetime.now(timezone.utc)
