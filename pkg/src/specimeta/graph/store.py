"""Indexed EAV statement store with copy-on-write snapshots."""

from __future__ import annotations

import threading
from dataclasses import dataclass
from typing import Iterable, Iterator

from ..ark import ArkId
from ..errors import InvalidValue, UnknownSubject
from ..terms import (
    DCT_IS_PART_OF,
    DCT_LICENSE,
    DEFAULT_REGISTRY,
    IRI,
    RDF_TYPE,
    RDFS_COMMENT,
    EntityClass,
    Literal,
    NamespaceRegistry,
    Statement,
    Term,
)


class _Indexes:
    __slots__ = ("statements", "by_subject", "by_predicate", "by_pred_obj")

    def __init__(self):
        self.statements: set[Statement] = set()
        self.by_subject: dict[object, set[Statement]] = {}
        self.by_predicate: dict[Term, set[Statement]] = {}
        self.by_pred_obj: dict[tuple[Term, object], set[Statement]] = {}

    def copy(self) -> "_Indexes":
        new = _Indexes()
        new.statements = set(self.statements)
        new.by_subject = {k: set(v) for k, v in self.by_subject.items()}
        new.by_predicate = {k: set(v) for k, v in self.by_predicate.items()}
        new.by_pred_obj = {k: set(v) for k, v in self.by_pred_obj.items()}
        return new


@dataclass(frozen=True)
class EntityNode:
    ark: ArkId
    entity_class: EntityClass | None
    statements: frozenset[Statement]
    parent: ArkId | None = None

    def values(self, predicate: Term) -> list[object]:
        return sorted((s.obj for s in self.statements if s.predicate == predicate), key=_sort_key)

    def literal_values(self, predicate: Term) -> list[str]:
        return [v.lexical for v in self.values(predicate) if isinstance(v, Literal)]


def _sort_key(node: object) -> str:
    if isinstance(node, Literal):
        return node.lexical
    return str(node)


class Graph:
    """Set of statements indexed by subject, predicate and (predicate, object).

    Readers call :meth:`snapshot` for a constant-time immutable view; the
    next write on the live graph copies the indexes first.
    """

    def __init__(self, statements: Iterable[Statement] = (), registry: NamespaceRegistry = DEFAULT_REGISTRY):
        self.registry = registry
        self._idx = _Indexes()
        self._shared = False
        self._frozen = False
        self._lock = threading.RLock()
        for stmt in statements:
            self.add(stmt)

    @classmethod
    def _view(cls, registry: NamespaceRegistry, idx: _Indexes) -> "Graph":
        g = cls.__new__(cls)
        g.registry = registry
        g._idx = idx
        g._shared = True
        g._frozen = True
        g._lock = threading.RLock()
        return g

    def snapshot(self) -> "Graph":
        if self._frozen:
            return self
        with self._lock:
            self._shared = True
            return Graph._view(self.registry, self._idx)

    @property
    def frozen(self) -> bool:
        return self._frozen

    def _writable(self) -> _Indexes:
        if self._frozen:
            raise TypeError("graph snapshot is read-only")
        if self._shared:
            self._idx = self._idx.copy()
            self._shared = False
        return self._idx

    def add(self, stmt: Statement) -> bool:
        """Insert ``stmt``; returns False when it was already present."""
        if not isinstance(stmt.predicate, Term):
            raise InvalidValue(f"predicate must be a Term, got {stmt.predicate!r}")
        self.registry.check_term(stmt.predicate)
        with self._lock:
            if stmt in self._idx.statements:
                return False
            idx = self._writable()
            idx.statements.add(stmt)
            idx.by_subject.setdefault(stmt.subject, set()).add(stmt)
            idx.by_predicate.setdefault(stmt.predicate, set()).add(stmt)
            idx.by_pred_obj.setdefault((stmt.predicate, stmt.obj), set()).add(stmt)
            return True

    def add_all(self, statements: Iterable[Statement]) -> int:
        return sum(1 for s in statements if self.add(s))

    def discard(self, stmt: Statement) -> bool:
        with self._lock:
            if stmt not in self._idx.statements:
                return False
            idx = self._writable()
            idx.statements.discard(stmt)
            for index, key in (
                (idx.by_subject, stmt.subject),
                (idx.by_predicate, stmt.predicate),
                (idx.by_pred_obj, (stmt.predicate, stmt.obj)),
            ):
                bucket = index[key]
                bucket.discard(stmt)
                if not bucket:
                    del index[key]
            return True

    def __len__(self) -> int:
        return len(self._idx.statements)

    def __iter__(self) -> Iterator[Statement]:
        return iter(self._idx.statements)

    def __contains__(self, stmt: object) -> bool:
        return stmt in self._idx.statements

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Graph):
            return NotImplemented
        return self._idx.statements == other._idx.statements

    def statements(self) -> frozenset[Statement]:
        return frozenset(self._idx.statements)

    def subjects(self) -> Iterable[object]:
        return self._idx.by_subject.keys()

    def has_subject(self, subject: object) -> bool:
        return subject in self._idx.by_subject

    def match(self, subject: object = None, predicate: Term | None = None, obj: object = None) -> Iterable[Statement]:
        """Statements matching the given constants; ``None`` is a wildcard."""
        idx = self._idx
        if subject is not None:
            candidates = idx.by_subject.get(subject, ())
        elif predicate is not None and obj is not None:
            return idx.by_pred_obj.get((predicate, obj), ())
        elif predicate is not None:
            return idx.by_predicate.get(predicate, ())
        else:
            candidates = idx.statements
        return [
            s
            for s in candidates
            if (predicate is None or s.predicate == predicate) and (obj is None or s.obj == obj)
        ]

    def estimate(self, subject: object = None, predicate: Term | None = None, obj: object = None) -> int:
        idx = self._idx
        if subject is not None:
            return len(idx.by_subject.get(subject, ()))
        if predicate is not None and obj is not None:
            return len(idx.by_pred_obj.get((predicate, obj), ()))
        if predicate is not None:
            return len(idx.by_predicate.get(predicate, ()))
        return len(idx.statements)

    def objects(self, subject: object, predicate: Term) -> list[object]:
        return sorted((s.obj for s in self.match(subject, predicate)), key=_sort_key)

    def class_of(self, subject: object) -> EntityClass | None:
        for s in self.match(subject, RDF_TYPE):
            if isinstance(s.obj, IRI):
                cls = self.registry.class_for_iri(s.obj)
                if cls is not None:
                    return cls
        return None

    def entity(self, ark: ArkId) -> EntityNode:
        stmts = self._idx.by_subject.get(ark)
        if not stmts:
            raise UnknownSubject(str(ark))
        parents = [s.obj for s in stmts if s.predicate == DCT_IS_PART_OF and isinstance(s.obj, ArkId)]
        return EntityNode(ark, self.class_of(ark), frozenset(stmts), parents[0] if len(parents) == 1 else None)

    def entities(self, entity_class: EntityClass | None = None) -> list[ArkId]:
        """ARK subjects carrying an entity-class type, sorted by canonical form."""
        if entity_class is not None:
            typed = self.match(None, RDF_TYPE, self.registry.class_iri(entity_class))
            arks = {s.subject for s in typed if isinstance(s.subject, ArkId)}
        else:
            arks = {s for s in self._idx.by_subject if isinstance(s, ArkId) and self.class_of(s) is not None}
        return sorted(arks, key=str)


def add_statement(graph: Graph, stmt: Statement) -> Graph:
    graph.add(stmt)
    return graph


def attach_rights(graph: Graph, subject: ArkId, rights_text: str, license_iri: str | IRI) -> Graph:
    """Record a rights statement (as rdfs:comment) and license IRI on ``subject``."""
    if not graph.has_subject(subject):
        raise UnknownSubject(str(subject))
    iri = license_iri if isinstance(license_iri, IRI) else IRI(license_iri)
    graph.add(Statement(subject, RDFS_COMMENT, Literal(rights_text)))
    graph.add(Statement(subject, DCT_LICENSE, iri))
    return graph
