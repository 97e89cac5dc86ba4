"""Canonical N-Triples-subset serialization and the OWL export."""

from __future__ import annotations

import re
from typing import Iterable

from .. import ark as arks
from ..ark import ArkId
from ..errors import InvalidValue, NotAnArk, ParseError, UncompactableIri
from ..terms import (
    DEFAULT_REGISTRY,
    IRI,
    OWL_CLASS,
    OWL_ONTOLOGY,
    RDF_TYPE,
    BlankNode,
    Datatype,
    EntityClass,
    Literal,
    NamespaceRegistry,
    Statement,
    Term,
)
from .store import Graph

_ESCAPES = {ord("\\"): "\\\\", ord('"'): '\\"', ord("\n"): "\\n", ord("\r"): "\\r", ord("\t"): "\\t"}
for _c in list(range(0x20)) + [0x7F]:
    _ESCAPES.setdefault(_c, f"\\u{_c:04X}")
del _c


def escape_string(text: str) -> str:
    return text.translate(_ESCAPES)


_UNESCAPE_RE = re.compile(r"\\(?:u([0-9A-Fa-f]{4})|U([0-9A-Fa-f]{8})|(.))", re.S)
_SIMPLE = {"\\": "\\", '"': '"', "n": "\n", "r": "\r", "t": "\t", "b": "\b", "f": "\f", "'": "'"}


def unescape_string(text: str) -> str:
    def repl(m: re.Match) -> str:
        if m.group(1) or m.group(2):
            return chr(int(m.group(1) or m.group(2), 16))
        c = m.group(3)
        if c not in _SIMPLE:
            raise ValueError(f"bad escape \\{c}")
        return _SIMPLE[c]

    return _UNESCAPE_RE.sub(repl, text)


class Renderer:
    """Renders nodes to N-Triples tokens, caching term expansions."""

    def __init__(self, registry: NamespaceRegistry = DEFAULT_REGISTRY):
        self.registry = registry
        self._terms: dict[Term, str] = {}

    def node(self, node: object) -> str:
        if isinstance(node, Literal):
            body = '"' + escape_string(node.lexical) + '"'
            if node.datatype is Datatype.STRING:
                return body
            return f"{body}^^<{node.datatype.iri}>"
        if isinstance(node, ArkId):
            return f"<{node.iri}>"
        if isinstance(node, IRI):
            return f"<{node.value}>"
        if isinstance(node, Term):
            cached = self._terms.get(node)
            if cached is None:
                cached = self._terms[node] = f"<{self.registry.expand(node)}>"
            return cached
        if isinstance(node, BlankNode):
            raise InvalidValue("blank nodes are not serializable")
        raise InvalidValue(f"cannot render {node!r}")

    def statement(self, stmt: Statement) -> str:
        return f"{self.node(stmt.subject)} {self.node(stmt.predicate)} {self.node(stmt.obj)} ."


def render_node(node: object, registry: NamespaceRegistry = DEFAULT_REGISTRY) -> str:
    return Renderer(registry).node(node)


def serialize_statements(statements: Iterable[Statement], registry: NamespaceRegistry = DEFAULT_REGISTRY) -> bytes:
    r = Renderer(registry)
    lines = sorted(r.statement(s).encode("utf-8") for s in statements)
    if not lines:
        return b""
    return b"\n".join(lines) + b"\n"


def serialize(graph: Graph) -> bytes:
    """One statement per line, lines byte-sorted, trailing newline."""
    return serialize_statements(graph, graph.registry)


_IRI_TOKEN = r"<([^<>\"{}|^`\\\s]*)>"
_LITERAL_TOKEN = r'"((?:[^"\\\n\r]|\\.)*)"(?:\^\^<([^<>\s]*)>|(@[A-Za-z0-9-]+))?'
_LINE_RE = re.compile(
    rf"\s*(?:{_IRI_TOKEN}|(_:[A-Za-z0-9]+))[ \t]+{_IRI_TOKEN}[ \t]+(?:{_IRI_TOKEN}|{_LITERAL_TOKEN})[ \t]*\.\s*\Z"
)


def _resource(iri: str) -> object:
    if iri.startswith(arks.RESOLVER + "ark:"):
        return arks.from_iri(iri)
    return IRI(iri)


def parse_line(line: str, registry: NamespaceRegistry = DEFAULT_REGISTRY) -> Statement:
    m = _LINE_RE.match(line)
    if not m:
        raise ValueError("not a statement line")
    s_iri, s_blank, p_iri, o_iri, o_lex, o_dt, o_lang = m.groups()
    if o_lang:
        raise ValueError("language-tagged literals are not supported")
    subject = BlankNode(s_blank) if s_blank else _resource(s_iri)
    try:
        predicate = registry.compact(p_iri)
    except UncompactableIri:
        raise ValueError(f"predicate outside registered namespaces: {p_iri}") from None
    if o_iri is not None:
        obj = _resource(o_iri)
    else:
        datatype = Datatype.from_iri(o_dt) if o_dt else Datatype.STRING
        obj = Literal(unescape_string(o_lex), datatype)
    return Statement(subject, predicate, obj)


def parse_serialized(content: bytes, registry: NamespaceRegistry = DEFAULT_REGISTRY) -> Graph:
    try:
        text = content.decode("utf-8")
    except UnicodeDecodeError as exc:
        raise ParseError(0, f"not UTF-8: {exc}") from None
    graph = Graph(registry=registry)
    for number, line in enumerate(text.split("\n"), start=1):
        if not line.strip() or line.lstrip().startswith("#"):
            continue
        try:
            stmt = parse_line(line, registry)
        except (ValueError, NotAnArk, InvalidValue) as exc:
            raise ParseError(number, str(exc)) from None
        graph.add(stmt)
    return graph


def owl_declarations(registry: NamespaceRegistry = DEFAULT_REGISTRY) -> list[Statement]:
    decls = [Statement(registry.class_iri(c), RDF_TYPE, IRI(OWL_CLASS)) for c in EntityClass]
    decls.append(Statement(registry.ontology_iri(), RDF_TYPE, IRI(OWL_ONTOLOGY)))
    return decls


def owl_export(graph: Graph, statements: Iterable[Statement] | None = None) -> bytes:
    """Canonical graph bytes plus the class and ontology declarations."""
    chosen = set(graph if statements is None else statements)
    chosen.update(owl_declarations(graph.registry))
    return serialize_statements(chosen, graph.registry)
