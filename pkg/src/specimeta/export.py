"""Distribution bundles: metadata CSV, per-entity XML, citation text, OWL graph."""

from __future__ import annotations

import csv
import hashlib
import io
import re
import zipfile
from dataclasses import dataclass
from typing import Sequence

from .ark import ArkId
from .errors import UnknownRoot
from .graph.build import descendants
from .graph.ntriples import Renderer, owl_export
from .graph.store import EntityNode, Graph
from .terms import DEFAULT_REGISTRY, RDF_TYPE, Literal, NamespaceRegistry

ZIP_EPOCH = (1980, 1, 1, 0, 0, 0)
CSV_NAME = "metadata.csv"
CITATION_NAME = "citation.txt"
OWL_NAME = "graph.owl"


def cell_value(node: object) -> str:
    if isinstance(node, Literal):
        return node.lexical
    return str(node)


def render_csv(entities: Sequence[EntityNode], registry: NamespaceRegistry = DEFAULT_REGISTRY) -> bytes:
    if not entities:
        raise ValueError("at least one entity is required")
    columns = sorted({str(s.predicate) for e in entities for s in e.statements if s.predicate != RDF_TYPE})
    buf = io.StringIO(newline="")
    writer = csv.writer(buf, lineterminator="\r\n")
    writer.writerow(["ark", *columns])
    for entity in sorted(entities, key=lambda e: str(e.ark)):
        values: dict[str, list[str]] = {}
        for s in entity.statements:
            if s.predicate != RDF_TYPE:
                values.setdefault(str(s.predicate), []).append(cell_value(s.obj))
        writer.writerow([str(entity.ark), *("|".join(sorted(values.get(c, []))) for c in columns)])
    return buf.getvalue().encode("utf-8")


# characters XML 1.0 cannot carry even as references
_XML_ILLEGAL = re.compile("[\x00-\x08\x0b\x0c\x0e-\x1f\ufffe\uffff]")


def xml_escape(text: str, attribute: bool = False) -> str:
    text = _XML_ILLEGAL.sub("\ufffd", text)
    text = text.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;")
    if attribute:
        text = text.replace('"', "&quot;").replace("\n", "&#10;").replace("\r", "&#13;").replace("\t", "&#9;")
    else:
        text = text.replace("\r", "&#13;")
    return text


def render_xml(entity: EntityNode, registry: NamespaceRegistry = DEFAULT_REGISTRY) -> bytes:
    renderer = Renderer(registry)
    ordered = sorted(entity.statements, key=lambda s: renderer.statement(s).encode("utf-8"))
    prefixes = sorted({s.predicate.prefix for s in ordered})
    decls = "".join(f' xmlns:{p}="{xml_escape(registry.resolve_prefix(p).iri, True)}"' for p in prefixes)
    lines = ['<?xml version="1.0" encoding="UTF-8"?>', f'<record ark="{xml_escape(str(entity.ark), True)}"{decls}>']
    for s in ordered:
        tag = str(s.predicate)
        lines.append(f"  <{tag}>{xml_escape(cell_value(s.obj))}</{tag}>")
    lines.append("</record>")
    return ("\n".join(lines) + "\n").encode("utf-8")


def render_citation(citation_text: str, arks: Sequence[ArkId]) -> bytes:
    text = citation_text
    if text and not text.endswith("\n"):
        text += "\n"
    text += "".join(f"ARK: {a}\n" for a in sorted(arks, key=str))
    return text.encode("utf-8")


def xml_name(ark: ArkId) -> str:
    name = ark.blade
    if ark.qualifier:
        name += "_" + "_".join(ark.qualifier)
    return name + ".xml"


@dataclass(frozen=True)
class ManifestEntry:
    path: str
    size: int
    sha256: str


@dataclass(frozen=True)
class Bundle:
    root: ArkId
    entries: tuple[tuple[str, bytes], ...]

    @property
    def manifest(self) -> tuple[ManifestEntry, ...]:
        return tuple(ManifestEntry(p, len(b), hashlib.sha256(b).hexdigest()) for p, b in self.entries)

    @property
    def filename(self) -> str:
        return f"{self.root.blade}.zip"

    def zip_bytes(self) -> bytes:
        buf = io.BytesIO()
        with zipfile.ZipFile(buf, "w", compression=zipfile.ZIP_STORED) as zf:
            for path, data in self.entries:
                info = zipfile.ZipInfo(path, date_time=ZIP_EPOCH)
                info.compress_type = zipfile.ZIP_STORED
                info.create_system = 3
                info.external_attr = 0o100644 << 16
                zf.writestr(info, data)
        return buf.getvalue()


def build_bundle(graph: Graph, root: ArkId, citation_text: str) -> Bundle:
    """Select ``root`` and its descendants and package their metadata."""
    if graph.class_of(root) is None:
        raise UnknownRoot(str(root))
    selected = [a for a in descendants(graph, root) if graph.class_of(a) is not None]
    nodes = [graph.entity(a) for a in selected]
    entries: dict[str, bytes] = {CSV_NAME: render_csv(nodes, graph.registry)}
    for node in nodes:
        path = xml_name(node.ark)
        if path in entries:
            raise ValueError(f"bundle path collision: {path}")
        entries[path] = render_xml(node, graph.registry)
    entries[CITATION_NAME] = render_citation(citation_text, selected)
    statements = [s for node in nodes for s in node.statements]
    entries[OWL_NAME] = owl_export(graph, statements)
    return Bundle(root, tuple(sorted(entries.items())))

