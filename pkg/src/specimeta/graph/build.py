"""Assemble crosswalked records into the ARK-keyed entity graph."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

from .. import ark as arks
from ..ark import ArkId
from ..errors import DuplicateEntity, OrphanChild
from ..terms import (
    DCT_HAS_PART,
    DCT_IS_PART_OF,
    DEFAULT_REGISTRY,
    RDF_TYPE,
    EntityClass,
    Literal,
    NamespaceRegistry,
    Statement,
    Term,
)
from .store import Graph


@dataclass(frozen=True)
class WalkedRecord:
    """Crosswalk output for one source record, tagged with its entity class.

    For image-derived classes ``parent_key`` names the Multimedia record and
    defaults to ``source_key``; for Multimedia it optionally names a Batch.
    """

    entity_class: EntityClass
    source_key: str
    pairs: tuple[tuple[Term, Literal], ...]
    parent_key: str | None = None


def build_entity_graph(
    records: Iterable[WalkedRecord],
    naan: str = arks.DEFAULT_NAAN,
    registry: NamespaceRegistry = DEFAULT_REGISTRY,
) -> Graph:
    entities: dict[tuple[EntityClass, str], WalkedRecord] = {}
    for rec in records:
        key = (rec.entity_class, rec.source_key)
        prior = entities.get(key)
        if prior is None:
            entities[key] = rec
        elif set(prior.pairs) != set(rec.pairs) or prior.parent_key != rec.parent_key:
            raise DuplicateEntity(rec.entity_class, rec.source_key)

    minted: dict[tuple[EntityClass, str], ArkId] = {}

    def ark_for(cls: EntityClass, key: str) -> ArkId:
        a = minted.get((cls, key))
        if a is None:
            a = minted[(cls, key)] = arks.mint(naan, cls, key)
        return a

    graph = Graph(registry=registry)
    class_iris = {c: registry.class_iri(c) for c in EntityClass}
    for (cls, key), rec in entities.items():
        subject = ark_for(cls, key)
        graph.add(Statement(subject, RDF_TYPE, class_iris[cls]))
        for term, value in rec.pairs:
            graph.add(Statement(subject, term, value))
        if cls.is_image_child:
            parent_key = rec.parent_key or key
            if (EntityClass.MULTIMEDIA, parent_key) not in entities:
                raise OrphanChild(parent_key, cls)
            graph.add(Statement(subject, DCT_IS_PART_OF, ark_for(EntityClass.MULTIMEDIA, parent_key)))
        elif cls is EntityClass.MULTIMEDIA and rec.parent_key:
            if (EntityClass.BATCH, rec.parent_key) not in entities:
                raise OrphanChild(rec.parent_key, cls)
            graph.add(Statement(ark_for(EntityClass.BATCH, rec.parent_key), DCT_HAS_PART, subject))
    return graph


def descendants(graph: Graph, root: ArkId) -> list[ArkId]:
    """``root`` plus everything reachable through hasPart / inverse isPartOf."""
    seen = {root}
    frontier = [root]
    while frontier:
        node = frontier.pop()
        nxt = [s.obj for s in graph.match(node, DCT_HAS_PART)]
        nxt += [s.subject for s in graph.match(None, DCT_IS_PART_OF, node)]
        for n in nxt:
            if isinstance(n, ArkId) and n not in seen:
                seen.add(n)
                frontier.append(n)
    return sorted(seen, key=str)


def topology_violations(graph: Graph) -> list[str]:
    """Walk the graph and report breaches of the five-class topology."""
    problems: list[str] = []
    for subject in list(graph.subjects()):
        if not isinstance(subject, ArkId):
            continue
        types = graph.match(subject, RDF_TYPE)
        if len(types) != 1:
            problems.append(f"{subject}: {len(types)} rdf:type statements")
    batches = set(graph.entities(EntityClass.BATCH))
    for cls in (EntityClass.COLLECTION_EVENT, EntityClass.IQ_METADATA, EntityClass.EXTENDED_IMAGE_METADATA):
        for a in graph.entities(cls):
            parents = graph.match(a, DCT_IS_PART_OF)
            if len(parents) != 1:
                problems.append(f"{a}: {len(parents)} isPartOf statements")
                continue
            parent = next(iter(parents)).obj
            if not isinstance(parent, ArkId) or graph.class_of(parent) is not EntityClass.MULTIMEDIA:
                problems.append(f"{a}: isPartOf target {parent} is not Multimedia")
    for m in graph.entities(EntityClass.MULTIMEDIA):
        holders = {s.subject for s in graph.match(None, DCT_HAS_PART, m)}
        if not holders & batches:
            problems.append(f"{m}: not reachable from any Batch")
        if graph.match(m, DCT_IS_PART_OF):
            problems.append(f"{m}: Multimedia must not be isPartOf another entity")
    return problems
