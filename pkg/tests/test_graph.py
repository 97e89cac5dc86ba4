from __future__ import annotations

import random
import threading

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from oracles import as_multiset, brute_force, random_bgp, random_graph, random_query_graph, sorted_lines_oracle

from specimeta.ark import mint
from specimeta.errors import DuplicateEntity, OrphanChild, ParseError, UnboundSelect, UnknownPrefix, UnknownSubject
from specimeta.graph import (
    Graph,
    TriplePattern,
    Var,
    WalkedRecord,
    add_statement,
    attach_rights,
    build_entity_graph,
    descendants,
    format_binding,
    owl_export,
    parse_pattern,
    parse_serialized,
    query,
    serialize,
    topology_violations,
)
from specimeta.terms import (
    DCT_HAS_PART,
    DCT_IS_PART_OF,
    DEFAULT_REGISTRY,
    IRI,
    RDF_TYPE,
    RDFS_COMMENT,
    BlankNode,
    Datatype,
    EntityClass,
    Literal,
    Statement,
    Term,
)

GENUS = Term("dwc", "genus")
MM, CE = EntityClass.MULTIMEDIA, EntityClass.COLLECTION_EVENT


def lit(v: str) -> Literal:
    return Literal(v)


def rec(cls, key, *pairs, parent=None) -> WalkedRecord:
    return WalkedRecord(cls, key, tuple((Term.parse(t), lit(v)) for t, v in pairs), parent)


def small_fixture() -> list[WalkedRecord]:
    return [
        rec(MM, "A", ("dcterms:identifier", "A"), ("dcterms:format", "image/jpeg"), ("photoshop:Credit", "INHS")),
        rec(MM, "B", ("dcterms:identifier", "B"), ("dcterms:format", "image/jpeg"), ("photoshop:Credit", "FMNH")),
        rec(CE, "A", ("dwc:genus", "Carassius"), ("dwc:specificEpithet", "auratus")),
        rec(CE, "B", ("dwc:genus", "Notropis"), ("dwc:specificEpithet", "atherinoides")),
    ]


# -- build -------------------------------------------------------------------


def test_single_multimedia_entity_has_four_statements():
    g = build_entity_graph([rec(MM, "A", ("dcterms:identifier", "A"), ("dcterms:format", "x"), ("photoshop:Credit", "c"))])
    assert len(g) == 4
    a = mint("99999", MM, "A")
    assert g.class_of(a) is MM


def test_sixteen_statement_fixture():
    g = build_entity_graph(small_fixture())
    # enumerate expected statements independently
    expected = set()
    for r in small_fixture():
        a = mint("99999", r.entity_class, r.source_key)
        expected.add(Statement(a, RDF_TYPE, DEFAULT_REGISTRY.class_iri(r.entity_class)))
        expected.update(Statement(a, t, v) for t, v in r.pairs)
        if r.entity_class is CE:
            expected.add(Statement(a, DCT_IS_PART_OF, mint("99999", MM, r.source_key)))
    assert len(expected) == 16
    assert g.statements() == expected
    # no Batch in this fixture, so only the two Multimedia nodes are flagged
    problems = topology_violations(g)
    assert len(problems) == 2 and all("not reachable from any Batch" in m for m in problems)


def test_orphan_child():
    with pytest.raises(OrphanChild) as info:
        build_entity_graph([rec(CE, "X", ("dwc:genus", "Esox"))])
    assert info.value.key == "X"


def test_duplicate_entity_only_when_statements_differ():
    same = rec(MM, "A", ("dcterms:identifier", "A"))
    assert len(build_entity_graph([same, same])) == 2
    with pytest.raises(DuplicateEntity):
        build_entity_graph([same, rec(MM, "A", ("dcterms:identifier", "other"))])


def test_batch_links_and_topology():
    records = [
        rec(EntityClass.BATCH, "B1", ("dcterms:title", "batch")),
        rec(MM, "A", ("dcterms:identifier", "A"), parent="B1"),
        rec(CE, "A", ("dwc:genus", "Esox")),
        rec(EntityClass.IQ_METADATA, "A", ("bgnn:blurry", "no")),
    ]
    g = build_entity_graph(records)
    b, m = mint("99999", EntityClass.BATCH, "B1"), mint("99999", MM, "A")
    assert Statement(b, DCT_HAS_PART, m) in g
    assert topology_violations(g) == []
    assert set(descendants(g, b)) == {b, m, mint("99999", CE, "A"), mint("99999", EntityClass.IQ_METADATA, "A")}
    with pytest.raises(OrphanChild):
        build_entity_graph([rec(MM, "A", ("dcterms:identifier", "A"), parent="nope")])


def test_build_is_deterministic_and_order_free():
    records = small_fixture()
    a = serialize(build_entity_graph(records))
    b = serialize(build_entity_graph(list(reversed(records))))
    assert a == b


# -- store -------------------------------------------------------------------


def test_add_statement_set_semantics_and_index():
    g = Graph()
    s = Statement(mint("99999", MM, "A"), GENUS, lit("Carassius"))
    add_statement(g, s)
    add_statement(g, s)
    assert len(g) == 1
    assert query(g, [TriplePattern(s.subject, GENUS, Var("o"))]) == [{"o": lit("Carassius")}]
    with pytest.raises(UnknownPrefix):
        g.add(Statement(s.subject, Term("zzz", "x"), lit("v")))


def test_attach_rights():
    g = build_entity_graph(small_fixture())
    a = mint("99999", MM, "A")
    n = len(g)
    attach_rights(g, a, "Rights reserved", "https://creativecommons.org/licenses/by-nc/4.0/")
    attach_rights(g, a, "Rights reserved", "https://creativecommons.org/licenses/by-nc/4.0/")
    assert len(g) == n + 2
    assert query(g, [TriplePattern(a, RDFS_COMMENT, Var("t"))]) == [{"t": lit("Rights reserved")}]
    with pytest.raises(UnknownSubject):
        attach_rights(g, mint("99999", MM, "absent"), "x", "https://x.org/")


def test_snapshot_is_isolated_and_read_only():
    g = build_entity_graph(small_fixture())
    snap = g.snapshot()
    before = serialize(snap)
    g.add(Statement(mint("99999", MM, "A"), RDFS_COMMENT, lit("later")))
    assert serialize(snap) == before
    assert len(g) == len(snap) + 1
    with pytest.raises(TypeError):
        snap.add(Statement(mint("99999", MM, "A"), RDFS_COMMENT, lit("nope")))
    assert snap.snapshot() is not None


def test_concurrent_readers_during_writes():
    g = build_entity_graph(small_fixture())
    expected = serialize(g)
    snap = g.snapshot()
    errors = []

    def reader():
        for _ in range(50):
            if serialize(snap) != expected:
                errors.append("snapshot changed")

    threads = [threading.Thread(target=reader) for _ in range(4)]
    for t in threads:
        t.start()
    for i in range(200):
        g.add(Statement(mint("99999", MM, "A"), RDFS_COMMENT, lit(f"c{i}")))
    for t in threads:
        t.join()
    assert errors == []


# -- serialization -------------------------------------------------------------


def test_empty_graph_serializes_to_nothing():
    assert serialize(Graph()) == b""
    assert len(parse_serialized(b"")) == 0


def test_single_statement_round_trip():
    g = Graph([Statement(mint("99999", MM, "A"), GENUS, lit("Carassius"))])
    data = serialize(g)
    assert data == (
        b"<https://n2t.net/ark:/99999/fk4"
        + str(mint("99999", MM, "A")).split("fk4")[1].encode()
        + b"> <http://rs.tdwg.org/dwc/terms/genus> \"Carassius\" .\n"
    )
    assert serialize(parse_serialized(data)) == data


def test_typed_literal_and_escapes():
    a = mint("99999", MM, "A")
    g = Graph([
        Statement(a, Term("exif", "PixelXDimension"), Literal("42", Datatype.INTEGER)),
        Statement(a, RDFS_COMMENT, lit('q"\\\n\t\x01')),
    ])
    text = serialize(g).decode()
    assert '"42"^^<http://www.w3.org/2001/XMLSchema#integer>' in text
    assert r'"q\"\\\n\t\u0001"' in text
    assert parse_serialized(text.encode()) == g


def test_fifty_statements_sorted_independent_of_insertion_order():
    rng = random.Random(50)
    g = random_graph(rng, 50)
    while len(g) < 50:
        g = random_graph(rng, 60)
    stmts = list(g)[:50]
    expected = sorted_lines_oracle(stmts)
    for seed in range(5):
        shuffled = stmts[:]
        random.Random(seed).shuffle(shuffled)
        assert serialize(Graph(shuffled)) == expected


def test_blank_nodes_not_serializable():
    g = Graph([Statement(BlankNode("_:b1"), GENUS, lit("x"))])
    with pytest.raises(Exception):
        serialize(g)


@pytest.mark.parametrize(
    "line",
    [
        "garbage",
        '<https://n2t.net/ark:/99999/fk40000000000q> <http://example.org/p> "x" .',
        '<https://n2t.net/ark:/99999/fk40000000000r> <http://rs.tdwg.org/dwc/terms/genus> "x" .',
        '<https://x.org/s> <http://rs.tdwg.org/dwc/terms/genus> "x"^^<http://www.w3.org/2001/XMLSchema#integer> .',
        '<https://x.org/s> <http://rs.tdwg.org/dwc/terms/genus> "x"@en .',
    ],
)
def test_parse_errors_carry_line_numbers(line):
    ok = b'<https://x.org/s> <http://rs.tdwg.org/dwc/terms/genus> "ok" .\n'
    with pytest.raises(ParseError) as info:
        parse_serialized(ok + line.encode() + b"\n")
    assert info.value.line == 2


def test_owl_export_adds_six_declarations():
    g = build_entity_graph(small_fixture())
    owl = owl_export(g)
    parsed = parse_serialized(owl)
    assert len(parsed) == len(g) + 6
    assert serialize(parsed) == owl
    assert b"<https://bgnn.example.org/ns> <http://www.w3.org/1999/02/22-rdf-syntax-ns#type> <http://www.w3.org/2002/07/owl#Ontology> ." in owl


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32))
def test_round_trip_property(seed):
    g = random_graph(random.Random(seed), 120)
    data = serialize(g)
    assert data == sorted_lines_oracle(g)
    back = parse_serialized(data)
    assert back == g
    assert serialize(back) == data


# -- query ---------------------------------------------------------------------


def test_genus_query_one_binding():
    g = build_entity_graph(small_fixture())
    res = query(g, [TriplePattern(Var("s"), GENUS, lit("Carassius"))])
    assert res == [{"s": mint("99999", CE, "A")}]


def test_full_scan_returns_every_statement():
    g = build_entity_graph(small_fixture())
    assert len(query(g, [TriplePattern(Var("s"), Var("p"), Var("o"))])) == len(g)


def test_two_pattern_join_matches_oracle_on_hundred_statements():
    rng = random.Random(100)
    g = random_query_graph(rng, 100)
    records = []
    for i in range(12):
        records.append(rec(MM, f"K{i}", ("dcterms:identifier", f"K{i}")))
        records.append(rec(CE, f"K{i}", ("dwc:genus", rng.choice(["Carassius", "Notropis", "Esox"]))))
    g.add_all(build_entity_graph(records))
    pats = [
        TriplePattern(Var("e"), RDF_TYPE, DEFAULT_REGISTRY.class_iri(CE)),
        TriplePattern(Var("e"), GENUS, Var("g")),
    ]
    res = query(g, pats)
    assert as_multiset(res) == brute_force(g, pats)
    assert len(res) == 12


def test_results_sorted_and_deduplicated_under_projection():
    g = build_entity_graph(small_fixture())
    res = query(g, [TriplePattern(Var("s"), Var("p"), Var("o"))], select=["p"])
    rendered = [format_binding(b, DEFAULT_REGISTRY) for b in res]
    assert rendered == sorted(set(rendered))
    assert len(res) == len({s.predicate for s in g})


def test_unbound_select():
    g = build_entity_graph(small_fixture())
    with pytest.raises(UnboundSelect):
        query(g, [TriplePattern(Var("s"), GENUS, Var("o"))], select=["x"])


def test_parse_pattern_forms():
    p = parse_pattern('?s dwc:genus "Carassius"', DEFAULT_REGISTRY)
    assert p == TriplePattern(Var("s"), GENUS, lit("Carassius"))
    p = parse_pattern('?s exif:PixelXDimension "42"^^xsd:integer', DEFAULT_REGISTRY)
    assert p.obj == Literal("42", Datatype.INTEGER)
    a = mint("99999", MM, "A")
    assert parse_pattern(f"{a} ?p ?o", DEFAULT_REGISTRY).subject == a
    assert parse_pattern(f"<{a.iri}> ?p ?o", DEFAULT_REGISTRY).subject == a
    p = parse_pattern("?e rdf:type bgnn:CollectionEvent", DEFAULT_REGISTRY)
    assert p.obj == IRI("https://bgnn.example.org/ns#CollectionEvent")


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**32))
def test_query_matches_brute_force_property(seed):
    rng = random.Random(seed)
    g = random_query_graph(rng, 300)
    pats = random_bgp(rng, g)
    assert as_multiset(query(g, pats)) == brute_force(g, pats)
