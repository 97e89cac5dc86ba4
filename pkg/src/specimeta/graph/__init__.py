from .build import WalkedRecord, build_entity_graph, descendants, topology_violations
from .ntriples import owl_declarations, owl_export, parse_serialized, render_node, serialize
from .query import TriplePattern, Var, format_binding, parse_pattern, query
from .store import EntityNode, Graph, add_statement, attach_rights

__all__ = [
    "EntityNode",
    "Graph",
    "TriplePattern",
    "Var",
    "WalkedRecord",
    "add_statement",
    "attach_rights",
    "build_entity_graph",
    "descendants",
    "format_binding",
    "owl_declarations",
    "owl_export",
    "parse_pattern",
    "parse_serialized",
    "query",
    "render_node",
    "serialize",
    "topology_violations",
]
