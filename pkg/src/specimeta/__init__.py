"""Specimen-image metadata pipeline.

Deliveries of CSV metadata are crosswalked onto registered vocabulary terms,
assigned ARK identifiers, stored as a statement graph, validated against OCR
label text and exported as reproducible zip bundles or served over HTTP.
"""

from __future__ import annotations

from .ark import ArkId, mint
from .errors import SpecimetaError
from .graph import Graph, query, serialize
from .terms import DEFAULT_REGISTRY, Datatype, EntityClass, Literal, Statement, Term

__version__ = "0.1.0"

__all__ = [
    "ArkId",
    "DEFAULT_REGISTRY",
    "Datatype",
    "EntityClass",
    "Graph",
    "Literal",
    "SpecimetaError",
    "Statement",
    "Term",
    "mint",
    "query",
    "serialize",
]
