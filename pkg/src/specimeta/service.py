"""Read-only HTTP API: search by genus or ARK, entity metadata, bundle download.

Implemented as a plain WSGI application so it can run under any WSGI server;
:func:`serve` uses a threaded stdlib server.
"""

from __future__ import annotations

import json
import logging
import socketserver
from dataclasses import dataclass
from typing import Callable, Iterable
from urllib.parse import parse_qs, unquote
from wsgiref.simple_server import WSGIRequestHandler, WSGIServer, make_server

from . import ark as arks
from .ark import ArkId
from .errors import NotAnArk, UnknownRoot
from .export import build_bundle
from .graph import Graph, TriplePattern, Var, descendants, query
from .graph.ntriples import Renderer
from .terms import DCT_IS_PART_OF, RDF_TYPE, EntityClass, Literal, Term

log = logging.getLogger(__name__)

API_PREFIX = "/api/v1"
DEFAULT_ADDR = "127.0.0.1:8080"
DEFAULT_CITATION = (
    "Please cite the dataset and the persistent identifiers listed below when reusing these images and metadata."
)
GENUS = Term("dwc", "genus")
SCIENTIFIC_NAME = Term("dwc", "scientificName")

SEARCH_HIT_SCHEMA = {
    "type": "object",
    "required": ["ark", "entityClass", "genus", "scientificName"],
    "additionalProperties": False,
    "properties": {
        "ark": {"type": "string", "pattern": "^ark:/[0-9]{5}/"},
        "entityClass": {"enum": [c.value for c in EntityClass]},
        "genus": {"type": ["string", "null"]},
        "scientificName": {"type": ["string", "null"]},
    },
}
SEARCH_SCHEMA = {"type": "array", "items": SEARCH_HIT_SCHEMA}
ENTITY_SCHEMA = {
    "type": "object",
    "required": ["ark", "class", "statements"],
    "additionalProperties": False,
    "properties": {
        "ark": {"type": "string"},
        "class": {"enum": [c.value for c in EntityClass]},
        "statements": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["predicate", "value", "datatype"],
                "additionalProperties": False,
                "properties": {
                    "predicate": {"type": "string"},
                    "value": {"type": "string"},
                    "datatype": {"type": "string"},
                },
            },
        },
    },
}
ERROR_SCHEMA = {
    "type": "object",
    "required": ["error", "detail"],
    "properties": {"error": {"type": "string"}, "detail": {"type": "string"}},
}

_REASONS = {200: "OK", 400: "Bad Request", 404: "Not Found", 405: "Method Not Allowed", 422: "Unprocessable Entity"}


@dataclass
class Response:
    status: int
    headers: list[tuple[str, str]]
    body: bytes

    @property
    def status_line(self) -> str:
        return f"{self.status} {_REASONS.get(self.status, '')}".strip()

    def json(self):
        return json.loads(self.body)


def _json(status: int, payload: object) -> Response:
    body = json.dumps(payload, ensure_ascii=False).encode("utf-8")
    return Response(status, [("Content-Type", "application/json; charset=utf-8"), ("Content-Length", str(len(body)))], body)


def _error(status: int, error: str, detail: str) -> Response:
    return _json(status, {"error": error, "detail": detail})


class SpecimetaService:
    """Stateless request handlers over an immutable graph snapshot."""

    def __init__(self, graph: Graph, citation_text: str = DEFAULT_CITATION):
        self._graph = graph.snapshot()
        self.citation_text = citation_text

    @property
    def graph(self) -> Graph:
        return self._graph

    def reload(self, graph: Graph) -> None:
        # single reference assignment: in-flight requests keep the old snapshot
        self._graph = graph.snapshot()

    # -- handlers -------------------------------------------------------

    def search_hit(self, graph: Graph, a: ArkId) -> dict:
        cls = graph.class_of(a)
        genus = self._first(graph, a, GENUS)
        name = self._first(graph, a, SCIENTIFIC_NAME)
        if cls is EntityClass.MULTIMEDIA and (genus is None or name is None):
            events = sorted(
                (
                    s.subject
                    for s in graph.match(None, DCT_IS_PART_OF, a)
                    if graph.class_of(s.subject) is EntityClass.COLLECTION_EVENT
                ),
                key=str,
            )
            for c in events:
                genus = genus if genus is not None else self._first(graph, c, GENUS)
                name = name if name is not None else self._first(graph, c, SCIENTIFIC_NAME)
        return {"ark": str(a), "entityClass": cls.value, "genus": genus, "scientificName": name}

    @staticmethod
    def _first(graph: Graph, subject: ArkId, term: Term) -> str | None:
        values = [o.lexical for o in graph.objects(subject, term) if isinstance(o, Literal)]
        return values[0] if values else None

    def handle_search(self, params: dict[str, list[str]]) -> Response:
        graph = self._graph
        has_genus, has_ark = "genus" in params, "ark" in params
        if has_genus == has_ark:
            return _error(400, "BothOrNeitherParams", "give exactly one of 'genus' or 'ark'")
        if has_genus:
            genus = params["genus"][0]
            patterns = [
                TriplePattern(Var("e"), RDF_TYPE, graph.registry.class_iri(EntityClass.COLLECTION_EVENT)),
                TriplePattern(Var("e"), GENUS, Literal(genus)),
            ]
            parents: set[ArkId] = set()
            for b in query(graph, patterns):
                for s in graph.match(b["e"], DCT_IS_PART_OF):
                    if isinstance(s.obj, ArkId) and graph.class_of(s.obj) is EntityClass.MULTIMEDIA:
                        parents.add(s.obj)
            return _json(200, [self.search_hit(graph, p) for p in sorted(parents, key=str)])
        try:
            a = arks.parse(params["ark"][0])
        except NotAnArk as exc:
            return _error(422, "NotAnArk", str(exc))
        if graph.class_of(a) is None:
            return _error(404, "UnknownArk", f"{a} is not in the graph")
        hits = [self.search_hit(graph, d) for d in descendants(graph, a) if graph.class_of(d) is not None]
        return _json(200, sorted(hits, key=lambda h: h["ark"]))

    def handle_entity(self, ark_text: str) -> Response:
        graph = self._graph
        try:
            a = arks.parse(ark_text)
        except NotAnArk as exc:
            return _error(422, "NotAnArk", str(exc))
        cls = graph.class_of(a)
        if cls is None:
            return _error(404, "UnknownArk", f"{a} is not in the graph")
        renderer = Renderer(graph.registry)
        node = graph.entity(a)
        statements = []
        for s in sorted(node.statements, key=lambda s: renderer.statement(s).encode("utf-8")):
            if isinstance(s.obj, Literal):
                value, datatype = s.obj.lexical, s.obj.datatype.value
            else:
                value, datatype = str(s.obj), "iri"
            statements.append({"predicate": str(s.predicate), "value": value, "datatype": datatype})
        return _json(200, {"ark": str(a), "class": cls.value, "statements": statements})

    def handle_bundle(self, ark_text: str) -> Response:
        graph = self._graph
        try:
            a = arks.parse(ark_text)
        except NotAnArk as exc:
            return _error(422, "NotAnArk", str(exc))
        try:
            bundle = build_bundle(graph, a, self.citation_text)
        except UnknownRoot as exc:
            return _error(404, "UnknownRoot", str(exc))
        body = bundle.zip_bytes()
        headers = [
            ("Content-Type", "application/zip"),
            ("Content-Disposition", f'attachment; filename="{bundle.filename}"'),
            ("Content-Length", str(len(body))),
        ]
        return Response(200, headers, body)

    # -- routing --------------------------------------------------------

    def handle(self, method: str, path: str, query_string: str = "") -> Response:
        path = unquote(path)
        if method not in ("GET", "HEAD"):
            return _error(405, "MethodNotAllowed", f"{method} is not supported")
        if path == "/healthz":
            return Response(200, [("Content-Type", "text/plain; charset=utf-8"), ("Content-Length", "2")], b"ok")
        if path == f"{API_PREFIX}/search":
            return self.handle_search(parse_qs(query_string, keep_blank_values=True))
        if path.startswith(f"{API_PREFIX}/entities/"):
            return self.handle_entity(path[len(f"{API_PREFIX}/entities/"):])
        if path.startswith(f"{API_PREFIX}/bundles/") and path.endswith(".zip"):
            return self.handle_bundle(path[len(f"{API_PREFIX}/bundles/"):-len(".zip")])
        return _error(404, "NotFound", f"no route for {path}")

    def __call__(self, environ: dict, start_response: Callable) -> Iterable[bytes]:
        method = environ.get("REQUEST_METHOD", "GET")
        resp = self.handle(method, environ.get("PATH_INFO", "/"), environ.get("QUERY_STRING", ""))
        start_response(resp.status_line, resp.headers)
        return [b"" if method == "HEAD" else resp.body]


class _ThreadingWSGIServer(socketserver.ThreadingMixIn, WSGIServer):
    daemon_threads = True


class _QuietHandler(WSGIRequestHandler):
    def log_message(self, format, *args):
        log.info("%s - %s", self.address_string(), format % args)


def parse_addr(addr: str) -> tuple[str, int]:
    host, sep, port = addr.rpartition(":")
    if not sep or not port.isdigit():
        raise ValueError(f"address must be host:port, got {addr!r}")
    return host or "127.0.0.1", int(port)


def make_http_server(service: SpecimetaService, addr: str = DEFAULT_ADDR) -> WSGIServer:
    host, port = parse_addr(addr)
    return make_server(host, port, service, server_class=_ThreadingWSGIServer, handler_class=_QuietHandler)


def serve(service: SpecimetaService, addr: str = DEFAULT_ADDR) -> None:
    server = make_http_server(service, addr)
    log.info("serving on http://%s:%d", *server.server_address[:2])
    try:
        server.serve_forever()
    finally:
        server.server_close()
