"""Conjunctive basic-graph-pattern queries over a :class:`Graph`."""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterable, Sequence

from .. import ark as arks
from ..errors import InvalidValue, QuerySyntax, UnboundSelect
from ..terms import IRI, Datatype, Literal, NamespaceRegistry, Statement, Term
from .ntriples import Renderer, unescape_string
from .store import Graph

_VAR_RE = re.compile(r"\?[A-Za-z][A-Za-z0-9]*\Z")


@dataclass(frozen=True, slots=True, order=True)
class Var:
    name: str

    def __post_init__(self):
        if not _VAR_RE.match("?" + self.name):
            raise InvalidValue(f"bad variable name ?{self.name}")

    def __str__(self) -> str:
        return "?" + self.name


@dataclass(frozen=True, slots=True)
class TriplePattern:
    subject: object
    predicate: object
    obj: object

    def variables(self) -> set[str]:
        return {p.name for p in (self.subject, self.predicate, self.obj) if isinstance(p, Var)}


Binding = dict[str, object]


def query_variables(patterns: Sequence[TriplePattern]) -> set[str]:
    out: set[str] = set()
    for p in patterns:
        out |= p.variables()
    return out


def _resolve(position: object, binding: Binding) -> object:
    if isinstance(position, Var):
        return binding.get(position.name)
    return position


def _extend(pattern: TriplePattern, stmt: Statement, binding: Binding) -> Binding | None:
    new = binding
    for position, value in ((pattern.subject, stmt.subject), (pattern.predicate, stmt.predicate), (pattern.obj, stmt.obj)):
        if isinstance(position, Var):
            bound = new.get(position.name)
            if bound is None:
                if new is binding:
                    new = dict(binding)
                new[position.name] = value
            elif bound != value:
                return None
        elif position != value:
            return None
    return new


def query(graph: Graph, patterns: Sequence[TriplePattern], select: Iterable[str] | None = None) -> list[Binding]:
    """All bindings satisfying every pattern, sorted and de-duplicated.

    ``select`` projects onto a subset of variables (names without ``?``);
    by default every variable is returned. Results sort by the canonical
    N-Triples rendering of bound values taken in variable-name order.
    """
    if not patterns:
        raise QuerySyntax("a query needs at least one pattern")
    names = query_variables(patterns)
    chosen = sorted(names) if select is None else [s.lstrip("?") for s in select]
    missing = [v for v in chosen if v not in names]
    if missing:
        raise UnboundSelect(f"selected variables not in any pattern: {', '.join('?' + m for m in missing)}")

    results: list[Binding] = []

    def solve(remaining: list[TriplePattern], binding: Binding) -> None:
        if not remaining:
            results.append(binding)
            return
        # most selective pattern first under the current binding
        best_i, best_n = 0, None
        for i, pat in enumerate(remaining):
            s, p, o = (_resolve(x, binding) for x in (pat.subject, pat.predicate, pat.obj))
            n = graph.estimate(s, p if isinstance(p, Term) else None, o)
            if p is not None and not isinstance(p, Term):
                n = 0
            if best_n is None or n < best_n:
                best_i, best_n = i, n
        pat = remaining[best_i]
        rest = remaining[:best_i] + remaining[best_i + 1:]
        s, p, o = (_resolve(x, binding) for x in (pat.subject, pat.predicate, pat.obj))
        if p is not None and not isinstance(p, Term):
            return
        for stmt in graph.match(s, p, o):
            extended = _extend(pat, stmt, binding)
            if extended is not None:
                solve(rest, extended)

    solve(list(patterns), {})

    renderer = Renderer(graph.registry)
    keyed: dict[tuple[str, ...], Binding] = {}
    for b in results:
        projected = {v: b[v] for v in chosen}
        key = tuple(renderer.node(projected[v]) for v in sorted(chosen))
        keyed.setdefault(key, projected)
    return [keyed[k] for k in sorted(keyed)]


_TOKEN_RE = re.compile(
    r'\s*(?:(?P<var>\?[A-Za-z][A-Za-z0-9]*)'
    r'|<(?P<iri>[^<>\s]*)>'
    r'|"(?P<lex>(?:[^"\\]|\\.)*)"(?:\^\^(?P<dt>[A-Za-z]+(?::[A-Za-z]+)?|<[^<>\s]*>))?'
    r'|(?P<ark>ark:/\S+)'
    r'|(?P<term>[A-Za-z][A-Za-z0-9]*:[A-Za-z_][A-Za-z0-9_]*))(?=\s|\Z)'
)


def _datatype(token: str | None) -> Datatype:
    if token is None:
        return Datatype.STRING
    if token.startswith("<"):
        return Datatype.from_iri(token[1:-1])
    return Datatype.from_name(token.split(":", 1)[-1])


def parse_pattern(text: str, registry: NamespaceRegistry) -> TriplePattern:
    """Parse ``s p o`` with ?vars, prefixed terms, <iris>, ARKs and "literals"."""
    tokens: list[object] = []
    pos = 0
    text = text.strip()
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if not m:
            raise QuerySyntax(f"cannot parse pattern near {text[pos:]!r}")
        pos = m.end()
        if m.group("var"):
            tokens.append(Var(m.group("var")[1:]))
        elif m.group("iri") is not None:
            iri = m.group("iri")
            tokens.append(arks.from_iri(iri) if iri.startswith(arks.RESOLVER + "ark:") else IRI(iri))
        elif m.group("lex") is not None:
            tokens.append(Literal(unescape_string(m.group("lex")), _datatype(m.group("dt"))))
        elif m.group("ark"):
            tokens.append(arks.parse(m.group("ark")))
        else:
            tokens.append(Term.parse(m.group("term")))
        while pos < len(text) and text[pos].isspace():
            pos += 1
    if len(tokens) != 3:
        raise QuerySyntax(f"a pattern needs exactly 3 parts, got {len(tokens)}: {text!r}")
    s, p, o = tokens
    if isinstance(p, Term):
        registry.check_term(p)
    elif not isinstance(p, Var):
        raise QuerySyntax(f"predicate must be a prefixed term or variable: {text!r}")
    # prefixed names outside the predicate slot denote IRIs
    if isinstance(s, Term):
        s = IRI(registry.expand(s))
    if isinstance(o, Term):
        o = IRI(registry.expand(o))
    if isinstance(s, Literal):
        raise QuerySyntax("literal in subject position")
    return TriplePattern(s, p, o)


def format_binding(binding: Binding, registry: NamespaceRegistry) -> str:
    r = Renderer(registry)
    return "\t".join(f"?{name}={r.node(binding[name])}" for name in sorted(binding))
