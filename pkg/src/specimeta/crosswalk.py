"""Raw field name -> canonical term mapping (the metadata crosswalk)."""

from __future__ import annotations

import csv
import enum
import io
import re
from dataclasses import dataclass, field
from pathlib import Path

from .errors import (
    CoercionError,
    DuplicatePattern,
    InvalidValue,
    MissingClassDeclaration,
    RuleSyntax,
    UnknownPrefix,
)
from .ingest import RawField, SourceRecord, coerce_value
from .terms import (
    DEFAULT_REGISTRY,
    LOCAL_RE,
    PROJECT_PREFIX,
    Datatype,
    EntityClass,
    Literal,
    NamespaceRegistry,
    Term,
)

RULES_HEADER = ["sourcePattern", "action", "target", "datatype", "note"]
CLASS_DIRECTIVE = "@class"


def normalize_pattern(name: str) -> str:
    return " ".join(name.split()).casefold()


def camel_local_name(raw: str) -> str:
    """lowerCamelCase local name for a raw field that no rule covers."""
    words = re.findall(r"[A-Za-z0-9]+", raw)
    if not words:
        return "unnamedField"
    first = words[0]
    first = first.lower() if first.isupper() else first[0].lower() + first[1:]
    name = first + "".join(w[0].upper() + w[1:] for w in words[1:])
    if not LOCAL_RE.match(name):
        name = "_" + name
    return name


class IssueKind(enum.Enum):
    UNMAPPED_FIELD = "UnmappedField"
    BLANK_VALUE = "BlankValue"
    COERCION = "CoercionIssue"


@dataclass(frozen=True, slots=True)
class WalkIssue:
    kind: IssueKind
    field: str
    value: str
    detail: str = ""


@dataclass(frozen=True, slots=True)
class MapTo:
    term: Term
    datatype: Datatype


@dataclass(frozen=True, slots=True)
class Drop:
    reason: str


@dataclass(frozen=True, slots=True)
class CrosswalkRule:
    source_pattern: str
    action: MapTo | Drop
    note: str = ""
    line: int = field(default=0, compare=False)

    @property
    def key(self) -> str:
        return normalize_pattern(self.source_pattern)


@dataclass(frozen=True)
class RuleSet:
    rules: tuple[CrosswalkRule, ...]
    target_class: EntityClass
    registry: NamespaceRegistry = field(default=DEFAULT_REGISTRY, compare=False, repr=False)
    _index: dict = field(init=False, repr=False, compare=False)
    _target_types: dict = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        index: dict[str, CrosswalkRule] = {}
        target_types: dict[Term, Datatype] = {}
        for rule in self.rules:
            if not rule.source_pattern.strip():
                raise RuleSyntax(rule.line, "empty sourcePattern")
            if rule.key in index:
                raise DuplicatePattern(rule.source_pattern, rule.line)
            index[rule.key] = rule
            if isinstance(rule.action, MapTo):
                self.registry.check_term(rule.action.term)
                known = target_types.setdefault(rule.action.term, rule.action.datatype)
                if known is not rule.action.datatype:
                    raise RuleSyntax(rule.line, f"{rule.action.term} mapped with conflicting datatypes")
        for rule in self.rules:
            if isinstance(rule.action, MapTo):
                other = index.get(normalize_pattern(str(rule.action.term)))
                if other is not None and other is not rule:
                    raise RuleSyntax(
                        other.line,
                        f"pattern {other.source_pattern!r} collides with canonical target {rule.action.term}",
                    )
        object.__setattr__(self, "_index", index)
        object.__setattr__(self, "_target_types", target_types)

    def match(self, raw_name: str) -> CrosswalkRule | None:
        return self._index.get(normalize_pattern(raw_name))

    def canonical_term(self, raw_name: str) -> tuple[Term, Datatype] | None:
        """Resolve a raw name that is already a registered prefixed term."""
        text = raw_name.strip()
        prefix, sep, local = text.partition(":")
        if not sep or prefix not in self.registry or not LOCAL_RE.match(local):
            return None
        term = Term(prefix, local)
        return term, self._target_types.get(term, Datatype.STRING)


@dataclass
class WalkResult:
    source_key: str
    pairs: list[tuple[Term, Literal]]
    issues: list[WalkIssue]
    dropped: list[str]

    def __iter__(self):
        # allows ``pairs, issues = apply_rules(...)``
        yield self.pairs
        yield self.issues


def load_rules(content: bytes, registry: NamespaceRegistry = DEFAULT_REGISTRY) -> RuleSet:
    text = content.decode("utf-8")
    if text.startswith("\ufeff"):
        text = text[1:]
    reader = csv.reader(io.StringIO(text, newline=""), strict=True)
    numbered: list[tuple[int, list[str]]] = []
    start = 1
    try:
        for row in reader:
            if row:
                numbered.append((start, row))
            start = reader.line_num + 1
    except csv.Error as exc:
        raise RuleSyntax(reader.line_num, str(exc)) from None
    rows = [r for _, r in numbered]
    if not rows or [h.strip() for h in rows[0]] != RULES_HEADER:
        raise RuleSyntax(1, f"header must be {','.join(RULES_HEADER)}")
    if len(rows) < 2 or rows[1][0].strip() != CLASS_DIRECTIVE:
        raise MissingClassDeclaration("first data row must be an @class declaration")

    def cells(line: int, row: list[str]) -> list[str]:
        if len(row) != len(RULES_HEADER):
            raise RuleSyntax(line, f"expected {len(RULES_HEADER)} cells, found {len(row)}")
        return [c.strip() for c in row]

    decl_line = numbered[1][0]
    decl = cells(decl_line, rows[1])
    try:
        target_class = EntityClass.from_name(decl[2])
    except InvalidValue as exc:
        raise RuleSyntax(decl_line, str(exc)) from None

    rules: list[CrosswalkRule] = []
    seen: dict[str, int] = {}
    for line, row in numbered[2:]:
        pattern, action, target, datatype, note = cells(line, row)
        if not pattern:
            raise RuleSyntax(line, "empty sourcePattern")
        if pattern == CLASS_DIRECTIVE:
            raise RuleSyntax(line, "repeated @class declaration")
        key = normalize_pattern(pattern)
        if key in seen:
            raise DuplicatePattern(pattern, line)
        seen[key] = line
        if action == "map":
            try:
                term = Term.parse(target)
                dt = Datatype.from_name(datatype)
            except InvalidValue as exc:
                raise RuleSyntax(line, str(exc)) from None
            if term.prefix not in registry:
                raise UnknownPrefix(term.prefix)
            rules.append(CrosswalkRule(pattern, MapTo(term, dt), note, line))
        elif action == "drop":
            if target or datatype:
                raise RuleSyntax(line, "drop rules take no target or datatype")
            rules.append(CrosswalkRule(pattern, Drop(note), note, line))
        else:
            raise RuleSyntax(line, f"action must be 'map' or 'drop', got {action!r}")
    return RuleSet(tuple(rules), target_class, registry)


def load_rules_file(path: str | Path, registry: NamespaceRegistry = DEFAULT_REGISTRY) -> RuleSet:
    return load_rules(Path(path).read_bytes(), registry)


def apply_rules(ruleset: RuleSet, record: SourceRecord) -> WalkResult:
    """Map every field of ``record``; never raises on data problems."""
    pairs: list[tuple[Term, Literal]] = []
    issues: list[WalkIssue] = []
    dropped: list[str] = []
    for f in record.fields:
        rule = ruleset.match(f.name)
        if rule is not None and isinstance(rule.action, Drop):
            dropped.append(f.name)
            continue
        if f.is_blank:
            issues.append(WalkIssue(IssueKind.BLANK_VALUE, f.name, f.value))
            continue
        if rule is not None:
            term, datatype = rule.action.term, rule.action.datatype
        else:
            canonical = ruleset.canonical_term(f.name)
            if canonical is not None:
                term, datatype = canonical
            else:
                term = Term(PROJECT_PREFIX, camel_local_name(f.name))
                datatype = Datatype.STRING
                issues.append(WalkIssue(IssueKind.UNMAPPED_FIELD, f.name, f.value, str(term)))
        try:
            value = coerce_value(f.value, datatype)
        except CoercionError as exc:
            issues.append(WalkIssue(IssueKind.COERCION, f.name, f.value, str(exc)))
            value = coerce_value(f.value, Datatype.STRING)
        pairs.append((term, value))
    return WalkResult(record.source_id, pairs, issues, dropped)


def canonical_record(result: WalkResult) -> SourceRecord:
    """Re-express walk output as a record whose field names are compacted terms."""
    fields = tuple(RawField(str(term), value.lexical) for term, value in result.pairs)
    return SourceRecord(result.source_key, fields)
