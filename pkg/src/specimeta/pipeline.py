"""End-to-end wiring: deliveries -> crosswalk -> entity graph."""

from __future__ import annotations

import csv
import io
import os
import tempfile
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Mapping

from . import ark as arks
from .crosswalk import RuleSet, WalkIssue, apply_rules, load_rules_file
from .errors import SpecimetaError
from .graph import Graph, WalkedRecord, attach_rights, build_entity_graph
from .ingest import Delivery, RejectedRow, parse_record_table
from .terms import DEFAULT_REGISTRY, EntityClass, NamespaceRegistry

DEFAULT_ID_COLUMN = "MediaId"
DEFAULT_ID_COLUMNS = {"batch": "BatchId"}
DEFAULT_BATCH_COLUMN = "BatchId"


def default_rules_dir() -> Path:
    return Path(str(resources.files("specimeta") / "data" / "rules"))


def load_rules_dir(path: str | Path, registry: NamespaceRegistry = DEFAULT_REGISTRY) -> dict[str, RuleSet]:
    """One RuleSet per ``*.csv`` file, keyed by file stem."""
    path = Path(path)
    rules = {p.stem: load_rules_file(p, registry) for p in sorted(path.glob("*.csv"))}
    if not rules:
        raise SpecimetaError(f"no rule files in {path}")
    return rules


@dataclass
class PipelineResult:
    graph: Graph
    issues: dict[arks.ArkId, list[WalkIssue]] = field(default_factory=dict)
    rejected: dict[str, list[RejectedRow]] = field(default_factory=dict)
    deliveries: dict[str, Delivery] = field(default_factory=dict)

    @property
    def issue_count(self) -> int:
        return sum(len(v) for v in self.issues.values())


def walk_delivery(delivery: Delivery, ruleset: RuleSet, batch_column: str = DEFAULT_BATCH_COLUMN):
    """Crosswalk every record; yields (WalkedRecord, issues)."""
    for record in delivery.records:
        result = apply_rules(ruleset, record)
        parent = None
        if ruleset.target_class is EntityClass.MULTIMEDIA:
            raw = record.get(batch_column)
            parent = raw.strip() if raw and raw.strip() else None
        walked = WalkedRecord(ruleset.target_class, record.source_id, tuple(result.pairs), parent)
        yield walked, result.issues


def resolve_rules(source: str, rules: Mapping[str, RuleSet]) -> RuleSet:
    if source in rules:
        return rules[source]
    if len(rules) == 1:
        return next(iter(rules.values()))
    raise SpecimetaError(f"no rule file for source {source!r} (have: {', '.join(sorted(rules))})")


def run_pipeline(
    inputs: Mapping[str, bytes],
    rules: Mapping[str, RuleSet],
    naan: str = arks.DEFAULT_NAAN,
    id_columns: Mapping[str, str] | None = None,
    default_id_column: str = DEFAULT_ID_COLUMN,
    batch_column: str = DEFAULT_BATCH_COLUMN,
    rights_text: str | None = None,
    license_iri: str | None = None,
    registry: NamespaceRegistry = DEFAULT_REGISTRY,
) -> PipelineResult:
    """Ingest each named delivery with its rule set and build one graph."""
    columns = {**DEFAULT_ID_COLUMNS, **(id_columns or {})}
    walked: list[WalkedRecord] = []
    issues: dict[arks.ArkId, list[WalkIssue]] = {}
    rejected: dict[str, list[RejectedRow]] = {}
    deliveries: dict[str, Delivery] = {}
    for source, content in inputs.items():
        ruleset = resolve_rules(source, rules)
        delivery = parse_record_table(content, columns.get(source, default_id_column), source)
        deliveries[source] = delivery
        if delivery.rejected:
            rejected[source] = delivery.rejected
        for rec, rec_issues in walk_delivery(delivery, ruleset, batch_column):
            walked.append(rec)
            if rec_issues:
                issues.setdefault(arks.mint(naan, rec.entity_class, rec.source_key), []).extend(rec_issues)
    graph = build_entity_graph(walked, naan, registry)
    if rights_text and license_iri:
        for cls in (EntityClass.BATCH, EntityClass.MULTIMEDIA):
            for a in graph.entities(cls):
                attach_rights(graph, a, rights_text, license_iri)
    return PipelineResult(graph, issues, rejected, deliveries)


ISSUES_HEADER = ["ark", "kind", "field", "value", "detail"]


def render_issues(issues: Mapping[arks.ArkId, list[WalkIssue]]) -> bytes:
    buf = io.StringIO(newline="")
    writer = csv.writer(buf, lineterminator="\r\n")
    writer.writerow(ISSUES_HEADER)
    for a in sorted(issues, key=str):
        for issue in issues[a]:
            writer.writerow([str(a), issue.kind.value, issue.field, issue.value, issue.detail])
    return buf.getvalue().encode("utf-8")


def issue_counts(content: bytes) -> dict[str, int]:
    counts: dict[str, int] = {}
    for row in csv.DictReader(io.StringIO(content.decode("utf-8"), newline="")):
        counts[row["ark"]] = counts.get(row["ark"], 0) + 1
    return counts


def atomic_write(path: str | Path, data: bytes) -> None:
    """Write to a sibling temp file then rename, so readers never see partial output."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(prefix=f".{path.name}.", dir=path.parent)
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
