"""OCR label checks against collection-event metadata, plus completeness scoring."""

from __future__ import annotations

import csv
import io
import re
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .ark import ArkId
from .crosswalk import WalkIssue
from .errors import EmptyLabel, WrongClass
from .graph.store import EntityNode
from .terms import EntityClass, Term

DEFAULT_SIM_THRESHOLD = 0.8
DEFAULT_PASS_THRESHOLD = 0.75
# absorbs float rounding so a similarity equal to the threshold still matches
_EPS = 1e-9

DEFAULT_REQUIRED: dict[EntityClass, tuple[Term, ...]] = {
    EntityClass.COLLECTION_EVENT: (
        Term("dwc", "catalogNumber"),
        Term("dwc", "genus"),
        Term("dwc", "specificEpithet"),
        Term("dwc", "eventDate"),
        Term("dwc", "locality"),
    ),
}

DEFAULT_LABEL_FIELDS: tuple[Term, ...] = (
    Term("dwc", "genus"),
    Term("dwc", "specificEpithet"),
    Term("dwc", "catalogNumber"),
)

_TOKEN_RE = re.compile(r"[^\W_]+")


def tokenize(text: str) -> list[str]:
    return _TOKEN_RE.findall(text.casefold())


@dataclass(frozen=True)
class LabelText:
    text: str

    @property
    def tokens(self) -> list[str]:
        return tokenize(self.text)


def levenshtein(a: str, b: str) -> int:
    if len(a) < len(b):
        a, b = b, a
    previous = list(range(len(b) + 1))
    for i, ca in enumerate(a, start=1):
        current = [i]
        for j, cb in enumerate(b, start=1):
            current.append(min(previous[j] + 1, current[j - 1] + 1, previous[j - 1] + (ca != cb)))
        previous = current
    return previous[-1]


def similarity(a: str, b: str) -> float:
    longest = max(len(a), len(b))
    if longest == 0:
        return 1.0
    return 1.0 - levenshtein(a, b) / longest


def best_window_similarity(label_tokens: Sequence[str], expected: str) -> float:
    """Best similarity between ``expected`` and any same-length token window."""
    wanted = tokenize(expected)
    if not wanted or not label_tokens:
        return 0.0
    target = " ".join(wanted)
    k = len(wanted)
    if len(label_tokens) <= k:
        return similarity(" ".join(label_tokens), target)
    return max(similarity(" ".join(label_tokens[i : i + k]), target) for i in range(len(label_tokens) - k + 1))


@dataclass(frozen=True)
class FieldCheck:
    term: Term
    expected: str | None
    matched: bool
    best_similarity: float


@dataclass(frozen=True)
class ValidationReport:
    ark: ArkId
    checked: tuple[FieldCheck, ...]
    pass_threshold: float

    @property
    def score(self) -> float:
        return sum(c.matched for c in self.checked) / len(self.checked)

    @property
    def passed(self) -> bool:
        return self.score >= self.pass_threshold - _EPS

    def to_dict(self) -> dict:
        return {
            "ark": str(self.ark),
            "score": self.score,
            "pass": self.passed,
            "checkedFields": [
                {
                    "term": str(c.term),
                    "expectedValue": c.expected,
                    "matched": c.matched,
                    "bestSimilarity": c.best_similarity,
                }
                for c in self.checked
            ],
        }


def _check_threshold(name: str, value: float) -> None:
    if not 0.0 < value <= 1.0:
        raise ValueError(f"{name} must be in (0, 1], got {value}")


def validate_label(
    label: LabelText | str,
    event: EntityNode,
    fields: Sequence[Term] = DEFAULT_LABEL_FIELDS,
    sim_threshold: float = DEFAULT_SIM_THRESHOLD,
    pass_threshold: float = DEFAULT_PASS_THRESHOLD,
) -> ValidationReport:
    if isinstance(label, str):
        label = LabelText(label)
    _check_threshold("sim_threshold", sim_threshold)
    _check_threshold("pass_threshold", pass_threshold)
    if not fields:
        raise ValueError("at least one field must be checked")
    if event.entity_class is not EntityClass.COLLECTION_EVENT:
        raise WrongClass(f"{event.ark} is {event.entity_class}, not CollectionEvent")
    tokens = label.tokens
    if not tokens:
        raise EmptyLabel(f"no text on label for {event.ark}")

    checks = []
    for term in fields:
        values = [v for v in event.literal_values(term) if v.strip()]
        if not values:
            checks.append(FieldCheck(term, None, False, 0.0))
            continue
        scored = [(best_window_similarity(tokens, v), v) for v in values]
        best, value = max(scored, key=lambda sv: (sv[0], sv[1]))
        checks.append(FieldCheck(term, value, best >= sim_threshold - _EPS, best))
    return ValidationReport(event.ark, tuple(checks), pass_threshold)


@dataclass(frozen=True)
class QualityReport:
    ark: ArkId
    required: tuple[Term, ...]
    present: tuple[Term, ...]
    issues: tuple[WalkIssue, ...] = field(default=())

    @property
    def completeness(self) -> float:
        return len(self.present) / len(self.required)

    def to_dict(self) -> dict:
        return {
            "ark": str(self.ark),
            "required": [str(t) for t in self.required],
            "present": [str(t) for t in self.present],
            "completeness": self.completeness,
            "issueCount": len(self.issues),
        }


def completeness(entity: EntityNode, required: Sequence[Term], issues: Iterable[WalkIssue] = ()) -> QualityReport:
    if not required:
        raise ValueError("required term list must be non-empty")
    present = tuple(t for t in required if any(v.strip() for v in _lexicals(entity, t)))
    return QualityReport(entity.ark, tuple(required), present, tuple(issues))


def _lexicals(entity: EntityNode, term: Term) -> list[str]:
    out = []
    for v in entity.values(term):
        out.append(v.lexical if hasattr(v, "lexical") else str(v))
    return out


REPORT_HEADER = ["ark", "score", "pass", "completeness", "issueCount"]


@dataclass(frozen=True)
class ReportRow:
    """One entity's line in the combined report.

    ``issue_count`` overrides the crosswalk issues carried on ``quality``,
    for when issues were loaded from a separate report file.
    """

    ark: ArkId
    validation: ValidationReport | None
    quality: QualityReport | None
    issue_count: int | None = None

    @property
    def issues(self) -> int:
        if self.issue_count is not None:
            return self.issue_count
        return 0 if self.quality is None else len(self.quality.issues)

    def cells(self) -> list[str]:
        v, q = self.validation, self.quality
        return [
            str(self.ark),
            "" if v is None else f"{v.score:.6f}",
            "" if v is None else str(v.passed).lower(),
            "" if q is None else f"{q.completeness:.6f}",
            str(self.issues),
        ]

    def to_dict(self) -> dict:
        return {
            "ark": str(self.ark),
            "score": None if self.validation is None else self.validation.score,
            "pass": None if self.validation is None else self.validation.passed,
            "completeness": None if self.quality is None else self.quality.completeness,
            "issueCount": self.issues,
        }


def render_report_csv(rows: Iterable[ReportRow]) -> bytes:
    buf = io.StringIO(newline="")
    writer = csv.writer(buf, lineterminator="\r\n")
    writer.writerow(REPORT_HEADER)
    for row in sorted(rows, key=lambda r: str(r.ark)):
        writer.writerow(row.cells())
    return buf.getvalue().encode("utf-8")
