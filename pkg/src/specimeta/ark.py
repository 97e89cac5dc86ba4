"""ARK persistent identifiers: deterministic minting, NCDA check characters, parsing."""

from __future__ import annotations

import hashlib
import re
from dataclasses import dataclass

from .errors import BadCheckChar, BadNaan, BadQualifier, EmptyKey, NotAnArk
from .terms import EntityClass

BETANUMERIC = "0123456789bcdfghjkmnpqrstvwxz"
SHOULDER = "fk4"
BLADE_LENGTH = 10
DEFAULT_NAAN = "99999"
RESOLVER = "https://n2t.net/"

_ORDINAL = {c: i for i, c in enumerate(BETANUMERIC)}
_BLADE_SPACE = len(BETANUMERIC) ** BLADE_LENGTH
_NAAN_RE = re.compile(r"[0-9]{5}\Z")
_BETA_RE = re.compile(f"[{BETANUMERIC}]+\\Z")
_QUALIFIER_RE = re.compile(r"[0-9a-z]+\Z")


def check_char(naan: str, shoulder_blade: str) -> str:
    """NCDA check character over ``naan + "/" + shoulder_blade``."""
    text = f"{naan}/{shoulder_blade}"
    total = sum(_ORDINAL.get(c, 0) * pos for pos, c in enumerate(text, start=1))
    return BETANUMERIC[total % len(BETANUMERIC)]


@dataclass(frozen=True, slots=True, order=True)
class ArkId:
    naan: str
    shoulder: str
    blade: str
    check: str
    qualifier: tuple[str, ...] = ()

    @property
    def base(self) -> "ArkId":
        """The identifier with any qualifier path stripped."""
        if not self.qualifier:
            return self
        return ArkId(self.naan, self.shoulder, self.blade, self.check)

    @property
    def name(self) -> str:
        return self.shoulder + self.blade + self.check

    @property
    def iri(self) -> str:
        return RESOLVER + str(self)

    def verifies(self) -> bool:
        return check_char(self.naan, self.shoulder + self.blade) == self.check

    def __str__(self) -> str:
        text = f"ark:/{self.naan}/{self.name}"
        if self.qualifier:
            text += "/" + "/".join(self.qualifier)
        return text


def _validate_naan(naan: str) -> None:
    if not isinstance(naan, str) or not _NAAN_RE.match(naan):
        raise BadNaan(f"NAAN must be 5 digits, got {naan!r}")


def mint(naan: str, entity_class: EntityClass, source_key: str) -> ArkId:
    """Content-keyed ARK: same (naan, class, key) always gives the same identifier."""
    _validate_naan(naan)
    if not source_key:
        raise EmptyKey("source key must be non-empty")
    digest = hashlib.sha256(f"{naan}|{entity_class.value}|{source_key}".encode("utf-8")).digest()
    n = int.from_bytes(digest[:8], "big") % _BLADE_SPACE
    chars = []
    for _ in range(BLADE_LENGTH):
        n, r = divmod(n, len(BETANUMERIC))
        chars.append(BETANUMERIC[r])
    blade = "".join(reversed(chars))
    return ArkId(naan, SHOULDER, blade, check_char(naan, SHOULDER + blade))


def parse(text: str) -> ArkId:
    if not isinstance(text, str) or not text.startswith("ark:/"):
        raise NotAnArk(f"not an ARK: {text!r}")
    parts = text[len("ark:/"):].split("/")
    if len(parts) < 2:
        raise NotAnArk(f"missing ARK name: {text!r}")
    naan, name, *qualifier = parts
    if not _NAAN_RE.match(naan):
        raise NotAnArk(f"bad NAAN in {text!r}")
    expected_len = len(SHOULDER) + BLADE_LENGTH + 1
    if len(name) != expected_len or not _BETA_RE.match(name):
        raise NotAnArk(f"ARK name must be {expected_len} betanumeric characters: {text!r}")
    # check before shoulder so transcription errors anywhere in the name surface as BadCheckChar
    if check_char(naan, name[:-1]) != name[-1]:
        raise BadCheckChar(f"check character mismatch in {text!r}")
    if name[: len(SHOULDER)] != SHOULDER:
        raise NotAnArk(f"unsupported shoulder in {text!r}")
    for component in qualifier:
        if not _QUALIFIER_RE.match(component):
            raise BadQualifier(f"bad qualifier component {component!r} in {text!r}")
    return ArkId(naan, SHOULDER, name[len(SHOULDER):-1], name[-1], tuple(qualifier))


def child(parent: ArkId, component: str) -> ArkId:
    if not component or not _QUALIFIER_RE.match(component):
        raise BadQualifier(f"bad qualifier component {component!r}")
    return ArkId(parent.naan, parent.shoulder, parent.blade, parent.check, parent.qualifier + (component,))


def strip_qualifier(ark: ArkId) -> ArkId:
    """Drop the last qualifier component, recovering the immediate parent."""
    if not ark.qualifier:
        return ark
    return ArkId(ark.naan, ark.shoulder, ark.blade, ark.check, ark.qualifier[:-1])


def from_iri(iri: str) -> ArkId:
    if not iri.startswith(RESOLVER):
        raise NotAnArk(f"not a resolver IRI: {iri!r}")
    return parse(iri[len(RESOLVER):])
