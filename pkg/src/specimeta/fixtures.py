"""Synthetic specimen-image corpus standing in for real repository deliveries.

Headers deliberately mix canonical terms (``dwc:country``), legacy names
(``AccessConstraints``) and junk (``FileNameAsDelivered``) so that every
crosswalk path gets exercised.
"""

from __future__ import annotations

import csv
import io
import random
from dataclasses import dataclass, field
from pathlib import Path

DEFAULT_GENUS_POOL: tuple[tuple[str, str], ...] = (
    ("Carassius", "auratus"),
    ("Notropis", "hudsonius"),
    ("Lepomis", "macrochirus"),
    ("Esox", "lucius"),
    ("Perca", "flavescens"),
    ("Cyprinus", "carpio"),
    ("Micropterus", "salmoides"),
    ("Ictalurus", "punctatus"),
    ("Catostomus", "commersonii"),
    ("Pimephales", "promelas"),
)

INSTITUTIONS = ("INHS", "FMNH", "JFBM", "OSUM", "UMMZ", "UWZM")
LOCALITIES = (
    "Lake Michigan, Chicago harbor",
    "Illinois River near Havana",
    "Lake Erie, Put-in-Bay",
    "Mississippi River at Red Wing",
    "Lake Superior, Duluth",
    "Huron River, Ann Arbor",
)
BATCH_SIZE = 1000
_ALPHABET = "abcdefghijklmnopqrstuvwxyz0123456789"

MEDIA_HEADER = [
    "MediaId", "BatchId", "FileNameAsDelivered", "AccessConstraints", "Format", "ImageWidth",
    "ImageHeight", "CaptureDate", "Credit", "InstanceID", "AccessURI", "LegacyNotes",
]
EVENT_HEADER = [
    "MediaId", "CatalogNumber", "InstitutionCode", "Genus", "SpecificEpithet", "ScientificName",
    "EventDate", "Locality", "dwc:country", "DecimalLatitude", "DecimalLongitude",
    "CollectorRemarks", "OldCatalogNumber",
]
IQ_HEADER = ["MediaId", "QualityScore", "Blurry", "BoundingBox", "ColorProfile", "Specimen Angle"]
EXTENDED_HEADER = ["MediaId", "MaskFile", "TraitCount", "SegmentationModel", "MaskFormat"]
BATCH_HEADER = ["BatchId", "Title", "Created", "Publisher", "AccessConstraints"]
LABEL_HEADER = ["sourceKey", "text"]

# Cells never blanked: record keys, batch links, and the identification a label physically carries.
KEY_COLUMNS: dict[str, frozenset[str]] = {
    "media": frozenset({"MediaId", "BatchId"}),
    "collection_event": frozenset({"MediaId", "CatalogNumber", "Genus", "SpecificEpithet"}),
    "iq": frozenset({"MediaId"}),
    "extended": frozenset({"MediaId"}),
    "batch": frozenset({"BatchId"}),
}

ID_COLUMNS = {"media": "MediaId", "collection_event": "MediaId", "iq": "MediaId", "extended": "MediaId", "batch": "BatchId"}


@dataclass(frozen=True)
class CorpusSpec:
    record_count: int
    seed: int = 0
    genus_pool: tuple[tuple[str, str], ...] = DEFAULT_GENUS_POOL
    missing_field_rate: float = 0.0
    ocr_noise_rate: float = 0.0

    def __post_init__(self):
        if self.record_count < 0:
            raise ValueError("record_count must be non-negative")
        for name in ("missing_field_rate", "ocr_noise_rate"):
            rate = getattr(self, name)
            if not 0.0 <= rate < 1.0:
                raise ValueError(f"{name} must be in [0, 1), got {rate}")
        if not self.genus_pool:
            raise ValueError("genus_pool must be non-empty")


@dataclass
class Corpus:
    media: bytes
    collection_event: bytes
    iq: bytes
    extended: bytes
    batch: bytes
    labels: bytes
    label_texts: dict[str, str] = field(default_factory=dict)

    SOURCES = ("media", "collection_event", "iq", "extended", "batch")

    def files(self) -> dict[str, bytes]:
        out = {f"{name}.csv": getattr(self, name) for name in self.SOURCES}
        out["labels.csv"] = self.labels
        return out

    def write(self, directory: str | Path) -> list[Path]:
        directory = Path(directory)
        directory.mkdir(parents=True, exist_ok=True)
        written = []
        for name, data in self.files().items():
            path = directory / name
            path.write_bytes(data)
            written.append(path)
        return written


def _csv_bytes(header: list[str], rows: list[list[str]]) -> bytes:
    buf = io.StringIO(newline="")
    writer = csv.writer(buf, lineterminator="\r\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buf.getvalue().encode("utf-8")


def add_ocr_noise(text: str, rate: float, rng: random.Random) -> str:
    """Apply an independent single-character edit at each position with probability ``rate``."""
    if rate <= 0:
        return text
    out: list[str] = []
    for ch in text:
        if rng.random() >= rate:
            out.append(ch)
            continue
        edit = rng.randrange(3)
        if edit == 0:
            out.append(rng.choice(_ALPHABET))
        elif edit == 1:
            out.append(ch + rng.choice(_ALPHABET))
        # edit == 2 deletes
    return "".join(out)


class _Blanker:
    def __init__(self, rng: random.Random, rate: float):
        self.rng = rng
        self.rate = rate

    def __call__(self, source: str, header: list[str], row: list[str]) -> list[str]:
        keys = KEY_COLUMNS[source]
        return [
            "" if name not in keys and self.rate > 0 and self.rng.random() < self.rate else value
            for name, value in zip(header, row)
        ]


def generate(spec: CorpusSpec) -> Corpus:
    """Deterministic corpus: one CSV per metadata source plus OCR label texts."""
    rng = random.Random(spec.seed)
    noise_rng = random.Random(spec.seed ^ 0x5EED)
    blank = _Blanker(random.Random(spec.seed ^ 0xB1A4C), spec.missing_field_rate)

    media, events, iqs, extended, labels = [], [], [], [], []
    label_texts: dict[str, str] = {}
    batch_ids: list[str] = []
    for i in range(spec.record_count):
        inst = INSTITUTIONS[i % len(INSTITUTIONS)]
        catalog = str(10000 + i)
        key = f"{inst}_FISH_{catalog}"
        batch_id = f"BATCH-{i // BATCH_SIZE + 1:04d}"
        if not batch_ids or batch_ids[-1] != batch_id:
            batch_ids.append(batch_id)
        genus, epithet = spec.genus_pool[rng.randrange(len(spec.genus_pool))]
        width = rng.randrange(1200, 6000)
        height = rng.randrange(800, 4000)
        year = rng.randrange(1950, 2021)
        month = rng.randrange(1, 13)
        day = rng.randrange(1, 29)
        locality = LOCALITIES[rng.randrange(len(LOCALITIES))]
        instance = "".join(rng.choice("0123456789abcdef") for _ in range(32))

        media.append(blank("media", MEDIA_HEADER, [
            key,
            batch_id,
            f"{key}.JPG",
            "CC BY-NC" if rng.random() < 0.7 else "CC0",
            "image/jpeg",
            str(width) if rng.random() > 0.01 else "n/a",
            str(height),
            f"{2015 + i % 6}-0{1 + i % 9}-1{i % 10}T10:00:00Z",
            f"{inst} Fish Collection",
            f"xmp.iid:{instance}",
            f"https://images.example.org/{key}.jpg",
            "scanned twice" if rng.random() < 0.1 else "",
        ]))
        events.append(blank("collection_event", EVENT_HEADER, [
            key,
            catalog,
            inst,
            genus,
            epithet,
            f"{genus} {epithet}",
            f"{year:04d}-{month:02d}-{day:02d}T00:00:00Z",
            locality,
            "United States",
            f"{rng.uniform(38.0, 47.5):.5f}",
            f"{rng.uniform(-92.0, -82.0):.5f}",
            "net haul" if rng.random() < 0.3 else "",
            f"OLD-{catalog}",
        ]))
        iqs.append(blank("iq", IQ_HEADER, [
            key,
            f"{rng.uniform(1, 10):.2f}",
            "true" if rng.random() < 0.1 else "false",
            f"{rng.randrange(0, 400)},{rng.randrange(0, 300)},{rng.randrange(400, 1200)},{rng.randrange(300, 800)}",
            "sRGB IEC61966-2.1",
            rng.choice(["left", "right"]),
        ]))
        extended.append(blank("extended", EXTENDED_HEADER, [
            key,
            f"{key}_mask.png",
            str(rng.randrange(6, 12)),
            "fish-segmentation-v2",
            "image/png",
        ]))
        text = f"{genus} {epithet} {inst} {catalog} {locality}"
        text = add_ocr_noise(text, spec.ocr_noise_rate, noise_rng)
        label_texts[key] = text
        labels.append([key, text])

    batches = [
        blank("batch", BATCH_HEADER, [
            b,
            f"Great Lakes fish specimen images, batch {n}",
            f"2022-0{1 + n % 9}-01T00:00:00Z",
            "Tulane University Biodiversity Research Institute",
            "CC BY-NC",
        ])
        for n, b in enumerate(batch_ids, start=1)
    ]
    return Corpus(
        media=_csv_bytes(MEDIA_HEADER, media),
        collection_event=_csv_bytes(EVENT_HEADER, events),
        iq=_csv_bytes(IQ_HEADER, iqs),
        extended=_csv_bytes(EXTENDED_HEADER, extended),
        batch=_csv_bytes(BATCH_HEADER, batches),
        labels=_csv_bytes(LABEL_HEADER, labels),
        label_texts=label_texts,
    )
