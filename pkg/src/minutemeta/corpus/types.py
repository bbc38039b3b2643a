"""Core data model for annotated municipal meeting minutes.

A minute is an ordered sequence of sentences over raw text. Metadata is
annotated twice: segment-level (the opening and closing sections that carry
the metadata) and entity-level (typed character spans inside the text).
"""
from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

from minutemeta.errors import SchemaError, SpanError


class Language(str, Enum):
    PT = "pt"
    EN = "en"


class MetadataKind(str, Enum):
    MEETING_NUMBER = "meeting_number"
    DATE = "date"
    LOCATION = "location"
    START_TIME = "start_time"
    END_TIME = "end_time"
    MEETING_TYPE = "meeting_type"
    PRESIDENT = "president"
    COUNCILOR = "councilor"


class Presence(str, Enum):
    PRESENT = "present"
    ABSENT = "absent"
    SUBSTITUTED = "substituted"
    NOT_APPLICABLE = "not_applicable"


PARTICIPANT_KINDS = frozenset({MetadataKind.PRESIDENT, MetadataKind.COUNCILOR})


@dataclass(frozen=True)
class MetadataCategory:
    """A metadata kind plus, for participants, their presence status."""

    kind: MetadataKind
    presence: Presence = Presence.NOT_APPLICABLE

    def __post_init__(self):
        if self.kind in PARTICIPANT_KINDS:
            if self.presence == Presence.NOT_APPLICABLE:
                raise SchemaError(
                    f"participant category {self.kind.value} requires a presence status"
                )
        elif self.presence != Presence.NOT_APPLICABLE:
            raise SchemaError(
                f"category {self.kind.value} does not take a presence status"
            )

    @property
    def label(self) -> str:
        """Flat label used in BIO tags, e.g. DATE or COUNCILOR-ABSENT."""
        if self.kind in PARTICIPANT_KINDS:
            return f"{self.kind.value.upper()}-{self.presence.value.upper()}"
        return self.kind.value.upper()

    @classmethod
    def from_label(cls, label: str) -> "MetadataCategory":
        for kind in MetadataKind:
            prefix = kind.value.upper()
            if label == prefix:
                return cls(kind)
            if label.startswith(prefix + "-"):
                presence = Presence(label[len(prefix) + 1 :].lower())
                return cls(kind, presence)
        raise SchemaError(f"unknown category label {label!r}")


def default_label_inventory() -> tuple[str, ...]:
    """The fixed expanded label set: six plain kinds plus participant x presence."""
    labels = [
        k.value.upper()
        for k in MetadataKind
        if k not in PARTICIPANT_KINDS
    ]
    labels.append(MetadataCategory(MetadataKind.PRESIDENT, Presence.PRESENT).label)
    for presence in (Presence.PRESENT, Presence.ABSENT, Presence.SUBSTITUTED):
        labels.append(MetadataCategory(MetadataKind.COUNCILOR, presence).label)
    return tuple(labels)


@dataclass(frozen=True)
class MinuteDocument:
    """One minute: raw text plus its sentence segmentation.

    ``sentences`` are [start, end) character intervals, sorted, non-overlapping,
    jointly covering all non-whitespace text.
    """

    doc_id: str
    municipality: str
    language: Language
    text: str
    sentences: tuple[tuple[int, int], ...]

    def __post_init__(self):
        if not self.doc_id:
            raise SchemaError("doc_id must be non-empty")
        if not self.municipality:
            raise SchemaError("municipality must be non-empty", doc_id=self.doc_id)
        prev_end = 0
        for start, end in self.sentences:
            if start < prev_end or end <= start or end > len(self.text):
                raise SpanError(
                    f"bad sentence interval [{start},{end}) in {self.doc_id}"
                )
            prev_end = end

    def sentence_text(self, index: int) -> str:
        start, end = self.sentences[index]
        return self.text[start:end]

    def sentence_covering(self, offset: int) -> int:
        """Index of the sentence containing ``offset`` (or the nearest one after)."""
        for i, (start, end) in enumerate(self.sentences):
            if offset < end:
                return i
        return len(self.sentences) - 1

    def snap_span(self, start: int, end: int) -> tuple[int, int]:
        """Expand [start, end) to the smallest covering run of sentences."""
        if not self.sentences:
            return (start, end)
        first = self.sentence_covering(start)
        last = first
        for i in range(first, len(self.sentences)):
            if self.sentences[i][0] < end:
                last = i
            else:
                break
        return (self.sentences[first][0], self.sentences[last][1])


@dataclass(frozen=True)
class EntityAnnotation:
    """A typed character span over a document or region text."""

    category: MetadataCategory
    start: int
    end: int
    surface: str

    def __post_init__(self):
        if self.end <= self.start:
            raise SpanError(f"empty entity span [{self.start},{self.end})")

    @property
    def char_span(self) -> tuple[int, int]:
        return (self.start, self.end)


class SegmentType(str, Enum):
    OPENING = "opening"
    CLOSING = "closing"


@dataclass(frozen=True)
class SegmentAnnotation:
    """Gold opening/closing segment; char_span is None for a null segment."""

    segment_type: SegmentType
    char_span: tuple[int, int] | None

    @property
    def is_null(self) -> bool:
        return self.char_span is None


@dataclass(frozen=True)
class AnnotatedMinute:
    """A document bundled with its entity and segment annotations."""

    document: MinuteDocument
    entities: tuple[EntityAnnotation, ...] = ()
    segments: tuple[SegmentAnnotation, ...] = ()
    provenance: dict | None = None

    @property
    def doc_id(self) -> str:
        return self.document.doc_id

    def segment(self, segment_type: SegmentType) -> SegmentAnnotation | None:
        for seg in self.segments:
            if seg.segment_type == segment_type:
                return seg
        return None


@dataclass(frozen=True)
class Corpus:
    """Immutable collection of annotated minutes, indexed by doc_id."""

    minutes: tuple[AnnotatedMinute, ...]
    _by_id: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        index = {m.doc_id: m for m in self.minutes}
        if len(index) != len(self.minutes):
            raise SchemaError("duplicate doc_id in corpus")
        object.__setattr__(self, "_by_id", index)

    def __len__(self) -> int:
        return len(self.minutes)

    def __iter__(self):
        return iter(self.minutes)

    def __getitem__(self, doc_id: str) -> AnnotatedMinute:
        return self._by_id[doc_id]

    def __contains__(self, doc_id: str) -> bool:
        return doc_id in self._by_id

    @property
    def doc_ids(self) -> tuple[str, ...]:
        return tuple(m.doc_id for m in self.minutes)

    @property
    def municipalities(self) -> tuple[str, ...]:
        seen: list[str] = []
        for m in self.minutes:
            if m.document.municipality not in seen:
                seen.append(m.document.municipality)
        return tuple(seen)

    def by_municipality(self, municipality: str) -> tuple[AnnotatedMinute, ...]:
        return tuple(
            m for m in self.minutes if m.document.municipality == municipality
        )

    def subset(self, doc_ids) -> "Corpus":
        wanted = set(doc_ids)
        return Corpus(tuple(m for m in self.minutes if m.doc_id in wanted))

    def label_inventory(self) -> tuple[str, ...]:
        """Expanded label set: the fixed default plus any extra participant variants."""
        labels = list(default_label_inventory())
        for minute in self.minutes:
            for ann in minute.entities:
                if ann.category.label not in labels:
                    labels.append(ann.category.label)
        return tuple(labels)


@dataclass(frozen=True)
class CorpusSplit:
    """Named train/val/test partition of a corpus by doc_id."""

    name: str
    train: tuple[str, ...]
    val: tuple[str, ...]
    test: tuple[str, ...]

    def __post_init__(self):
        parts = [set(self.train), set(self.val), set(self.test)]
        total = sum(len(p) for p in parts)
        if len(parts[0] | parts[1] | parts[2]) != total:
            raise SchemaError(f"split {self.name!r} has overlapping partitions")

    def validate_against(self, corpus: Corpus) -> None:
        for doc_id in (*self.train, *self.val, *self.test):
            if doc_id not in corpus:
                raise SchemaError(
                    f"split {self.name!r} references unknown document", doc_id=doc_id
                )
