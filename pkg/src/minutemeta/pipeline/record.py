"""The structured extraction result for one minute."""
from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

from minutemeta.corpus.types import Presence


class MeetingType(str, Enum):
    ORDINARY = "ordinary"
    EXTRAORDINARY = "extraordinary"
    OTHER = "other"


_MEETING_TYPE_KEYWORDS = (
    # extraordinary first: its surface contains the ordinary keyword
    (("extraordinária", "extraordinaria", "extraordinary"), MeetingType.EXTRAORDINARY),
    (("ordinária", "ordinaria", "ordinary"), MeetingType.ORDINARY),
)


def classify_meeting_type(surface: str) -> tuple[MeetingType, str | None]:
    """Map a mention to the meeting-type enum; unknown kinds keep the surface."""
    lowered = surface.lower()
    for keywords, meeting_type in _MEETING_TYPE_KEYWORDS:
        if any(k in lowered for k in keywords):
            return meeting_type, None
    return MeetingType.OTHER, surface


@dataclass(frozen=True)
class Provenance:
    """Where a record field came from: document char span plus confidence."""

    start: int
    end: int
    surface: str
    confidence: float

    def as_dict(self) -> dict:
        return {
            "start": self.start,
            "end": self.end,
            "surface": self.surface,
            "confidence": self.confidence,
        }


@dataclass(frozen=True)
class Participant:
    name: str
    presence: Presence
    provenance: Provenance | None = None

    def as_dict(self) -> dict:
        data = {"name": self.name, "presence": self.presence.value}
        if self.provenance is not None:
            data["provenance"] = self.provenance.as_dict()
        return data


@dataclass
class MetadataRecord:
    """Final structured extraction for one document. Values stay verbatim."""

    doc_id: str
    meeting_number: str | None = None
    meeting_type: MeetingType | None = None
    meeting_type_other: str | None = None
    date: str | None = None
    location: str | None = None
    start_time: str | None = None
    end_time: str | None = None
    president: Participant | None = None
    councilors: list[Participant] = field(default_factory=list)
    provenance: dict[str, Provenance] = field(default_factory=dict)
    flags: tuple[str, ...] = ()

    def as_dict(self) -> dict:
        data: dict = {"doc_id": self.doc_id}
        for name in ("meeting_number", "date", "location", "start_time", "end_time"):
            data[name] = getattr(self, name)
        data["meeting_type"] = self.meeting_type.value if self.meeting_type else None
        if self.meeting_type == MeetingType.OTHER:
            data["meeting_type_other"] = self.meeting_type_other
        data["president"] = self.president.as_dict() if self.president else None
        data["councilors"] = [c.as_dict() for c in self.councilors]
        data["provenance"] = {k: v.as_dict() for k, v in self.provenance.items()}
        if self.flags:
            data["flags"] = list(self.flags)
        return data
