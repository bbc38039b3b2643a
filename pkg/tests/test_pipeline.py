import pytest

from minutemeta.boundary.region import ReducedRegion, SpanPrediction, extract_region
from minutemeta.corpus import MetadataCategory, Presence, SegmentType
from minutemeta.pipeline import (
    MeetingType,
    assemble_record,
    classify_meeting_type,
)
from minutemeta.tagging import Entity


def _entity(label, token_span, char_span, surface, confidence=0.9):
    return Entity(
        category=MetadataCategory.from_label(label),
        token_span=token_span,
        char_span=char_span,
        surface=surface,
        confidence=confidence,
    )


class TestMeetingType:
    def test_ordinary(self):
        assert classify_meeting_type("ordinária") == (MeetingType.ORDINARY, None)
        assert classify_meeting_type("Ordinary") == (MeetingType.ORDINARY, None)

    def test_extraordinary_wins_over_substring(self):
        # "extraordinária" contains "ordinária"; must not be misread
        assert classify_meeting_type("extraordinária") == (
            MeetingType.EXTRAORDINARY, None,
        )

    def test_other_keeps_surface(self):
        kind, other = classify_meeting_type("solene")
        assert kind == MeetingType.OTHER
        assert other == "solene"


class TestAssembleRecord:
    def test_fields_and_provenance(self):
        text = "Ata 5/2021 em Lisboa"
        entities = [
            _entity("MEETING_NUMBER", (1, 1), (4, 10), "5/2021"),
            _entity("LOCATION", (3, 3), (14, 20), "Lisboa"),
        ]
        record = assemble_record("d1", entities)
        assert record.meeting_number == "5/2021"
        assert record.location == "Lisboa"
        assert record.provenance["meeting_number"].start == 4

    def test_singleton_resolved_by_confidence(self):
        entities = [
            _entity("DATE", (0, 0), (0, 5), "baixa", confidence=0.2),
            _entity("DATE", (2, 2), (10, 15), "alta!", confidence=0.9),
        ]
        record = assemble_record("d1", entities)
        assert record.date == "alta!"

    def test_singleton_tie_breaks_earliest(self):
        entities = [
            _entity("DATE", (2, 2), (10, 15), "tarde", confidence=0.5),
            _entity("DATE", (0, 0), (0, 5), "cedo!", confidence=0.5),
        ]
        record = assemble_record("d1", entities)
        assert record.date == "cedo!"

    def test_councilors_in_document_order_deduped(self):
        entities = [
            _entity("COUNCILOR-PRESENT", (5, 5), (30, 35), "Maria"),
            _entity("COUNCILOR-ABSENT", (2, 2), (10, 14), "João"),
            _entity("COUNCILOR-PRESENT", (5, 5), (30, 35), "Maria"),
        ]
        record = assemble_record("d1", entities)
        assert [c.name for c in record.councilors] == ["João", "Maria"]
        assert record.councilors[0].presence == Presence.ABSENT

    def test_president_presence(self):
        entities = [_entity("PRESIDENT-PRESENT", (0, 1), (0, 10), "Rui Costa")]
        record = assemble_record("d1", entities)
        assert record.president.name == "Rui Costa"
        assert record.president.presence == Presence.PRESENT

    def test_region_coordinates_mapped_to_document(self, sample_corpus):
        doc = sample_corpus["alfa-001"].document
        region = extract_region(
            doc,
            SpanPrediction(SegmentType.OPENING, (0, 251)),
            SpanPrediction(SegmentType.CLOSING, (345, 416)),
        )
        # "12/2021" at doc [8,15) is at region [8,15) too (opening starts at 0)
        entities = [_entity("MEETING_NUMBER", (2, 2), (8, 15), "12/2021")]
        record = assemble_record(doc.doc_id, entities, region)
        assert record.provenance["meeting_number"].start == 8
        # an entity inside the closing must map through the separator offset
        closing_region_start = region.offset_map[1][0]
        surface = region.text[closing_region_start : closing_region_start + 6]
        entities = [
            _entity("END_TIME", (0, 0),
                    (closing_region_start, closing_region_start + 6), surface)
        ]
        record = assemble_record(doc.doc_id, entities, region)
        assert record.provenance["end_time"].start == 345

    def test_empty_region_record_flagged(self):
        record = assemble_record("d1", [], flags=("no_metadata_region",))
        assert record.meeting_number is None
        assert "no_metadata_region" in record.flags

    def test_provenance_soundness(self, sample_corpus):
        doc = sample_corpus["alfa-001"].document
        region = extract_region(
            doc,
            SpanPrediction(SegmentType.OPENING, (0, 251)),
            SpanPrediction(SegmentType.CLOSING, None),
        )
        entities = [_entity("START_TIME", (10, 10), (62, 67), doc.text[62:67])]
        record = assemble_record(doc.doc_id, entities, region)
        prov = record.provenance["start_time"]
        assert doc.text[prov.start : prov.end] == prov.surface

    def test_as_dict_shape(self):
        record = assemble_record(
            "d1", [_entity("MEETING_TYPE", (0, 0), (0, 9), "ordinária")]
        )
        data = record.as_dict()
        assert data["meeting_type"] == "ordinary"
        assert data["doc_id"] == "d1"
        assert "councilors" in data and data["councilors"] == []
