"""Corpus ingestion and serialization.

Wire format is JSONL, one document per line:

    {"doc_id": ..., "municipality": ..., "language": "pt"|"en", "text": ...,
     "entities": [{"kind", "presence", "start", "end"}, ...],
     "segments": [{"type": "opening"|"closing", "start", "end"} |
                  {"type": ..., "null": true}, ...]}

Offsets are character offsets into ``text``, end-exclusive. An optional
``"deslex"`` key records augmentation provenance. Loading a canonical file
and re-serializing it is byte-identical.
"""
from __future__ import annotations

import json
import logging
from pathlib import Path

from minutemeta.corpus.segmentation import sentence_split
from minutemeta.corpus.types import (
    AnnotatedMinute,
    Corpus,
    EntityAnnotation,
    Language,
    MetadataCategory,
    MetadataKind,
    MinuteDocument,
    Presence,
    SegmentAnnotation,
    SegmentType,
)
from minutemeta.errors import SchemaError, SpanError

logger = logging.getLogger(__name__)

_DOC_KEYS = {"doc_id", "municipality", "language", "text", "entities", "segments", "deslex"}
_ENTITY_KEYS = {"kind", "presence", "start", "end"}
_SEGMENT_KEYS = {"type", "start", "end", "null"}


def _require(record: dict, key: str, doc_id: str | None):
    if key not in record:
        raise SchemaError("missing field", doc_id=doc_id, field=key)
    return record[key]


def _parse_entity(raw: dict, text: str, doc_id: str) -> EntityAnnotation:
    unknown = set(raw) - _ENTITY_KEYS
    if unknown:
        raise SchemaError(f"unknown entity keys {sorted(unknown)}", doc_id=doc_id)
    try:
        kind = MetadataKind(_require(raw, "kind", doc_id))
    except ValueError:
        raise SchemaError(f"unknown kind {raw.get('kind')!r}", doc_id=doc_id, field="kind")
    try:
        presence = Presence(raw.get("presence", Presence.NOT_APPLICABLE.value))
    except ValueError:
        raise SchemaError(
            f"unknown presence {raw.get('presence')!r}", doc_id=doc_id, field="presence"
        )
    start = _require(raw, "start", doc_id)
    end = _require(raw, "end", doc_id)
    if not (isinstance(start, int) and isinstance(end, int)):
        raise SchemaError("entity offsets must be integers", doc_id=doc_id, field="start")
    if start < 0 or end > len(text) or end <= start:
        raise SpanError(f"entity span [{start},{end}) outside text of {doc_id!r}")
    return EntityAnnotation(
        category=MetadataCategory(kind, presence),
        start=start,
        end=end,
        surface=text[start:end],
    )


def _parse_segment(raw: dict, text: str, doc_id: str) -> SegmentAnnotation:
    unknown = set(raw) - _SEGMENT_KEYS
    if unknown:
        raise SchemaError(f"unknown segment keys {sorted(unknown)}", doc_id=doc_id)
    try:
        seg_type = SegmentType(_require(raw, "type", doc_id))
    except ValueError:
        raise SchemaError(f"unknown segment type {raw.get('type')!r}", doc_id=doc_id, field="type")
    if raw.get("null"):
        return SegmentAnnotation(seg_type, None)
    start = _require(raw, "start", doc_id)
    end = _require(raw, "end", doc_id)
    if start < 0 or end > len(text) or end <= start:
        raise SpanError(f"segment span [{start},{end}) outside text of {doc_id!r}")
    return SegmentAnnotation(seg_type, (start, end))


def _check_entity_overlaps(entities: list[EntityAnnotation], doc_id: str) -> None:
    spans = sorted((e.start, e.end) for e in entities)
    for (s1, e1), (s2, _) in zip(spans, spans[1:]):
        if s2 < e1:
            raise SpanError(f"overlapping entity spans at {s1}..{e1} and {s2}.. in {doc_id!r}")


def parse_record(record: dict, snap_segments: bool = True) -> AnnotatedMinute:
    """Validate one JSONL record and build the annotated minute."""
    doc_id = record.get("doc_id")
    if not isinstance(doc_id, str) or not doc_id:
        raise SchemaError("doc_id must be a non-empty string", field="doc_id")
    unknown = set(record) - _DOC_KEYS
    if unknown:
        raise SchemaError(f"unknown record keys {sorted(unknown)}", doc_id=doc_id)
    text = _require(record, "text", doc_id)
    if not isinstance(text, str):
        raise SchemaError("text must be a string", doc_id=doc_id, field="text")
    try:
        language = Language(_require(record, "language", doc_id))
    except ValueError:
        raise SchemaError(
            f"unknown language {record.get('language')!r}", doc_id=doc_id, field="language"
        )

    doc = MinuteDocument(
        doc_id=doc_id,
        municipality=_require(record, "municipality", doc_id),
        language=language,
        text=text,
        sentences=tuple(sentence_split(text, language)),
    )

    entities = [_parse_entity(e, text, doc_id) for e in record.get("entities", [])]
    _check_entity_overlaps(entities, doc_id)

    segments = []
    for raw in record.get("segments", []):
        seg = _parse_segment(raw, text, doc_id)
        if snap_segments and not seg.is_null:
            snapped = doc.snap_span(*seg.char_span)
            if snapped != seg.char_span:
                logger.debug("snapped %s segment of %s: %s -> %s",
                             seg.segment_type.value, doc_id, seg.char_span, snapped)
            seg = SegmentAnnotation(seg.segment_type, snapped)
        segments.append(seg)

    opening = next((s for s in segments if s.segment_type == SegmentType.OPENING), None)
    closing = next((s for s in segments if s.segment_type == SegmentType.CLOSING), None)
    if opening and closing and not opening.is_null and not closing.is_null:
        if opening.char_span[1] > closing.char_span[0]:
            raise SpanError(f"opening segment ends after closing starts in {doc_id!r}")

    return AnnotatedMinute(
        document=doc,
        entities=tuple(entities),
        segments=tuple(segments),
        provenance=record.get("deslex"),
    )


def load_corpus(path: str | Path, snap_segments: bool = True) -> Corpus:
    """Load a JSONL corpus file, validating every record."""
    path = Path(path)
    minutes = []
    with path.open("r", encoding="utf-8") as handle:
        for line_no, line in enumerate(handle, 1):
            if not line.strip():
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as exc:
                raise SchemaError(f"line {line_no} is not valid JSON: {exc}")
            minutes.append(parse_record(record, snap_segments=snap_segments))
    return Corpus(tuple(minutes))


def minute_to_record(minute: AnnotatedMinute) -> dict:
    """Canonical dict form of one annotated minute (inverse of parse_record)."""
    record: dict = {
        "doc_id": minute.doc_id,
        "municipality": minute.document.municipality,
        "language": minute.document.language.value,
        "text": minute.document.text,
        "entities": [
            {
                "kind": ann.category.kind.value,
                "presence": ann.category.presence.value,
                "start": ann.start,
                "end": ann.end,
            }
            for ann in minute.entities
        ],
        "segments": [
            {"type": seg.segment_type.value, "null": True}
            if seg.is_null
            else {
                "type": seg.segment_type.value,
                "start": seg.char_span[0],
                "end": seg.char_span[1],
            }
            for seg in minute.segments
        ],
    }
    if minute.provenance is not None:
        record["deslex"] = minute.provenance
    return record


def save_corpus(corpus: Corpus, path: str | Path) -> None:
    """Serialize to canonical JSONL (stable key order, compact separators)."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8") as handle:
        for minute in corpus:
            handle.write(json.dumps(minute_to_record(minute), ensure_ascii=False,
                                    separators=(",", ":")))
            handle.write("\n")
