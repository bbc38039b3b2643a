"""The reduced region: concatenated opening + closing segments with an exact
offset map back to the source document."""
from __future__ import annotations

import logging
from dataclasses import dataclass

from minutemeta.corpus.types import MinuteDocument, SegmentType
from minutemeta.errors import OverlapError, SpanError

logger = logging.getLogger(__name__)

SEGMENT_SEPARATOR = "\n\n"


@dataclass(frozen=True)
class SpanPrediction:
    """A predicted segment span (or null) with its decision scores."""

    segment_type: SegmentType
    char_span: tuple[int, int] | None
    span_score: float = 0.0
    null_score: float = 0.0

    @property
    def is_null(self) -> bool:
        return self.char_span is None


@dataclass(frozen=True)
class ReducedRegion:
    """Concatenation of predicted segments, mappable back to the source."""

    source_doc_id: str
    text: str
    # (region_start, region_end, doc_start, doc_end), monotone in both systems
    offset_map: tuple[tuple[int, int, int, int], ...]
    flags: tuple[str, ...] = ()

    def __post_init__(self):
        prev_region_end = -1
        prev_doc_end = -1
        for region_start, region_end, doc_start, doc_end in self.offset_map:
            if region_end - region_start != doc_end - doc_start:
                raise SpanError("offset_map intervals must have equal lengths")
            # End-exclusive intervals: touching is fine, overlap is not.
            if region_start < prev_region_end or doc_start < prev_doc_end:
                raise SpanError("offset_map intervals must be monotone and disjoint")
            prev_region_end = region_end
            prev_doc_end = doc_end

    @property
    def is_empty(self) -> bool:
        return not self.offset_map

    def to_doc_offset(self, region_offset: int, is_end: bool = False) -> int:
        """Map a region offset to the source document.

        ``is_end`` selects end-exclusive semantics so that adjacent intervals
        resolve span ends to the earlier piece and span starts to the later.
        """
        for region_start, region_end, doc_start, _ in self.offset_map:
            if is_end and region_start < region_offset <= region_end:
                return doc_start + (region_offset - region_start)
            if not is_end and region_start <= region_offset < region_end:
                return doc_start + (region_offset - region_start)
        # boundary fallbacks (offset exactly at a piece edge)
        for region_start, region_end, doc_start, _ in self.offset_map:
            if region_start <= region_offset <= region_end:
                return doc_start + (region_offset - region_start)
        raise SpanError(f"region offset {region_offset} is not mapped")

    def to_region_offset(self, doc_offset: int, is_end: bool = False) -> int:
        for region_start, _, doc_start, doc_end in self.offset_map:
            if is_end and doc_start < doc_offset <= doc_end:
                return region_start + (doc_offset - doc_start)
            if not is_end and doc_start <= doc_offset < doc_end:
                return region_start + (doc_offset - doc_start)
        for region_start, _, doc_start, doc_end in self.offset_map:
            if doc_start <= doc_offset <= doc_end:
                return region_start + (doc_offset - doc_start)
        raise SpanError(f"document offset {doc_offset} is not mapped")

    def span_to_doc(self, span: tuple[int, int]) -> tuple[int, int]:
        return (self.to_doc_offset(span[0]), self.to_doc_offset(span[1], is_end=True))

    def span_to_region(self, span: tuple[int, int]) -> tuple[int, int]:
        return (
            self.to_region_offset(span[0]),
            self.to_region_offset(span[1], is_end=True),
        )


def extract_region(
    doc: MinuteDocument,
    opening: SpanPrediction,
    closing: SpanPrediction,
    strict: bool = False,
) -> ReducedRegion:
    """Concatenate the predicted opening and closing segment texts.

    Null predictions contribute nothing. Overlapping predictions raise in
    strict mode; otherwise the closing is truncated to start after the
    opening ends.
    """
    spans: list[tuple[int, int]] = []
    if not opening.is_null:
        spans.append(opening.char_span)
    if not closing.is_null:
        closing_span = closing.char_span
        if spans and closing_span[0] < spans[0][1]:
            if strict:
                raise OverlapError(
                    f"opening {spans[0]} overlaps closing {closing_span} in {doc.doc_id!r}"
                )
            truncated = (spans[0][1], max(closing_span[1], spans[0][1]))
            logger.warning(
                "truncating overlapping closing %s to %s in %s",
                closing_span, truncated, doc.doc_id,
            )
            closing_span = truncated
        if closing_span[1] > closing_span[0]:
            spans.append(closing_span)

    parts: list[str] = []
    offset_map: list[tuple[int, int, int, int]] = []
    cursor = 0
    for doc_start, doc_end in spans:
        if doc_start < 0 or doc_end > len(doc.text):
            raise SpanError(f"span [{doc_start},{doc_end}) outside document {doc.doc_id!r}")
        if parts:
            parts.append(SEGMENT_SEPARATOR)
            cursor += len(SEGMENT_SEPARATOR)
        segment_text = doc.text[doc_start:doc_end]
        parts.append(segment_text)
        offset_map.append((cursor, cursor + len(segment_text), doc_start, doc_end))
        cursor += len(segment_text)

    flags = () if spans else ("no_metadata_region",)
    return ReducedRegion(
        source_doc_id=doc.doc_id,
        text="".join(parts),
        offset_map=tuple(offset_map),
        flags=flags,
    )


def write_segment_predictions(predictions_by_doc, path) -> None:
    """Predictions file: one JSONL line per (doc, segment type) prediction."""
    import json
    from pathlib import Path

    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8") as handle:
        for doc_id, predictions in predictions_by_doc:
            for prediction in predictions:
                row = {
                    "doc_id": doc_id,
                    "segment_type": prediction.segment_type.value,
                    "start": None if prediction.is_null else prediction.char_span[0],
                    "end": None if prediction.is_null else prediction.char_span[1],
                    "span_score": prediction.span_score,
                    "null_score": prediction.null_score,
                }
                handle.write(json.dumps(row, ensure_ascii=False) + "\n")


def gold_region(doc: MinuteDocument, segments) -> ReducedRegion:
    """Region built from gold segment annotations (training-time path)."""
    by_type = {seg.segment_type: seg for seg in segments}
    def _pred(seg_type: SegmentType) -> SpanPrediction:
        seg = by_type.get(seg_type)
        if seg is None or seg.is_null:
            return SpanPrediction(seg_type, None)
        return SpanPrediction(seg_type, seg.char_span)

    return extract_region(doc, _pred(SegmentType.OPENING), _pred(SegmentType.CLOSING))
