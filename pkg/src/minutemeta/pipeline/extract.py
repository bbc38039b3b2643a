"""End-to-end composition of the two stages into structured records."""
from __future__ import annotations

import json
import logging
from dataclasses import dataclass
from pathlib import Path

from minutemeta.boundary.model import BoundaryModelHandle, predict_segments_batch
from minutemeta.boundary.region import ReducedRegion, extract_region
from minutemeta.corpus.squad import prompts_for
from minutemeta.corpus.types import (
    AnnotatedMinute,
    EntityAnnotation,
    MetadataKind,
    MinuteDocument,
    SegmentType,
)
from minutemeta.errors import MinuteMetaError
from minutemeta.evaluation.meter import MeterAccumulator, ResourceMeter, ResourceReport
from minutemeta.evaluation.metrics import entity_prf_corpus
from minutemeta.ner.model import NerModelHandle, tag
from minutemeta.pipeline.record import (
    MetadataRecord,
    Participant,
    Provenance,
    classify_meeting_type,
)
from minutemeta.tagging import decode_entities

logger = logging.getLogger(__name__)

_SINGLETON_FIELDS = {
    MetadataKind.MEETING_NUMBER: "meeting_number",
    MetadataKind.DATE: "date",
    MetadataKind.LOCATION: "location",
    MetadataKind.START_TIME: "start_time",
    MetadataKind.END_TIME: "end_time",
}


def assemble_record(
    doc_id: str,
    entities,
    region: ReducedRegion | None = None,
    flags: tuple[str, ...] = (),
) -> MetadataRecord:
    """Build the structured record from decoded entities.

    Entities arrive in region coordinates when ``region`` is given and are
    mapped back to source-document offsets. Singleton fields resolve by
    highest confidence, ties by earliest span; councilors keep document
    order with identical spans deduplicated.
    """
    record = MetadataRecord(doc_id=doc_id, flags=flags)

    def doc_span(entity) -> tuple[int, int]:
        if region is None:
            return entity.char_span
        return region.span_to_doc(entity.char_span)

    singleton_best: dict = {}
    meeting_type_best = None
    councilors = []
    president_best = None

    for entity in entities:
        span = doc_span(entity)
        provenance = Provenance(span[0], span[1], entity.surface, entity.confidence)
        kind = entity.category.kind
        order_key = (-entity.confidence, span[0])
        if kind in _SINGLETON_FIELDS:
            current = singleton_best.get(kind)
            if current is None or order_key < current[0]:
                singleton_best[kind] = (order_key, entity.surface, provenance)
        elif kind == MetadataKind.MEETING_TYPE:
            if meeting_type_best is None or order_key < meeting_type_best[0]:
                meeting_type_best = (order_key, entity.surface, provenance)
        elif kind == MetadataKind.PRESIDENT:
            candidate = (order_key, entity, provenance)
            if president_best is None or order_key < president_best[0]:
                president_best = candidate
        elif kind == MetadataKind.COUNCILOR:
            councilors.append((span, entity, provenance))

    for kind, (order, surface, provenance) in singleton_best.items():
        setattr(record, _SINGLETON_FIELDS[kind], surface)
        record.provenance[_SINGLETON_FIELDS[kind]] = provenance

    if meeting_type_best is not None:
        _, surface, provenance = meeting_type_best
        meeting_type, other = classify_meeting_type(surface)
        record.meeting_type = meeting_type
        record.meeting_type_other = other
        record.provenance["meeting_type"] = provenance

    if president_best is not None:
        _, entity, provenance = president_best
        record.president = Participant(
            name=entity.surface,
            presence=entity.category.presence,
            provenance=provenance,
        )

    seen_spans = set()
    for span, entity, provenance in sorted(councilors, key=lambda c: c[0]):
        if span in seen_spans:
            continue
        seen_spans.add(span)
        record.councilors.append(
            Participant(
                name=entity.surface,
                presence=entity.category.presence,
                provenance=provenance,
            )
        )
    return record


@dataclass
class PipelineConfig:
    null_threshold: float | None = None
    prompt_overrides: dict | None = None
    strict_overlap: bool = False


def predict_region(
    doc: MinuteDocument,
    qa_handle: BoundaryModelHandle,
    config: PipelineConfig | None = None,
) -> ReducedRegion:
    """Stage 1 only: predicted opening/closing concatenation for one document."""
    config = config or PipelineConfig()
    prompts = prompts_for(doc.language, config.prompt_overrides)
    opening, closing = predict_segments_batch(
        qa_handle,
        [(doc, prompts[SegmentType.OPENING]), (doc, prompts[SegmentType.CLOSING])],
        config.null_threshold,
    )
    return extract_region(doc, opening, closing, strict=config.strict_overlap)


def extract(
    doc: MinuteDocument,
    qa_handle: BoundaryModelHandle,
    ner_handle: NerModelHandle,
    config: PipelineConfig | None = None,
) -> MetadataRecord:
    """Full pipeline for one document: segments, region, entities, record."""
    region = predict_region(doc, qa_handle, config)
    if region.is_empty:
        return MetadataRecord(doc_id=doc.doc_id, flags=("no_metadata_region",))
    sequence = tag(ner_handle, region)
    entities = decode_entities(sequence)
    return assemble_record(doc.doc_id, entities, region, flags=region.flags)


def batch_extract(
    minutes,
    qa_handle: BoundaryModelHandle,
    ner_handle: NerModelHandle,
    config: PipelineConfig | None = None,
    meter: ResourceMeter | None = None,
):
    """Records for a batch, in input order, with per-document metering.

    Per-document failures are collected, not raised; the batch continues.
    Returns (records, errors, ResourceReport or None).
    """
    records: list[MetadataRecord] = []
    errors: list[dict] = []
    accumulator = MeterAccumulator(meter) if meter is not None else None
    for minute in minutes:
        doc = minute.document if isinstance(minute, AnnotatedMinute) else minute
        try:
            if accumulator is not None:
                record, report = meter.measure(
                    lambda d=doc: extract(d, qa_handle, ner_handle, config)
                )
                accumulator.add(doc.doc_id, report)
            else:
                record = extract(doc, qa_handle, ner_handle, config)
            records.append(record)
        except MinuteMetaError as exc:
            logger.error("extraction failed for %s: %s", doc.doc_id, exc)
            errors.append({"doc_id": doc.doc_id, "error": str(exc)})
    report = accumulator.total() if accumulator is not None else None
    return records, errors, report


def run_ablation_no_mbd(
    test_minutes,
    ner_fulldoc_handle: NerModelHandle,
    qa_handle: BoundaryModelHandle,
    ner_region_handle: NerModelHandle,
    config: PipelineConfig | None = None,
    training_seconds: dict | None = None,
) -> dict:
    """Side-by-side: pipeline (stage 1 + stage 2) vs NER on the full document.

    Scores both against gold entities in document coordinates and reports the
    region-size reduction the first stage buys.
    """
    from minutemeta.tagging import entities_to_annotations

    pipeline_pairs = []
    fulldoc_pairs = []
    region_tokens = 0
    fulldoc_tokens = 0
    from minutemeta.corpus.segmentation import word_tokenize

    for minute in test_minutes:
        doc = minute.document
        gold = list(minute.entities)

        region = predict_region(doc, qa_handle, config)
        if region.is_empty:
            predicted = []
        else:
            sequence = tag(ner_region_handle, region)
            predicted = [
                EntityAnnotation(
                    category=e.category,
                    start=region.span_to_doc(e.char_span)[0],
                    end=region.span_to_doc(e.char_span)[1],
                    surface=e.surface,
                )
                for e in decode_entities(sequence)
            ]
        pipeline_pairs.append((predicted, gold))
        region_tokens += len(word_tokenize(region.text))
        fulldoc_tokens += len(word_tokenize(doc.text))

        full_region = ReducedRegion(
            source_doc_id=doc.doc_id,
            text=doc.text,
            offset_map=((0, len(doc.text), 0, len(doc.text)),),
        )
        sequence = tag(ner_fulldoc_handle, full_region)
        fulldoc_predicted = entities_to_annotations(decode_entities(sequence))
        fulldoc_pairs.append((fulldoc_predicted, gold))

    pipeline_scores = entity_prf_corpus(pipeline_pairs)
    fulldoc_scores = entity_prf_corpus(fulldoc_pairs)
    result = {
        "pipeline_f1": pipeline_scores.micro.f1,
        "fulldoc_f1": fulldoc_scores.micro.f1,
        "f1_delta": pipeline_scores.micro.f1 - fulldoc_scores.micro.f1,
        "region_tokens": region_tokens,
        "fulldoc_tokens": fulldoc_tokens,
        "token_reduction": 1.0 - (region_tokens / fulldoc_tokens if fulldoc_tokens else 0.0),
        "pipeline": pipeline_scores.as_dict(),
        "fulldoc": fulldoc_scores.as_dict(),
    }
    if training_seconds:
        result["training_seconds"] = dict(training_seconds)
        if training_seconds.get("fulldoc") and training_seconds.get("pipeline"):
            result["training_speedup"] = (
                training_seconds["fulldoc"] / training_seconds["pipeline"]
            )
    return result


def write_records(records, out_path: str | Path, report: ResourceReport | None = None):
    """One JSON per record plus a JSONL batch file (and optional meter report)."""
    out_path = Path(out_path)
    out_path.mkdir(parents=True, exist_ok=True)
    batch_path = out_path / "records.jsonl"
    with batch_path.open("w", encoding="utf-8") as handle:
        for record in records:
            data = record.as_dict()
            (out_path / f"{record.doc_id}.json").write_text(
                json.dumps(data, ensure_ascii=False, indent=1), encoding="utf-8"
            )
            handle.write(json.dumps(data, ensure_ascii=False) + "\n")
    if report is not None:
        (out_path / "resources.json").write_text(
            json.dumps(report.as_dict(), ensure_ascii=False, indent=1),
            encoding="utf-8",
        )
    return batch_path
