"""Structured extraction through a generative model, as a baseline.

One prompt asks for all eight categories as a JSON object; the response is
parsed with the repair ladder, values are aligned back to document spans,
and the result is scored with the same strict entity metrics as the
pipeline. Everything client-side is deterministic and replayable from the
response cache.
"""
from __future__ import annotations

import logging
import time
from dataclasses import dataclass, field

from minutemeta.corpus.types import (
    AnnotatedMinute,
    EntityAnnotation,
    MetadataCategory,
    MetadataKind,
    MinuteDocument,
    Presence,
)
from minutemeta.errors import ParseFailure
from minutemeta.evaluation.meter import MeterAccumulator, ResourceMeter
from minutemeta.evaluation.metrics import entity_prf_corpus
from minutemeta.llm.align import align_value
from minutemeta.llm.client import CompletionEndpoint, ResponseCache, spec_hash
from minutemeta.llm.jsonrepair import repair_json
from minutemeta.pipeline.record import (
    MetadataRecord,
    Participant,
    Provenance,
    classify_meeting_type,
)

logger = logging.getLogger(__name__)

CATEGORY_KEYS = (
    "meeting_number",
    "date",
    "location",
    "start_time",
    "end_time",
    "meeting_type",
    "president",
    "councilors",
)

DEFAULT_INSTRUCTION = """\
You extract administrative metadata from municipal meeting minutes.
Return ONLY a JSON object with exactly these keys:
  meeting_number, date, location, start_time, end_time, meeting_type,
  president, councilors.
Values must be verbatim substrings of the document. Use null when a field
is absent. "president" is an object {{"name": ..., "presence": ...}} and
"councilors" is a list of such objects; "presence" is one of
"present", "absent", "substituted".
{examples}
Document ID: {doc_id}
Document:
{document}

JSON:"""


@dataclass
class ExtractionPromptSpec:
    """Prompt template, output schema, and endpoint settings for one run."""

    instruction_template: str = DEFAULT_INSTRUCTION
    few_shot: list[dict] = field(default_factory=list)
    model_name: str = "mock"
    temperature: float = 0.0
    max_output_tokens: int = 1024
    timeout: float = 120.0
    retries: int = 3

    def render(self, doc: MinuteDocument) -> str:
        examples = ""
        if self.few_shot:
            import json

            blocks = []
            for shot in self.few_shot:
                blocks.append(
                    f"Example document:\n{shot['document']}\n"
                    f"Example output:\n{json.dumps(shot['output'], ensure_ascii=False)}"
                )
            examples = "\n" + "\n\n".join(blocks) + "\n"
        return self.instruction_template.format(
            examples=examples, doc_id=doc.doc_id, document=doc.text
        )

    def hash_payload(self) -> dict:
        return {
            "instruction_template": self.instruction_template,
            "few_shot": self.few_shot,
            "model_name": self.model_name,
            "temperature": self.temperature,
            "max_output_tokens": self.max_output_tokens,
        }


def _participant_entries(value) -> list[dict]:
    if value is None:
        return []
    if isinstance(value, dict):
        return [value]
    if isinstance(value, list):
        return [v for v in value if isinstance(v, (dict, str))]
    if isinstance(value, str):
        return [{"name": value}]
    return []


def _presence_of(entry) -> Presence:
    if isinstance(entry, str):
        return Presence.PRESENT
    raw = str(entry.get("presence", "present")).strip().lower()
    aliases = {
        "present": Presence.PRESENT,
        "presente": Presence.PRESENT,
        "absent": Presence.ABSENT,
        "ausente": Presence.ABSENT,
        "substituted": Presence.SUBSTITUTED,
        "substituido": Presence.SUBSTITUTED,
        "substituído": Presence.SUBSTITUTED,
        "replaced": Presence.SUBSTITUTED,
    }
    return aliases.get(raw, Presence.PRESENT)


def record_from_response(doc: MinuteDocument, parsed: dict) -> tuple[MetadataRecord, list[dict]]:
    """Build a record by aligning every extracted value to a document span.

    Returns the record plus the list of spurious-unaligned values.
    """
    record = MetadataRecord(doc_id=doc.doc_id)
    unaligned: list[dict] = []

    def align_or_log(value: str, key: str) -> Provenance | None:
        alignment = align_value(value, doc.text)
        if alignment is None:
            unaligned.append({"field": key, "value": value})
            return None
        return Provenance(
            alignment.start,
            alignment.end,
            doc.text[alignment.start : alignment.end],
            confidence=1.0 if alignment.level == "exact" else 0.5,
        )

    for key in ("meeting_number", "date", "location", "start_time", "end_time"):
        value = parsed.get(key)
        if not value or not isinstance(value, str):
            continue
        provenance = align_or_log(value, key)
        if provenance is not None:
            setattr(record, key, provenance.surface)
            record.provenance[key] = provenance

    meeting_type = parsed.get("meeting_type")
    if isinstance(meeting_type, str) and meeting_type:
        provenance = align_or_log(meeting_type, "meeting_type")
        if provenance is not None:
            kind, other = classify_meeting_type(provenance.surface)
            record.meeting_type = kind
            record.meeting_type_other = other
            record.provenance["meeting_type"] = provenance

    president_entries = _participant_entries(parsed.get("president"))
    if president_entries:
        entry = president_entries[0]
        name = entry if isinstance(entry, str) else str(entry.get("name", ""))
        if name:
            provenance = align_or_log(name, "president")
            if provenance is not None:
                record.president = Participant(
                    provenance.surface, _presence_of(entry), provenance
                )

    for entry in _participant_entries(parsed.get("councilors")):
        name = entry if isinstance(entry, str) else str(entry.get("name", ""))
        if not name:
            continue
        provenance = align_or_log(name, "councilors")
        if provenance is not None:
            record.councilors.append(
                Participant(provenance.surface, _presence_of(entry), provenance)
            )
    record.councilors.sort(key=lambda p: p.provenance.start)
    return record, unaligned


def record_to_entities(record: MetadataRecord) -> list[EntityAnnotation]:
    """Entity view of a record, for scoring against gold annotations."""
    entities = []

    def add(kind: MetadataKind, provenance: Provenance | None,
            presence: Presence = Presence.NOT_APPLICABLE):
        if provenance is None:
            return
        entities.append(
            EntityAnnotation(
                category=MetadataCategory(kind, presence),
                start=provenance.start,
                end=provenance.end,
                surface=provenance.surface,
            )
        )

    add(MetadataKind.MEETING_NUMBER, record.provenance.get("meeting_number"))
    add(MetadataKind.DATE, record.provenance.get("date"))
    add(MetadataKind.LOCATION, record.provenance.get("location"))
    add(MetadataKind.START_TIME, record.provenance.get("start_time"))
    add(MetadataKind.END_TIME, record.provenance.get("end_time"))
    add(MetadataKind.MEETING_TYPE, record.provenance.get("meeting_type"))
    if record.president is not None and record.president.provenance is not None:
        add(MetadataKind.PRESIDENT, record.president.provenance,
            record.president.presence)
    for councilor in record.councilors:
        add(MetadataKind.COUNCILOR, councilor.provenance, councilor.presence)
    return entities


def llm_extract(
    doc: MinuteDocument,
    spec: ExtractionPromptSpec,
    endpoint: CompletionEndpoint,
    meter: ResourceMeter | None = None,
    cache: ResponseCache | None = None,
):
    """Extract one document through the endpoint.

    Returns (record, raw_response, report, status) where status is "ok" or
    "parse_failure". Parse failures yield an empty record, not an exception.
    """
    digest = spec_hash(spec.hash_payload())
    cached = cache.get(digest, doc.doc_id) if cache is not None else None
    if cached is not None:
        raw = cached["response"]
        wall = cached.get("wall_seconds", 0.0)
        report = meter.report_for(wall) if meter is not None else None
    else:
        prompt = spec.render(doc)
        if meter is not None:
            raw, report = meter.measure(lambda: endpoint.complete(prompt))
            wall = report.wall_seconds
        else:
            start = time.perf_counter()
            raw = endpoint.complete(prompt)
            wall = time.perf_counter() - start
            report = None
        if cache is not None:
            cache.put(digest, doc.doc_id, {"response": raw, "wall_seconds": wall})

    try:
        parsed = repair_json(raw)
        if not isinstance(parsed, dict):
            raise ParseFailure(f"top-level JSON is {type(parsed).__name__}, not object")
    except ParseFailure as exc:
        logger.warning("parse failure for %s: %s", doc.doc_id, exc)
        empty = MetadataRecord(doc_id=doc.doc_id, flags=("parse_failure",))
        return empty, raw, report, "parse_failure"

    record, unaligned = record_from_response(doc, parsed)
    if unaligned:
        record.flags = (*record.flags, "spurious_unaligned")
        logger.info("unaligned values for %s: %s", doc.doc_id, unaligned)
    return record, raw, report, "ok"


def llm_benchmark(
    minutes,
    spec: ExtractionPromptSpec,
    endpoint: CompletionEndpoint,
    meter: ResourceMeter,
    cache: ResponseCache | None = None,
    pipeline_scores: dict | None = None,
    pipeline_resources: dict | None = None,
) -> dict:
    """Score the generative baseline on annotated minutes, with resources.

    When pipeline numbers are passed, the report carries side-by-side ratio
    lines (latency and carbon).
    """
    accumulator = MeterAccumulator(meter)
    pairs = []
    statuses = {"ok": 0, "parse_failure": 0}
    for minute in minutes:
        doc = minute.document if isinstance(minute, AnnotatedMinute) else minute
        record, _, report, status = llm_extract(doc, spec, endpoint, meter, cache)
        statuses[status] += 1
        if report is not None:
            accumulator.add(doc.doc_id, report)
        predicted = record_to_entities(record)
        gold = list(minute.entities) if isinstance(minute, AnnotatedMinute) else []
        pairs.append((predicted, gold))

    scores = entity_prf_corpus(pairs)
    total = accumulator.total()
    n_docs = max(1, len(pairs))
    result = {
        "model": spec.model_name,
        "documents": len(pairs),
        "parse_failures": statuses["parse_failure"],
        "scores": scores.as_dict(),
        "resources": total.as_dict(),
        "seconds_per_doc": total.wall_seconds / n_docs,
    }
    if pipeline_scores is not None:
        result["pipeline_scores"] = pipeline_scores
    if pipeline_resources is not None:
        result["pipeline_resources"] = pipeline_resources
        pipeline_wall = pipeline_resources.get("wall_seconds", 0.0)
        pipeline_carbon = pipeline_resources.get("kg_CO2e", 0.0)
        if pipeline_wall > 0:
            result["latency_ratio"] = total.wall_seconds / pipeline_wall
        if pipeline_carbon > 0:
            result["carbon_ratio"] = total.kg_co2e / pipeline_carbon
    return result
