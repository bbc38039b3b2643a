"""Conversion of segment annotations into SQuAD-v2-style QA instances.

The full document text is the context; each boundary prompt is paired with
the corresponding segment span, or marked unanswerable when the segment is
null. The exported JSON is bit-compatible with the public SQuAD v2 layout
(``data -> paragraphs -> qas`` with ``is_impossible``).
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

from minutemeta.corpus.types import (
    AnnotatedMinute,
    Corpus,
    MinuteDocument,
    SegmentAnnotation,
    SegmentType,
)
from minutemeta.errors import SpanError


@dataclass(frozen=True)
class BoundaryPrompt:
    """The natural-language question used to locate one segment type."""

    segment_type: SegmentType
    question_text: str

    def __post_init__(self):
        if not self.question_text:
            raise ValueError("question_text must be non-empty")


DEFAULT_PROMPTS = {
    "pt": {
        SegmentType.OPENING: BoundaryPrompt(
            SegmentType.OPENING,
            "Qual é a secção de abertura da ata, com o número, a data, a hora, "
            "o local e os participantes da reunião?",
        ),
        SegmentType.CLOSING: BoundaryPrompt(
            SegmentType.CLOSING,
            "Qual é a secção de encerramento da ata, com a hora de fim da reunião?",
        ),
    },
    "en": {
        SegmentType.OPENING: BoundaryPrompt(
            SegmentType.OPENING,
            "What is the opening section of the minutes, stating the meeting "
            "number, date, time, location and participants?",
        ),
        SegmentType.CLOSING: BoundaryPrompt(
            SegmentType.CLOSING,
            "What is the closing section of the minutes, stating when the "
            "meeting ended?",
        ),
    },
}


def prompts_for(language, overrides: dict | None = None) -> dict[SegmentType, BoundaryPrompt]:
    """Per-language prompts; ``overrides`` maps segment type name to question text."""
    lang = getattr(language, "value", language)
    prompts = dict(DEFAULT_PROMPTS[lang])
    for key, text in (overrides or {}).items():
        seg_type = SegmentType(key)
        prompts[seg_type] = BoundaryPrompt(seg_type, text)
    return prompts


@dataclass(frozen=True)
class QAInstance:
    """One extractive-QA training/eval example."""

    qa_id: str
    doc_id: str
    question: str
    context: str
    answer_start: int | None
    answer_text: str | None

    @property
    def is_impossible(self) -> bool:
        return self.answer_start is None


def to_squad_v2(
    doc: MinuteDocument,
    seg: SegmentAnnotation,
    prompt: BoundaryPrompt,
) -> QAInstance:
    """Build the QA instance for one (document, segment, prompt) triple."""
    if prompt.segment_type != seg.segment_type:
        raise ValueError(
            f"prompt is for {prompt.segment_type.value}, segment is {seg.segment_type.value}"
        )
    qa_id = f"{doc.doc_id}:{seg.segment_type.value}"
    if seg.is_null:
        return QAInstance(qa_id, doc.doc_id, prompt.question_text, doc.text, None, None)
    start, end = seg.char_span
    if start < 0 or end > len(doc.text):
        raise SpanError(f"segment span [{start},{end}) outside document {doc.doc_id!r}")
    return QAInstance(
        qa_id, doc.doc_id, prompt.question_text, doc.text, start, doc.text[start:end]
    )


def corpus_to_squad(
    corpus: Corpus, prompt_overrides: dict | None = None
) -> list[QAInstance]:
    """Two instances per document (opening and closing prompts)."""
    instances: list[QAInstance] = []
    for minute in corpus:
        prompts = prompts_for(minute.document.language, prompt_overrides)
        for seg_type in (SegmentType.OPENING, SegmentType.CLOSING):
            seg = minute.segment(seg_type)
            if seg is None:
                seg = SegmentAnnotation(seg_type, None)
            instances.append(to_squad_v2(minute.document, seg, prompts[seg_type]))
    return instances


def squad_json(instances, title_by_doc: dict[str, str] | None = None) -> dict:
    """Public SQuAD v2 JSON structure for the given instances."""
    paragraphs = []
    by_context: dict[str, list[QAInstance]] = {}
    for inst in instances:
        by_context.setdefault(inst.doc_id, []).append(inst)
    for doc_id, group in by_context.items():
        qas = []
        for inst in group:
            if inst.is_impossible:
                qas.append(
                    {
                        "id": inst.qa_id,
                        "question": inst.question,
                        "answers": [],
                        "is_impossible": True,
                    }
                )
            else:
                qas.append(
                    {
                        "id": inst.qa_id,
                        "question": inst.question,
                        "answers": [
                            {"text": inst.answer_text, "answer_start": inst.answer_start}
                        ],
                        "is_impossible": False,
                    }
                )
        paragraphs.append({"context": group[0].context, "qas": qas})
    title = (title_by_doc or {})
    return {
        "version": "v2.0",
        "data": [
            {"title": title.get(doc_id, doc_id), "paragraphs": [para]}
            for doc_id, para in zip(by_context.keys(), paragraphs)
        ],
    }


def write_squad_json(instances, path: str | Path) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8") as handle:
        json.dump(squad_json(instances), handle, ensure_ascii=False, indent=1)


def minute_qa_instances(minute: AnnotatedMinute, prompt_overrides: dict | None = None):
    prompts = prompts_for(minute.document.language, prompt_overrides)
    out = []
    for seg_type in (SegmentType.OPENING, SegmentType.CLOSING):
        seg = minute.segment(seg_type) or SegmentAnnotation(seg_type, None)
        out.append(to_squad_v2(minute.document, seg, prompts[seg_type]))
    return out
