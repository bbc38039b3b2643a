"""Data model, ingestion, format conversion, and split generation."""

from minutemeta.corpus.io import load_corpus, minute_to_record, parse_record, save_corpus
from minutemeta.corpus.segmentation import sentence_split, word_tokenize
from minutemeta.corpus.splits import (
    make_global_split,
    make_incremental_series,
    make_leave_one_out,
)
from minutemeta.corpus.squad import (
    BoundaryPrompt,
    QAInstance,
    corpus_to_squad,
    minute_qa_instances,
    prompts_for,
    to_squad_v2,
    write_squad_json,
)
from minutemeta.corpus.types import (
    AnnotatedMinute,
    Corpus,
    CorpusSplit,
    EntityAnnotation,
    Language,
    MetadataCategory,
    MetadataKind,
    MinuteDocument,
    Presence,
    SegmentAnnotation,
    SegmentType,
    default_label_inventory,
)
from minutemeta.tagging import TagSequence, to_bio, to_conll, write_conll

__all__ = [
    "AnnotatedMinute",
    "BoundaryPrompt",
    "Corpus",
    "CorpusSplit",
    "EntityAnnotation",
    "Language",
    "MetadataCategory",
    "MetadataKind",
    "MinuteDocument",
    "Presence",
    "QAInstance",
    "SegmentAnnotation",
    "SegmentType",
    "TagSequence",
    "corpus_to_squad",
    "default_label_inventory",
    "load_corpus",
    "make_global_split",
    "make_incremental_series",
    "make_leave_one_out",
    "minute_qa_instances",
    "minute_to_record",
    "parse_record",
    "prompts_for",
    "save_corpus",
    "sentence_split",
    "to_bio",
    "to_conll",
    "to_squad_v2",
    "word_tokenize",
    "write_conll",
    "write_squad_json",
]
