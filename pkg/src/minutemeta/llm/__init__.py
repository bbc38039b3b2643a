"""Generative-model structured-extraction baseline."""

from minutemeta.llm.align import Alignment, align_value
from minutemeta.llm.client import (
    CompletionEndpoint,
    HttpEndpoint,
    MockEndpoint,
    ResponseCache,
    spec_hash,
)
from minutemeta.llm.extract import (
    CATEGORY_KEYS,
    ExtractionPromptSpec,
    llm_benchmark,
    llm_extract,
    record_from_response,
    record_to_entities,
)
from minutemeta.llm.jsonrepair import repair_json

__all__ = [
    "Alignment",
    "CATEGORY_KEYS",
    "CompletionEndpoint",
    "ExtractionPromptSpec",
    "HttpEndpoint",
    "MockEndpoint",
    "ResponseCache",
    "align_value",
    "llm_benchmark",
    "llm_extract",
    "record_from_response",
    "record_to_entities",
    "repair_json",
    "spec_hash",
]
