"""Rule-based sentence splitting and word tokenization.

Deterministic, model-free segmentation: sentences break on terminal
punctuation followed by an uppercase letter or digit, with a per-language
abbreviation allowlist; paragraph breaks (blank lines) always split.
"""
from __future__ import annotations

import re

from minutemeta.corpus.types import Language

# Common title/reference abbreviations that take a period mid-sentence.
_ABBREVIATIONS = {
    Language.PT: {
        "sr", "sra", "srs", "sras", "dr", "dra", "drs", "eng", "engª", "prof",
        "profa", "exmo", "exma", "exmos", "exmas", "av", "r", "trav", "lg",
        "n", "nº", "no", "art", "arts", "al", "cfr", "pág", "pags", "pág",
        "seg", "ex", "etc", "vs",
    },
    Language.EN: {
        "mr", "mrs", "ms", "dr", "prof", "st", "ave", "no", "art", "al",
        "etc", "vs", "jr", "sr", "inc", "ltd", "e.g", "i.e", "pp",
    },
}

_TERMINAL = re.compile(r"[.!?…]+[\"'»)\]]*")
_WORD_BEFORE = re.compile(r"([\w.ºª]+)$", re.UNICODE)
_PARAGRAPH = re.compile(r"\n[ \t]*\n")

_TOKEN_RE = re.compile(r"\w+|[^\w\s]", re.UNICODE)


def word_tokenize(text: str) -> list[tuple[int, int]]:
    """Character intervals of word/punctuation tokens partitioning the non-space text."""
    return [m.span() for m in _TOKEN_RE.finditer(text)]


def _is_abbreviation(text: str, period_pos: int, language: Language) -> bool:
    match = _WORD_BEFORE.search(text[:period_pos])
    if not match:
        return False
    word = match.group(1).rstrip(".").lower()
    return word in _ABBREVIATIONS.get(language, set())


def sentence_split(text: str, language: Language = Language.PT) -> list[tuple[int, int]]:
    """Split ``text`` into sorted, non-overlapping sentence intervals.

    The union of the intervals covers every non-whitespace character;
    whitespace-only input yields an empty list.
    """
    if not text.strip():
        return []

    boundaries: list[int] = []  # candidate cut positions (exclusive end of sentence)
    for match in _TERMINAL.finditer(text):
        end = match.end()
        if end >= len(text):
            continue
        if _is_abbreviation(text, match.start(), language):
            continue
        # Only cut when what follows looks like a fresh sentence.
        rest = text[end:]
        stripped = rest.lstrip()
        if not stripped:
            continue
        if not rest[0].isspace():
            continue
        first = stripped[0]
        if first.isupper() or first.isdigit() or first in "\"'«([§@":
            boundaries.append(end)

    for match in _PARAGRAPH.finditer(text):
        boundaries.append(match.start())

    boundaries = sorted(set(boundaries))

    intervals: list[tuple[int, int]] = []
    cursor = 0
    for cut in [*boundaries, len(text)]:
        chunk = text[cursor:cut]
        if chunk.strip():
            start = cursor + (len(chunk) - len(chunk.lstrip()))
            end = cursor + len(chunk.rstrip())
            intervals.append((start, end))
        cursor = cut
    return intervals
