"""Span-preserving text edits.

All deslexicalization rewrites go through ``apply_edits`` so every annotated
span is remapped exactly: a span that coincides with an edited region maps to
the replacement's extent, spans after an edit shift by the length delta, and
spans containing an edit stretch with it.
"""
from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class Edit:
    start: int
    end: int
    replacement: str


def apply_edits(text: str, edits: list[Edit], spans: list[tuple[int, int]]):
    """Apply sorted, non-overlapping edits; return (new_text, remapped_spans).

    Span starts strictly inside an edited region snap to the replacement's
    start; span ends strictly inside snap to the replacement's end.
    """
    for first, second in zip(edits, edits[1:]):
        if second.start < first.end:
            raise ValueError(f"overlapping edits at {first.end} and {second.start}")

    pieces: list[str] = []
    cursor = 0
    placed: list[tuple[int, int, int, int]] = []  # old_start, old_end, new_start, new_end
    for edit in edits:
        pieces.append(text[cursor : edit.start])
        new_start = sum(len(p) for p in pieces)
        pieces.append(edit.replacement)
        placed.append((edit.start, edit.end, new_start, new_start + len(edit.replacement)))
        cursor = edit.end
    pieces.append(text[cursor:])
    new_text = "".join(pieces)

    def delta_before(pos: int) -> int:
        shift = 0
        for old_start, old_end, new_start, new_end in placed:
            if old_end <= pos:
                shift += (new_end - new_start) - (old_end - old_start)
            else:
                break
        return shift

    def map_start(pos: int) -> int:
        for old_start, old_end, new_start, _ in placed:
            if old_start < pos < old_end:
                return new_start
        return pos + delta_before(pos)

    def map_end(pos: int) -> int:
        for old_start, old_end, _, new_end in placed:
            if old_start < pos < old_end:
                return new_end
        return pos + delta_before(pos)

    remapped = [(map_start(s), map_end(e)) for s, e in spans]
    return new_text, remapped
