"""Aligning extracted string values back to document character spans.

Three levels, tried in order: exact substring, case/diacritic-insensitive
substring, bounded edit-distance window. A value that matches nowhere is
recorded as spurious-unaligned rather than guessed.
"""
from __future__ import annotations

import unicodedata
from dataclasses import dataclass


@dataclass(frozen=True)
class Alignment:
    start: int
    end: int
    level: str  # exact | caseless | fuzzy


def _fold(text: str) -> str:
    decomposed = unicodedata.normalize("NFD", text.lower())
    return "".join(ch for ch in decomposed if not unicodedata.combining(ch))


def _edit_distance_capped(a: str, b: str, cap: int) -> int:
    """Standard DP distance, early-exiting once every cell exceeds cap."""
    if abs(len(a) - len(b)) > cap:
        return cap + 1
    previous = list(range(len(b) + 1))
    for i, ch_a in enumerate(a, 1):
        current = [i]
        best = i
        for j, ch_b in enumerate(b, 1):
            cost = min(
                previous[j] + 1,
                current[j - 1] + 1,
                previous[j - 1] + (ch_a != ch_b),
            )
            current.append(cost)
            best = min(best, cost)
        if best > cap:
            return cap + 1
        previous = current
    return previous[-1]


def align_value(value: str, text: str, max_edit_fraction: float = 0.2) -> Alignment | None:
    """Locate ``value`` in ``text`` at the strictest level that matches."""
    value = value.strip()
    if not value:
        return None

    index = text.find(value)
    if index != -1:
        return Alignment(index, index + len(value), "exact")

    folded_value = _fold(value)
    folded_text = _fold(text)
    if len(folded_text) == len(text):  # folding kept offsets stable
        index = folded_text.find(folded_value)
        if index != -1 and len(folded_value) == len(value):
            return Alignment(index, index + len(value), "caseless")

    cap = max(1, int(len(value) * max_edit_fraction))
    window = len(value)
    best: tuple[int, int] | None = None
    best_distance = cap + 1
    # anchor fuzzy candidates on leading-trigram hits to stay fast on long docs
    anchor = folded_value[: min(3, len(folded_value))]
    starts: set[int] = set()
    search_from = 0
    while True:
        index = folded_text.find(anchor, search_from)
        if index == -1:
            break
        for offset in range(-cap, cap + 1):
            if 0 <= index + offset <= len(text) - 1:
                starts.add(index + offset)
        search_from = index + 1
    for start in sorted(starts):
        for width in range(max(1, window - cap), window + cap + 1):
            if start + width > len(text):
                break
            candidate = text[start : start + width]
            distance = _edit_distance_capped(_fold(candidate), folded_value, cap)
            if distance < best_distance:
                best_distance = distance
                best = (start, start + width)
        if best_distance == 0:
            break
    if best is not None and best_distance <= cap:
        return Alignment(best[0], best[1], "fuzzy")
    return None
