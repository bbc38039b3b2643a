"""Error taxonomy over strict-match residuals.

After exact matches are removed, unmatched predictions and golds are paired
greedily by character overlap (ties broken by earliest span): a pair with
the same category but a different span is a boundary error; a pair with an
identical span but a different category (including presence variants) is a
type confusion. Whatever remains unpaired is spurious (predictions) or
missed (golds).
"""
from __future__ import annotations

from collections import Counter
from dataclasses import dataclass


@dataclass
class ErrorCounts:
    boundary: int = 0
    type_confusion: int = 0
    spurious: int = 0
    missed: int = 0

    @property
    def total_fp(self) -> int:
        return self.boundary + self.type_confusion + self.spurious

    @property
    def total_fn(self) -> int:
        return self.boundary + self.type_confusion + self.missed

    def __iadd__(self, other: "ErrorCounts") -> "ErrorCounts":
        self.boundary += other.boundary
        self.type_confusion += other.type_confusion
        self.spurious += other.spurious
        self.missed += other.missed
        return self

    def as_dict(self) -> dict:
        return {
            "boundary": self.boundary,
            "type_confusion": self.type_confusion,
            "spurious": self.spurious,
            "missed": self.missed,
        }


def _overlap(a: tuple[int, int], b: tuple[int, int]) -> int:
    return max(0, min(a[1], b[1]) - max(a[0], b[0]))


def error_taxonomy(predicted, gold) -> ErrorCounts:
    """Classify disagreements between one document's predictions and golds."""
    preds = [(p.category.label, p.char_span) for p in predicted]
    golds = [(g.category.label, g.char_span) for g in gold]

    # Remove exact matches (multiset semantics).
    gold_pool = Counter(golds)
    matched = Counter()
    leftover_preds = []
    for item in preds:
        if matched[item] < gold_pool[item]:
            matched[item] += 1
        else:
            leftover_preds.append(item)
    leftover_golds = []
    consumed = Counter()
    for item in golds:
        if consumed[item] < matched[item]:
            consumed[item] += 1
        else:
            leftover_golds.append(item)

    # Candidate pairings among the residuals.
    candidates = []
    for pi, (p_label, p_span) in enumerate(leftover_preds):
        for gi, (g_label, g_span) in enumerate(leftover_golds):
            same_span = p_span == g_span
            overlap = _overlap(p_span, g_span)
            if same_span and p_label != g_label:
                candidates.append((overlap, g_span[0], p_span[0], pi, gi, "type_confusion"))
            elif p_label == g_label and overlap > 0 and not same_span:
                candidates.append((overlap, g_span[0], p_span[0], pi, gi, "boundary"))
    candidates.sort(key=lambda c: (-c[0], c[1], c[2]))

    counts = ErrorCounts()
    used_preds: set[int] = set()
    used_golds: set[int] = set()
    for _, _, _, pi, gi, kind in candidates:
        if pi in used_preds or gi in used_golds:
            continue
        used_preds.add(pi)
        used_golds.add(gi)
        if kind == "type_confusion":
            counts.type_confusion += 1
        else:
            counts.boundary += 1

    counts.spurious = len(leftover_preds) - len(used_preds)
    counts.missed = len(leftover_golds) - len(used_golds)
    return counts


def error_taxonomy_corpus(pairs) -> ErrorCounts:
    counts = ErrorCounts()
    for predicted, gold in pairs:
        counts += error_taxonomy(predicted, gold)
    return counts
