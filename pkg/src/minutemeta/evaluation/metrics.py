"""Span metrics: exact match, token-overlap F1, and strict entity P/R/F1.

Normalization for the string metrics: lowercase, collapse whitespace, strip
leading/trailing punctuation per token. No language-specific article
removal, which would not transfer across the two corpus languages.
"""
from __future__ import annotations

import string
from collections import Counter
from dataclasses import dataclass, field

from minutemeta.errors import CoordError

_PUNCT = set(string.punctuation) | {"«", "»", "“", "”", "‘", "’", "…"}


def normalize_tokens(text: str | None) -> list[str]:
    if text is None:
        return []
    tokens = []
    for raw in text.lower().split():
        token = raw.strip("".join(_PUNCT))
        if token:
            tokens.append(token)
    return tokens


def normalize_text(text: str | None) -> str:
    return " ".join(normalize_tokens(text))


def squad_em(pred: str | None, gold: str | None) -> int:
    """1 iff normalized strings match; two nulls match, null vs non-null never."""
    if pred is None or gold is None:
        return int(pred is None and gold is None)
    return int(normalize_text(pred) == normalize_text(gold))


def squad_f1(pred: str | None, gold: str | None) -> float:
    """Harmonic mean of token precision/recall over normalized tokens."""
    if pred is None or gold is None:
        return float(pred is None and gold is None)
    pred_tokens = normalize_tokens(pred)
    gold_tokens = normalize_tokens(gold)
    if not pred_tokens or not gold_tokens:
        return float(pred_tokens == gold_tokens)
    common = Counter(pred_tokens) & Counter(gold_tokens)
    overlap = sum(common.values())
    if overlap == 0:
        return 0.0
    precision = overlap / len(pred_tokens)
    recall = overlap / len(gold_tokens)
    return 2 * precision * recall / (precision + recall)


@dataclass
class PRF:
    tp: int = 0
    fp: int = 0
    fn: int = 0

    @property
    def precision(self) -> float:
        return self.tp / (self.tp + self.fp) if (self.tp + self.fp) else 0.0

    @property
    def recall(self) -> float:
        return self.tp / (self.tp + self.fn) if (self.tp + self.fn) else 0.0

    @property
    def f1(self) -> float:
        p, r = self.precision, self.recall
        return 2 * p * r / (p + r) if (p + r) else 0.0

    def __iadd__(self, other: "PRF") -> "PRF":
        self.tp += other.tp
        self.fp += other.fp
        self.fn += other.fn
        return self

    def as_dict(self) -> dict:
        return {
            "precision": self.precision,
            "recall": self.recall,
            "f1": self.f1,
            "tp": self.tp,
            "fp": self.fp,
            "fn": self.fn,
        }


def _key(entity, relaxed: bool):
    label = entity.category.label if hasattr(entity, "category") else entity[0]
    span = entity.char_span if hasattr(entity, "char_span") else (entity[1], entity[2])
    return label, span


@dataclass
class EntityScores:
    """Micro counts plus per-category breakdown."""

    micro: PRF = field(default_factory=PRF)
    per_category: dict[str, PRF] = field(default_factory=dict)

    def category(self, label: str) -> PRF:
        return self.per_category.setdefault(label, PRF())

    def __iadd__(self, other: "EntityScores") -> "EntityScores":
        self.micro += other.micro
        for label, prf in other.per_category.items():
            self.category(label).__iadd__(prf)
        return self

    def as_dict(self) -> dict:
        return {
            "micro": self.micro.as_dict(),
            "per_category": {
                label: prf.as_dict() for label, prf in sorted(self.per_category.items())
            },
        }


def entity_prf(
    predicted,
    gold,
    text_length: int | None = None,
    relaxed: bool = False,
) -> EntityScores:
    """Strict-match entity scoring for one document.

    A prediction is a true positive iff its category label and char span both
    match a gold entity exactly (one gold consumes one prediction). With
    ``relaxed`` (analysis only, never headline numbers) a same-category
    overlap counts as a hit.
    """
    if text_length is not None:
        for ent in (*predicted, *gold):
            span = ent.char_span
            if span[0] < 0 or span[1] > text_length:
                raise CoordError(f"entity span {span} outside document of length {text_length}")

    scores = EntityScores()
    gold_pool = Counter(_key(g, relaxed) for g in gold)
    matched_gold = Counter()
    for pred in predicted:
        key = _key(pred, relaxed)
        hit = False
        if not relaxed:
            if matched_gold[key] < gold_pool[key]:
                matched_gold[key] += 1
                hit = True
        else:
            for gkey in gold_pool:
                if gkey[0] != key[0] or matched_gold[gkey] >= gold_pool[gkey]:
                    continue
                if key[1][0] < gkey[1][1] and gkey[1][0] < key[1][1]:
                    matched_gold[gkey] += 1
                    hit = True
                    break
        label = key[0]
        if hit:
            scores.micro.tp += 1
            scores.category(label).tp += 1
        else:
            scores.micro.fp += 1
            scores.category(label).fp += 1

    for gkey, total in gold_pool.items():
        missed = total - matched_gold[gkey]
        scores.micro.fn += missed
        scores.category(gkey[0]).fn += missed
    return scores


def entity_prf_corpus(pairs, relaxed: bool = False) -> EntityScores:
    """Micro-average over (predicted, gold) document pairs."""
    scores = EntityScores()
    for predicted, gold in pairs:
        scores += entity_prf(predicted, gold, relaxed=relaxed)
    return scores
