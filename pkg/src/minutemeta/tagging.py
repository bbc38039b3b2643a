"""BIO tag sequences: encoding entity spans to tags and decoding them back.

The two directions are inverses: ``decode_entities(to_bio(text, tokens, anns))``
reproduces the annotation set whenever annotation boundaries coincide with
token boundaries.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass

from minutemeta.corpus.types import EntityAnnotation, MetadataCategory
from minutemeta.errors import AlignmentError

logger = logging.getLogger(__name__)

OUTSIDE = "O"


@dataclass(frozen=True)
class TagSequence:
    """One BIO tag per token over ``text``; ``scores`` are optional per-token
    probabilities of the chosen tags."""

    text: str
    tokens: tuple[tuple[int, int], ...]
    tags: tuple[str, ...]
    scores: tuple[float, ...] | None = None

    def __post_init__(self):
        if len(self.tags) != len(self.tokens):
            raise AlignmentError(
                f"{len(self.tags)} tags for {len(self.tokens)} tokens"
            )
        if self.scores is not None and len(self.scores) != len(self.tokens):
            raise AlignmentError("scores length does not match tokens")

    def __len__(self) -> int:
        return len(self.tokens)


@dataclass(frozen=True)
class Entity:
    """A decoded entity: category plus inclusive token span and char span."""

    category: MetadataCategory
    token_span: tuple[int, int]
    char_span: tuple[int, int]
    surface: str
    confidence: float = 1.0


def tag_label(tag: str) -> str | None:
    """The entity label of a B-/I- tag, or None for O."""
    if tag == OUTSIDE:
        return None
    return tag[2:]


def is_valid(tags) -> bool:
    """True when no I-tag follows O or a tag with a different label."""
    prev_label = None
    for tag in tags:
        if tag.startswith("I-"):
            if prev_label != tag[2:]:
                return False
        prev_label = tag_label(tag) if tag != OUTSIDE else None
    return True


def repair_tags(tags) -> tuple[str, ...]:
    """Turn orphan or mislabeled I-tags into B-tags. Idempotent."""
    repaired: list[str] = []
    prev_label = None
    for tag in tags:
        if tag.startswith("I-") and prev_label != tag[2:]:
            tag = "B-" + tag[2:]
        repaired.append(tag)
        prev_label = tag_label(tag)
    return tuple(repaired)


def to_bio(
    region_text: str,
    tokens: list[tuple[int, int]] | tuple[tuple[int, int], ...],
    annotations,
    strict: bool = False,
) -> TagSequence:
    """Encode character-span annotations as one BIO tag per token.

    An annotation boundary strictly inside a token raises AlignmentError in
    strict mode; otherwise the annotation is snapped outward to the covering
    tokens with a warning.
    """
    tokens = tuple(tokens)
    starts = {span[0]: i for i, span in enumerate(tokens)}
    ends = {span[1]: i for i, span in enumerate(tokens)}
    tags = [OUTSIDE] * len(tokens)

    for ann in annotations:
        if ann.end > len(region_text):
            raise AlignmentError(
                f"annotation [{ann.start},{ann.end}) outside region of length {len(region_text)}"
            )
        covered = [
            i for i, (ts, te) in enumerate(tokens) if ts < ann.end and te > ann.start
        ]
        if not covered:
            raise AlignmentError(
                f"annotation [{ann.start},{ann.end}) covers no tokens"
            )
        misaligned = ann.start not in starts or ann.end not in ends
        if misaligned:
            if strict:
                raise AlignmentError(
                    f"annotation [{ann.start},{ann.end}) not aligned to token boundaries"
                )
            logger.warning(
                "snapping annotation [%d,%d) outward to tokens [%d,%d)",
                ann.start, ann.end, tokens[covered[0]][0], tokens[covered[-1]][1],
            )
        label = ann.category.label
        tags[covered[0]] = f"B-{label}"
        for i in covered[1:]:
            tags[i] = f"I-{label}"

    return TagSequence(text=region_text, tokens=tokens, tags=tuple(tags))


def decode_entities(seq: TagSequence) -> list[Entity]:
    """Decode maximal B/I runs into entities.

    Invalid sequences are repaired first. Confidence is the mean per-token
    probability over the run when scores are present, else 1.0.
    """
    tags = seq.tags if is_valid(seq.tags) else repair_tags(seq.tags)
    entities: list[Entity] = []
    i = 0
    while i < len(tags):
        if not tags[i].startswith("B-"):
            i += 1
            continue
        label = tags[i][2:]
        j = i + 1
        while j < len(tags) and tags[j] == f"I-{label}":
            j += 1
        char_start = seq.tokens[i][0]
        char_end = seq.tokens[j - 1][1]
        if seq.scores is not None:
            confidence = sum(seq.scores[i:j]) / (j - i)
        else:
            confidence = 1.0
        entities.append(
            Entity(
                category=MetadataCategory.from_label(label),
                token_span=(i, j - 1),
                char_span=(char_start, char_end),
                surface=seq.text[char_start:char_end],
                confidence=confidence,
            )
        )
        i = j
    return entities


def entities_to_annotations(entities) -> list[EntityAnnotation]:
    return [
        EntityAnnotation(
            category=e.category,
            start=e.char_span[0],
            end=e.char_span[1],
            surface=e.surface,
        )
        for e in entities
    ]


def to_conll(seq: TagSequence) -> str:
    """Two-column token/tag text block for one region."""
    lines = [
        f"{seq.text[ts:te]}\t{tag}"
        for (ts, te), tag in zip(seq.tokens, seq.tags)
    ]
    return "\n".join(lines)


def write_conll(sequences, path) -> None:
    """CoNLL-style export, blank line between regions."""
    from pathlib import Path

    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8") as handle:
        for seq in sequences:
            handle.write(to_conll(seq))
            handle.write("\n\n")
