"""Training-time lexical augmentation of annotated minutes.

Participant and location surfaces are replaced with synthetic values with a
configured probability, date/time surfaces are perturbed with another, and
every mention of the document's own municipality becomes a placeholder
token, unconditionally. Annotations and segment spans are realigned exactly.
Only training data goes through this: validation and test sets never do.
"""
from __future__ import annotations

import random
import re
from dataclasses import dataclass

from minutemeta.corpus.segmentation import sentence_split
from minutemeta.corpus.types import (
    AnnotatedMinute,
    Corpus,
    EntityAnnotation,
    MetadataKind,
    MinuteDocument,
    SegmentAnnotation,
)
from minutemeta.deslex.datetimes import DEFAULT_RULES, perturb_datetime
from minutemeta.deslex.editing import Edit, apply_edits
from minutemeta.deslex.generators import SurfaceGenerator, default_generator
from minutemeta.errors import ConfigError

NAME_KINDS = frozenset({MetadataKind.PRESIDENT, MetadataKind.COUNCILOR})
DATETIME_KINDS = frozenset(
    {MetadataKind.DATE, MetadataKind.START_TIME, MetadataKind.END_TIME}
)


@dataclass
class DeslexPolicy:
    """Replacement probabilities and machinery for one augmentation run."""

    p_name_loc: float = 0.60
    p_datetime: float = 0.30
    municipality_placeholder: str = "@MUNICIPIO"
    seed: int = 0
    generator: SurfaceGenerator | None = None
    language: str = "pt"
    datetime_rules: frozenset = DEFAULT_RULES
    consistent_mentions: bool = True

    def __post_init__(self):
        if not 0.0 <= self.p_name_loc <= 1.0:
            raise ConfigError("p_name_loc must be in [0, 1]")
        if not 0.0 <= self.p_datetime <= 1.0:
            raise ConfigError("p_datetime must be in [0, 1]")
        if not self.municipality_placeholder:
            raise ConfigError("municipality_placeholder must be non-empty")
        if self.generator is None:
            self.generator = default_generator(self.language)

    def as_dict(self) -> dict:
        return {
            "p_name_loc": self.p_name_loc,
            "p_datetime": self.p_datetime,
            "municipality_placeholder": self.municipality_placeholder,
            "seed": self.seed,
            "language": self.language,
            "datetime_rules": sorted(self.datetime_rules),
            "consistent_mentions": self.consistent_mentions,
            "generator": type(self.generator).__name__,
        }


def _doc_rng(policy: DeslexPolicy, doc_id: str) -> random.Random:
    return random.Random(f"{policy.seed}:{doc_id}")


def _draw_different(generator, kind: str, original: str, rng: random.Random) -> str:
    """A pool draw that is not the original surface (bounded retries)."""
    drawn = generator.draw(kind, rng)
    for _ in range(5):
        if drawn != original:
            break
        drawn = generator.draw(kind, rng)
    return drawn


def _replacement_for(
    ann: EntityAnnotation,
    policy: DeslexPolicy,
    rng: random.Random,
    mention_map: dict,
) -> str | None:
    """Decide the new surface for one annotation, or None to keep it."""
    kind = ann.category.kind
    if policy.municipality_placeholder in ann.surface:
        return None  # never rewrite an already-placeholdered surface
    if kind in NAME_KINDS or kind == MetadataKind.LOCATION:
        if rng.random() >= policy.p_name_loc:
            return None
        surface_kind = "name" if kind in NAME_KINDS else "location"
        if policy.consistent_mentions:
            key = (surface_kind, ann.surface)
            if key not in mention_map:
                mention_map[key] = _draw_different(
                    policy.generator, surface_kind, ann.surface, rng
                )
            return mention_map[key]
        return _draw_different(policy.generator, surface_kind, ann.surface, rng)
    if kind in DATETIME_KINDS:
        if rng.random() >= policy.p_datetime:
            return None
        return perturb_datetime(ann.surface, policy.datetime_rules, rng)
    return None  # meeting number and type are structural, never rewritten


def _municipality_edits(text: str, municipality: str, placeholder: str) -> list[Edit]:
    pattern = re.compile(re.escape(municipality), re.IGNORECASE)
    edits = []
    for match in pattern.finditer(text):
        edits.append(Edit(match.start(), match.end(), placeholder))
    return edits


def deslexicalize(
    doc: MinuteDocument,
    annotations,
    segments,
    policy: DeslexPolicy,
) -> tuple[MinuteDocument, list[EntityAnnotation], list[SegmentAnnotation]]:
    """Apply the policy to one document; deterministic in (doc_id, seed)."""
    rng = _doc_rng(policy, doc.doc_id)
    annotations = sorted(annotations, key=lambda a: a.start)
    mention_map: dict = {}

    # Pass 1: per-annotation replacements, in document order.
    edits: list[Edit] = []
    for ann in annotations:
        replacement = _replacement_for(ann, policy, rng, mention_map)
        if replacement is not None and replacement != ann.surface:
            edits.append(Edit(ann.start, ann.end, replacement))

    tracked = [a.char_span for a in annotations] + [
        s.char_span for s in segments if not s.is_null
    ]
    text, tracked = apply_edits(doc.text, edits, tracked)

    # Pass 2: municipality placeholdering, everywhere, always.
    muni_edits = _municipality_edits(
        text, doc.municipality, policy.municipality_placeholder
    )
    text, tracked = apply_edits(text, muni_edits, tracked)

    ann_spans = tracked[: len(annotations)]
    seg_spans = tracked[len(annotations):]

    new_annotations = [
        EntityAnnotation(
            category=ann.category,
            start=start,
            end=end,
            surface=text[start:end],
        )
        for ann, (start, end) in zip(annotations, ann_spans)
    ]
    new_segments = []
    span_iter = iter(seg_spans)
    for seg in segments:
        if seg.is_null:
            new_segments.append(seg)
        else:
            new_segments.append(SegmentAnnotation(seg.segment_type, next(span_iter)))

    new_doc = MinuteDocument(
        doc_id=doc.doc_id,
        municipality=doc.municipality,
        language=doc.language,
        text=text,
        sentences=tuple(sentence_split(text, doc.language)),
    )
    return new_doc, new_annotations, new_segments


def deslexicalize_minute(minute: AnnotatedMinute, policy: DeslexPolicy) -> AnnotatedMinute:
    doc, annotations, segments = deslexicalize(
        minute.document, minute.entities, minute.segments, policy
    )
    return AnnotatedMinute(
        document=doc,
        entities=tuple(annotations),
        segments=tuple(segments),
        provenance={"seed": policy.seed, "policy": policy.as_dict()},
    )


def deslexicalize_corpus(corpus: Corpus, policy: DeslexPolicy, doc_ids=None) -> Corpus:
    """Augment the given documents (all by default); others pass through."""
    wanted = set(doc_ids) if doc_ids is not None else None
    minutes = []
    for minute in corpus:
        if wanted is None or minute.doc_id in wanted:
            minutes.append(deslexicalize_minute(minute, policy))
        else:
            minutes.append(minute)
    return Corpus(tuple(minutes))
