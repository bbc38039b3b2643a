"""Full-document NER training for the ablation (no boundary stage)."""
from __future__ import annotations

from minutemeta.corpus.types import AnnotatedMinute, SegmentAnnotation, SegmentType


def as_fulldoc_minute(minute: AnnotatedMinute) -> AnnotatedMinute:
    """Replace the gold segments with one opening spanning the whole text,
    so the shared region machinery trains on the entire document."""
    doc = minute.document
    return AnnotatedMinute(
        document=doc,
        entities=minute.entities,
        segments=(
            SegmentAnnotation(SegmentType.OPENING, (0, len(doc.text))),
            SegmentAnnotation(SegmentType.CLOSING, None),
        ),
        provenance=minute.provenance,
    )


def train_ner_fulldoc(train_minutes, val_minutes, recipe, labels, out_dir):
    from minutemeta.ner import train_ner

    return train_ner(
        [as_fulldoc_minute(m) for m in train_minutes],
        [as_fulldoc_minute(m) for m in val_minutes],
        recipe.ner_hyperparams(),
        use_crf=recipe.ner.get("use_crf", False),
        deslex_policy=recipe.deslex_policy(),
        labels=labels,
        out_dir=out_dir,
    )
