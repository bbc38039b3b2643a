"""Token-level entity recognition over reduced regions (stage 2)."""

from minutemeta.ner.crf import (
    CrfParameters,
    bio_start_mask,
    bio_transition_mask,
    viterbi_decode,
    viterbi_tags,
)
from minutemeta.ner.model import (
    NerHyperparams,
    NerModelHandle,
    align_subwords,
    region_annotations,
    tag,
    tag_inventory,
    train_ner,
    write_entity_predictions,
)
from minutemeta.tagging import (
    Entity,
    TagSequence,
    decode_entities,
    is_valid,
    repair_tags,
    to_bio,
)

__all__ = [
    "CrfParameters",
    "Entity",
    "NerHyperparams",
    "NerModelHandle",
    "TagSequence",
    "align_subwords",
    "bio_start_mask",
    "bio_transition_mask",
    "decode_entities",
    "is_valid",
    "region_annotations",
    "repair_tags",
    "tag",
    "tag_inventory",
    "to_bio",
    "train_ner",
    "viterbi_decode",
    "viterbi_tags",
    "write_entity_predictions",
]
