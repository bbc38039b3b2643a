import random

import pytest

from minutemeta.corpus import EntityAnnotation, MetadataCategory, word_tokenize
from minutemeta.corpus.types import default_label_inventory
from minutemeta.errors import AlignmentError
from minutemeta.tagging import (
    TagSequence,
    decode_entities,
    is_valid,
    repair_tags,
    to_bio,
)


def _ann(label: str, start: int, end: int, text: str) -> EntityAnnotation:
    return EntityAnnotation(
        category=MetadataCategory.from_label(label),
        start=start,
        end=end,
        surface=text[start:end],
    )


class TestToBio:
    def test_single_token_entity(self):
        text = "Reunião ordinária"
        tokens = word_tokenize(text)
        seq = to_bio(text, tokens, [_ann("MEETING_TYPE", 8, 17, text)])
        assert seq.tags == ("O", "B-MEETING_TYPE")

    def test_no_annotations_all_outside(self):
        text = "nada para ver aqui"
        seq = to_bio(text, word_tokenize(text), [])
        assert set(seq.tags) == {"O"}

    def test_three_token_date(self):
        text = "12 março 2020"
        seq = to_bio(text, word_tokenize(text), [_ann("DATE", 0, 13, text)])
        assert seq.tags == ("B-DATE", "I-DATE", "I-DATE")

    def test_misaligned_snaps_outward(self, caplog):
        text = "abcdef ghi"
        tokens = word_tokenize(text)  # [0,6) [7,10)
        seq = to_bio(text, tokens, [_ann("DATE", 2, 9, text)])
        assert seq.tags == ("B-DATE", "I-DATE")

    def test_misaligned_strict_raises(self):
        text = "abcdef ghi"
        with pytest.raises(AlignmentError):
            to_bio(text, word_tokenize(text), [_ann("DATE", 2, 9, text)], strict=True)


class TestRepair:
    def test_orphan_inside_becomes_begin(self):
        assert repair_tags(["O", "I-DATE"]) == ("O", "B-DATE")

    def test_label_switch_becomes_begin(self):
        assert repair_tags(["B-DATE", "I-LOCATION"]) == ("B-DATE", "B-LOCATION")

    def test_valid_untouched(self):
        tags = ("B-DATE", "I-DATE", "O", "B-LOCATION")
        assert repair_tags(tags) == tags

    def test_idempotent_on_random_corruptions(self):
        rng = random.Random(7)
        labels = list(default_label_inventory())
        vocabulary = ["O"] + [f"{p}-{l}" for p in ("B", "I") for l in labels]
        for _ in range(1000):
            raw = [rng.choice(vocabulary) for _ in range(rng.randint(1, 25))]
            once = repair_tags(raw)
            assert is_valid(once)
            assert repair_tags(once) == once

    def test_decode_after_repair(self):
        text = "aa bb"
        tokens = word_tokenize(text)
        seq = TagSequence(text=text, tokens=tuple(tokens), tags=("O", "I-DATE"))
        entities = decode_entities(seq)
        assert len(entities) == 1
        assert entities[0].category.label == "DATE"
        assert entities[0].token_span == (1, 1)


class TestDecode:
    def test_decoding_rule(self):
        text = "um dois três loc"
        tokens = word_tokenize(text)
        seq = TagSequence(
            text=text, tokens=tuple(tokens),
            tags=("B-DATE", "I-DATE", "O", "B-LOCATION"),
        )
        spans = [(e.category.label, e.token_span) for e in decode_entities(seq)]
        assert spans == [("DATE", (0, 1)), ("LOCATION", (3, 3))]

    def test_all_outside_decodes_empty(self):
        text = "a b c"
        seq = TagSequence(text=text, tokens=tuple(word_tokenize(text)), tags=("O",) * 3)
        assert decode_entities(seq) == []

    def test_confidence_is_mean_score(self):
        text = "a b"
        seq = TagSequence(
            text=text, tokens=tuple(word_tokenize(text)),
            tags=("B-DATE", "I-DATE"), scores=(0.8, 0.6),
        )
        (entity,) = decode_entities(seq)
        assert entity.confidence == pytest.approx(0.7)


def _random_layout(rng: random.Random, n_tokens: int):
    """Non-overlapping entity spans aligned to token boundaries."""
    labels = default_label_inventory()
    text_tokens = [f"tok{i}" for i in range(n_tokens)]
    text = " ".join(text_tokens)
    tokens = word_tokenize(text)
    annotations = []
    i = 0
    while i < n_tokens:
        if rng.random() < 0.35:
            length = min(rng.randint(1, 3), n_tokens - i)
            start = tokens[i][0]
            end = tokens[i + length - 1][1]
            annotations.append(_ann(rng.choice(labels), start, end, text))
            i += length
        else:
            i += 1
    return text, tokens, annotations


class TestRoundTrip:
    def test_thousand_random_layouts(self):
        rng = random.Random(2024)
        for _ in range(1000):
            text, tokens, annotations = _random_layout(rng, rng.randint(1, 30))
            seq = to_bio(text, tokens, annotations)
            decoded = decode_entities(seq)
            got = [(e.category.label, e.char_span) for e in decoded]
            expected = [(a.category.label, (a.start, a.end)) for a in annotations]
            assert sorted(got) == sorted(expected)
