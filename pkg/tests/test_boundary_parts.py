import random

import numpy as np
import pytest

from minutemeta.boundary import (
    bm25_segment,
    chunk_with_stride,
    dense_segment,
    extract_region,
    gold_region,
    mean_gold_segment_sentences,
    window_for_span,
)
from minutemeta.boundary.baselines import HashingEmbedder
from minutemeta.boundary.region import SpanPrediction
from minutemeta.corpus import SegmentType
from minutemeta.errors import ConfigError, OverlapError, SpanError
from minutemeta.synthgen import SynthConfig, generate_corpus


class TestChunking:
    def test_spec_arithmetic(self):
        windows = chunk_with_stride(1000, 512, 128)
        assert [w[0] for w in windows] == [0, 384, 768]
        assert windows[-1] == (768, 1000)

    def test_short_sequence_single_window(self):
        assert chunk_with_stride(100, 512, 128) == [(0, 100)]

    def test_overlap_exactly_stride(self):
        windows = chunk_with_stride(2000, 512, 128)
        for (s1, e1), (s2, _) in zip(windows, windows[1:]):
            assert e1 - s2 == 128

    def test_token_500_in_two_windows(self):
        windows = chunk_with_stride(1000, 512, 128)
        containing = [w for w in windows if w[0] <= 500 < w[1]]
        assert len(containing) == 2

    def test_every_token_covered(self):
        for n in (1, 5, 511, 512, 513, 1000, 1537):
            windows = chunk_with_stride(n, 512, 128)
            covered = set()
            for s, e in windows:
                covered.update(range(s, e))
            assert covered == set(range(n))

    def test_stride_validation(self):
        with pytest.raises(ConfigError):
            chunk_with_stride(100, 128, 128)
        with pytest.raises(ConfigError):
            chunk_with_stride(100, 128, 200)

    def test_random_answer_placements_contained(self):
        # the stride is the containment guarantee: any span no longer than
        # the overlap always fits inside at least one window
        rng = random.Random(13)
        for _ in range(1000):
            n = rng.randint(1, 3000)
            span_start = rng.randint(0, n - 1)
            span_end = min(n, span_start + rng.randint(1, 128))
            windows = chunk_with_stride(n, 512, 128)
            index = window_for_span(windows, (span_start, span_end))
            assert index is not None
            start, end = windows[index]
            assert start <= span_start and span_end <= end


class TestRegion:
    def test_construction_with_separator(self, sample_corpus):
        doc = sample_corpus["alfa-001"].document
        opening = SpanPrediction(SegmentType.OPENING, (0, 100))
        closing = SpanPrediction(SegmentType.CLOSING, (300, 416))
        region = extract_region(doc, opening, closing)
        assert region.text.startswith(doc.text[:100])
        assert region.text.endswith(doc.text[300:416])
        assert len(region.offset_map) == 2

    def test_round_trip_offsets(self, sample_corpus):
        doc = sample_corpus["alfa-001"].document
        region = extract_region(*(
            doc,
            SpanPrediction(SegmentType.OPENING, (0, 120)),
            SpanPrediction(SegmentType.CLOSING, (300, 400)),
        ))
        for region_offset in (0, 50, 119, 122, 200):
            doc_offset = region.to_doc_offset(region_offset)
            assert region.to_region_offset(doc_offset) == region_offset

    def test_both_null_flagged_empty(self, sample_corpus):
        doc = sample_corpus["alfa-001"].document
        region = extract_region(
            doc,
            SpanPrediction(SegmentType.OPENING, None),
            SpanPrediction(SegmentType.CLOSING, None),
        )
        assert region.is_empty
        assert "no_metadata_region" in region.flags

    def test_overlap_truncated_in_lenient_mode(self, sample_corpus):
        doc = sample_corpus["alfa-001"].document
        region = extract_region(
            doc,
            SpanPrediction(SegmentType.OPENING, (0, 200)),
            SpanPrediction(SegmentType.CLOSING, (150, 416)),
        )
        assert region.offset_map[1][2] == 200  # closing truncated to start at 200

    def test_overlap_strict_raises(self, sample_corpus):
        doc = sample_corpus["alfa-001"].document
        with pytest.raises(OverlapError):
            extract_region(
                doc,
                SpanPrediction(SegmentType.OPENING, (0, 200)),
                SpanPrediction(SegmentType.CLOSING, (150, 416)),
                strict=True,
            )

    def test_unmapped_offset_raises(self, sample_corpus):
        doc = sample_corpus["alfa-001"].document
        region = extract_region(
            doc,
            SpanPrediction(SegmentType.OPENING, (0, 100)),
            SpanPrediction(SegmentType.CLOSING, None),
        )
        with pytest.raises(SpanError):
            region.to_doc_offset(150)

    def test_gold_region_matches_segments(self, sample_corpus):
        minute = sample_corpus["alfa-001"]
        region = gold_region(minute.document, minute.segments)
        opening = minute.segment(SegmentType.OPENING)
        assert region.text.startswith(
            minute.document.text[opening.char_span[0] : opening.char_span[1]]
        )


class TestBaselines:
    def test_bm25_picks_matching_sentence(self, sample_corpus):
        doc = sample_corpus["alfa-001"].document
        prediction = bm25_segment(doc, "orçamento próximo ano", window=1)
        start, end = prediction.char_span
        assert "orçamento" in doc.text[start:end]

    def test_bm25_never_null(self, sample_corpus):
        for minute in sample_corpus:
            prediction = bm25_segment(minute.document, "texto qualquer", window=2)
            assert not prediction.is_null

    def test_bm25_tie_break_first_window(self):
        from minutemeta.corpus.io import parse_record

        minute = parse_record({
            "doc_id": "t", "municipality": "M", "language": "pt",
            "text": "Frase igual aqui. Frase igual aqui. Frase igual aqui.",
            "entities": [], "segments": [],
        })
        prediction = bm25_segment(minute.document, "frase igual", window=1)
        assert prediction.char_span == minute.document.sentences[0]

    def test_dense_identical_sentence_wins(self, sample_corpus):
        doc = sample_corpus["alfa-001"].document
        target = doc.sentence_text(3)
        prediction = dense_segment(doc, target, window=1)
        start, end = prediction.char_span
        assert doc.text[start:end] == target

    def test_dense_orthogonal_tie_break(self):
        from minutemeta.corpus.io import parse_record

        minute = parse_record({
            "doc_id": "t", "municipality": "M", "language": "pt",
            "text": "Alpha beta. Gama delta. Epsilon zeta.",
            "entities": [], "segments": [],
        })
        prediction = dense_segment(minute.document, "omega psi", window=1)
        assert prediction.char_span == minute.document.sentences[0]

    def test_hashing_embedder_deterministic(self):
        embedder = HashingEmbedder()
        a = embedder("uma frase de teste")
        b = embedder("uma frase de teste")
        assert np.array_equal(a, b)

    def test_baseline_determinism(self, sample_corpus):
        doc = sample_corpus["alfa-001"].document
        first = bm25_segment(doc, "sessão ordinária", window=2)
        second = bm25_segment(doc, "sessão ordinária", window=2)
        assert first == second

    def test_mean_gold_window(self):
        corpus = generate_corpus(SynthConfig(docs_per_municipality=2, seed=5))
        window = mean_gold_segment_sentences(corpus)
        assert 1 <= window <= 10


class TestSynthCorpus:
    def test_shape_and_annotations(self):
        corpus = generate_corpus(SynthConfig(docs_per_municipality=5, seed=1))
        assert len(corpus) == 30
        assert len(corpus.municipalities) == 6
        for minute in corpus:
            for ann in minute.entities:
                assert minute.document.text[ann.start : ann.end] == ann.surface

    def test_deterministic(self):
        first = generate_corpus(SynthConfig(seed=9))
        second = generate_corpus(SynthConfig(seed=9))
        assert [m.document.text for m in first] == [m.document.text for m in second]

    def test_segments_cover_entities(self):
        corpus = generate_corpus(SynthConfig(seed=3))
        for minute in corpus:
            region = gold_region(minute.document, minute.segments)
            from minutemeta.ner import region_annotations

            mapped = region_annotations(minute, region)
            assert len(mapped) == len(minute.entities)

    def test_body_dominates(self):
        corpus = generate_corpus(SynthConfig(seed=3))
        for minute in corpus:
            region = gold_region(minute.document, minute.segments)
            assert len(region.text) <= 0.4 * len(minute.document.text)
