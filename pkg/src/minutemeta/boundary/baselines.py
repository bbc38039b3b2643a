"""Unsupervised segment-retrieval baselines: Okapi BM25 and dense similarity.

Both rank contiguous sentence windows against the boundary question and
return the best window as the predicted segment. They never predict null.
"""
from __future__ import annotations

import math
import re
from collections import Counter
from dataclasses import dataclass
from typing import Callable

import numpy as np

from minutemeta.boundary.region import SpanPrediction
from minutemeta.corpus.types import MinuteDocument, SegmentType

_TOKEN = re.compile(r"\w+", re.UNICODE)

BM25_K1 = 1.5
BM25_B = 0.75


def _tokens(text: str) -> list[str]:
    return _TOKEN.findall(text.lower())


@dataclass
class Bm25Index:
    """Okapi BM25 over the sentences of one document."""

    sentences: list[str]
    k1: float = BM25_K1
    b: float = BM25_B

    def __post_init__(self):
        self._docs = [_tokens(s) for s in self.sentences]
        self._lengths = [len(d) for d in self._docs]
        self._avgdl = sum(self._lengths) / len(self._docs) if self._docs else 0.0
        self._tf = [Counter(d) for d in self._docs]
        df: Counter = Counter()
        for doc in self._docs:
            df.update(set(doc))
        n = len(self._docs)
        self._idf = {
            term: math.log((n - count + 0.5) / (count + 0.5) + 1.0)
            for term, count in df.items()
        }

    def score(self, query_tokens: list[str], index: int) -> float:
        tf = self._tf[index]
        length = self._lengths[index]
        if length == 0 or self._avgdl == 0:
            return 0.0
        score = 0.0
        for term in query_tokens:
            if term not in tf:
                continue
            idf = self._idf.get(term, 0.0)
            freq = tf[term]
            score += idf * (freq * (self.k1 + 1)) / (
                freq + self.k1 * (1 - self.b + self.b * length / self._avgdl)
            )
        return score

    def scores(self, query: str) -> list[float]:
        query_tokens = _tokens(query)
        return [self.score(query_tokens, i) for i in range(len(self._docs))]


def _best_window(
    per_sentence_scores: list[float], window: int
) -> tuple[int, float]:
    """(start index, summed score) of the best contiguous sentence window.

    Ties go to the earlier window.
    """
    n = len(per_sentence_scores)
    window = max(1, min(window, n))
    running = sum(per_sentence_scores[:window])
    best_start, best_score = 0, running
    for start in range(1, n - window + 1):
        running += per_sentence_scores[start + window - 1] - per_sentence_scores[start - 1]
        if running > best_score:
            best_start, best_score = start, running
    return best_start, best_score


def _window_span(doc: MinuteDocument, start_sentence: int, window: int) -> tuple[int, int]:
    last = min(start_sentence + window, len(doc.sentences)) - 1
    return (doc.sentences[start_sentence][0], doc.sentences[last][1])


def bm25_segment(
    doc: MinuteDocument,
    query: str,
    window: int = 3,
    segment_type: SegmentType = SegmentType.OPENING,
    k1: float = BM25_K1,
    b: float = BM25_B,
) -> SpanPrediction:
    """Best sentence window by summed Okapi BM25 score. Never null."""
    index = Bm25Index([doc.sentence_text(i) for i in range(len(doc.sentences))], k1, b)
    start, score = _best_window(index.scores(query), window)
    return SpanPrediction(
        segment_type=segment_type,
        char_span=_window_span(doc, start, window),
        span_score=score,
        null_score=0.0,
    )


class HashingEmbedder:
    """Deterministic bag-of-hashed-terms embedding; no model download needed.

    Serves as the hermetic default embedder for the dense baseline; any
    callable mapping a string to a vector can be substituted (for instance a
    sentence-transformers model's ``encode``).
    """

    def __init__(self, dimensions: int = 256):
        self.dimensions = dimensions

    def __call__(self, text: str) -> np.ndarray:
        vector = np.zeros(self.dimensions, dtype=np.float64)
        for token in _tokens(text):
            bucket = hash_token(token) % self.dimensions
            vector[bucket] += 1.0
        norm = np.linalg.norm(vector)
        return vector / norm if norm > 0 else vector


def hash_token(token: str) -> int:
    """Stable 64-bit FNV-1a hash (process-independent, unlike ``hash``)."""
    value = 0xCBF29CE484222325
    for byte in token.encode("utf-8"):
        value ^= byte
        value = (value * 0x100000001B3) % (1 << 64)
    return value


def dense_segment(
    doc: MinuteDocument,
    query: str,
    window: int = 3,
    embedder: Callable[[str], np.ndarray] | None = None,
    segment_type: SegmentType = SegmentType.OPENING,
) -> SpanPrediction:
    """Best sentence window by cosine similarity of embeddings. Never null."""
    embedder = embedder or HashingEmbedder()
    query_vector = np.asarray(embedder(query), dtype=np.float64)
    query_norm = np.linalg.norm(query_vector)
    similarities = []
    for i in range(len(doc.sentences)):
        vector = np.asarray(embedder(doc.sentence_text(i)), dtype=np.float64)
        denominator = query_norm * np.linalg.norm(vector)
        similarities.append(
            float(query_vector @ vector / denominator) if denominator > 0 else 0.0
        )
    start, score = _best_window(similarities, window)
    return SpanPrediction(
        segment_type=segment_type,
        char_span=_window_span(doc, start, window),
        span_score=score,
        null_score=0.0,
    )


def mean_gold_segment_sentences(corpus, segment_type: SegmentType | None = None) -> int:
    """Mean gold segment length in sentences (the default baseline window)."""
    lengths = []
    for minute in corpus:
        for seg in minute.segments:
            if seg.is_null:
                continue
            if segment_type is not None and seg.segment_type != segment_type:
                continue
            doc = minute.document
            count = sum(
                1 for s, e in doc.sentences if s < seg.char_span[1] and e > seg.char_span[0]
            )
            lengths.append(count)
    if not lengths:
        return 3
    return max(1, round(sum(lengths) / len(lengths)))
