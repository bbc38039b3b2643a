"""Stage 1: locating the metadata-bearing opening/closing segments."""

from minutemeta.boundary.baselines import (
    Bm25Index,
    HashingEmbedder,
    bm25_segment,
    dense_segment,
    mean_gold_segment_sentences,
)
from minutemeta.boundary.chunking import chunk_with_stride, window_for_span
from minutemeta.boundary.model import (
    BoundaryHyperparams,
    BoundaryModelHandle,
    predict_segment,
    predict_segments_batch,
    train_boundary,
)
from minutemeta.boundary.region import (
    ReducedRegion,
    SpanPrediction,
    extract_region,
    gold_region,
    write_segment_predictions,
)
from minutemeta.corpus.squad import BoundaryPrompt, prompts_for

__all__ = [
    "Bm25Index",
    "BoundaryHyperparams",
    "BoundaryModelHandle",
    "BoundaryPrompt",
    "HashingEmbedder",
    "ReducedRegion",
    "SpanPrediction",
    "bm25_segment",
    "chunk_with_stride",
    "dense_segment",
    "extract_region",
    "gold_region",
    "mean_gold_segment_sentences",
    "predict_segment",
    "predict_segments_batch",
    "prompts_for",
    "train_boundary",
    "window_for_span",
    "write_segment_predictions",
]
