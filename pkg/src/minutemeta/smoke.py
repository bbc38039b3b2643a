"""End-to-end smoke harness on synthetic data with miniature encoders.

Builds a templated corpus, pretrains tiny encoders from scratch (no network
access needed), fine-tunes both stages with deslexicalization-augmented
training data, and measures boundary EM, entity F1, and the token reduction
the first stage buys. Used by the acceptance suite and as a runnable demo of
the whole pipeline at desk scale.
"""
from __future__ import annotations

import logging
import time
from dataclasses import dataclass, field
from pathlib import Path

from minutemeta.boundary import (
    BoundaryHyperparams,
    gold_region,
    train_boundary,
)
from minutemeta.corpus import make_global_split, word_tokenize
from minutemeta.corpus.squad import minute_qa_instances
from minutemeta.deslex import DeslexPolicy, deslexicalize_minute
from minutemeta.evaluation import (
    ResourceMeter,
    entity_prf_corpus,
    squad_em,
    squad_f1,
)
from minutemeta.modeling import build_tiny_encoder, pretrain_mlm
from minutemeta.ner import (
    NerHyperparams,
    region_annotations,
    tag,
    train_ner,
)
from minutemeta.pipeline import PipelineConfig, batch_extract, predict_region
from minutemeta.synthgen import SynthConfig, generate_corpus
from minutemeta.tagging import decode_entities

logger = logging.getLogger(__name__)


@dataclass
class SmokeConfig:
    corpus_seed: int = 7
    split_seed: int = 1
    train_seed: int = 3
    docs_per_municipality: int = 5
    # bodies long enough that the reduced region is under a tenth of the text
    body_sentences: tuple[int, int] = (120, 160)
    deslex_seeds: tuple[int, ...] = (11, 22, 33, 44, 55)
    boundary_epochs: int = 24
    boundary_mlm_epochs: int = 20
    ner_epochs: int = 60
    ner_mlm_epochs: int = 10
    use_crf: bool = True
    hidden_size: int = 96
    layers: int = 2
    heads: int = 4
    carbon_intensity: float = 0.2


@dataclass
class SmokeResult:
    boundary_em: float
    boundary_f1: float
    entity_f1: float
    entity_f1_end_to_end: float
    token_reduction: float
    records: list = field(default_factory=list)
    resources: dict = field(default_factory=dict)
    seconds: dict = field(default_factory=dict)

    def as_dict(self) -> dict:
        return {
            "boundary_em": self.boundary_em,
            "boundary_f1": self.boundary_f1,
            "entity_f1": self.entity_f1,
            "entity_f1_end_to_end": self.entity_f1_end_to_end,
            "token_reduction": self.token_reduction,
            "resources": self.resources,
            "seconds": self.seconds,
        }


def _augmented(minutes, seeds):
    out = list(minutes)
    for seed in seeds:
        out.extend(deslexicalize_minute(m, DeslexPolicy(seed=seed)) for m in minutes)
    return out


def train_smoke_boundary(train_minutes, val_minutes, workdir: Path, config: SmokeConfig):
    """Tiny-encoder boundary model: build, MLM-pretrain, fine-tune."""
    augmented = _augmented(train_minutes, config.deslex_seeds[:4])
    train_instances = []
    for minute in augmented:
        train_instances.extend(minute_qa_instances(minute))
    val_instances = []
    for minute in val_minutes:
        val_instances.extend(minute_qa_instances(minute))

    texts = [m.document.text for m in (*train_minutes, *val_minutes)]
    base = build_tiny_encoder(
        workdir / "boundary-base", texts, vocab_size=1200,
        hidden_size=config.hidden_size, layers=config.layers, heads=config.heads,
        max_positions=260,
    )
    pretrain_mlm(base, texts, epochs=config.boundary_mlm_epochs, max_length=256,
                 seed=config.train_seed)
    hp = BoundaryHyperparams(
        base_model=str(base),
        epochs=config.boundary_epochs,
        learning_rate=3e-4,
        batch_size=8,
        max_length=256,
        stride=128,
        negative_ratio=1.5,
        calibrate_null_threshold=True,
        keep_best=True,
        seed=config.train_seed,
    )
    return train_boundary(train_instances, val_instances, hp, workdir / "boundary")


def train_smoke_ner(train_minutes, val_minutes, workdir: Path, config: SmokeConfig,
                    labels):
    """Tiny-encoder entity model over gold regions, CRF head by default."""
    augmented = _augmented(train_minutes, config.deslex_seeds)
    region_texts = [
        gold_region(m.document, m.segments).text for m in augmented
    ]
    base = build_tiny_encoder(
        workdir / "ner-base", region_texts, vocab_size=900,
        hidden_size=config.hidden_size, layers=config.layers, heads=config.heads,
        max_positions=512,
    )
    pretrain_mlm(base, region_texts, epochs=config.ner_mlm_epochs, max_length=256,
                 seed=config.train_seed)
    hp = NerHyperparams(
        base_model=str(base),
        epochs=config.ner_epochs,
        patience=30,
        learning_rate=5e-4,
        batch_size=4,
        grad_accumulation=1,
        max_length=400,
        window_words=150,
        window_stride_words=30,
        seed=config.train_seed,
    )
    return train_ner(augmented, list(val_minutes), hp, use_crf=config.use_crf,
                     labels=labels, out_dir=workdir / "ner")


def evaluate_boundary(handle, test_minutes) -> tuple[float, float]:
    from minutemeta.boundary.model import predict_segments_batch
    from minutemeta.corpus.squad import prompts_for
    from minutemeta.corpus.types import SegmentType

    em_sum = f1_sum = count = 0
    for minute in test_minutes:
        doc = minute.document
        prompts = prompts_for(doc.language)
        predictions = predict_segments_batch(
            handle,
            [(doc, prompts[SegmentType.OPENING]), (doc, prompts[SegmentType.CLOSING])],
        )
        for seg_type, predicted in zip(
            (SegmentType.OPENING, SegmentType.CLOSING), predictions
        ):
            gold = minute.segment(seg_type)
            gold_text = None
            if gold is not None and not gold.is_null:
                gold_text = doc.text[gold.char_span[0] : gold.char_span[1]]
            pred_text = None
            if not predicted.is_null:
                pred_text = doc.text[predicted.char_span[0] : predicted.char_span[1]]
            em_sum += squad_em(pred_text, gold_text)
            f1_sum += squad_f1(pred_text, gold_text)
            count += 1
    return em_sum / count, f1_sum / count


def evaluate_ner_on_gold_regions(handle, test_minutes) -> float:
    pairs = []
    for minute in test_minutes:
        region = gold_region(minute.document, minute.segments)
        predicted = decode_entities(tag(handle, region))
        pairs.append((predicted, region_annotations(minute, region)))
    return entity_prf_corpus(pairs).micro.f1


def evaluate_end_to_end(qa_handle, ner_handle, test_minutes):
    """Records, entity F1 in document coordinates, and the token reduction."""
    from minutemeta.corpus.types import EntityAnnotation

    meter = ResourceMeter(carbon_intensity=0.2, average_watts=65.0)
    records, errors, report = batch_extract(
        list(test_minutes), qa_handle, ner_handle, PipelineConfig(), meter
    )
    pairs = []
    region_tokens = 0
    doc_tokens = 0
    for minute in test_minutes:
        doc = minute.document
        region = predict_region(doc, qa_handle)
        region_tokens += len(word_tokenize(region.text))
        doc_tokens += len(word_tokenize(doc.text))
        predicted = []
        if not region.is_empty:
            for entity in decode_entities(tag(ner_handle, region)):
                start, end = region.span_to_doc(entity.char_span)
                predicted.append(
                    EntityAnnotation(
                        category=entity.category, start=start, end=end,
                        surface=entity.surface,
                    )
                )
        pairs.append((predicted, list(minute.entities)))
    f1 = entity_prf_corpus(pairs).micro.f1
    reduction = 1.0 - (region_tokens / doc_tokens if doc_tokens else 0.0)
    return records, errors, report, f1, reduction


def run_smoke(workdir: str | Path, config: SmokeConfig | None = None) -> SmokeResult:
    config = config or SmokeConfig()
    workdir = Path(workdir)
    workdir.mkdir(parents=True, exist_ok=True)

    corpus = generate_corpus(
        SynthConfig(
            docs_per_municipality=config.docs_per_municipality,
            seed=config.corpus_seed,
            body_sentences=config.body_sentences,
        )
    )
    split = make_global_split(corpus, seed=config.split_seed)
    train_minutes = [corpus[d] for d in split.train]
    val_minutes = [corpus[d] for d in split.val]
    test_minutes = [corpus[d] for d in split.test]

    timings = {}
    started = time.perf_counter()
    qa_handle = train_smoke_boundary(train_minutes, val_minutes, workdir, config)
    timings["boundary_train"] = time.perf_counter() - started

    started = time.perf_counter()
    ner_handle = train_smoke_ner(
        train_minutes, val_minutes, workdir, config, corpus.label_inventory()
    )
    timings["ner_train"] = time.perf_counter() - started

    started = time.perf_counter()
    boundary_em, boundary_f1 = evaluate_boundary(qa_handle, test_minutes)
    entity_f1 = evaluate_ner_on_gold_regions(ner_handle, test_minutes)
    records, errors, report, e2e_f1, reduction = evaluate_end_to_end(
        qa_handle, ner_handle, test_minutes
    )
    timings["evaluation"] = time.perf_counter() - started

    result = SmokeResult(
        boundary_em=boundary_em,
        boundary_f1=boundary_f1,
        entity_f1=entity_f1,
        entity_f1_end_to_end=e2e_f1,
        token_reduction=reduction,
        records=records,
        resources=report.as_dict() if report else {},
        seconds=timings,
    )
    logger.info("smoke result: %s", result.as_dict())
    return result
