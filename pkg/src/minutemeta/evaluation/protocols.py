"""The three evaluation protocols: global split, leave-one-out, incremental.

Each runner orchestrates splits, training, prediction and scoring. The
trainable stages come in through a ``StageStack`` so the orchestration is
independently testable (and so a fold can swap models without touching the
protocol logic). All runs are reproducible from (corpus, recipe, seeds).
"""
from __future__ import annotations

import logging
import time
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Callable

from minutemeta.corpus.splits import (
    make_global_split,
    make_incremental_series,
    make_leave_one_out,
)
from minutemeta.corpus.squad import minute_qa_instances, prompts_for
from minutemeta.corpus.types import Corpus, SegmentType
from minutemeta.evaluation.metrics import entity_prf_corpus, squad_em, squad_f1
from minutemeta.evaluation.report import EvalReport
from minutemeta.evaluation.taxonomy import error_taxonomy_corpus

logger = logging.getLogger(__name__)


def _default_train_boundary(train_minutes, val_minutes, recipe, out_dir):
    from minutemeta.boundary.model import train_boundary

    def instances(minutes):
        out = []
        for minute in minutes:
            out.extend(minute_qa_instances(minute, recipe.prompt_overrides))
        return out

    return train_boundary(
        instances(train_minutes), instances(val_minutes),
        recipe.boundary_hp, out_dir,
    )


def _default_train_ner(train_minutes, val_minutes, recipe, out_dir, base_model=None):
    from minutemeta.ner.model import train_ner

    hp = recipe.ner_hp
    if base_model is not None and hp is not None:
        hp = replace(hp, base_model=str(base_model))
    return train_ner(
        train_minutes, val_minutes, hp,
        use_crf=recipe.use_crf,
        deslex_policy=recipe.deslex_policy,
        labels=recipe.labels,
        out_dir=out_dir,
    )


def _default_predict_segments(qa_handle, doc, prompt_overrides, null_threshold):
    from minutemeta.boundary.model import predict_segments_batch

    prompts = prompts_for(doc.language, prompt_overrides)
    opening, closing = predict_segments_batch(
        qa_handle,
        [(doc, prompts[SegmentType.OPENING]), (doc, prompts[SegmentType.CLOSING])],
        null_threshold,
    )
    return {SegmentType.OPENING: opening, SegmentType.CLOSING: closing}


def _default_extract_entities(ner_handle, doc, segment_predictions):
    from minutemeta.boundary.region import extract_region
    from minutemeta.corpus.types import EntityAnnotation
    from minutemeta.ner.model import tag
    from minutemeta.tagging import decode_entities

    region = extract_region(
        doc,
        segment_predictions[SegmentType.OPENING],
        segment_predictions[SegmentType.CLOSING],
    )
    if region.is_empty:
        return []
    sequence = tag(ner_handle, region)
    out = []
    for entity in decode_entities(sequence):
        start, end = region.span_to_doc(entity.char_span)
        out.append(
            EntityAnnotation(
                category=entity.category, start=start, end=end, surface=entity.surface
            )
        )
    return out


@dataclass
class StageStack:
    """The four operations a protocol needs from the pipeline stages."""

    train_boundary: Callable = _default_train_boundary
    train_ner: Callable = _default_train_ner
    predict_segments: Callable = _default_predict_segments
    extract_entities: Callable = _default_extract_entities


@dataclass
class ProtocolRecipe:
    """Everything a protocol run needs besides the corpus itself."""

    boundary_hp: object = None
    ner_hp: object = None
    use_crf: bool = False
    deslex_policy: object = None
    labels: tuple | None = None
    prompt_overrides: dict | None = None
    null_threshold: float | None = None
    split_seed: int = 13
    workdir: Path = Path("runs")
    model_name: str = "pipeline"
    k_max: int = 5
    extra: dict = field(default_factory=dict)


def evaluate_fold(
    test_minutes,
    qa_handle,
    ner_handle,
    recipe: ProtocolRecipe,
    stack: StageStack,
) -> dict:
    """Stage-1 QA metrics plus end-to-end entity scores on one test set."""
    em_sum, f1_sum, qa_count = 0.0, 0.0, 0
    pairs = []
    for minute in test_minutes:
        doc = minute.document
        predictions = stack.predict_segments(
            qa_handle, doc, recipe.prompt_overrides, recipe.null_threshold
        )
        for seg_type in (SegmentType.OPENING, SegmentType.CLOSING):
            gold_seg = minute.segment(seg_type)
            gold_text = None
            if gold_seg is not None and not gold_seg.is_null:
                gold_text = doc.text[gold_seg.char_span[0] : gold_seg.char_span[1]]
            predicted = predictions[seg_type]
            pred_text = None
            if not predicted.is_null:
                pred_text = doc.text[predicted.char_span[0] : predicted.char_span[1]]
            em_sum += squad_em(pred_text, gold_text)
            f1_sum += squad_f1(pred_text, gold_text)
            qa_count += 1
        predicted_entities = stack.extract_entities(ner_handle, doc, predictions)
        pairs.append((predicted_entities, list(minute.entities)))

    scores = entity_prf_corpus(pairs)
    taxonomy = error_taxonomy_corpus(pairs)
    return {
        "qa": {
            "em": em_sum / qa_count if qa_count else 0.0,
            "token_f1": f1_sum / qa_count if qa_count else 0.0,
        },
        "scores": scores,
        "taxonomy": taxonomy,
        "documents": len(pairs),
    }


def run_global_eval(
    corpus: Corpus,
    recipe: ProtocolRecipe,
    stack: StageStack | None = None,
) -> EvalReport:
    stack = stack or StageStack()
    split = make_global_split(corpus, seed=recipe.split_seed)
    train = [corpus[d] for d in split.train]
    val = [corpus[d] for d in split.val]
    test = [corpus[d] for d in split.test]
    workdir = Path(recipe.workdir) / "global"

    started = time.perf_counter()
    qa_handle = stack.train_boundary(train, val, recipe, workdir / "boundary")
    ner_handle = stack.train_ner(train, val, recipe, workdir / "ner")
    training_seconds = time.perf_counter() - started

    fold = evaluate_fold(test, qa_handle, ner_handle, recipe, stack)
    return EvalReport(
        protocol="global",
        model=recipe.model_name,
        micro=fold["scores"].micro.as_dict(),
        per_category=fold["scores"].as_dict()["per_category"],
        qa_metrics=fold["qa"],
        taxonomy=fold["taxonomy"].as_dict(),
        extra={
            "split": {
                "train": len(train), "val": len(val), "test": len(test),
                "seed": recipe.split_seed,
            },
            "training_seconds": training_seconds,
        },
    )


def run_leave_one_out(
    corpus: Corpus,
    recipe: ProtocolRecipe,
    stack: StageStack | None = None,
) -> tuple[list[EvalReport], EvalReport]:
    """One report per held-out municipality plus the pooled aggregate."""
    stack = stack or StageStack()
    reports = []
    pooled_scores = None
    pooled_taxonomy = None
    em_sum, f1_sum, qa_count = 0.0, 0.0, 0

    for split in make_leave_one_out(corpus, seed=recipe.split_seed):
        municipality = split.name.removeprefix("loo-")
        train = [corpus[d] for d in split.train]
        val = [corpus[d] for d in split.val]
        test = [corpus[d] for d in split.test]
        workdir = Path(recipe.workdir) / split.name
        qa_handle = stack.train_boundary(train, val, recipe, workdir / "boundary")
        ner_handle = stack.train_ner(train, val, recipe, workdir / "ner")
        fold = evaluate_fold(test, qa_handle, ner_handle, recipe, stack)
        reports.append(
            EvalReport(
                protocol=f"leave-one-out/{municipality}",
                model=recipe.model_name,
                micro=fold["scores"].micro.as_dict(),
                per_category=fold["scores"].as_dict()["per_category"],
                qa_metrics=fold["qa"],
                taxonomy=fold["taxonomy"].as_dict(),
                extra={"held_out": municipality, "documents": fold["documents"]},
            )
        )
        if pooled_scores is None:
            pooled_scores = fold["scores"]
            pooled_taxonomy = fold["taxonomy"]
        else:
            pooled_scores += fold["scores"]
            pooled_taxonomy += fold["taxonomy"]
        em_sum += fold["qa"]["em"] * fold["documents"]
        f1_sum += fold["qa"]["token_f1"] * fold["documents"]
        qa_count += fold["documents"]

    aggregate = EvalReport(
        protocol="leave-one-out/aggregate",
        model=recipe.model_name,
        micro=pooled_scores.micro.as_dict(),
        per_category=pooled_scores.as_dict()["per_category"],
        qa_metrics={
            "em": em_sum / qa_count if qa_count else 0.0,
            "token_f1": f1_sum / qa_count if qa_count else 0.0,
        },
        taxonomy=pooled_taxonomy.as_dict(),
        extra={"folds": len(reports)},
    )
    return reports, aggregate


def run_incremental(
    corpus: Corpus,
    target_municipality: str,
    recipe: ProtocolRecipe,
    stack: StageStack | None = None,
) -> EvalReport:
    """F1 curve for k = 0..k_max extra target-municipality training minutes.

    The k = 0 point is the leave-one-out fold; each k > 0 fine-tunes the
    entity model from that fold's checkpoint with k extra minutes. The test
    set is fixed across the whole curve.
    """
    stack = stack or StageStack()
    loo_splits = {
        s.name.removeprefix("loo-"): s
        for s in make_leave_one_out(corpus, seed=recipe.split_seed)
    }
    if target_municipality not in loo_splits:
        from minutemeta.errors import ConfigError

        raise ConfigError(f"unknown municipality {target_municipality!r}")
    base_split = loo_splits[target_municipality]
    series = make_incremental_series(
        corpus, target_municipality, k_max=recipe.k_max, seed=recipe.split_seed
    )
    test_ids = series[0][2]
    test = [corpus[d] for d in test_ids]
    train = [corpus[d] for d in base_split.train]
    val = [corpus[d] for d in base_split.val]

    workdir = Path(recipe.workdir) / f"incremental-{target_municipality}"
    qa_handle = stack.train_boundary(train, val, recipe, workdir / "boundary")
    base_ner = stack.train_ner(train, val, recipe, workdir / "ner-k0")

    curve = []
    fold = evaluate_fold(test, qa_handle, base_ner, recipe, stack)
    curve.append({"k": 0, "f1": fold["scores"].micro.f1, "qa_em": fold["qa"]["em"]})
    base_checkpoint = getattr(base_ner, "checkpoint_dir", None)
    for k, extra_ids, _ in series[1:]:
        extra = [corpus[d] for d in extra_ids]
        ner_handle = stack.train_ner(
            train + extra, val, recipe, workdir / f"ner-k{k}",
            base_model=(Path(base_checkpoint) / "model" if base_checkpoint else None),
        )
        fold = evaluate_fold(test, qa_handle, ner_handle, recipe, stack)
        curve.append({"k": k, "f1": fold["scores"].micro.f1, "qa_em": fold["qa"]["em"]})

    return EvalReport(
        protocol=f"incremental/{target_municipality}",
        model=recipe.model_name,
        micro=fold["scores"].micro.as_dict(),
        per_category=fold["scores"].as_dict()["per_category"],
        qa_metrics=fold["qa"],
        taxonomy=fold["taxonomy"].as_dict(),
        extra={
            "curve": curve,
            "test_documents": len(test),
            "k_max": recipe.k_max,
        },
    )
