"""Extractive-QA boundary model: fine-tuning and span prediction.

The model answers one boundary question per segment type against the full
document text; windows longer than the encoder limit are handled with the
standard stride/overflow mechanism and predictions are aggregated across
windows. A null answer is emitted when the no-answer score beats the best
span score by more than the configured threshold.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import torch

from minutemeta.corpus.squad import QAInstance
from minutemeta.corpus.types import MinuteDocument
from minutemeta.boundary.region import SpanPrediction
from minutemeta.errors import BackendError, DataError
from minutemeta.evaluation.metrics import squad_em, squad_f1
from minutemeta.modeling import (
    batched,
    fingerprint,
    linear_schedule,
    load_meta,
    pick_device,
    save_checkpoint,
    seed_everything,
)

logger = logging.getLogger(__name__)


@dataclass
class BoundaryHyperparams:
    base_model: str = "deepset/xlm-roberta-large-squad2"
    epochs: int = 3
    learning_rate: float = 3e-5
    batch_size: int = 8
    weight_decay: float = 0.01
    max_length: int = 512
    stride: int = 128
    null_threshold: float = 0.0
    n_best: int = 20
    # max no-answer windows kept per answer-bearing window of answerable
    # instances (None keeps all); unanswerable instances keep every window
    negative_ratio: float | None = None
    # pick the null threshold that maximizes validation EM after training
    calibrate_null_threshold: bool = False
    # evaluate every epoch and keep the best validation checkpoint
    keep_best: bool = False
    seed: int = 42
    device: str | None = None

    def __post_init__(self):
        if self.epochs <= 0 or self.batch_size <= 0 or self.learning_rate <= 0:
            raise DataError("hyperparameters must be positive")
        if self.stride >= self.max_length:
            raise DataError("stride must be below max_length")

    def as_dict(self) -> dict:
        return {
            "base_model": self.base_model,
            "epochs": self.epochs,
            "learning_rate": self.learning_rate,
            "batch_size": self.batch_size,
            "weight_decay": self.weight_decay,
            "max_length": self.max_length,
            "stride": self.stride,
            "null_threshold": self.null_threshold,
            "negative_ratio": self.negative_ratio,
            "calibrate_null_threshold": self.calibrate_null_threshold,
            "seed": self.seed,
        }


@dataclass
class BoundaryModelHandle:
    """Loadable reference to a fine-tuned boundary checkpoint."""

    checkpoint_dir: Path
    meta: dict = field(default_factory=dict)
    _model: object = field(default=None, repr=False, compare=False)
    _tokenizer: object = field(default=None, repr=False, compare=False)
    device: torch.device | None = None

    @classmethod
    def load(cls, checkpoint_dir: str | Path, device: str | None = None) -> "BoundaryModelHandle":
        checkpoint_dir = Path(checkpoint_dir)
        meta = load_meta(checkpoint_dir)
        handle = cls(checkpoint_dir=checkpoint_dir, meta=meta,
                     device=pick_device(device))
        handle._ensure_loaded()
        return handle

    def _ensure_loaded(self):
        if self._model is not None:
            return
        from transformers import AutoModelForQuestionAnswering, AutoTokenizer

        model_dir = self.checkpoint_dir / "model"
        try:
            self._tokenizer = AutoTokenizer.from_pretrained(model_dir)
            self._model = AutoModelForQuestionAnswering.from_pretrained(model_dir)
        except Exception as exc:  # transformers raises a zoo of types here
            raise BackendError(f"cannot load boundary checkpoint {model_dir}: {exc}")
        self.device = self.device or pick_device()
        self._model.to(self.device)
        self._model.eval()

    @property
    def tokenizer(self):
        self._ensure_loaded()
        return self._tokenizer

    @property
    def model(self):
        self._ensure_loaded()
        return self._model


def _encode_instances(tokenizer, instances, hp, with_labels: bool):
    """Tokenize with stride into overlapping windows, mapping answers in."""
    encodings = tokenizer(
        [i.question for i in instances],
        [i.context for i in instances],
        truncation="only_second",
        max_length=hp.max_length,
        stride=hp.stride,
        return_overflowing_tokens=True,
        return_offsets_mapping=True,
        padding="max_length",
    )
    sample_map = encodings["overflow_to_sample_mapping"]
    features = []
    for window_index, offsets in enumerate(encodings["offset_mapping"]):
        instance = instances[sample_map[window_index]]
        input_ids = encodings["input_ids"][window_index]
        sequence_ids = encodings.sequence_ids(window_index)
        cls_index = 0
        feature = {
            "input_ids": input_ids,
            "attention_mask": encodings["attention_mask"][window_index],
            "offsets": offsets,
            "sequence_ids": sequence_ids,
            "instance": instance,
        }
        if with_labels:
            start_pos, end_pos = cls_index, cls_index
            if not instance.is_impossible:
                answer_start = instance.answer_start
                answer_end = answer_start + len(instance.answer_text)
                context_token_ids = [
                    t for t in range(len(input_ids)) if sequence_ids[t] == 1
                ]
                if context_token_ids:
                    first, last = context_token_ids[0], context_token_ids[-1]
                    if (
                        offsets[first][0] <= answer_start
                        and offsets[last][1] >= answer_end
                    ):
                        token_start = first
                        while token_start <= last and offsets[token_start][1] <= answer_start:
                            token_start += 1
                        token_end = last
                        while token_end >= first and offsets[token_end][0] >= answer_end:
                            token_end -= 1
                        if token_start <= token_end:
                            start_pos, end_pos = token_start, token_end
            feature["start_position"] = start_pos
            feature["end_position"] = end_pos
        features.append(feature)
    return features


def _subsample_negatives(features, hp):
    """Rebalance answerable instances' windows: keep all answer-bearing ones,
    cap the no-answer ones at ``negative_ratio`` per positive. Windows of
    unanswerable instances always survive (they carry the null signal)."""
    if hp.negative_ratio is None:
        return features
    rng = np.random.default_rng(hp.seed)
    positives = [
        f for f in features
        if f["start_position"] != 0 or f["instance"].is_impossible
    ]
    negatives = [
        f for f in features
        if f["start_position"] == 0 and not f["instance"].is_impossible
    ]
    keep = min(len(negatives), int(np.ceil(hp.negative_ratio * max(1, len(positives)))))
    if keep < len(negatives):
        chosen = rng.choice(len(negatives), size=keep, replace=False)
        negatives = [negatives[i] for i in chosen]
    kept = positives + negatives
    logger.info(
        "window subsampling: %d positive + %d negative of %d total",
        len(positives), len(negatives), len(features),
    )
    return kept


def _metrics_at_threshold(instances, predictions, threshold: float) -> dict:
    em_total, f1_total = 0.0, 0.0
    for instance in instances:
        span, span_score, null_score = predictions[instance.qa_id]
        is_null = span is None or (null_score - span_score) > threshold
        pred_text = None if is_null else instance.context[span[0] : span[1]]
        em_total += squad_em(pred_text, instance.answer_text)
        f1_total += squad_f1(pred_text, instance.answer_text)
    n = max(1, len(instances))
    return {"em": em_total / n, "token_f1": f1_total / n}


def _evaluate_qa(handle_model, tokenizer, instances, hp, device,
                 calibrate: bool = False) -> dict:
    predictions = _predict_instances(handle_model, tokenizer, instances, hp, device)
    metrics = _metrics_at_threshold(instances, predictions, hp.null_threshold)
    metrics["null_threshold"] = hp.null_threshold
    if calibrate:
        # candidate thresholds: every decision margin seen on validation
        margins = {
            null_score - span_score
            for _, span_score, null_score in predictions.values()
        }
        best = metrics
        for threshold in sorted({0.0, *margins}):
            trial = _metrics_at_threshold(instances, predictions, threshold)
            if (trial["em"], trial["token_f1"]) > (best["em"], best["token_f1"]):
                best = trial
                best["null_threshold"] = threshold
        metrics = best
    return metrics


def train_boundary(
    train_instances: list[QAInstance],
    val_instances: list[QAInstance],
    hyperparams: BoundaryHyperparams | None = None,
    out_dir: str | Path = "boundary-checkpoint",
) -> BoundaryModelHandle:
    """Fine-tune the extractive-QA encoder on boundary instances."""
    from transformers import AutoModelForQuestionAnswering, AutoTokenizer

    hp = hyperparams or BoundaryHyperparams()
    if not train_instances:
        raise DataError("empty boundary training set")
    seed_everything(hp.seed)
    device = pick_device(hp.device)

    try:
        tokenizer = AutoTokenizer.from_pretrained(hp.base_model)
        model = AutoModelForQuestionAnswering.from_pretrained(hp.base_model)
    except Exception as exc:
        raise BackendError(f"cannot load base model {hp.base_model!r}: {exc}")
    model.to(device)

    features = _encode_instances(tokenizer, train_instances, hp, with_labels=True)
    features = _subsample_negatives(features, hp)
    optimizer = torch.optim.AdamW(
        model.parameters(), lr=hp.learning_rate, weight_decay=hp.weight_decay
    )
    steps_per_epoch = (len(features) + hp.batch_size - 1) // hp.batch_size
    scheduler = linear_schedule(optimizer, steps_per_epoch * hp.epochs)

    rng = np.random.default_rng(hp.seed)
    best_key = None
    best_state = None
    for epoch in range(hp.epochs):
        model.train()
        order = rng.permutation(len(features))
        epoch_loss = 0.0
        for batch_ids in batched(order, hp.batch_size):
            batch = [features[i] for i in batch_ids]
            inputs = {
                "input_ids": torch.tensor([f["input_ids"] for f in batch], device=device),
                "attention_mask": torch.tensor(
                    [f["attention_mask"] for f in batch], device=device
                ),
                "start_positions": torch.tensor(
                    [f["start_position"] for f in batch], device=device
                ),
                "end_positions": torch.tensor(
                    [f["end_position"] for f in batch], device=device
                ),
            }
            outputs = model(**inputs)
            loss = outputs.loss
            loss.backward()
            optimizer.step()
            scheduler.step()
            optimizer.zero_grad()
            epoch_loss += float(loss.detach())
        logger.info("boundary epoch %d: loss %.4f", epoch + 1, epoch_loss / steps_per_epoch)
        if hp.keep_best and val_instances:
            model.eval()
            epoch_metrics = _evaluate_qa(
                model, tokenizer, val_instances, hp, device,
                calibrate=hp.calibrate_null_threshold,
            )
            key = (epoch_metrics["em"], epoch_metrics["token_f1"])
            logger.info("boundary epoch %d val: %s", epoch + 1, epoch_metrics)
            if best_key is None or key > best_key:
                best_key = key
                best_state = {
                    k: v.detach().cpu().clone() for k, v in model.state_dict().items()
                }

    if best_state is not None:
        model.load_state_dict(best_state)
    model.eval()
    val_metrics = (
        _evaluate_qa(model, tokenizer, val_instances, hp, device,
                     calibrate=hp.calibrate_null_threshold)
        if val_instances
        else {}
    )
    logger.info("boundary validation: %s", val_metrics)
    effective_hp = hp.as_dict()
    if hp.calibrate_null_threshold and "null_threshold" in val_metrics:
        effective_hp["null_threshold"] = val_metrics["null_threshold"]

    meta = {
        "stage": "boundary",
        "hyperparams": effective_hp,
        "data_fingerprint": fingerprint(i.qa_id for i in train_instances),
        "train_instances": len(train_instances),
        "val_metrics": val_metrics,
    }
    checkpoint = save_checkpoint(Path(out_dir), model, tokenizer, meta)
    return BoundaryModelHandle(
        checkpoint_dir=checkpoint, meta=meta, _model=model, _tokenizer=tokenizer,
        device=device,
    )


def _predict_instances(model, tokenizer, instances, hp, device) -> dict:
    """qa_id -> (char span or None, span_score, null_score), batched over windows."""
    results: dict = {}
    if not instances:
        return results
    features = _encode_instances(tokenizer, instances, hp, with_labels=False)
    start_logits: list[np.ndarray] = []
    end_logits: list[np.ndarray] = []
    with torch.no_grad():
        for batch_ids in batched(list(range(len(features))), max(1, hp.batch_size)):
            batch = [features[i] for i in batch_ids]
            inputs = {
                "input_ids": torch.tensor([f["input_ids"] for f in batch], device=device),
                "attention_mask": torch.tensor(
                    [f["attention_mask"] for f in batch], device=device
                ),
            }
            outputs = model(**inputs)
            start_logits.extend(outputs.start_logits.cpu().numpy())
            end_logits.extend(outputs.end_logits.cpu().numpy())

    by_instance: dict = {}
    for feature, starts, ends in zip(features, start_logits, end_logits):
        by_instance.setdefault(feature["instance"].qa_id, []).append(
            (feature, starts, ends)
        )

    for qa_id, windows in by_instance.items():
        best_span = None
        best_score = -np.inf
        null_score = np.inf
        for feature, starts, ends in windows:
            sequence_ids = feature["sequence_ids"]
            offsets = feature["offsets"]
            attention = feature["attention_mask"]
            null_score = min(null_score, float(starts[0] + ends[0]))
            context_ids = [
                t
                for t in range(len(sequence_ids))
                if sequence_ids[t] == 1 and attention[t] == 1
            ]
            if not context_ids:
                continue
            start_candidates = sorted(
                context_ids, key=lambda t: starts[t], reverse=True
            )[: hp.n_best]
            end_candidates = sorted(context_ids, key=lambda t: ends[t], reverse=True)[
                : hp.n_best
            ]
            for ts in start_candidates:
                for te in end_candidates:
                    if te < ts:
                        continue
                    score = float(starts[ts] + ends[te])
                    if score > best_score:
                        best_score = score
                        best_span = (offsets[ts][0], offsets[te][1])
        results[qa_id] = (best_span, float(best_score), float(null_score))
    return results


def predict_segment(
    handle: BoundaryModelHandle,
    doc: MinuteDocument,
    prompt,
    null_threshold: float | None = None,
) -> SpanPrediction:
    """Predict one segment for one document, aggregated over all windows.

    The prediction is null iff ``null_score - best_span_score > threshold``;
    non-null spans are snapped outward to sentence boundaries.
    """
    predictions = predict_segments_batch(handle, [(doc, prompt)], null_threshold)
    return predictions[0]


def predict_segments_batch(
    handle: BoundaryModelHandle,
    doc_prompts: list,
    null_threshold: float | None = None,
) -> list[SpanPrediction]:
    """Batch variant of predict_segment over (doc, prompt) pairs."""
    handle._ensure_loaded()
    hp_meta = handle.meta.get("hyperparams", {})
    hp = BoundaryHyperparams(
        base_model=str(handle.checkpoint_dir),
        max_length=hp_meta.get("max_length", 512),
        stride=hp_meta.get("stride", 128),
        batch_size=hp_meta.get("batch_size", 8),
        null_threshold=hp_meta.get("null_threshold", 0.0),
    )
    threshold = (
        null_threshold if null_threshold is not None else hp.null_threshold
    )
    instances = [
        QAInstance(
            qa_id=f"{doc.doc_id}:{prompt.segment_type.value}",
            doc_id=doc.doc_id,
            question=prompt.question_text,
            context=doc.text,
            answer_start=None,
            answer_text=None,
        )
        for doc, prompt in doc_prompts
    ]
    raw = _predict_instances(
        handle.model, handle.tokenizer, instances, hp, handle.device
    )
    predictions = []
    for (doc, prompt), instance in zip(doc_prompts, instances):
        span, span_score, null_score = raw[instance.qa_id]
        if span is None or (null_score - span_score) > threshold:
            predictions.append(
                SpanPrediction(prompt.segment_type, None, span_score, null_score)
            )
            continue
        snapped = doc.snap_span(span[0], span[1])
        predictions.append(
            SpanPrediction(prompt.segment_type, snapped, span_score, null_score)
        )
    return predictions
