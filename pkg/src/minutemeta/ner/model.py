"""Token-classification entity model over reduced regions.

Word-level labels ride on the first subword piece of each word; continuation
pieces are masked out of both the loss and the evaluation. Decoding is
per-word argmax plus BIO repair, or Viterbi when the model carries a CRF
head. Regions longer than the window limit are chunked with the shared
stride utility and stitched back by per-word confidence.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import torch
from torch import nn

from minutemeta.boundary.chunking import chunk_with_stride
from minutemeta.boundary.region import ReducedRegion, gold_region
from minutemeta.corpus.segmentation import word_tokenize
from minutemeta.corpus.types import AnnotatedMinute, EntityAnnotation
from minutemeta.errors import AlignmentError, BackendError, DataError
from minutemeta.evaluation.metrics import entity_prf_corpus
from minutemeta.modeling import (
    batched,
    fingerprint,
    linear_schedule,
    load_meta,
    pick_device,
    save_checkpoint,
    seed_everything,
)
from minutemeta.ner.crf import (
    CrfParameters,
    bio_start_mask,
    bio_transition_mask,
    viterbi_decode,
)
from minutemeta.tagging import OUTSIDE, TagSequence, decode_entities, repair_tags, to_bio

logger = logging.getLogger(__name__)

IGNORE_INDEX = -100
HARD_MASK = -1e4


@dataclass
class NerHyperparams:
    base_model: str = "neuralmind/bert-large-portuguese-cased"
    epochs: int = 15
    patience: int = 3
    learning_rate: float = 2e-5
    batch_size: int = 2
    grad_accumulation: int = 4
    weight_decay: float = 0.01
    max_length: int = 512
    window_words: int = 160
    window_stride_words: int = 40
    seed: int = 42
    device: str | None = None

    def __post_init__(self):
        if self.epochs <= 0 or self.batch_size <= 0 or self.learning_rate <= 0:
            raise DataError("hyperparameters must be positive")
        if self.window_stride_words >= self.window_words:
            raise DataError("window stride must be below window size")

    def as_dict(self) -> dict:
        return {
            "base_model": self.base_model,
            "epochs": self.epochs,
            "patience": self.patience,
            "learning_rate": self.learning_rate,
            "batch_size": self.batch_size,
            "grad_accumulation": self.grad_accumulation,
            "weight_decay": self.weight_decay,
            "max_length": self.max_length,
            "window_words": self.window_words,
            "window_stride_words": self.window_stride_words,
            "seed": self.seed,
        }


def tag_inventory(labels) -> tuple[str, ...]:
    """O plus B-/I- for every expanded label, in a stable order."""
    tags = [OUTSIDE]
    for label in labels:
        tags.append(f"B-{label}")
        tags.append(f"I-{label}")
    return tuple(tags)


def align_subwords(word_ids, word_labels):
    """Map word-level label ids onto subword pieces.

    The first piece of each word carries the label; continuation pieces and
    special tokens get IGNORE_INDEX so they are skipped by loss and scoring.
    Returns (piece_labels, first_piece_positions_by_word).
    """
    piece_labels = []
    first_positions: dict[int, int] = {}
    for position, word_id in enumerate(word_ids):
        if word_id is None:
            piece_labels.append(IGNORE_INDEX)
        elif word_id not in first_positions:
            first_positions[word_id] = position
            if word_id >= len(word_labels):
                raise AlignmentError(
                    f"piece references word {word_id} beyond {len(word_labels)} labels"
                )
            piece_labels.append(word_labels[word_id])
        else:
            piece_labels.append(IGNORE_INDEX)
    return piece_labels, first_positions


class CrfHead(nn.Module):
    """Linear-chain CRF over word-level emissions, with hard BIO masking."""

    def __init__(self, tags, hard_mask: bool = True):
        super().__init__()
        n = len(tags)
        self.tags = tuple(tags)
        self.transitions = nn.Parameter(torch.zeros(n, n))
        self.start = nn.Parameter(torch.zeros(n))
        self.end = nn.Parameter(torch.zeros(n))
        if hard_mask:
            transition_mask = torch.tensor(
                np.where(bio_transition_mask(tags) == -np.inf, HARD_MASK, 0.0),
                dtype=torch.float32,
            )
            start_mask = torch.tensor(
                np.where(bio_start_mask(tags) == -np.inf, HARD_MASK, 0.0),
                dtype=torch.float32,
            )
        else:
            transition_mask = torch.zeros(n, n)
            start_mask = torch.zeros(n)
        self.register_buffer("transition_mask", transition_mask)
        self.register_buffer("start_mask", start_mask)

    def effective_transitions(self):
        return self.transitions + self.transition_mask

    def effective_start(self):
        return self.start + self.start_mask

    def nll(self, emissions, tags, mask):
        """Mean negative log-likelihood over a padded batch.

        emissions (B, N, T); tags (B, N) long; mask (B, N) bool with at least
        the first position set per row.
        """
        transitions = self.effective_transitions()
        start = self.effective_start()
        batch, length, _ = emissions.shape

        score = start[tags[:, 0]] + emissions[:, 0].gather(1, tags[:, :1]).squeeze(1)
        for i in range(1, length):
            step = transitions[tags[:, i - 1], tags[:, i]]
            step = step + emissions[:, i].gather(1, tags[:, i : i + 1]).squeeze(1)
            score = score + step * mask[:, i].float()
        last_index = mask.long().sum(dim=1) - 1
        last_tags = tags.gather(1, last_index.unsqueeze(1)).squeeze(1)
        score = score + self.end[last_tags]

        alpha = start.unsqueeze(0) + emissions[:, 0]
        for i in range(1, length):
            broadcast = (
                alpha.unsqueeze(2)
                + transitions.unsqueeze(0)
                + emissions[:, i].unsqueeze(1)
            )
            stepped = torch.logsumexp(broadcast, dim=1)
            keep = mask[:, i].unsqueeze(1)
            alpha = torch.where(keep, stepped, alpha)
        log_z = torch.logsumexp(alpha + self.end.unsqueeze(0), dim=1)
        return (log_z - score).mean()

    def to_parameters(self) -> CrfParameters:
        return CrfParameters(
            self.tags,
            self.effective_transitions().detach().cpu().numpy(),
            self.effective_start().detach().cpu().numpy(),
            self.end.detach().cpu().numpy(),
        )


@dataclass
class NerModelHandle:
    """Loadable reference to a fine-tuned entity-recognition checkpoint."""

    checkpoint_dir: Path
    meta: dict = field(default_factory=dict)
    crf: CrfParameters | None = None
    _model: object = field(default=None, repr=False, compare=False)
    _tokenizer: object = field(default=None, repr=False, compare=False)
    device: torch.device | None = None

    @classmethod
    def load(cls, checkpoint_dir: str | Path, device: str | None = None) -> "NerModelHandle":
        checkpoint_dir = Path(checkpoint_dir)
        meta = load_meta(checkpoint_dir)
        crf = None
        crf_path = checkpoint_dir / "crf.json"
        if crf_path.exists():
            import json

            crf = CrfParameters.from_dict(json.loads(crf_path.read_text()))
        handle = cls(
            checkpoint_dir=checkpoint_dir, meta=meta, crf=crf, device=pick_device(device)
        )
        handle._ensure_loaded()
        return handle

    def _ensure_loaded(self):
        if self._model is not None:
            return
        from transformers import AutoModelForTokenClassification, AutoTokenizer

        model_dir = self.checkpoint_dir / "model"
        try:
            self._tokenizer = AutoTokenizer.from_pretrained(model_dir)
            self._model = AutoModelForTokenClassification.from_pretrained(model_dir)
        except Exception as exc:
            raise BackendError(f"cannot load NER checkpoint {model_dir}: {exc}")
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

    @property
    def labels(self) -> tuple[str, ...]:
        return tuple(self.meta["labels"])

    @property
    def tags(self) -> tuple[str, ...]:
        return tag_inventory(self.labels)


def region_annotations(minute: AnnotatedMinute, region: ReducedRegion) -> list[EntityAnnotation]:
    """Entity annotations remapped into region coordinates; outside ones dropped."""
    annotations = []
    for ann in minute.entities:
        try:
            start, end = region.span_to_region((ann.start, ann.end))
        except Exception:
            continue
        if region.text[start:end] != ann.surface:
            continue
        annotations.append(
            EntityAnnotation(category=ann.category, start=start, end=end,
                             surface=ann.surface)
        )
    return annotations


def _region_examples(minutes, labels) -> list[dict]:
    """One training example per (gold region window): words + word tag ids."""
    tags = tag_inventory(labels)
    tag_to_id = {t: i for i, t in enumerate(tags)}
    examples = []
    for minute in minutes:
        region = gold_region(minute.document, minute.segments)
        if region.is_empty:
            continue
        annotations = region_annotations(minute, region)
        word_spans = word_tokenize(region.text)
        if not word_spans:
            continue
        sequence = to_bio(region.text, word_spans, annotations)
        examples.append(
            {
                "doc_id": minute.doc_id,
                "text": region.text,
                "word_spans": word_spans,
                "tag_ids": [tag_to_id[t] for t in sequence.tags],
            }
        )
    return examples


def _window_examples(examples, hp) -> list[dict]:
    windows = []
    for example in examples:
        spans = example["word_spans"]
        for start, end in chunk_with_stride(
            len(spans), hp.window_words, hp.window_stride_words
        ):
            words = [example["text"][s:e] for s, e in spans[start:end]]
            windows.append(
                {
                    "doc_id": example["doc_id"],
                    "words": words,
                    "tag_ids": example["tag_ids"][start:end],
                }
            )
    return windows


def _encode_window_batch(tokenizer, batch, hp, device, with_labels: bool):
    encodings = tokenizer(
        [w["words"] for w in batch],
        is_split_into_words=True,
        truncation=True,
        max_length=hp.max_length,
        padding=True,
        return_tensors="pt",
    )
    piece_labels = []
    first_positions = []
    for i, window in enumerate(batch):
        word_ids = encodings.word_ids(i)
        labels, positions = align_subwords(word_ids, window["tag_ids"])
        piece_labels.append(labels)
        first_positions.append(positions)
    inputs = {k: v.to(device) for k, v in encodings.items() if k in ("input_ids", "attention_mask", "token_type_ids")}
    label_tensor = torch.tensor(piece_labels, device=device) if with_labels else None
    return inputs, label_tensor, first_positions


def _gather_word_emissions(logits, first_positions, n_words_list):
    """Per-example (n_words, T) emission matrices from piece logits."""
    out = []
    for i, positions in enumerate(first_positions):
        rows = []
        for w in range(n_words_list[i]):
            if w in positions:
                rows.append(logits[i, positions[w]])
            else:
                # word truncated away by max_length; emit zeros (decodes to O bias)
                rows.append(torch.zeros_like(logits[i, 0]))
        out.append(torch.stack(rows) if rows else logits.new_zeros((0, logits.shape[-1])))
    return out


def train_ner(
    train_minutes,
    val_minutes,
    hyperparams: NerHyperparams | None = None,
    use_crf: bool = False,
    deslex_policy=None,
    labels=None,
    out_dir: str | Path = "ner-checkpoint",
) -> NerModelHandle:
    """Fine-tune the token-classification encoder on gold-region BIO data.

    Early-stops on validation entity micro-F1 with the configured patience
    and keeps the best checkpoint. When ``deslex_policy`` is given it is
    applied to the training minutes only; validation data is never touched.
    """
    from transformers import AutoModelForTokenClassification, AutoTokenizer

    hp = hyperparams or NerHyperparams()
    train_minutes = list(train_minutes)
    val_minutes = list(val_minutes)
    if not train_minutes:
        raise DataError("empty NER training set")

    if deslex_policy is not None:
        from minutemeta.deslex import deslexicalize_minute

        train_minutes = [
            deslexicalize_minute(minute, deslex_policy) for minute in train_minutes
        ]

    if labels is None:
        seen = []
        for minute in (*train_minutes, *val_minutes):
            for ann in minute.entities:
                if ann.category.label not in seen:
                    seen.append(ann.category.label)
        labels = tuple(sorted(seen))
    labels = tuple(labels)
    if not labels:
        raise DataError("no entity labels in the training data")
    tags = tag_inventory(labels)

    seed_everything(hp.seed)
    device = pick_device(hp.device)
    try:
        tokenizer = AutoTokenizer.from_pretrained(hp.base_model)
        model = AutoModelForTokenClassification.from_pretrained(
            hp.base_model,
            num_labels=len(tags),
            id2label={i: t for i, t in enumerate(tags)},
            label2id={t: i for i, t in enumerate(tags)},
        )
    except Exception as exc:
        raise BackendError(f"cannot load base model {hp.base_model!r}: {exc}")
    model.to(device)
    crf_head = CrfHead(tags).to(device) if use_crf else None

    train_windows = _window_examples(_region_examples(train_minutes, labels), hp)
    if not train_windows:
        raise DataError("no non-empty gold regions in the training set")

    parameters = list(model.parameters())
    if crf_head is not None:
        parameters += list(crf_head.parameters())
    optimizer = torch.optim.AdamW(
        parameters, lr=hp.learning_rate, weight_decay=hp.weight_decay
    )
    steps_per_epoch = max(
        1, (len(train_windows) + hp.batch_size - 1) // hp.batch_size
    )
    scheduler = linear_schedule(
        optimizer, (steps_per_epoch * hp.epochs) // max(1, hp.grad_accumulation)
    )

    val_examples = _region_examples(val_minutes, labels)
    rng = np.random.default_rng(hp.seed)
    best_f1 = -1.0
    best_state = None
    best_crf_state = None
    epochs_without_gain = 0

    for epoch in range(hp.epochs):
        model.train()
        order = rng.permutation(len(train_windows))
        epoch_loss = 0.0
        optimizer.zero_grad()
        for step, batch_ids in enumerate(batched(order, hp.batch_size)):
            batch = [train_windows[i] for i in batch_ids]
            inputs, label_tensor, first_positions = _encode_window_batch(
                tokenizer, batch, hp, device, with_labels=True
            )
            if crf_head is None:
                outputs = model(**inputs, labels=label_tensor)
                loss = outputs.loss
            else:
                outputs = model(**inputs)
                n_words = [len(w["tag_ids"]) for w in batch]
                emissions = _gather_word_emissions(
                    outputs.logits, first_positions, n_words
                )
                max_words = max(n_words)
                padded = outputs.logits.new_zeros((len(batch), max_words, len(tags)))
                tag_tensor = torch.zeros(
                    (len(batch), max_words), dtype=torch.long, device=device
                )
                mask = torch.zeros(
                    (len(batch), max_words), dtype=torch.bool, device=device
                )
                for i, emission in enumerate(emissions):
                    count = emission.shape[0]
                    padded[i, :count] = emission
                    tag_tensor[i, :count] = torch.tensor(
                        batch[i]["tag_ids"][:count], device=device
                    )
                    mask[i, :count] = True
                loss = crf_head.nll(padded, tag_tensor, mask)
            (loss / hp.grad_accumulation).backward()
            epoch_loss += float(loss.detach())
            if (step + 1) % hp.grad_accumulation == 0:
                optimizer.step()
                scheduler.step()
                optimizer.zero_grad()
        optimizer.step()
        optimizer.zero_grad()

        val_f1 = _validation_f1(
            model, tokenizer, crf_head, val_examples, labels, hp, device
        )
        logger.info(
            "ner epoch %d: loss %.4f val_f1 %.4f",
            epoch + 1, epoch_loss / steps_per_epoch, val_f1,
        )
        if val_f1 > best_f1:
            best_f1 = val_f1
            best_state = {k: v.detach().cpu().clone() for k, v in model.state_dict().items()}
            if crf_head is not None:
                best_crf_state = {
                    k: v.detach().cpu().clone() for k, v in crf_head.state_dict().items()
                }
            epochs_without_gain = 0
        else:
            epochs_without_gain += 1
            if epochs_without_gain >= hp.patience:
                logger.info("early stopping after epoch %d", epoch + 1)
                break

    if best_state is not None:
        model.load_state_dict(best_state)
        if crf_head is not None and best_crf_state is not None:
            crf_head.load_state_dict(best_crf_state)
    model.eval()

    meta = {
        "stage": "ner",
        "hyperparams": hp.as_dict(),
        "labels": list(labels),
        "use_crf": use_crf,
        "deslex": deslex_policy.as_dict() if deslex_policy is not None else None,
        "data_fingerprint": fingerprint(m.doc_id for m in train_minutes),
        "val_entity_f1": best_f1 if best_f1 >= 0 else None,
    }
    extras = {}
    crf_params = None
    if crf_head is not None:
        crf_params = crf_head.to_parameters()
        extras["crf.json"] = crf_params.to_dict()
    checkpoint = save_checkpoint(Path(out_dir), model, tokenizer, meta, extras)
    return NerModelHandle(
        checkpoint_dir=checkpoint, meta=meta, crf=crf_params,
        _model=model, _tokenizer=tokenizer, device=device,
    )


def _validation_f1(model, tokenizer, crf_head, val_examples, labels, hp, device) -> float:
    if not val_examples:
        return 0.0
    model.eval()
    crf = crf_head.to_parameters() if crf_head is not None else None
    tags = tag_inventory(labels)
    tag_to_id = {t: i for i, t in enumerate(tags)}
    pairs = []
    for example in val_examples:
        sequence = _decode_example(
            model, tokenizer, crf, example["text"], example["word_spans"],
            tags, hp, device,
        )
        predicted = decode_entities(sequence)
        gold_tags = tuple(tags[i] for i in example["tag_ids"])
        gold_sequence = TagSequence(
            text=example["text"],
            tokens=tuple(example["word_spans"]),
            tags=gold_tags,
        )
        pairs.append((predicted, decode_entities(gold_sequence)))
    return entity_prf_corpus(pairs).micro.f1


def _decode_example(
    model, tokenizer, crf, text, word_spans, tags, hp, device
) -> TagSequence:
    """Stitched prediction for one region: emissions per word, then decode."""
    n_words = len(word_spans)
    if n_words == 0:
        return TagSequence(text=text, tokens=(), tags=())
    emission_rows = np.zeros((n_words, len(tags)), dtype=np.float64)
    best_confidence = np.full(n_words, -np.inf)
    windows = chunk_with_stride(n_words, hp.window_words, hp.window_stride_words)
    for start, end in windows:
        words = [text[s:e] for s, e in word_spans[start:end]]
        batch = [{"words": words, "tag_ids": [0] * len(words)}]
        inputs, _, first_positions = _encode_window_batch(
            tokenizer, batch, hp, device, with_labels=False
        )
        with torch.no_grad():
            logits = model(**inputs).logits
        gathered = _gather_word_emissions(logits, first_positions, [len(words)])[0]
        gathered = gathered.cpu().numpy()
        probs = _softmax(gathered)
        for offset in range(len(words)):
            confidence = float(probs[offset].max())
            target = start + offset
            if confidence > best_confidence[target]:
                best_confidence[target] = confidence
                emission_rows[target] = gathered[offset]

    probabilities = _softmax(emission_rows)
    if crf is not None:
        path, _ = viterbi_decode(emission_rows, crf)
        chosen = [tags[i] for i in path]
        scores = tuple(float(probabilities[i, path[i]]) for i in range(n_words))
    else:
        indices = emission_rows.argmax(axis=1)
        chosen = [tags[i] for i in indices]
        scores = tuple(float(probabilities[i, indices[i]]) for i in range(n_words))
    chosen = repair_tags(chosen)
    return TagSequence(
        text=text, tokens=tuple(word_spans), tags=tuple(chosen), scores=scores
    )


def _softmax(matrix: np.ndarray) -> np.ndarray:
    shifted = matrix - matrix.max(axis=-1, keepdims=True)
    exp = np.exp(shifted)
    return exp / exp.sum(axis=-1, keepdims=True)


def write_entity_predictions(rows, path) -> None:
    """Predictions file: one JSONL line per document, entities in
    source-document coordinates (mapped through the region offset map)."""
    import json
    from pathlib import Path

    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8") as handle:
        for doc_id, region, entities in rows:
            serialized = []
            for entity in entities:
                start, end = region.span_to_doc(entity.char_span)
                serialized.append(
                    {
                        "kind": entity.category.kind.value,
                        "presence": entity.category.presence.value,
                        "start": start,
                        "end": end,
                        "surface": entity.surface,
                        "confidence": entity.confidence,
                    }
                )
            handle.write(
                json.dumps({"doc_id": doc_id, "entities": serialized},
                           ensure_ascii=False) + "\n"
            )


def tag(handle: NerModelHandle, region: ReducedRegion) -> TagSequence:
    """Tag one reduced region; empty regions yield an empty sequence."""
    handle._ensure_loaded()
    if region.is_empty or not region.text.strip():
        return TagSequence(text=region.text, tokens=(), tags=())
    hp_meta = handle.meta.get("hyperparams", {})
    hp = NerHyperparams(
        base_model=str(handle.checkpoint_dir),
        max_length=hp_meta.get("max_length", 512),
        window_words=hp_meta.get("window_words", 160),
        window_stride_words=hp_meta.get("window_stride_words", 40),
    )
    word_spans = word_tokenize(region.text)
    if not word_spans:
        return TagSequence(text=region.text, tokens=(), tags=())
    sequence = _decode_example(
        handle.model, handle.tokenizer, handle.crf, region.text, word_spans,
        handle.tags, hp, handle.device,
    )
    return _break_entities_at_pieces(sequence, region)


def _break_entities_at_pieces(sequence: TagSequence, region: ReducedRegion) -> TagSequence:
    """No entity may straddle two region pieces: an I-tag whose token lies in
    a different offset-map piece than the previous token becomes a B-tag, so
    every decoded span maps to one contiguous source-document span."""
    if len(region.offset_map) < 2 or not sequence.tokens:
        return sequence

    def piece_of(offset: int) -> int:
        for index, (start, end, _, _) in enumerate(region.offset_map):
            if start <= offset < end:
                return index
        return -1

    tags = list(sequence.tags)
    changed = False
    for i in range(1, len(tags)):
        if not tags[i].startswith("I-"):
            continue
        if piece_of(sequence.tokens[i][0]) != piece_of(sequence.tokens[i - 1][0]):
            tags[i] = "B-" + tags[i][2:]
            changed = True
    if not changed:
        return sequence
    return TagSequence(
        text=sequence.text, tokens=sequence.tokens, tags=tuple(tags),
        scores=sequence.scores,
    )
