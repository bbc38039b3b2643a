"""Shared torch/transformers plumbing for the two trainable stages."""
from __future__ import annotations

import hashlib
import json
import logging
import os
import random
import shutil
import tempfile
from pathlib import Path

import numpy as np
import torch

from minutemeta.errors import BackendError

logger = logging.getLogger(__name__)


def seed_everything(seed: int) -> None:
    random.seed(seed)
    np.random.seed(seed % (2**32))
    torch.manual_seed(seed)
    if torch.cuda.is_available():
        torch.cuda.manual_seed_all(seed)


def pick_device(preferred: str | None = None) -> torch.device:
    if preferred:
        return torch.device(preferred)
    return torch.device("cuda" if torch.cuda.is_available() else "cpu")


def fingerprint(items) -> str:
    """Stable digest of the training data (order-independent)."""
    digest = hashlib.sha256()
    for item in sorted(str(i) for i in items):
        digest.update(item.encode("utf-8"))
        digest.update(b"\x00")
    return digest.hexdigest()[:16]


def linear_schedule(optimizer, total_steps: int, warmup_fraction: float = 0.1):
    warmup = max(1, int(total_steps * warmup_fraction))

    def factor(step: int) -> float:
        if step < warmup:
            return step / warmup
        remaining = max(1, total_steps - warmup)
        return max(0.0, (total_steps - step) / remaining)

    return torch.optim.lr_scheduler.LambdaLR(optimizer, factor)


def save_checkpoint(
    out_dir: str | Path,
    model,
    tokenizer,
    meta: dict,
    extras: dict[str, dict] | None = None,
) -> Path:
    """Atomically write ``model/``, ``meta.json`` and any extra JSON files.

    The final directory only appears once everything is on disk, so an
    interrupted run never leaves a partial checkpoint that looks complete.
    """
    out_dir = Path(out_dir)
    out_dir.parent.mkdir(parents=True, exist_ok=True)
    staging = Path(tempfile.mkdtemp(prefix=".ckpt-", dir=out_dir.parent))
    try:
        model_dir = staging / "model"
        model.save_pretrained(model_dir)
        tokenizer.save_pretrained(model_dir)
        for name, payload in (extras or {}).items():
            (staging / name).write_text(
                json.dumps(payload, ensure_ascii=False, indent=1), encoding="utf-8"
            )
        (staging / "meta.json").write_text(
            json.dumps(meta, ensure_ascii=False, indent=1, sort_keys=True),
            encoding="utf-8",
        )
        if out_dir.exists():
            shutil.rmtree(out_dir)
        os.replace(staging, out_dir)
    except Exception:
        shutil.rmtree(staging, ignore_errors=True)
        raise
    return out_dir


def load_meta(checkpoint_dir: str | Path) -> dict:
    meta_path = Path(checkpoint_dir) / "meta.json"
    if not meta_path.exists():
        raise BackendError(f"no meta.json in checkpoint {checkpoint_dir}")
    return json.loads(meta_path.read_text(encoding="utf-8"))


def batched(indices, batch_size: int):
    for i in range(0, len(indices), batch_size):
        yield indices[i : i + batch_size]


def build_tiny_encoder(
    out_dir: str | Path,
    texts,
    vocab_size: int = 800,
    hidden_size: int = 64,
    layers: int = 2,
    heads: int = 2,
    max_positions: int = 512,
    seed: int = 0,
) -> Path:
    """Construct and save a miniature BERT-style base checkpoint from scratch.

    Used where a downloaded pretrained encoder is unavailable or too heavy:
    the resulting directory is loadable by the same training entry points as
    any hub checkpoint. The vocabulary is built directly from the corpus
    (specials, then characters, then frequency-ranked whole words) instead of
    running the wordpiece trainer, whose tie-breaking is not reproducible
    across processes.
    """
    from collections import Counter

    from tokenizers import Tokenizer, models, normalizers, pre_tokenizers
    from tokenizers.processors import TemplateProcessing
    from transformers import BertConfig, BertForMaskedLM, PreTrainedTokenizerFast

    normalizer = normalizers.Sequence(
        [normalizers.NFD(), normalizers.Lowercase(), normalizers.StripAccents()]
    )
    pre_tokenizer = pre_tokenizers.Whitespace()
    word_counts: Counter = Counter()
    chars: set[str] = set()
    for text in texts:
        normalized = normalizer.normalize_str(text)
        for word, _ in pre_tokenizer.pre_tokenize_str(normalized):
            word_counts[word] += 1
            chars.update(word)

    specials = ["[PAD]", "[UNK]", "[CLS]", "[SEP]", "[MASK]"]
    vocab_tokens = list(specials)
    for ch in sorted(chars):
        vocab_tokens.append(ch)
        vocab_tokens.append(f"##{ch}")
    for word, _ in sorted(word_counts.items(), key=lambda kv: (-kv[1], kv[0])):
        if len(vocab_tokens) >= vocab_size:
            break
        if word not in vocab_tokens:
            vocab_tokens.append(word)
    vocab = {token: i for i, token in enumerate(vocab_tokens)}

    tokenizer = Tokenizer(models.WordPiece(vocab=vocab, unk_token="[UNK]"))
    tokenizer.normalizer = normalizer
    tokenizer.pre_tokenizer = pre_tokenizer
    tokenizer.post_processor = TemplateProcessing(
        single="[CLS] $A [SEP]",
        pair="[CLS] $A [SEP] $B:1 [SEP]:1",
        special_tokens=[
            ("[CLS]", tokenizer.token_to_id("[CLS]")),
            ("[SEP]", tokenizer.token_to_id("[SEP]")),
        ],
    )
    fast = PreTrainedTokenizerFast(
        tokenizer_object=tokenizer,
        unk_token="[UNK]",
        pad_token="[PAD]",
        cls_token="[CLS]",
        sep_token="[SEP]",
        mask_token="[MASK]",
        model_max_length=max_positions,
    )
    config = BertConfig(
        vocab_size=fast.vocab_size,
        hidden_size=hidden_size,
        num_hidden_layers=layers,
        num_attention_heads=heads,
        intermediate_size=hidden_size * 4,
        max_position_embeddings=max_positions,
    )
    seed_everything(seed)
    model = BertForMaskedLM(config)
    out_dir = Path(out_dir)
    model.save_pretrained(out_dir)
    fast.save_pretrained(out_dir)
    return out_dir


def pretrain_mlm(
    base_dir: str | Path,
    texts,
    epochs: int = 30,
    batch_size: int = 8,
    learning_rate: float = 5e-4,
    max_length: int = 256,
    mask_rate: float = 0.15,
    seed: int = 0,
    device: str | None = None,
) -> Path:
    """Masked-language pretraining of a freshly built tiny encoder.

    Gives the from-scratch encoder basic lexical statistics before task
    fine-tuning; saves back into ``base_dir``.
    """
    from transformers import AutoModelForMaskedLM, AutoTokenizer

    base_dir = Path(base_dir)
    seed_everything(seed)
    dev = pick_device(device)
    tokenizer = AutoTokenizer.from_pretrained(base_dir)
    model = AutoModelForMaskedLM.from_pretrained(base_dir).to(dev)

    blocks: list[list[int]] = []
    for text in texts:
        ids = tokenizer(text, add_special_tokens=False)["input_ids"]
        for start in range(0, len(ids), max_length - 2):
            chunk = ids[start : start + max_length - 2]
            if len(chunk) < 8:
                continue
            blocks.append(
                [tokenizer.cls_token_id, *chunk, tokenizer.sep_token_id]
            )
    if not blocks:
        return base_dir

    special = {tokenizer.cls_token_id, tokenizer.sep_token_id, tokenizer.pad_token_id}
    mask_id = tokenizer.mask_token_id
    vocab_size = model.config.vocab_size
    optimizer = torch.optim.AdamW(model.parameters(), lr=learning_rate)
    rng = np.random.default_rng(seed)
    generator = torch.Generator().manual_seed(seed)

    model.train()
    for epoch in range(epochs):
        order = rng.permutation(len(blocks))
        total = 0.0
        steps = 0
        for batch_ids in batched(order, batch_size):
            batch = [blocks[i] for i in batch_ids]
            width = max(len(b) for b in batch)
            input_ids = torch.full((len(batch), width), tokenizer.pad_token_id)
            attention = torch.zeros((len(batch), width), dtype=torch.long)
            for i, block in enumerate(batch):
                input_ids[i, : len(block)] = torch.tensor(block)
                attention[i, : len(block)] = 1
            labels = input_ids.clone()
            maskable = torch.tensor(
                [[tid not in special for tid in row] for row in input_ids.tolist()]
            )
            probabilities = torch.rand(input_ids.shape, generator=generator)
            chosen = (probabilities < mask_rate) & maskable & attention.bool()
            labels[~chosen] = -100
            decision = torch.rand(input_ids.shape, generator=generator)
            input_ids[chosen & (decision < 0.8)] = mask_id
            random_ids = torch.randint(
                0, vocab_size, input_ids.shape, generator=generator
            )
            swap = chosen & (decision >= 0.8) & (decision < 0.9)
            input_ids[swap] = random_ids[swap]

            outputs = model(
                input_ids=input_ids.to(dev),
                attention_mask=attention.to(dev),
                labels=labels.to(dev),
            )
            outputs.loss.backward()
            optimizer.step()
            optimizer.zero_grad()
            total += float(outputs.loss.detach())
            steps += 1
        logger.info("mlm epoch %d: loss %.4f", epoch + 1, total / max(1, steps))

    model.save_pretrained(base_dir)
    return base_dir
