"""Split generation for the three evaluation protocols.

Global: 60/20/20 by document count, stratified by municipality with
largest-remainder apportionment. Leave-one-out: train on all municipalities
but one, test on the held-out one. Incremental: starting from leave-one-out,
feed target-municipality documents into training one at a time.
"""
from __future__ import annotations

import random

from minutemeta.corpus.types import Corpus, CorpusSplit
from minutemeta.errors import ConfigError

GLOBAL_FRACTIONS = (0.6, 0.2, 0.2)


def largest_remainder(total: int, fractions) -> list[int]:
    """Apportion ``total`` into integer counts summing to total."""
    quotas = [total * f for f in fractions]
    counts = [int(q) for q in quotas]
    remainders = sorted(
        range(len(quotas)), key=lambda i: (quotas[i] - counts[i], -i), reverse=True
    )
    for i in remainders[: total - sum(counts)]:
        counts[i] += 1
    return counts


def _shuffled_ids(corpus: Corpus, municipality: str, rng: random.Random) -> list[str]:
    ids = [m.doc_id for m in corpus.by_municipality(municipality)]
    rng.shuffle(ids)
    return ids


def make_global_split(
    corpus: Corpus, seed: int = 0, strict: bool = False, name: str = "global"
) -> CorpusSplit:
    """60/20/20 document split, stratified per municipality.

    With ``strict`` set, a municipality with fewer documents than partitions
    raises ConfigError; otherwise its documents all land in training.
    """
    if len(corpus) == 0:
        raise ConfigError("cannot split an empty corpus")
    train: list[str] = []
    val: list[str] = []
    test: list[str] = []
    for municipality in sorted(corpus.municipalities):
        rng = random.Random(f"{seed}:{municipality}")
        ids = _shuffled_ids(corpus, municipality, rng)
        if len(ids) < 3:
            if strict:
                raise ConfigError(
                    f"municipality {municipality!r} has {len(ids)} document(s); "
                    "need at least 3 for stratified 60/20/20"
                )
            train.extend(ids)
            continue
        n_train, n_val, n_test = largest_remainder(len(ids), GLOBAL_FRACTIONS)
        # With >= 3 documents every partition gets at least one.
        if min(n_train, n_val, n_test) == 0:
            deficit = [i for i, n in enumerate((n_train, n_val, n_test)) if n == 0]
            counts = [n_train, n_val, n_test]
            for i in deficit:
                donor = counts.index(max(counts))
                counts[donor] -= 1
                counts[i] += 1
            n_train, n_val, n_test = counts
        train.extend(ids[:n_train])
        val.extend(ids[n_train : n_train + n_val])
        test.extend(ids[n_train + n_val :])
    split = CorpusSplit(name, tuple(train), tuple(val), tuple(test))
    split.validate_against(corpus)
    return split


def make_leave_one_out(
    corpus: Corpus, seed: int = 0, val_fraction: float = 0.2
) -> list[CorpusSplit]:
    """One split per municipality: test on it, train/val on the rest."""
    municipalities = sorted(corpus.municipalities)
    if len(municipalities) < 2:
        raise ConfigError("leave-one-out needs at least two municipalities")
    splits = []
    for held_out in municipalities:
        train: list[str] = []
        val: list[str] = []
        for other in municipalities:
            if other == held_out:
                continue
            rng = random.Random(f"{seed}:loo:{held_out}:{other}")
            ids = _shuffled_ids(corpus, other, rng)
            n_val = int(round(len(ids) * val_fraction))
            if len(ids) > 1:
                n_val = max(1, min(n_val, len(ids) - 1))
            else:
                n_val = 0
            val.extend(ids[:n_val])
            train.extend(ids[n_val:])
        test = tuple(m.doc_id for m in corpus.by_municipality(held_out))
        split = CorpusSplit(f"loo-{held_out}", tuple(train), tuple(val), test)
        split.validate_against(corpus)
        splits.append(split)
    return splits


def make_incremental_series(
    corpus: Corpus,
    target_municipality: str,
    k_max: int = 5,
    seed: int = 0,
) -> list[tuple[int, tuple[str, ...], tuple[str, ...]]]:
    """Nested training increments for one target municipality.

    Returns ``(k, extra_train_docs, test_docs)`` for k = 0..k_max, where
    ``extra_train_docs`` is the k-prefix of a fixed seeded ordering of the
    target's documents, and ``test_docs`` is the remainder after the k_max
    prefix, fixed across all k.
    """
    target_ids = [m.doc_id for m in corpus.by_municipality(target_municipality)]
    if not target_ids:
        raise ConfigError(f"unknown municipality {target_municipality!r}")
    if k_max >= len(target_ids):
        raise ConfigError(
            f"k_max={k_max} must be below the document count of "
            f"{target_municipality!r} ({len(target_ids)})"
        )
    rng = random.Random(f"{seed}:incremental:{target_municipality}")
    ordering = list(target_ids)
    rng.shuffle(ordering)
    test_docs = tuple(ordering[k_max:])
    return [(k, tuple(ordering[:k]), test_docs) for k in range(k_max + 1)]
