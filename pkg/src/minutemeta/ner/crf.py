"""Linear-chain CRF parameters and Viterbi decoding.

The decoder is a pure function over score arrays, so it serves both the
learned CRF head and the degenerate per-token argmax case (all-zero
transitions). Illegal BIO transitions can be hard-masked to -inf, which
guarantees decoded sequences are valid before any repair.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from minutemeta.errors import DimensionError

NEG_INF = float("-inf")


@dataclass
class CrfParameters:
    """Transition scores between tags plus start/end transition vectors."""

    tags: tuple[str, ...]
    transition: np.ndarray  # (T, T), [from, to]
    start: np.ndarray  # (T,)
    end: np.ndarray  # (T,)

    def __post_init__(self):
        n = len(self.tags)
        self.transition = np.asarray(self.transition, dtype=np.float64)
        self.start = np.asarray(self.start, dtype=np.float64)
        self.end = np.asarray(self.end, dtype=np.float64)
        if self.transition.shape != (n, n):
            raise DimensionError(
                f"transition shape {self.transition.shape} for {n} tags"
            )
        if self.start.shape != (n,) or self.end.shape != (n,):
            raise DimensionError("start/end vectors must have one entry per tag")

    @classmethod
    def zeros(cls, tags) -> "CrfParameters":
        n = len(tags)
        return cls(tuple(tags), np.zeros((n, n)), np.zeros(n), np.zeros(n))

    def to_dict(self) -> dict:
        return {
            "tags": list(self.tags),
            "transition": self.transition.tolist(),
            "start": self.start.tolist(),
            "end": self.end.tolist(),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "CrfParameters":
        return cls(
            tuple(data["tags"]),
            np.array(data["transition"]),
            np.array(data["start"]),
            np.array(data["end"]),
        )


def bio_transition_mask(tags) -> np.ndarray:
    """(T, T) matrix: 0 where from->to is a legal BIO transition, -inf where not.

    The only illegal moves are into I-x from anything other than B-x or I-x.
    """
    n = len(tags)
    mask = np.zeros((n, n))
    for j, to_tag in enumerate(tags):
        if not to_tag.startswith("I-"):
            continue
        label = to_tag[2:]
        for i, from_tag in enumerate(tags):
            if from_tag not in (f"B-{label}", f"I-{label}"):
                mask[i, j] = NEG_INF
    return mask


def bio_start_mask(tags) -> np.ndarray:
    """(T,) vector: -inf for tags that cannot begin a sequence (any I-tag)."""
    return np.array([NEG_INF if t.startswith("I-") else 0.0 for t in tags])


def viterbi_decode(
    emissions: np.ndarray, crf: CrfParameters
) -> tuple[list[int], float]:
    """Best tag path under emission + transition (+ start/end) scores.

    Ties are broken toward the lowest tag index at every backtrack step.
    Returns (path as tag indices, path score). Score accumulation is strictly
    left to right so it is bit-comparable with a sequential brute-force sum.
    """
    emissions = np.asarray(emissions, dtype=np.float64)
    if emissions.ndim != 2:
        raise DimensionError(f"emissions must be 2-D, got shape {emissions.shape}")
    n, t = emissions.shape
    if n < 1:
        raise DimensionError("need at least one token")
    if t != len(crf.tags):
        raise DimensionError(
            f"{t} emission columns for {len(crf.tags)} tags"
        )

    score = crf.start + emissions[0]
    backpointers = np.zeros((n, t), dtype=np.int64)
    for i in range(1, n):
        # candidate[j, k] = score[j] + transition[j, k]
        candidate = score[:, None] + crf.transition
        best_prev = np.argmax(candidate, axis=0)  # first (lowest) index on ties
        score = candidate[best_prev, np.arange(t)] + emissions[i]
        backpointers[i] = best_prev

    final = score + crf.end
    last = int(np.argmax(final))
    best_score = float(final[last])

    path = [last]
    for i in range(n - 1, 0, -1):
        path.append(int(backpointers[i, path[-1]]))
    path.reverse()
    return path, best_score


def viterbi_tags(emissions: np.ndarray, crf: CrfParameters) -> list[str]:
    path, _ = viterbi_decode(emissions, crf)
    return [crf.tags[i] for i in path]
