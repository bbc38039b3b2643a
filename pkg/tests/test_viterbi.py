import itertools
import random

import numpy as np
import pytest

from minutemeta.errors import DimensionError
from minutemeta.ner import (
    CrfParameters,
    bio_start_mask,
    bio_transition_mask,
    is_valid,
    viterbi_decode,
    viterbi_tags,
)


def brute_force_best(emissions: np.ndarray, crf: CrfParameters):
    """Score every |T|^n path with the same left-to-right accumulation."""
    n, t = emissions.shape
    best_score = -np.inf
    best_path = None
    for path in itertools.product(range(t), repeat=n):
        score = crf.start[path[0]] + emissions[0, path[0]]
        for i in range(1, n):
            score = score + crf.transition[path[i - 1], path[i]]
            score = score + emissions[i, path[i]]
        score = score + crf.end[path[-1]]
        if score > best_score:
            best_score = score
            best_path = path
    return list(best_path), float(best_score)


class TestViterbi:
    def test_single_token_is_argmax(self):
        tags = ("O", "B-DATE", "I-DATE")
        crf = CrfParameters(tags, np.zeros((3, 3)), np.array([0.1, 0.0, -0.5]),
                            np.array([0.0, 0.2, 0.0]))
        emissions = np.array([[1.0, 2.0, 0.0]])
        path, score = viterbi_decode(emissions, crf)
        # scores: 1.1, 2.2, -0.5
        assert path == [1]
        assert score == pytest.approx(2.2)

    def test_zero_transitions_reduce_to_per_token_argmax(self):
        rng = np.random.default_rng(3)
        tags = ("O", "B-DATE", "I-DATE", "B-LOCATION")
        crf = CrfParameters.zeros(tags)
        emissions = rng.normal(size=(8, 4))
        path, _ = viterbi_decode(emissions, crf)
        assert path == list(np.argmax(emissions, axis=1))

    def test_matches_exhaustive_enumeration(self):
        rng = np.random.default_rng(42)
        trials = 0
        while trials < 1000:
            n = int(rng.integers(1, 7))
            t = int(rng.integers(2, 6))
            tags = tuple(f"t{i}" for i in range(t))
            crf = CrfParameters(
                tags,
                rng.normal(size=(t, t)),
                rng.normal(size=t),
                rng.normal(size=t),
            )
            emissions = rng.normal(size=(n, t))
            path, score = viterbi_decode(emissions, crf)
            oracle_path, oracle_score = brute_force_best(emissions, crf)
            assert score == oracle_score, (n, t)
            assert path == oracle_path
            trials += 1

    def test_tie_break_lowest_index(self):
        tags = ("a", "b")
        crf = CrfParameters.zeros(tags)
        emissions = np.zeros((3, 2))
        path, _ = viterbi_decode(emissions, crf)
        assert path == [0, 0, 0]

    def test_dimension_mismatch(self):
        crf = CrfParameters.zeros(("a", "b"))
        with pytest.raises(DimensionError):
            viterbi_decode(np.zeros((3, 5)), crf)
        with pytest.raises(DimensionError):
            viterbi_decode(np.zeros((0, 2)), crf)


class TestBioMasking:
    def test_masked_decodes_are_always_valid(self):
        rng = np.random.default_rng(11)
        tags = ("O", "B-DATE", "I-DATE", "B-LOCATION", "I-LOCATION")
        mask = bio_transition_mask(tags)
        start_mask = bio_start_mask(tags)
        for _ in range(300):
            n = int(rng.integers(1, 12))
            crf = CrfParameters(
                tags,
                rng.normal(size=(5, 5)) + mask,
                rng.normal(size=5) + start_mask,
                rng.normal(size=5),
            )
            emissions = rng.normal(size=(n, 5)) * 5
            decoded = viterbi_tags(emissions, crf)
            assert is_valid(decoded), decoded

    def test_mask_blocks_only_illegal_moves(self):
        tags = ("O", "B-DATE", "I-DATE")
        mask = bio_transition_mask(tags)
        assert mask[0, 2] == -np.inf  # O -> I-DATE
        assert mask[1, 2] == 0.0  # B-DATE -> I-DATE
        assert mask[2, 2] == 0.0  # I-DATE -> I-DATE
        assert mask[2, 1] == 0.0  # new entity right after one ends
