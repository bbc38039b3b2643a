import json

import pytest

from minutemeta.corpus import (
    load_corpus,
    make_global_split,
    make_incremental_series,
    make_leave_one_out,
)
from minutemeta.corpus.splits import largest_remainder
from minutemeta.errors import ConfigError


def _corpus(tmp_path, municipality_sizes: dict):
    path = tmp_path / "c.jsonl"
    with path.open("w", encoding="utf-8") as handle:
        for municipality, count in municipality_sizes.items():
            for i in range(count):
                record = {
                    "doc_id": f"{municipality}-{i:03d}",
                    "municipality": municipality,
                    "language": "pt",
                    "text": f"Ata {i} de {municipality}. Texto da sessão aqui.",
                    "entities": [],
                    "segments": [],
                }
                handle.write(json.dumps(record, ensure_ascii=False) + "\n")
    return load_corpus(path)


class TestLargestRemainder:
    def test_exact_division(self):
        assert largest_remainder(20, (0.6, 0.2, 0.2)) == [12, 4, 4]

    def test_five_docs(self):
        assert largest_remainder(5, (0.6, 0.2, 0.2)) == [3, 1, 1]

    def test_sums_to_total(self):
        for n in range(1, 50):
            assert sum(largest_remainder(n, (0.6, 0.2, 0.2))) == n


class TestGlobalSplit:
    def test_120_docs_six_municipalities(self, tmp_path):
        corpus = _corpus(tmp_path, {f"m{i}": 20 for i in range(6)})
        split = make_global_split(corpus, seed=1)
        assert (len(split.train), len(split.val), len(split.test)) == (72, 24, 24)
        for municipality in corpus.municipalities:
            ids = {m.doc_id for m in corpus.by_municipality(municipality)}
            assert len(ids & set(split.train)) == 12
            assert len(ids & set(split.val)) == 4
            assert len(ids & set(split.test)) == 4

    def test_deterministic(self, tmp_path):
        corpus = _corpus(tmp_path, {"a": 10, "b": 7})
        assert make_global_split(corpus, seed=5) == make_global_split(corpus, seed=5)
        assert make_global_split(corpus, seed=5) != make_global_split(corpus, seed=6)

    def test_small_municipality_strict_raises(self, tmp_path):
        corpus = _corpus(tmp_path, {"a": 10, "tiny": 2})
        with pytest.raises(ConfigError):
            make_global_split(corpus, strict=True)

    def test_small_municipality_lenient_goes_to_train(self, tmp_path):
        corpus = _corpus(tmp_path, {"a": 10, "tiny": 2})
        split = make_global_split(corpus)
        assert {"tiny-000", "tiny-001"} <= set(split.train)

    def test_partitions_exhaustive(self, tmp_path):
        corpus = _corpus(tmp_path, {"a": 9, "b": 5, "c": 4})
        split = make_global_split(corpus, seed=3)
        assert set(split.train) | set(split.val) | set(split.test) == set(corpus.doc_ids)


class TestLeaveOneOut:
    def test_one_split_per_municipality(self, tmp_path):
        corpus = _corpus(tmp_path, {f"m{i}": 4 for i in range(6)})
        splits = make_leave_one_out(corpus)
        assert len(splits) == 6

    def test_test_sets_partition_corpus(self, tmp_path):
        corpus = _corpus(tmp_path, {"a": 5, "b": 3, "c": 4})
        splits = make_leave_one_out(corpus)
        all_test = [doc_id for s in splits for doc_id in s.test]
        assert sorted(all_test) == sorted(corpus.doc_ids)

    def test_held_out_municipality_not_in_training(self, tmp_path):
        corpus = _corpus(tmp_path, {"a": 5, "b": 3})
        for split in make_leave_one_out(corpus):
            municipality = split.name.removeprefix("loo-")
            held = {m.doc_id for m in corpus.by_municipality(municipality)}
            assert not held & set(split.train)
            assert not held & set(split.val)

    def test_two_municipalities_minimum(self, tmp_path):
        corpus = _corpus(tmp_path, {"only": 5})
        with pytest.raises(ConfigError):
            make_leave_one_out(corpus)


class TestIncremental:
    def test_six_configurations_fixed_test(self, tmp_path):
        corpus = _corpus(tmp_path, {"target": 20, "other": 10})
        series = make_incremental_series(corpus, "target", k_max=5, seed=9)
        assert len(series) == 6
        test_sets = {s[2] for s in series}
        assert len(test_sets) == 1
        assert len(series[0][2]) == 15

    def test_k0_has_no_extra_docs(self, tmp_path):
        corpus = _corpus(tmp_path, {"target": 8, "other": 4})
        series = make_incremental_series(corpus, "target", k_max=3)
        assert series[0][1] == ()

    def test_nested_prefixes(self, tmp_path):
        corpus = _corpus(tmp_path, {"target": 10, "other": 4})
        series = make_incremental_series(corpus, "target", k_max=5, seed=2)
        for (_, extra_k, _), (_, extra_k1, _) in zip(series, series[1:]):
            assert extra_k == extra_k1[: len(extra_k)]

    def test_deterministic(self, tmp_path):
        corpus = _corpus(tmp_path, {"target": 10, "other": 4})
        a = make_incremental_series(corpus, "target", k_max=4, seed=7)
        b = make_incremental_series(corpus, "target", k_max=4, seed=7)
        assert a == b

    def test_k_max_bound(self, tmp_path):
        corpus = _corpus(tmp_path, {"target": 4, "other": 4})
        with pytest.raises(ConfigError):
            make_incremental_series(corpus, "target", k_max=4)

    def test_extra_docs_disjoint_from_test(self, tmp_path):
        corpus = _corpus(tmp_path, {"target": 12, "other": 6})
        for k, extra, test in make_incremental_series(corpus, "target", k_max=5):
            assert not set(extra) & set(test)
