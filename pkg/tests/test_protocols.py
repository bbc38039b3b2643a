"""Protocol orchestration tested with oracle stage fakes (no torch training)."""
import random
from dataclasses import dataclass

import pytest

from minutemeta.boundary.region import SpanPrediction, extract_region
from minutemeta.corpus import SegmentType
from minutemeta.corpus.types import EntityAnnotation, SegmentAnnotation
from minutemeta.evaluation import (
    ProtocolRecipe,
    StageStack,
    run_global_eval,
    run_incremental,
    run_leave_one_out,
)
from minutemeta.synthgen import SynthConfig, generate_corpus


@dataclass
class FakeHandle:
    """Stands in for a trained model; remembers what it was trained on."""

    train_ids: tuple
    checkpoint_dir: str = "fake"
    noise: float = 0.0


def _fake_stack(corpus, noise: float = 0.0):
    """Stage fakes: gold segments, gold entities with optional noise."""
    rng = random.Random(99)

    def train_boundary(train, val, recipe, out_dir):
        return FakeHandle(tuple(m.doc_id for m in train))

    def train_ner(train, val, recipe, out_dir, base_model=None):
        return FakeHandle(tuple(m.doc_id for m in train), noise=noise)

    def predict_segments(handle, doc, prompt_overrides, null_threshold):
        minute = corpus[doc.doc_id]
        out = {}
        for seg_type in (SegmentType.OPENING, SegmentType.CLOSING):
            seg = minute.segment(seg_type) or SegmentAnnotation(seg_type, None)
            out[seg_type] = SpanPrediction(seg_type, seg.char_span)
        return out

    def extract_entities(handle, doc, predictions):
        minute = corpus[doc.doc_id]
        entities = []
        for ann in minute.entities:
            if handle.noise and rng.random() < handle.noise:
                continue
            entities.append(ann)
        return entities

    return StageStack(
        train_boundary=train_boundary,
        train_ner=train_ner,
        predict_segments=predict_segments,
        extract_entities=extract_entities,
    )


@pytest.fixture(scope="module")
def synth_corpus():
    return generate_corpus(SynthConfig(docs_per_municipality=4, seed=21))


class TestGlobal:
    def test_perfect_fakes_score_one(self, synth_corpus, tmp_path):
        recipe = ProtocolRecipe(workdir=tmp_path)
        report = run_global_eval(synth_corpus, recipe, _fake_stack(synth_corpus))
        assert report.micro["f1"] == 1.0
        assert report.qa_metrics["em"] == 1.0
        assert report.protocol == "global"

    def test_noise_lowers_recall_not_precision(self, synth_corpus, tmp_path):
        recipe = ProtocolRecipe(workdir=tmp_path)
        report = run_global_eval(
            synth_corpus, recipe, _fake_stack(synth_corpus, noise=0.3)
        )
        assert report.micro["recall"] < 1.0
        assert report.micro["precision"] == 1.0
        assert report.taxonomy["missed"] > 0


class TestLeaveOneOut:
    def test_one_fold_per_municipality(self, synth_corpus, tmp_path):
        recipe = ProtocolRecipe(workdir=tmp_path)
        reports, aggregate = run_leave_one_out(
            synth_corpus, recipe, _fake_stack(synth_corpus)
        )
        assert len(reports) == len(synth_corpus.municipalities)
        assert aggregate.micro["f1"] == 1.0

    def test_training_never_sees_held_out(self, synth_corpus, tmp_path):
        seen: dict[str, set] = {}

        stack = _fake_stack(synth_corpus)
        original = stack.train_ner

        def spy_train_ner(train, val, recipe, out_dir, base_model=None):
            seen[str(out_dir)] = {m.doc_id for m in (*train, *val)}
            return original(train, val, recipe, out_dir)

        stack.train_ner = spy_train_ner
        recipe = ProtocolRecipe(workdir=tmp_path)
        run_leave_one_out(synth_corpus, recipe, stack)
        assert len(seen) == len(synth_corpus.municipalities)
        for out_dir, ids in seen.items():
            municipality = out_dir.split("loo-")[1].split("/")[0]
            held = {m.doc_id for m in synth_corpus.by_municipality(municipality)}
            assert not held & ids


class TestIncremental:
    def test_curve_shape_and_fixed_test_set(self, synth_corpus, tmp_path):
        target = synth_corpus.municipalities[0]
        recipe = ProtocolRecipe(workdir=tmp_path, k_max=3)
        report = run_incremental(
            synth_corpus, target, recipe, _fake_stack(synth_corpus)
        )
        curve = report.extra["curve"]
        assert [point["k"] for point in curve] == [0, 1, 2, 3]
        assert report.extra["test_documents"] == 4 - 3

    def test_increments_added_to_training(self, synth_corpus, tmp_path):
        target = synth_corpus.municipalities[1]
        training_sizes = []

        stack = _fake_stack(synth_corpus)
        original = stack.train_ner

        def spy(train, val, recipe, out_dir, base_model=None):
            training_sizes.append(len(train))
            return original(train, val, recipe, out_dir)

        stack.train_ner = spy
        recipe = ProtocolRecipe(workdir=tmp_path, k_max=2)
        run_incremental(synth_corpus, target, recipe, stack)
        assert training_sizes == sorted(training_sizes)
        assert training_sizes[-1] == training_sizes[0] + 2

    def test_unknown_municipality(self, synth_corpus, tmp_path):
        from minutemeta.errors import ConfigError

        recipe = ProtocolRecipe(workdir=tmp_path)
        with pytest.raises(ConfigError):
            run_incremental(synth_corpus, "nowhere", recipe, _fake_stack(synth_corpus))
