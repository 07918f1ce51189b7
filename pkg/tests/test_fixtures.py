from __future__ import annotations

import pytest

from xattreval import aggregate as agg
from xattreval.errors import UnrepresentableProportionError
from xattreval.fixtures import (
    DEMO_SPECS,
    HandcraftedCase,
    build_synthetic,
    demo_data_dir,
    handcrafted_cases,
    ratings_for_judgments,
)
from xattreval.metrics import Pool, SubsetFilter, ais, em_bits_for
from xattreval.rerank import reranked_ais
from xattreval.types import Scenario


class TestBuildSynthetic:
    def test_bn_counts_exact(self):
        fx = build_synthetic("bn", 1000, top1=0.279, all=0.456, seed=0)
        labels = fx.labels()
        top1 = sum(
            1 for e in fx.examples if labels[(e.example_id, e.passages[0].passage_id)] == 1
        )
        any_ = sum(
            1
            for e in fx.examples
            if any(labels[(e.example_id, p.passage_id)] == 1 for p in e.passages)
        )
        assert (top1, any_) == (279, 456)

    def test_half_of_two(self):
        fx = build_synthetic("fi", 2, top1=0.5, seed=0)
        assert ais(fx.examples, fx.labels(), Pool.TOP1) == 50.0
        assert ais(fx.examples, fx.labels(), Pool.ALL) == 50.0

    def test_deterministic(self):
        a = build_synthetic("te", 50, top1=0.2, all=0.4, reranked=0.3, em=0.5, seed=9)
        b = build_synthetic("te", 50, top1=0.2, all=0.4, reranked=0.3, em=0.5, seed=9)
        assert a.examples == b.examples
        assert a.judgments == b.judgments
        assert a.scores == b.scores

    def test_unrepresentable_rate_rejected(self):
        with pytest.raises(UnrepresentableProportionError):
            build_synthetic("bn", 1000, top1=0.2795)

    def test_inconsistent_targets_rejected(self):
        with pytest.raises(UnrepresentableProportionError):
            build_synthetic("bn", 10, top1=0.5, all=0.2)

    def test_reranked_cannot_exceed_all(self):
        with pytest.raises(UnrepresentableProportionError):
            build_synthetic("bn", 10, top1=0.2, all=0.4, reranked=0.6)

    def test_subset_rates_must_come_together(self):
        with pytest.raises(ValueError):
            build_synthetic("bn", 10, top1=0.2, all=0.4, lang_top1=0.1)

    def test_subset_targets_exact(self):
        fx = build_synthetic(
            "ja", 1000, top1=0.118, all=0.373,
            lang_top1=0.118, lang_all=0.348, en_top1=0.0, en_all=0.02, seed=3,
        )
        labels = fx.labels()
        assert ais(fx.examples, labels, Pool.TOP1, SubsetFilter.ANY) == 11.8
        assert ais(fx.examples, labels, Pool.ALL, SubsetFilter.ANY) == 37.3
        assert ais(fx.examples, labels, Pool.TOP1, SubsetFilter.IN_LANGUAGE) == 11.8
        assert ais(fx.examples, labels, Pool.ALL, SubsetFilter.IN_LANGUAGE) == pytest.approx(34.8)
        assert ais(fx.examples, labels, Pool.TOP1, SubsetFilter.ENGLISH_EXCLUSIVE) == 0.0
        assert ais(fx.examples, labels, Pool.ALL, SubsetFilter.ENGLISH_EXCLUSIVE) == 2.0

    def test_reranked_target_exact(self):
        fx = build_synthetic("ru", 1000, top1=0.275, all=0.409, reranked=0.396, seed=1)
        assert reranked_ais(fx.examples, fx.labels(), fx.scores) == pytest.approx(39.6)

    def test_em_fraction(self):
        fx = build_synthetic("te", 40, top1=0.2, all=0.3, em=0.25, seed=6)
        bits = em_bits_for(fx.examples)
        assert sum(bits.values()) == 10
        assert len(bits) == 40

    def test_no_gold_answers_without_em(self):
        fx = build_synthetic("te", 10, top1=0.2, seed=6)
        assert all(e.gold_answers == () for e in fx.examples)


class TestHandcrafted:
    def test_ten_cases_load(self):
        cases = handcrafted_cases()
        assert len(cases) == 10
        assert all(isinstance(c, HandcraftedCase) for c in cases)
        assert {c.attribution_label for c in cases} == {0, 1}

    def test_as_example_valid(self):
        for case in handcrafted_cases():
            example, passage = case.as_example()
            assert example.passages == (passage,)


class TestRatingsForJudgments:
    def test_aggregates_back_to_labels(self):
        fx = build_synthetic("bn", 60, top1=0.25, all=0.5, seed=2)
        labels = fx.labels()
        ratings = ratings_for_judgments(labels, Scenario.IN_LANGUAGE, seed=3)
        judgments, excluded = agg.aggregate_all(ratings)
        assert not excluded
        assert {(j.example_id, j.passage_id): j.label for j in judgments} == labels


class TestDemoData:
    def test_bundled_demo_is_loadable_and_consistent(self):
        from xattreval import ingest

        d = demo_data_dir()
        ds = ingest.load_dataset(d / "examples.jsonl", d / "ratings.jsonl")
        assert sorted({e.query_language for e in ds.examples}) == sorted(DEMO_SPECS)
        judgments = ingest.load_judgments(d / "judgments.jsonl")
        regenerated, excluded = agg.aggregate_all(ds.ratings)
        assert not excluded
        assert regenerated == judgments

    def test_demo_scores_cover_every_passage(self):
        from xattreval import ingest

        d = demo_data_dir()
        examples = ingest.load_examples(d / "examples.jsonl")
        scores = ingest.load_scores(d / "scores.jsonl")
        for e in examples:
            assert {sp.passage_id for sp in scores[e.example_id]} == {
                p.passage_id for p in e.passages
            }
