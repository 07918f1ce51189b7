from __future__ import annotations

import json

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import make_example, make_passage
from xattreval import ingest
from xattreval.errors import ConfigurationError, SchemaError
from xattreval.types import AnswerType, Example, Passage, Scenario


def example_row(eid="e1", **overrides):
    row = {
        "example_id": eid,
        "query": "What is the capital of Kenya?",
        "query_language": "te",
        "answer": "Nairobi",
        "gold_answers": ["Nairobi"],
        "answer_type": "short_span",
        "passages": [
            {"passage_id": "p1", "text": "Its capital is Nairobi.", "language": "en", "retrieval_rank": 1}
        ],
    }
    row.update(overrides)
    return row


def rating_row(**overrides):
    row = {
        "example_id": "e1",
        "passage_id": "p1",
        "rater_id": "r1",
        "scenario": "in_language",
        "interpretable": True,
        "attributed": True,
        "flagged": False,
    }
    row.update(overrides)
    return row


def write_lines(path, rows):
    path.write_text("\n".join(json.dumps(r, ensure_ascii=False) for r in rows) + "\n", "utf-8")


class TestLoadExamples:
    def test_three_line_file(self, tmp_path):
        f = tmp_path / "ex.jsonl"
        write_lines(f, [example_row(f"e{i}") for i in range(3)])
        examples = ingest.load_examples(f)
        assert [e.example_id for e in examples] == ["e0", "e1", "e2"]

    def test_missing_field_reports_line(self, tmp_path):
        f = tmp_path / "ex.jsonl"
        rows = [example_row("e0"), example_row("e1")]
        del rows[1]["query_language"]
        write_lines(f, rows)
        with pytest.raises(SchemaError, match="query_language") as err:
            ingest.load_examples(f)
        assert err.value.line == 2

    def test_ten_passages_ranks_contiguous(self, tmp_path):
        passages = [
            {"passage_id": f"p{i}", "text": f"text {i}", "language": "ja", "retrieval_rank": i}
            for i in range(1, 11)
        ]
        f = tmp_path / "ex.jsonl"
        write_lines(f, [example_row(query_language="ja", passages=passages)])
        (e,) = ingest.load_examples(f)
        assert len(e.passages) == 10
        assert [p.retrieval_rank for p in e.passages] == list(range(1, 11))

    def test_duplicate_example_id_fatal(self, tmp_path):
        f = tmp_path / "ex.jsonl"
        write_lines(f, [example_row("dup"), example_row("dup")])
        with pytest.raises(SchemaError, match="duplicate example_id"):
            ingest.load_examples(f)

    def test_invalid_json_reports_line(self, tmp_path):
        f = tmp_path / "ex.jsonl"
        f.write_text(json.dumps(example_row()) + "\n{oops\n", "utf-8")
        with pytest.raises(SchemaError, match="invalid JSON") as err:
            ingest.load_examples(f)
        assert err.value.line == 2

    def test_meta_line_carries_metadata(self, tmp_path):
        f = tmp_path / "ex.jsonl"
        f.write_text(
            json.dumps({"_meta": {"source_system": "demo"}}) + "\n" + json.dumps(example_row()) + "\n",
            "utf-8",
        )
        examples, meta = ingest.load_examples_with_metadata(f)
        assert len(examples) == 1
        assert meta == {"source_system": "demo"}

    def test_answer_type_inferred_when_absent(self, tmp_path):
        f = tmp_path / "ex.jsonl"
        write_lines(
            f,
            [
                example_row("e-yes", query_language="en", answer="Yes", answer_type=None),
                example_row("e-span", query_language="te", answer="Nairobi", answer_type=None),
                example_row("e-ja", query_language="ja", answer="はい", answer_type=None),
            ],
        )
        by_id = {e.example_id: e.answer_type for e in ingest.load_examples(f)}
        assert by_id == {
            "e-yes": AnswerType.YES_NO,
            "e-span": AnswerType.SHORT_SPAN,
            "e-ja": AnswerType.YES_NO,
        }


class TestLexicon:
    def test_bundled_lexicon_covers_target_languages(self):
        lex = ingest.load_lexicon()
        assert set(lex) >= {"en", "bn", "fi", "ja", "ru", "te"}

    def test_infer_answer_type(self):
        lex = ingest.load_lexicon()
        assert ingest.infer_answer_type("Yes", "en", lex) is AnswerType.YES_NO
        assert ingest.infer_answer_type("Nairobi", "te", lex) is AnswerType.SHORT_SPAN
        # round-trip through the bundled file for the ja entry
        assert ingest.infer_answer_type("はい", "ja", lex) is AnswerType.YES_NO

    def test_missing_language_is_configuration_error(self):
        with pytest.raises(ConfigurationError, match="lexicon"):
            ingest.infer_answer_type("oui", "fr", ingest.load_lexicon())

    def test_override_file(self, tmp_path):
        f = tmp_path / "lex.json"
        f.write_text(json.dumps({"fr": ["oui", "non"]}), "utf-8")
        lex = ingest.load_lexicon(f)
        assert ingest.infer_answer_type("Oui", "fr", lex) is AnswerType.YES_NO


class TestLoadRatings:
    def test_valid_record(self, tmp_path):
        f = tmp_path / "r.jsonl"
        write_lines(f, [rating_row()])
        (r,) = ingest.load_ratings(f)
        assert r.attributed is True and r.flagged is False

    def test_flagged_with_judgment_fatal(self, tmp_path):
        f = tmp_path / "r.jsonl"
        write_lines(f, [rating_row(flagged=True, attributed=True)])
        with pytest.raises(SchemaError, match="flagged records carry no judgment"):
            ingest.load_ratings(f)

    def test_three_raters_three_records(self, tmp_path):
        f = tmp_path / "r.jsonl"
        write_lines(f, [rating_row(rater_id=f"r{i}") for i in (1, 2, 3)])
        assert len(ingest.load_ratings(f)) == 3

    def test_duplicate_rating_fatal(self, tmp_path):
        f = tmp_path / "r.jsonl"
        write_lines(f, [rating_row(), rating_row()])
        with pytest.raises(SchemaError, match="duplicate rating"):
            ingest.load_ratings(f)

    def test_cross_check_rejects_unknown_ids(self, tmp_path):
        f = tmp_path / "r.jsonl"
        write_lines(f, [rating_row(passage_id="nope")])
        with pytest.raises(SchemaError, match="unknown"):
            ingest.load_ratings(f, [make_example(eid="e1", passages=(make_passage("p1"),))])


class TestDeterminismAndRoundTrip:
    def test_load_is_deterministic(self, tmp_path):
        f = tmp_path / "ex.jsonl"
        write_lines(f, [example_row(f"e{i}") for i in range(5)])
        assert ingest.load_examples(f) == ingest.load_examples(f)

    def test_referential_integrity_after_build(self, tmp_path):
        examples = [make_example(eid="e1", passages=(make_passage("p1"),))]
        ratings = [
            ingest.rating_from_dict(rating_row(rater_id="r1")),
            ingest.rating_from_dict(rating_row(rater_id="r2")),
        ]
        ds = ingest.build_dataset(examples, ratings, {"source_system": "test"})
        index = ds.passage_index()
        for r in ds.ratings:
            assert (r.example_id, r.passage_id) in index

    @settings(max_examples=50, deadline=None)
    @given(
        answer=st.text(min_size=1, max_size=30),
        query=st.text(max_size=30),
        gold=st.lists(st.text(max_size=10), max_size=3),
        n_passages=st.integers(min_value=1, max_value=4),
        translated=st.booleans(),
    )
    def test_example_round_trip(self, tmp_path_factory, answer, query, gold, n_passages, translated):
        passages = tuple(
            Passage(
                passage_id=f"p{i}",
                text=f"text {i}",
                language="ru",
                retrieval_rank=i,
                translated=translated,
                original_language="en" if translated else None,
                original_text="original" if translated else None,
            )
            for i in range(1, n_passages + 1)
        )
        e = Example(
            example_id="e1",
            query=query,
            query_language="ru",
            answer=answer,
            gold_answers=tuple(gold),
            answer_type=AnswerType.SHORT_SPAN,
            passages=passages,
        )
        assert ingest.example_from_dict(ingest.example_to_dict(e)) == e

    def test_save_load_files_round_trip(self, tmp_path):
        examples = [
            make_example(eid="a", passages=(make_passage("p1"), make_passage("p2", rank=2))),
            make_example(eid="b"),
        ]
        path = tmp_path / "ex.jsonl"
        ingest.save_examples(examples, path, {"source_system": "t"})
        loaded, meta = ingest.load_examples_with_metadata(path)
        assert loaded == examples
        assert meta["source_system"] == "t"

    def test_judgment_round_trip(self, tmp_path):
        from xattreval.types import AttributionJudgment

        j = AttributionJudgment("e1", "p1", Scenario.IN_ENGLISH, 1, 3, 2)
        path = tmp_path / "j.jsonl"
        ingest.save_judgments([j], path)
        assert ingest.load_judgments(path) == [j]

    def test_scores_round_trip(self, tmp_path):
        from xattreval.types import ScoredPassage

        rows = {"e1": [ScoredPassage("p1", 0.25, "mock"), ScoredPassage("p2", 1.0, "mock")]}
        path = tmp_path / "s.jsonl"
        ingest.save_scores(rows, path)
        assert ingest.load_scores(path) == rows
