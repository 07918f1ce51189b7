from __future__ import annotations

import json
import threading
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer

import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import make_example, make_passage
from xattreval import scoring
from xattreval.errors import (
    BatchScoringError,
    ConfigurationError,
    InsufficientPoolError,
    ProtocolError,
    ScoreRangeError,
    TransportError,
)
from xattreval.scoring import (
    FewshotExemplar,
    MockScorer,
    PromptTriple,
    ScorerKind,
    ScorerSpec,
    build_fewshot_prompt,
    build_prompt,
    invert_hypothesis,
    normalize,
    remote_score,
    remote_score_batch,
    string_match_score,
)
from xattreval.types import AnswerType


class TestNormalize:
    def test_trim_and_casefold(self):
        assert normalize("  Nairobi ") == "nairobi"

    def test_nfkc_fullwidth(self):
        assert normalize("ＡＢＣ") == "abc"

    def test_fold_and_collapse(self):
        assert normalize("São  Paulo") == "são paulo"

    @given(st.text(max_size=50))
    def test_idempotent_total(self, text):
        once = normalize(text)
        assert normalize(once) == once


class TestStringMatch:
    def test_nairobi_positive(self):
        e = make_example(answer="Nairobi")
        p = make_passage("p1", "Kenya is a country in East Africa. Its capital is Nairobi.")
        assert string_match_score(e, p) == 1.0

    def test_yes_no_predicts_majority_class(self):
        e = make_example(answer="Yes", answer_type=AnswerType.YES_NO)
        p = make_passage("p1", "Yes, this passage literally contains Yes.")
        assert string_match_score(e, p) == 0.0

    def test_no_containment(self):
        e = make_example(answer="x", gold=("x",))
        assert string_match_score(e, make_passage("p1", "y")) == 0.0

    def test_outputs_binary(self):
        e = make_example()
        for text in ("Nairobi", "nothing here"):
            assert string_match_score(e, make_passage("p1", text)) in (0.0, 1.0)

    def test_invariant_to_text_outside_match(self):
        e = make_example(answer="Nairobi")
        assert string_match_score(e, make_passage("p1", "blah Nairobi blah")) == 1.0
        assert string_match_score(e, make_passage("p1", "other words Nairobi more words")) == 1.0

    @given(st.text(min_size=1, max_size=40))
    def test_appending_answer_yields_match(self, passage_text):
        e = make_example(answer="Nairobi")
        p = make_passage("p1", passage_text + " " + e.answer)
        assert string_match_score(e, p) == 1.0


class TestPromptTemplate:
    def test_exact_instantiation(self):
        e = make_example(query="Q?", answer="A")
        p = make_passage("p1", "P.")
        triple = build_prompt(e, p)
        assert triple.premise == "P."
        assert triple.hypothesis == 'the answer to the question "Q?" is "A"'

    def test_quotes_preserved_verbatim(self):
        e = make_example(query='Did he say "yes"?', answer='he said "maybe"')
        triple = build_prompt(e, make_passage("p1", "P"))
        assert '"Did he say "yes"?"' in triple.hypothesis
        assert triple.hypothesis.endswith('"he said "maybe""')

    def test_untrimmed(self):
        e = make_example(query=" Q ", answer=" A ")
        assert build_prompt(e, make_passage("p1", "P")).hypothesis == 'the answer to the question " Q " is " A "'

    def test_unknown_template(self):
        with pytest.raises(ConfigurationError, match="template"):
            build_prompt(make_example(), make_passage(), "nope")

    def test_inversion_round_trip(self):
        e = make_example(query="What's up?", answer="the sky")
        q, a = invert_hypothesis(build_prompt(e, make_passage()).hypothesis)
        assert (q, a) == (e.query, e.answer)

    @given(
        q=st.text(max_size=30).filter(lambda s: '" is "' not in s),
        a=st.text(max_size=30).filter(lambda s: '" is "' not in s),
    )
    def test_inversion_property(self, q, a):
        hyp = scoring.TEMPLATES[scoring.DEFAULT_TEMPLATE_ID](q, a)
        assert invert_hypothesis(hyp) == (q, a)


class TestScorerSpec:
    def test_remote_requires_endpoint(self):
        with pytest.raises(ConfigurationError, match="endpoint"):
            ScorerSpec("r", ScorerKind.REMOTE_ENTAILMENT)

    def test_mock_requires_seed(self):
        with pytest.raises(ConfigurationError, match="seed"):
            ScorerSpec("m", ScorerKind.MOCK)

    def test_valid_specs(self):
        assert ScorerSpec("sm", ScorerKind.STRING_MATCH).template_id == "nli-v1"
        assert ScorerSpec("m", ScorerKind.MOCK, seed=1).seed == 1


class _CannedHandler(BaseHTTPRequestHandler):
    """Serves a fixed queue of (status, body) responses for client tests."""

    responses: list[tuple[int, object]] = []

    def log_message(self, *args) -> None:
        pass

    def do_POST(self):
        self.rfile.read(int(self.headers.get("Content-Length") or 0))
        status, body = self.responses.pop(0) if self.responses else (200, {"score": 0.5})
        raw = json.dumps(body).encode()
        self.send_response(status)
        self.send_header("Content-Length", str(len(raw)))
        self.end_headers()
        self.wfile.write(raw)


@pytest.fixture
def canned_server():
    server = ThreadingHTTPServer(("127.0.0.1", 0), _CannedHandler)
    thread = threading.Thread(target=server.serve_forever, daemon=True)
    thread.start()
    _CannedHandler.responses = []
    host, port = server.server_address[:2]
    yield f"http://{host}:{port}", _CannedHandler.responses
    server.shutdown()
    server.server_close()


TRIPLE = PromptTriple(premise="P", hypothesis="H")


class TestRemoteScore:
    def test_pass_through(self, canned_server):
        url, responses = canned_server
        responses.append((200, {"score": 0.93}))
        assert remote_score(TRIPLE, url) == 0.93

    def test_out_of_range(self, canned_server):
        url, responses = canned_server
        responses.append((200, {"score": 1.7}))
        with pytest.raises(ScoreRangeError):
            remote_score(TRIPLE, url)

    def test_malformed_response(self, canned_server):
        url, responses = canned_server
        responses.append((200, {"value": 0.5}))
        with pytest.raises(ProtocolError, match="score"):
            remote_score(TRIPLE, url)

    def test_boolean_score_rejected(self, canned_server):
        url, responses = canned_server
        responses.append((200, {"score": True}))
        with pytest.raises(ProtocolError):
            remote_score(TRIPLE, url)

    def test_transport_error_reports_attempts(self):
        with pytest.raises(TransportError) as err:
            remote_score(TRIPLE, "http://127.0.0.1:9", retries=3, backoff=0.0, timeout=0.2)
        assert err.value.attempts == 3
        assert "3 attempts" in str(err.value)

    def test_retry_recovers_from_server_error(self, canned_server):
        url, responses = canned_server
        responses.extend([(500, {"error": "boom"}), (200, {"score": 0.25})])
        assert remote_score(TRIPLE, url, backoff=0.0) == 0.25


class TestRemoteScoreBatch:
    def test_positional_alignment(self, canned_server):
        url, responses = canned_server
        responses.append((200, {"scores": [0.1, 0.9]}))
        assert remote_score_batch([TRIPLE, TRIPLE], url) == [0.1, 0.9]

    def test_length_mismatch_is_protocol_error(self, canned_server):
        url, responses = canned_server
        responses.append((200, {"scores": [0.1]}))
        with pytest.raises(ProtocolError, match="aligned"):
            remote_score_batch([TRIPLE, TRIPLE], url)

    def test_item_failures_are_isolated(self, canned_server):
        url, responses = canned_server
        responses.append((200, {"scores": [0.1, 7.0, 0.3]}))
        with pytest.raises(BatchScoringError) as err:
            remote_score_batch([TRIPLE, TRIPLE, TRIPLE], url)
        assert err.value.scores == {0: 0.1, 2: 0.3}
        assert set(err.value.errors) == {1}


class TestMockScorer:
    def test_deterministic(self, example):
        p = example.passages[0]
        a = MockScorer(seed=7).score(example, p)
        b = MockScorer(seed=7).score(example, p)
        assert a == b and 0.0 <= a <= 1.0
        assert MockScorer(seed=8).score(example, p) != a

    def test_oracle_mode(self, example):
        p = example.passages[0]
        labels = {(example.example_id, p.passage_id): 1}
        assert MockScorer(seed=0, mode="oracle", judgments=labels).score(example, p) == 1.0

    def test_oracle_requires_judgments(self):
        with pytest.raises(ConfigurationError, match="judgments"):
            MockScorer(seed=0, mode="oracle")

    def test_noisy_oracle_zero_epsilon_is_oracle(self, example):
        p = example.passages[0]
        labels = {(example.example_id, p.passage_id): 0}
        oracle = MockScorer(seed=3, mode="oracle", judgments=labels)
        noisy = MockScorer(seed=3, mode="noisy_oracle", epsilon=0.0, judgments=labels)
        assert noisy.score(example, p) == oracle.score(example, p)

    def test_constant_mode(self, example):
        assert MockScorer(seed=0, mode="constant", constant=0.4).score(example, example.passages[0]) == 0.4


def exemplar(label: int, passage_language: str, i: int, rationale: str | None = "because") -> FewshotExemplar:
    return FewshotExemplar(
        query=f"q{i}?",
        answer=f"a{i}",
        passage_text=f"passage {i}",
        passage_language=passage_language,
        query_language="te",
        label=label,
        rationale=rationale,
    )


def full_pool() -> list[FewshotExemplar]:
    return [
        exemplar(1, "te", 1),
        exemplar(1, "en", 2),
        exemplar(0, "te", 3),
        exemplar(0, "en", 4),
        exemplar(1, "te", 5),
        exemplar(0, "en", 6),
    ]


class TestFewshotPrompt:
    TARGET = ("target q?", "target a", "target passage")

    def test_structure_and_class_order(self):
        prompt = build_fewshot_prompt(self.TARGET, full_pool(), "te", seed=7)
        labels = [line.split(": ")[1] for line in prompt.splitlines() if line.startswith("attributed: ")]
        assert labels == ["yes", "no", "yes", "no"]
        assert prompt.endswith('premise: "target passage" hypothesis: '
                               'the answer to the question "target q?" is "target a"\nattributed:')
        assert prompt.count("premise: ") == 5

    def test_deterministic_bytes(self):
        a = build_fewshot_prompt(self.TARGET, full_pool(), "te", seed=7)
        b = build_fewshot_prompt(self.TARGET, full_pool(), "te", seed=7)
        assert a == b

    def test_insufficient_pool(self):
        pool = [ex for ex in full_pool() if not (ex.label == 0 and ex.passage_language == "en")]
        with pytest.raises(InsufficientPoolError, match="negative"):
            build_fewshot_prompt(self.TARGET, pool, "te", seed=7)

    def test_rationales_interleaved(self):
        prompt = build_fewshot_prompt(self.TARGET, full_pool(), "te", seed=7, with_rationale=True)
        assert prompt.count("rationale: because") == 4

    def test_rationale_required_when_requested(self):
        pool = [exemplar(1, "te", 1, None), exemplar(1, "en", 2), exemplar(0, "te", 3), exemplar(0, "en", 4)]
        with pytest.raises(InsufficientPoolError):
            build_fewshot_prompt(self.TARGET, pool, "te", seed=7, with_rationale=True)

    def test_golden_snapshot(self):
        from pathlib import Path

        golden = Path(__file__).parent / "golden" / "fewshot_seed7.txt"
        prompt = build_fewshot_prompt(self.TARGET, full_pool(), "te", seed=7, with_rationale=True)
        assert prompt == golden.read_text("utf-8")
