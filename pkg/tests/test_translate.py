from __future__ import annotations

import pytest

from conftest import make_example, make_passage
from xattreval.errors import ConfigurationError
from xattreval.translate import (
    HttpTranslationClient,
    MockTranslationClient,
    TranslationCache,
    translate,
    translate_example_for_test,
)


class CountingClient:
    """Dictionary-backed test double that counts service calls."""

    client_id = "test:counting-v1"

    def __init__(self, mapping=None):
        self.mapping = mapping or {}
        self.calls = 0

    def translate_text(self, text, source, target):
        self.calls += 1
        return self.mapping.get(text, f"{target}:{text}")


class TestTranslate:
    def test_identity_when_source_equals_target(self):
        assert translate("text", "ja", "ja", client=None) == "text"

    def test_cache_hit_skips_client(self):
        client = CountingClient()
        cache = TranslationCache()
        first = translate("hello", "en", "fi", client, cache)
        second = translate("hello", "en", "fi", client, cache)
        assert first == second == "fi:hello"
        assert client.calls == 1

    def test_mock_client_marker(self):
        out = translate("hello", "en", "fi", MockTranslationClient())
        assert out == "[fi] hello"

    def test_missing_client_is_configuration_error(self):
        with pytest.raises(ConfigurationError):
            translate("text", "en", "fi", client=None)

    def test_cache_key_includes_client_identity(self):
        assert TranslationCache.key("t", "en", "fi", "a") != TranslationCache.key("t", "en", "fi", "b")

    def test_cache_persists_across_instances(self, tmp_path):
        path = tmp_path / "cache.jsonl"
        client = CountingClient()
        translate("hello", "en", "fi", client, TranslationCache(path))
        # a fresh cache object over the same file serves the hit
        assert translate("hello", "en", "fi", client, TranslationCache(path)) == "fi:hello"
        assert client.calls == 1

    def test_http_client_against_mock_server(self, mock_server_url):
        client = HttpTranslationClient(mock_server_url)
        assert client.translate_text("hello", "en", "fi") == "[fi] hello"
        assert translate("hello", "en", "fi", client) == "[fi] hello"


class TestTranslateExampleForTest:
    def bn_example(self):
        return make_example(
            eid="e1",
            language="bn",
            query="bn question?",
            answer="bn answer",
            gold=("bn gold",),
            passages=(
                make_passage("p1", "english passage", "en", 1),
                make_passage("p2", "bengali passage", "bn", 2),
            ),
        )

    def test_all_english_unchanged(self):
        e = make_example(language="en", passages=(make_passage("p1", "text", "en"),))
        out = translate_example_for_test(e, "en", CountingClient())
        assert out == e
        assert out.passages[0].translated is False

    def test_english_passage_untouched_query_translated(self):
        client = CountingClient()
        out = translate_example_for_test(self.bn_example(), "en", client)
        assert out.query == "en:bn question?"
        assert out.answer == "en:bn answer"
        assert out.gold_answers == ("en:bn gold",)
        p1, p2 = out.passages
        assert p1.text == "english passage" and not p1.translated
        assert p2.text == "en:bengali passage" and p2.translated

    def test_markers_record_original(self):
        out = translate_example_for_test(self.bn_example(), "en", CountingClient())
        p2 = out.passages[1]
        assert p2.original_language == "bn"
        assert p2.original_text == "bengali passage"
        assert p2.language == "en"
        assert p2.retrieval_rank == 2
        assert out.query_language == "en"

    def test_idempotent(self):
        client = CountingClient()
        once = translate_example_for_test(self.bn_example(), "en", client)
        twice = translate_example_for_test(once, "en", client)
        assert once == twice

    def test_client_errors_abort(self):
        class FailingClient:
            client_id = "test:fail"

            def translate_text(self, text, source, target):
                raise ConfigurationError("boom")

        with pytest.raises(ConfigurationError):
            translate_example_for_test(self.bn_example(), "en", FailingClient())
