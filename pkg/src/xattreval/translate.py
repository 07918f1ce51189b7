"""Translation-client abstraction with a persistent content-addressed cache.

Clients speak the translation wire protocol
(``POST /v1/translate {"text", "source", "target"} -> {"text"}``) or are
in-process test doubles. The cache is an append-only JSON-lines file keyed
by a hash of (normalized text, source, target, client identity), so
expensive translations are never repeated across evaluations.
"""

from __future__ import annotations

import hashlib
import json
import threading
from pathlib import Path
from typing import Protocol

import requests

from .errors import ConfigurationError, ProtocolError, SchemaError
from .scoring import DEFAULT_BACKOFF_SECONDS, DEFAULT_RETRIES, _post_json, normalize
from .types import Example, Passage, validate_language


class TranslationClient(Protocol):
    client_id: str

    def translate_text(self, text: str, source: str | None, target: str) -> str:
        ...


class HttpTranslationClient:
    """Client for a translation service; transport failures retry with backoff."""

    def __init__(
        self,
        endpoint: str,
        *,
        timeout: float = 30.0,
        retries: int = DEFAULT_RETRIES,
        backoff: float = DEFAULT_BACKOFF_SECONDS,
    ):
        if not endpoint:
            raise ConfigurationError("translation client requires an endpoint")
        self.endpoint = endpoint
        self.client_id = f"http:{endpoint}"
        self._timeout = timeout
        self._retries = retries
        self._backoff = backoff
        self._session = requests.Session()

    def translate_text(self, text: str, source: str | None, target: str) -> str:
        obj = _post_json(
            self.endpoint.rstrip("/") + "/v1/translate",
            {"text": text, "source": source, "target": target},
            timeout=self._timeout,
            retries=self._retries,
            backoff=self._backoff,
            session=self._session,
        )
        if "text" not in obj or not isinstance(obj["text"], str):
            raise ProtocolError("translation response must carry a string 'text'")
        return obj["text"]


class MockTranslationClient:
    """Pass-through double: prefixes a deterministic marker, for pipeline tests."""

    client_id = "mock:marker-v1"

    def translate_text(self, text: str, source: str | None, target: str) -> str:
        return f"[{target}] {text}"


class TranslationCache:
    """Append-only persistent cache with concurrent readers, serialized writers.

    Duplicate concurrent misses may both call the client; the identical
    value is appended twice, which is benign (last write wins).
    """

    def __init__(self, path: str | Path | None = None):
        self._path = Path(path) if path is not None else None
        self._entries: dict[str, str] = {}
        self._lock = threading.Lock()
        if self._path is not None and self._path.exists():
            with open(self._path, "r", encoding="utf-8") as fh:
                for lineno, raw in enumerate(fh, start=1):
                    raw = raw.strip()
                    if not raw:
                        continue
                    try:
                        obj = json.loads(raw)
                    except json.JSONDecodeError as exc:
                        raise SchemaError(
                            f"invalid cache line: {exc.msg}", path=str(self._path), line=lineno
                        ) from exc
                    self._entries[obj["key"]] = obj["translation"]

    @staticmethod
    def key(text: str, source: str | None, target: str, client_id: str) -> str:
        material = "\x1f".join((normalize(text), source or "", target, client_id))
        return hashlib.sha256(material.encode("utf-8")).hexdigest()

    def __len__(self) -> int:
        return len(self._entries)

    def get(self, key: str) -> str | None:
        return self._entries.get(key)

    def put(self, key: str, translation: str) -> None:
        with self._lock:
            self._entries[key] = translation
            if self._path is not None:
                self._path.parent.mkdir(parents=True, exist_ok=True)
                with open(self._path, "a", encoding="utf-8") as fh:
                    fh.write(json.dumps({"key": key, "translation": translation}, ensure_ascii=False) + "\n")


def translate(
    text: str,
    source: str | None,
    target: str,
    client: TranslationClient | None,
    cache: TranslationCache | None = None,
) -> str:
    """Translate ``text`` from ``source`` to ``target`` through ``client``.

    Identity when source == target; a cache hit never calls the client.
    """
    validate_language(target, "target")
    if source is not None:
        validate_language(source, "source")
    if source == target:
        return text
    if client is None:
        raise ConfigurationError("no translation client configured")
    key = None
    if cache is not None:
        key = TranslationCache.key(text, source, target, client.client_id)
        hit = cache.get(key)
        if hit is not None:
            return hit
    out = client.translate_text(text, source, target)
    if cache is not None and key is not None:
        cache.put(key, out)
    return out


def translate_example_for_test(
    e: Example,
    target: str,
    client: TranslationClient | None,
    cache: TranslationCache | None = None,
) -> Example:
    """Translate the query, answer, gold answers, and non-target passages.

    Passage metadata records the original language/text and a translated
    marker; retrieval ranks are unchanged. Idempotent: a second application
    is the identity. Client errors abort the whole example.
    """
    validate_language(target, "target")

    def tr(text: str, source: str) -> str:
        return translate(text, source, target, client, cache)

    passages: list[Passage] = []
    for p in e.passages:
        if p.language == target:
            passages.append(p)
        else:
            passages.append(
                Passage(
                    passage_id=p.passage_id,
                    text=tr(p.text, p.language),
                    language=target,
                    retrieval_rank=p.retrieval_rank,
                    translated=True,
                    original_language=p.language,
                    original_text=p.text,
                )
            )
    return Example(
        example_id=e.example_id,
        query=tr(e.query, e.query_language),
        query_language=target,
        answer=tr(e.answer, e.query_language),
        gold_answers=tuple(tr(g, e.query_language) for g in e.gold_answers),
        answer_type=e.answer_type,
        passages=tuple(passages),
    )
