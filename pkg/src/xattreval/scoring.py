"""Attribution detection: map a (query, answer, passage) triple to a probability.

Implementations are pluggable behind a tiny duck-typed interface: anything
with a ``name`` attribute and a ``score(example, passage) -> float`` method.
The remote scorer talks the wire protocol implemented by any entailment
service: ``POST /v1/score {"premise", "hypothesis"} -> {"score"}`` and
``POST /v1/score_batch {"items": [...]} -> {"scores": [...]}`` (positionally
aligned).
"""

from __future__ import annotations

import hashlib
import random
import time
import unicodedata
from dataclasses import dataclass
from enum import Enum
from typing import Mapping, Sequence

import requests

from .errors import (
    BatchScoringError,
    ConfigurationError,
    InsufficientPoolError,
    ProtocolError,
    ScoreRangeError,
    TransportError,
)
from .types import ENGLISH, AnswerType, Example, Passage, validate_language

# ---------------------------------------------------------------------------
# text normalization

def normalize(text: str) -> str:
    """Unicode-compatibility normalization: NFKC, case fold, collapse whitespace.

    Total function; also the normalization used by exact-match (no English
    article stripping -- it does not transfer across languages).
    """
    return " ".join(unicodedata.normalize("NFKC", text).casefold().split())


# ---------------------------------------------------------------------------
# prompt templates

DEFAULT_TEMPLATE_ID = "nli-v1"

_HYPOTHESIS_PREFIX = 'the answer to the question "'
_HYPOTHESIS_INFIX = '" is "'
_HYPOTHESIS_SUFFIX = '"'


@dataclass(frozen=True, slots=True)
class PromptTriple:
    """A (premise, hypothesis) pair ready for an entailment scorer."""

    premise: str
    hypothesis: str


def _render_hypothesis(query: str, answer: str) -> str:
    return f"{_HYPOTHESIS_PREFIX}{query}{_HYPOTHESIS_INFIX}{answer}{_HYPOTHESIS_SUFFIX}"


TEMPLATES = {DEFAULT_TEMPLATE_ID: _render_hypothesis}


def build_prompt(e: Example, p: Passage, template_id: str = DEFAULT_TEMPLATE_ID) -> PromptTriple:
    """Instantiate the template with verbatim (untrimmed, unescaped) q, a, p."""
    if template_id not in TEMPLATES:
        raise ConfigurationError(f"unknown template_id {template_id!r}")
    return PromptTriple(premise=p.text, hypothesis=TEMPLATES[template_id](e.query, e.answer))


def invert_hypothesis(hypothesis: str, template_id: str = DEFAULT_TEMPLATE_ID) -> tuple[str, str]:
    """Recover (query, answer) from a rendered hypothesis.

    Quotes are not escaped in the template, so inversion is ambiguous only
    when the answer itself contains the full ``" is "`` delimiter sequence;
    we split on its last occurrence.
    """
    if template_id not in TEMPLATES:
        raise ConfigurationError(f"unknown template_id {template_id!r}")
    if not hypothesis.startswith(_HYPOTHESIS_PREFIX) or not hypothesis.endswith(_HYPOTHESIS_SUFFIX):
        raise ValueError("hypothesis does not match the template shape")
    body = hypothesis[len(_HYPOTHESIS_PREFIX) : -len(_HYPOTHESIS_SUFFIX)]
    query, sep, answer = body.rpartition(_HYPOTHESIS_INFIX)
    if not sep:
        raise ValueError("hypothesis does not match the template shape")
    return query, answer


# ---------------------------------------------------------------------------
# scorer specifications


class ScorerKind(str, Enum):
    STRING_MATCH = "string_match"
    STRING_MATCH_TRANSLATE_TEST = "string_match_translate_test"
    REMOTE_ENTAILMENT = "remote_entailment"
    MOCK = "mock"


@dataclass(frozen=True, slots=True)
class ScorerSpec:
    name: str
    kind: ScorerKind
    endpoint: str | None = None
    template_id: str = DEFAULT_TEMPLATE_ID
    seed: int | None = None

    def __post_init__(self) -> None:
        if self.kind is ScorerKind.REMOTE_ENTAILMENT and not self.endpoint:
            raise ConfigurationError("remote_entailment scorer requires an endpoint")
        if self.kind is ScorerKind.MOCK and self.seed is None:
            raise ConfigurationError("mock scorer requires a seed")


# ---------------------------------------------------------------------------
# string match


def string_match_score(e: Example, p: Passage) -> float:
    """1.0 iff the normalized answer is a substring of the normalized passage.

    Yes/no answers always score 0.0 (the majority class). Matching is over
    normalized codepoints, not grapheme clusters.
    """
    if e.answer_type is AnswerType.YES_NO:
        return 0.0
    return 1.0 if normalize(e.answer) in normalize(p.text) else 0.0


class StringMatchScorer:
    """Containment baseline; scores lie in {0.0, 1.0}."""

    name = "string-match"

    def score(self, e: Example, p: Passage) -> float:
        return string_match_score(e, p)


class TranslateTestStringMatchScorer:
    """String match after translating the whole example into ``target``.

    Translations are computed once per example and reused across its
    passages; safe for concurrent use apart from benign duplicate misses.
    """

    name = "string-match-tt"

    def __init__(self, client, cache=None, target: str = ENGLISH):
        from .translate import translate_example_for_test

        self._translate_example = translate_example_for_test
        self._client = client
        self._cache = cache
        self._target = target
        self._memo: dict[str, Example] = {}

    def score(self, e: Example, p: Passage) -> float:
        translated = self._memo.get(e.example_id)
        if translated is None:
            translated = self._translate_example(e, self._target, self._client, self._cache)
            self._memo[e.example_id] = translated
        return string_match_score(translated, translated.passage(p.passage_id))


# ---------------------------------------------------------------------------
# remote entailment scorer

DEFAULT_RETRIES = 3
DEFAULT_BACKOFF_SECONDS = 0.25


def _post_json(
    url: str,
    payload: dict,
    *,
    timeout: float,
    retries: int,
    backoff: float,
    session: requests.Session | None = None,
) -> dict:
    post = (session or requests).post
    last: Exception | None = None
    for attempt in range(1, retries + 1):
        try:
            resp = post(url, json=payload, timeout=timeout)
        except requests.RequestException as exc:
            last = exc
            if attempt < retries:
                time.sleep(backoff * (2 ** (attempt - 1)))
            continue
        if resp.status_code >= 500:
            last = ProtocolError(f"server error {resp.status_code} from {url}")
            if attempt < retries:
                time.sleep(backoff * (2 ** (attempt - 1)))
            continue
        if resp.status_code != 200:
            raise ProtocolError(f"unexpected status {resp.status_code} from {url}: {resp.text[:200]}")
        try:
            obj = resp.json()
        except ValueError as exc:
            raise ProtocolError(f"non-JSON response from {url}") from exc
        if not isinstance(obj, dict):
            raise ProtocolError(f"expected a JSON object from {url}")
        return obj
    raise TransportError(f"request to {url} failed: {last}", attempts=retries)


def _validate_score(value, where: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ProtocolError(f"{where}: score must be a number, got {value!r}")
    score = float(value)
    if not 0.0 <= score <= 1.0:
        raise ScoreRangeError(f"{where}: score {score} outside [0, 1]")
    return score


def remote_score(
    triple: PromptTriple,
    endpoint: str,
    *,
    timeout: float = 30.0,
    retries: int = DEFAULT_RETRIES,
    backoff: float = DEFAULT_BACKOFF_SECONDS,
    session: requests.Session | None = None,
) -> float:
    """Score one triple via ``POST {endpoint}/v1/score``, validated to [0, 1]."""
    obj = _post_json(
        endpoint.rstrip("/") + "/v1/score",
        {"premise": triple.premise, "hypothesis": triple.hypothesis},
        timeout=timeout,
        retries=retries,
        backoff=backoff,
        session=session,
    )
    if "score" not in obj:
        raise ProtocolError("response missing 'score'")
    return _validate_score(obj["score"], "/v1/score")


def remote_score_batch(
    triples: Sequence[PromptTriple],
    endpoint: str,
    *,
    timeout: float = 60.0,
    retries: int = DEFAULT_RETRIES,
    backoff: float = DEFAULT_BACKOFF_SECONDS,
    session: requests.Session | None = None,
) -> list[float]:
    """Score a batch; item failures are isolated, not fatal to the batch.

    If any item is invalid, raises :class:`BatchScoringError` carrying the
    valid scores alongside the per-item errors.
    """
    obj = _post_json(
        endpoint.rstrip("/") + "/v1/score_batch",
        {"items": [{"premise": t.premise, "hypothesis": t.hypothesis} for t in triples]},
        timeout=timeout,
        retries=retries,
        backoff=backoff,
        session=session,
    )
    scores = obj.get("scores")
    if not isinstance(scores, list) or len(scores) != len(triples):
        raise ProtocolError(
            f"batch response must carry {len(triples)} positionally aligned scores"
        )
    good: dict[int, float] = {}
    bad: dict[int, Exception] = {}
    for i, value in enumerate(scores):
        try:
            good[i] = _validate_score(value, f"/v1/score_batch item {i}")
        except ProtocolError as exc:
            bad[i] = exc
    if bad:
        raise BatchScoringError(good, bad)
    return [good[i] for i in range(len(triples))]


class RemoteEntailmentScorer:
    """Client for an entailment service speaking the scorer wire protocol."""

    def __init__(
        self,
        endpoint: str,
        template_id: str = DEFAULT_TEMPLATE_ID,
        *,
        name: str = "remote",
        timeout: float = 30.0,
        retries: int = DEFAULT_RETRIES,
        backoff: float = DEFAULT_BACKOFF_SECONDS,
    ):
        if not endpoint:
            raise ConfigurationError("remote scorer requires an endpoint")
        self.name = name
        self.endpoint = endpoint
        self.template_id = template_id
        self._timeout = timeout
        self._retries = retries
        self._backoff = backoff
        self._session = requests.Session()

    def score(self, e: Example, p: Passage) -> float:
        return remote_score(
            build_prompt(e, p, self.template_id),
            self.endpoint,
            timeout=self._timeout,
            retries=self._retries,
            backoff=self._backoff,
            session=self._session,
        )

    def score_batch(self, triples: Sequence[PromptTriple]) -> list[float]:
        return remote_score_batch(
            triples,
            self.endpoint,
            timeout=self._timeout,
            retries=self._retries,
            backoff=self._backoff,
            session=self._session,
        )


# ---------------------------------------------------------------------------
# mock scorer


def hash_unit(key: str) -> float:
    """Stable pseudo-random unit-interval value derived from a string key."""
    digest = hashlib.sha256(key.encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "big") / 2**64


class MockScorer:
    """Deterministic test double.

    Modes:
      * ``hash`` -- stable pseudo-random score from (seed, example, passage);
      * ``oracle`` -- returns the gold label as a score (requires judgments);
      * ``noisy_oracle`` -- oracle whose output flips with probability
        ``epsilon`` (deterministic given the seed; ``epsilon=0`` is the oracle);
      * ``constant`` -- the same score everywhere (rank tie-break exerciser).
    """

    MODES = ("hash", "oracle", "noisy_oracle", "constant")

    def __init__(
        self,
        seed: int,
        mode: str = "hash",
        *,
        epsilon: float = 0.0,
        judgments: Mapping[tuple[str, str], int] | None = None,
        constant: float = 0.5,
    ):
        if mode not in self.MODES:
            raise ConfigurationError(f"unknown mock mode {mode!r}; expected one of {self.MODES}")
        if mode in ("oracle", "noisy_oracle") and judgments is None:
            raise ConfigurationError(f"{mode} mode requires gold judgments")
        if not 0.0 <= epsilon <= 1.0:
            raise ConfigurationError(f"epsilon must be in [0, 1], got {epsilon}")
        self.name = f"mock-{mode}"
        self.seed = seed
        self.mode = mode
        self.epsilon = epsilon
        self.judgments = judgments
        self.constant = constant

    def score(self, e: Example, p: Passage) -> float:
        key = (e.example_id, p.passage_id)
        if self.mode == "constant":
            return self.constant
        if self.mode == "hash":
            return hash_unit(f"{self.seed}|{key[0]}|{key[1]}")
        assert self.judgments is not None
        if key not in self.judgments:
            raise ConfigurationError(f"oracle mock has no judgment for {key!r}")
        label = float(self.judgments[key])
        if self.mode == "oracle":
            return label
        flip = hash_unit(f"{self.seed}|{key[0]}|{key[1]}") < self.epsilon
        return 1.0 - label if flip else label


def build_scorer(
    spec: ScorerSpec,
    *,
    judgments: Mapping[tuple[str, str], int] | None = None,
    translation_client=None,
    translation_cache=None,
    mock_mode: str = "hash",
    epsilon: float = 0.0,
):
    """Construct the scorer described by ``spec``.

    ``judgments`` feed the oracle mock modes; ``translation_client`` (and an
    optional cache) back the translate-test string matcher.
    """
    if spec.kind is ScorerKind.STRING_MATCH:
        return StringMatchScorer()
    if spec.kind is ScorerKind.STRING_MATCH_TRANSLATE_TEST:
        if translation_client is None:
            raise ConfigurationError("translate-test string matching requires a translation client")
        return TranslateTestStringMatchScorer(translation_client, translation_cache)
    if spec.kind is ScorerKind.REMOTE_ENTAILMENT:
        return RemoteEntailmentScorer(spec.endpoint, spec.template_id, name=spec.name)
    return MockScorer(spec.seed, mock_mode, epsilon=epsilon, judgments=judgments)


# ---------------------------------------------------------------------------
# few-shot prompt assembly


@dataclass(frozen=True, slots=True)
class FewshotExemplar:
    """A labeled (q, a, p) triple usable as an in-context exemplar.

    ``rationale`` is an opaque string (authored elsewhere) interleaved into
    the prompt when requested.
    """

    query: str
    answer: str
    passage_text: str
    passage_language: str
    query_language: str
    label: int
    rationale: str | None = None


def _render_exemplar(ex: FewshotExemplar, with_rationale: bool) -> str:
    lines = [f'premise: "{ex.passage_text}" hypothesis: {_render_hypothesis(ex.query, ex.answer)}']
    if with_rationale:
        lines.append(f"rationale: {ex.rationale}")
    lines.append(f"attributed: {'yes' if ex.label == 1 else 'no'}")
    return "\n".join(lines)


def build_fewshot_prompt(
    target: tuple[str, str, str],
    exemplars: Sequence[FewshotExemplar],
    query_language: str,
    seed: int,
    *,
    with_rationale: bool = False,
    template_id: str = DEFAULT_TEMPLATE_ID,
) -> str:
    """Assemble the 4-shot prompt for ``target`` = (query, answer, passage_text).

    Two positives and two negatives are drawn for the target language; within
    each class one exemplar has an in-language passage and the other an
    English passage. Classes alternate pos,neg,pos,neg (in-language pair
    first) so prompts are reproducible; sampling is deterministic given the
    seed and pool order.
    """
    if template_id not in TEMPLATES:
        raise ConfigurationError(f"unknown template_id {template_id!r}")
    validate_language(query_language, "query_language")
    pool = [ex for ex in exemplars if ex.query_language == query_language]
    if with_rationale:
        pool = [ex for ex in pool if ex.rationale]

    def cell(label: int, in_language: bool) -> list[FewshotExemplar]:
        wanted = query_language if in_language else ENGLISH
        return [ex for ex in pool if ex.label == label and ex.passage_language == wanted]

    rng = random.Random(seed)
    picks: list[FewshotExemplar] = []
    # order: pos/in-lang, neg/in-lang, pos/en, neg/en
    for label, in_language in ((1, True), (0, True), (1, False), (0, False)):
        candidates = cell(label, in_language)
        if not candidates:
            kind = "positive" if label == 1 else "negative"
            where = "in-language" if in_language else "in-English"
            raise InsufficientPoolError(
                f"no {kind} exemplar with an {where} passage for language {query_language!r}"
                + (" and a rationale" if with_rationale else "")
            )
        picks.append(rng.choice(candidates))

    query, answer, passage_text = target
    blocks = [_render_exemplar(ex, with_rationale) for ex in picks]
    blocks.append(
        f'premise: "{passage_text}" hypothesis: {_render_hypothesis(query, answer)}\nattributed:'
    )
    return "\n\n".join(blocks)
