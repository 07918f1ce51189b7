"""Immutable domain types shared by every module.

All types are frozen dataclasses: value semantics (equality over field
values, hashing consistent with equality) and safe to share across
concurrent workers. Constructors validate their invariants and raise
:class:`~xattreval.errors.ValidationError` naming the first violated field.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from enum import Enum
from typing import Mapping

from .errors import ValidationError

#: 2-3 lowercase letters, optionally followed by a lowercase region subtag.
LANGUAGE_RE = re.compile(r"[a-z]{2,3}(-[a-z0-9]{2,8})?")

ENGLISH = "en"


def validate_language(code: str, path: str = "language") -> str:
    """Return ``code`` unchanged if it is a well-formed language tag."""
    if not isinstance(code, str) or not LANGUAGE_RE.fullmatch(code):
        raise ValidationError(f"{path}: {code!r} is not a valid language code")
    return code


class Scenario(str, Enum):
    """Attribution-evaluation scenario: judged in the query language or in English."""

    IN_LANGUAGE = "in_language"
    IN_ENGLISH = "in_english"


class AnswerType(str, Enum):
    YES_NO = "yes_no"
    SHORT_SPAN = "short_span"


@dataclass(frozen=True, slots=True)
class Passage:
    """One retrieved candidate passage.

    ``translated`` marks text produced by machine translation; the original
    language and text are kept alongside so either form can be audited.
    """

    passage_id: str
    text: str
    language: str
    retrieval_rank: int
    translated: bool = False
    original_language: str | None = None
    original_text: str | None = None

    def __post_init__(self) -> None:
        if not self.passage_id:
            raise ValidationError("passage_id: must be non-empty")
        if not self.text:
            raise ValidationError(f"passages[{self.passage_id}].text: must be non-empty")
        validate_language(self.language, f"passages[{self.passage_id}].language")
        if not isinstance(self.retrieval_rank, int) or self.retrieval_rank < 1:
            raise ValidationError(
                f"passages[{self.passage_id}].retrieval_rank: must be a positive integer,"
                f" got {self.retrieval_rank!r}"
            )
        if self.original_language is not None:
            validate_language(
                self.original_language, f"passages[{self.passage_id}].original_language"
            )


@dataclass(frozen=True, slots=True)
class Example:
    """One (query, predicted answer, gold answers, candidate passages) unit.

    ``gold_answers`` may be empty (attribution-only evaluation); the
    predicted ``answer`` never is. Passages are the pool fed to the answer
    generator, sorted by retrieval rank with ranks contiguous from 1.
    """

    example_id: str
    query: str
    query_language: str
    answer: str
    gold_answers: tuple[str, ...]
    answer_type: AnswerType
    passages: tuple[Passage, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "gold_answers", tuple(self.gold_answers))
        object.__setattr__(self, "passages", tuple(self.passages))
        validate_example(self)

    def passage(self, passage_id: str) -> Passage:
        for p in self.passages:
            if p.passage_id == passage_id:
                return p
        raise KeyError(passage_id)


def validate_example(e: Example) -> Example:
    """Check every Example invariant; return ``e`` unchanged if all hold.

    Reports the first violated invariant with its field path.
    """
    if not e.example_id:
        raise ValidationError("example_id: must be non-empty")
    validate_language(e.query_language, "query_language")
    if not e.answer:
        raise ValidationError("answer: must be non-empty")
    if not isinstance(e.answer_type, AnswerType):
        raise ValidationError(f"answer_type: expected AnswerType, got {e.answer_type!r}")
    seen: set[str] = set()
    for i, p in enumerate(e.passages):
        if p.passage_id in seen:
            raise ValidationError(f"passages[{i}].passage_id: duplicate passage_id {p.passage_id!r}")
        seen.add(p.passage_id)
        if p.retrieval_rank != i + 1:
            raise ValidationError(
                f"passages[{i}].retrieval_rank: non-contiguous ranks"
                f" (expected {i + 1}, got {p.retrieval_rank})"
            )
    return e


@dataclass(frozen=True, slots=True)
class RatingRecord:
    """One rater's judgment of one (query, answer, passage) triple.

    Two-step protocol: the attribution question is only shown once the
    (query, answer) pair was found interpretable, so ``attributed`` may be
    present only when ``interpretable`` is true or was not recorded.
    Flagged records carry no judgment at all.
    """

    example_id: str
    passage_id: str
    rater_id: str
    scenario: Scenario
    interpretable: bool | None = None
    attributed: bool | None = None
    flagged: bool = False

    def __post_init__(self) -> None:
        if not isinstance(self.scenario, Scenario):
            raise ValidationError(f"scenario: expected Scenario, got {self.scenario!r}")
        if self.flagged and self.attributed is not None:
            raise ValidationError("attributed: flagged records carry no judgment")
        if self.attributed is not None and self.interpretable is False:
            raise ValidationError(
                "attributed: present although interpretable is false (two-step protocol)"
            )


@dataclass(frozen=True, slots=True)
class AttributionJudgment:
    """Aggregated gold label for one (example, passage, scenario) triple.

    ``label`` is 1 exactly when at least two valid ratings voted yes.
    """

    example_id: str
    passage_id: str
    scenario: Scenario
    label: int
    valid_rating_count: int
    yes_votes: int

    def __post_init__(self) -> None:
        if not isinstance(self.scenario, Scenario):
            raise ValidationError(f"scenario: expected Scenario, got {self.scenario!r}")
        if self.label not in (0, 1):
            raise ValidationError(f"label: must be 0 or 1, got {self.label!r}")
        if self.valid_rating_count < 2:
            raise ValidationError(
                f"valid_rating_count: must be >= 2, got {self.valid_rating_count}"
            )
        if not 0 <= self.yes_votes <= self.valid_rating_count:
            raise ValidationError(
                f"yes_votes: must be within [0, valid_rating_count], got {self.yes_votes}"
            )
        if self.label != (1 if self.yes_votes >= 2 else 0):
            raise ValidationError("label: inconsistent with yes_votes (label 1 iff yes_votes >= 2)")


@dataclass(frozen=True, slots=True)
class ScoredPassage:
    """A passage plus an attribution probability from some scorer."""

    passage_id: str
    score: float
    scorer_name: str

    def __post_init__(self) -> None:
        if not 0.0 <= self.score <= 1.0:
            raise ValidationError(f"score: must be in [0, 1], got {self.score!r}")


def _check_percent(name: str, value: float | None) -> None:
    if value is not None and not 0.0 <= value <= 100.0:
        raise ValidationError(f"{name}: percentage must be in [0, 100], got {value!r}")


@dataclass(frozen=True, slots=True)
class LanguageMetrics:
    """Computed metric values for one language; absent values stay ``None``.

    All fields except ``roc_auc`` (a probability) and
    ``relative_improvement`` (signed) are percentages in [0, 100].
    """

    ais_top1: float | None = None
    ais_all: float | None = None
    ais_reranked: float | None = None
    ais_of_em: float | None = None
    ais_non_em: float | None = None
    subset_any: float | None = None
    subset_in_language: float | None = None
    subset_english: float | None = None
    roc_auc: float | None = None
    accuracy: float | None = None
    agreement_with_consensus: float | None = None
    scenario_disagreement: float | None = None
    relative_improvement: float | None = None

    def __post_init__(self) -> None:
        for name in (
            "ais_top1",
            "ais_all",
            "ais_reranked",
            "ais_of_em",
            "ais_non_em",
            "subset_any",
            "subset_in_language",
            "subset_english",
            "accuracy",
            "agreement_with_consensus",
            "scenario_disagreement",
        ):
            _check_percent(name, getattr(self, name))
        if self.roc_auc is not None and not 0.0 <= self.roc_auc <= 1.0:
            raise ValidationError(f"roc_auc: must be in [0, 1], got {self.roc_auc!r}")


@dataclass(frozen=True, slots=True)
class EvalReport:
    """Per-language metric rows, in presentation order (``avg`` last)."""

    rows: tuple[tuple[str, LanguageMetrics], ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "rows", tuple((str(k), v) for k, v in self.rows))
        keys = [k for k, _ in self.rows]
        if len(set(keys)) != len(keys):
            raise ValidationError("rows: duplicate language key")

    @classmethod
    def from_mapping(cls, per_language: Mapping[str, LanguageMetrics]) -> "EvalReport":
        ordered = sorted((k for k in per_language if k != "avg"))
        if "avg" in per_language:
            ordered.append("avg")
        return cls(tuple((k, per_language[k]) for k in ordered))

    def languages(self) -> tuple[str, ...]:
        return tuple(k for k, _ in self.rows)

    def get(self, language: str) -> LanguageMetrics:
        for k, v in self.rows:
            if k == language:
                return v
        raise KeyError(language)

    def as_dict(self) -> dict[str, LanguageMetrics]:
        return dict(self.rows)
