"""File formats: parse, validate, and emit the toolkit's line-delimited datasets.

All files are UTF-8 JSON-lines (one object per line). An optional first
line of the form ``{"_meta": {...}}`` carries dataset provenance (source
system, corpus snapshot id, creation date, sampling notes) and is not a
record. Loading is deterministic: the same bytes always produce the same
in-memory dataset.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Any, Iterable, Iterator, Mapping, Sequence

from .errors import ConfigurationError, SchemaError, ValidationError
from .scoring import normalize
from .types import (
    AnswerType,
    AttributionJudgment,
    Example,
    Passage,
    RatingRecord,
    Scenario,
    ScoredPassage,
)

META_KEY = "_meta"

#: Bundled per-language yes/no lexicon, versioned by filename.
DEFAULT_LEXICON_RESOURCE = "yesno_lexicon_v1.json"


# ---------------------------------------------------------------------------
# generic JSONL plumbing


def read_jsonl(path: str | Path) -> Iterator[tuple[int, Any]]:
    """Yield (line_number, parsed_object) pairs, skipping blank lines."""
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            raw = raw.strip()
            if not raw:
                continue
            try:
                yield lineno, json.loads(raw)
            except json.JSONDecodeError as exc:
                raise SchemaError(f"invalid JSON: {exc.msg}", path=str(path), line=lineno) from exc


def write_jsonl(
    rows: Iterable[Mapping[str, Any]], path: str | Path, metadata: Mapping[str, Any] | None = None
) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as fh:
        if metadata is not None:
            fh.write(json.dumps({META_KEY: dict(metadata)}, ensure_ascii=False) + "\n")
        for row in rows:
            fh.write(json.dumps(row, ensure_ascii=False) + "\n")


def _want(obj: Any, key: str, kinds: tuple[type, ...], path: str, line: int, *, optional: bool = False):
    if not isinstance(obj, dict):
        raise SchemaError(f"expected an object, got {type(obj).__name__}", path=path, line=line)
    if key not in obj or obj[key] is None:
        if optional:
            return None
        raise SchemaError(f"missing field {key!r}", path=path, line=line)
    value = obj[key]
    # bool is an int subclass; never accept it where a number/int is wanted
    if isinstance(value, bool) and bool not in kinds:
        raise SchemaError(f"field {key!r}: expected {kinds[0].__name__}, got bool", path=path, line=line)
    if not isinstance(value, kinds):
        raise SchemaError(
            f"field {key!r}: expected {kinds[0].__name__}, got {type(value).__name__}",
            path=path,
            line=line,
        )
    return value


def _is_meta_line(obj: Any) -> bool:
    return isinstance(obj, dict) and set(obj.keys()) == {META_KEY}


# ---------------------------------------------------------------------------
# examples


def example_to_dict(e: Example) -> dict[str, Any]:
    def passage_dict(p: Passage) -> dict[str, Any]:
        d: dict[str, Any] = {
            "passage_id": p.passage_id,
            "text": p.text,
            "language": p.language,
            "retrieval_rank": p.retrieval_rank,
        }
        if p.translated:
            d["translated"] = True
        if p.original_language is not None:
            d["original_language"] = p.original_language
        if p.original_text is not None:
            d["original_text"] = p.original_text
        return d

    return {
        "example_id": e.example_id,
        "query": e.query,
        "query_language": e.query_language,
        "answer": e.answer,
        "gold_answers": list(e.gold_answers),
        "answer_type": e.answer_type.value,
        "passages": [passage_dict(p) for p in e.passages],
    }


def example_from_dict(
    obj: Mapping[str, Any],
    *,
    lexicon: Mapping[str, frozenset[str]] | None = None,
    path: str = "<memory>",
    line: int = 0,
) -> Example:
    query_language = _want(obj, "query_language", (str,), path, line)
    answer = _want(obj, "answer", (str,), path, line)
    raw_type = _want(obj, "answer_type", (str,), path, line, optional=True)
    if raw_type is None:
        # absent in ingested data: derive from the per-language yes/no lexicon
        lexicon = lexicon if lexicon is not None else load_lexicon()
        answer_type = infer_answer_type(answer, query_language, lexicon)
    else:
        try:
            answer_type = AnswerType(raw_type)
        except ValueError:
            raise SchemaError(f"field 'answer_type': unknown value {raw_type!r}", path=path, line=line)
    passages = []
    for i, p in enumerate(_want(obj, "passages", (list,), path, line)):
        if not isinstance(p, dict):
            raise SchemaError(f"field 'passages[{i}]': expected an object", path=path, line=line)
        passages.append(
            Passage(
                passage_id=_want(p, "passage_id", (str,), path, line),
                text=_want(p, "text", (str,), path, line),
                language=_want(p, "language", (str,), path, line),
                retrieval_rank=_want(p, "retrieval_rank", (int,), path, line),
                translated=bool(_want(p, "translated", (bool,), path, line, optional=True) or False),
                original_language=_want(p, "original_language", (str,), path, line, optional=True),
                original_text=_want(p, "original_text", (str,), path, line, optional=True),
            )
        )
    gold = _want(obj, "gold_answers", (list,), path, line)
    if not all(isinstance(g, str) for g in gold):
        raise SchemaError("field 'gold_answers': every entry must be a string", path=path, line=line)
    try:
        return Example(
            example_id=_want(obj, "example_id", (str,), path, line),
            query=_want(obj, "query", (str,), path, line),
            query_language=query_language,
            answer=answer,
            gold_answers=tuple(gold),
            answer_type=answer_type,
            passages=tuple(passages),
        )
    except ValidationError as exc:
        raise SchemaError(str(exc), path=path, line=line) from exc


def load_examples(
    path: str | Path, lexicon: Mapping[str, frozenset[str]] | None = None
) -> list[Example]:
    """Load validated Examples in file order. Duplicate example_id is fatal."""
    return load_examples_with_metadata(path, lexicon)[0]


def load_examples_with_metadata(
    path: str | Path, lexicon: Mapping[str, frozenset[str]] | None = None
) -> tuple[list[Example], dict[str, Any]]:
    examples: list[Example] = []
    metadata: dict[str, Any] = {}
    seen: set[str] = set()
    if lexicon is None:
        lexicon = load_lexicon()
    for lineno, obj in read_jsonl(path):
        if lineno == 1 and _is_meta_line(obj):
            metadata = dict(obj[META_KEY])
            continue
        e = example_from_dict(obj, lexicon=lexicon, path=str(path), line=lineno)
        if e.example_id in seen:
            raise SchemaError(f"duplicate example_id {e.example_id!r}", path=str(path), line=lineno)
        seen.add(e.example_id)
        examples.append(e)
    return examples, metadata


def save_examples(
    examples: Iterable[Example], path: str | Path, metadata: Mapping[str, Any] | None = None
) -> None:
    write_jsonl((example_to_dict(e) for e in examples), path, metadata)


# ---------------------------------------------------------------------------
# ratings


def rating_to_dict(r: RatingRecord) -> dict[str, Any]:
    return {
        "example_id": r.example_id,
        "passage_id": r.passage_id,
        "rater_id": r.rater_id,
        "scenario": r.scenario.value,
        "interpretable": r.interpretable,
        "attributed": r.attributed,
        "flagged": r.flagged,
    }


def rating_from_dict(obj: Mapping[str, Any], *, path: str = "<memory>", line: int = 0) -> RatingRecord:
    raw_scenario = _want(obj, "scenario", (str,), path, line)
    try:
        scenario = Scenario(raw_scenario)
    except ValueError:
        raise SchemaError(f"field 'scenario': unknown value {raw_scenario!r}", path=path, line=line)
    try:
        return RatingRecord(
            example_id=_want(obj, "example_id", (str,), path, line),
            passage_id=_want(obj, "passage_id", (str,), path, line),
            rater_id=_want(obj, "rater_id", (str,), path, line),
            scenario=scenario,
            interpretable=_want(obj, "interpretable", (bool,), path, line, optional=True),
            attributed=_want(obj, "attributed", (bool,), path, line, optional=True),
            flagged=bool(_want(obj, "flagged", (bool,), path, line, optional=True) or False),
        )
    except ValidationError as exc:
        raise SchemaError(str(exc), path=path, line=line) from exc


def load_ratings(
    path: str | Path, examples: Sequence[Example] | None = None
) -> list[RatingRecord]:
    """Load rating records; duplicate (example, passage, rater, scenario) is fatal.

    When ``examples`` is given, every record must reference an existing
    (example_id, passage_id) pair.
    """
    ratings: list[RatingRecord] = []
    seen: set[tuple[str, str, str, Scenario]] = set()
    for lineno, obj in read_jsonl(path):
        if lineno == 1 and _is_meta_line(obj):
            continue
        r = rating_from_dict(obj, path=str(path), line=lineno)
        key = (r.example_id, r.passage_id, r.rater_id, r.scenario)
        if key in seen:
            raise SchemaError(
                f"duplicate rating for example {r.example_id!r} passage {r.passage_id!r}"
                f" rater {r.rater_id!r} scenario {r.scenario.value!r}",
                path=str(path),
                line=lineno,
            )
        seen.add(key)
        ratings.append(r)
    if examples is not None:
        check_rating_references(ratings, examples)
    return ratings


def save_ratings(
    ratings: Iterable[RatingRecord], path: str | Path, metadata: Mapping[str, Any] | None = None
) -> None:
    write_jsonl((rating_to_dict(r) for r in ratings), path, metadata)


def check_rating_references(ratings: Iterable[RatingRecord], examples: Sequence[Example]) -> None:
    known = {(e.example_id, p.passage_id) for e in examples for p in e.passages}
    for r in ratings:
        if (r.example_id, r.passage_id) not in known:
            raise SchemaError(
                f"rating references unknown (example, passage) pair"
                f" ({r.example_id!r}, {r.passage_id!r})"
            )


# ---------------------------------------------------------------------------
# judgments


def judgment_to_dict(j: AttributionJudgment) -> dict[str, Any]:
    return {
        "example_id": j.example_id,
        "passage_id": j.passage_id,
        "scenario": j.scenario.value,
        "label": j.label,
        "yes_votes": j.yes_votes,
        "valid_rating_count": j.valid_rating_count,
    }


def judgment_from_dict(
    obj: Mapping[str, Any], *, path: str = "<memory>", line: int = 0
) -> AttributionJudgment:
    raw_scenario = _want(obj, "scenario", (str,), path, line)
    try:
        scenario = Scenario(raw_scenario)
    except ValueError:
        raise SchemaError(f"field 'scenario': unknown value {raw_scenario!r}", path=path, line=line)
    try:
        return AttributionJudgment(
            example_id=_want(obj, "example_id", (str,), path, line),
            passage_id=_want(obj, "passage_id", (str,), path, line),
            scenario=scenario,
            label=_want(obj, "label", (int,), path, line),
            yes_votes=_want(obj, "yes_votes", (int,), path, line),
            valid_rating_count=_want(obj, "valid_rating_count", (int,), path, line),
        )
    except ValidationError as exc:
        raise SchemaError(str(exc), path=path, line=line) from exc


def load_judgments(path: str | Path) -> list[AttributionJudgment]:
    out = []
    for lineno, obj in read_jsonl(path):
        if lineno == 1 and _is_meta_line(obj):
            continue
        out.append(judgment_from_dict(obj, path=str(path), line=lineno))
    return out


def save_judgments(
    judgments: Iterable[AttributionJudgment],
    path: str | Path,
    metadata: Mapping[str, Any] | None = None,
) -> None:
    write_jsonl((judgment_to_dict(j) for j in judgments), path, metadata)


# ---------------------------------------------------------------------------
# scores


def load_scores(path: str | Path) -> dict[str, list[ScoredPassage]]:
    """Load a scores file, grouped by example_id in file order."""
    grouped: dict[str, list[ScoredPassage]] = {}
    for lineno, obj in read_jsonl(path):
        if lineno == 1 and _is_meta_line(obj):
            continue
        eid = _want(obj, "example_id", (str,), str(path), lineno)
        score = _want(obj, "score", (int, float), str(path), lineno)
        try:
            sp = ScoredPassage(
                passage_id=_want(obj, "passage_id", (str,), str(path), lineno),
                score=float(score),
                scorer_name=_want(obj, "scorer_name", (str,), str(path), lineno),
            )
        except ValidationError as exc:
            raise SchemaError(str(exc), path=str(path), line=lineno) from exc
        grouped.setdefault(eid, []).append(sp)
    return grouped


def save_scores(
    scores: Mapping[str, Sequence[ScoredPassage]],
    path: str | Path,
    metadata: Mapping[str, Any] | None = None,
) -> None:
    def rows() -> Iterator[dict[str, Any]]:
        for eid in scores:
            for sp in scores[eid]:
                yield {
                    "example_id": eid,
                    "passage_id": sp.passage_id,
                    "score": sp.score,
                    "scorer_name": sp.scorer_name,
                }

    write_jsonl(rows(), path, metadata)


# ---------------------------------------------------------------------------
# yes/no lexicon


def load_lexicon(path: str | Path | None = None) -> dict[str, frozenset[str]]:
    """Load a yes/no lexicon: {language: [token, ...]}, applied after normalization.

    Without ``path`` the bundled versioned lexicon is used. Entries are
    normalized on load so membership tests match normalized answers.
    """
    if path is None:
        raw = resources.files("xattreval.data").joinpath(DEFAULT_LEXICON_RESOURCE).read_text("utf-8")
        source = DEFAULT_LEXICON_RESOURCE
    else:
        raw = Path(path).read_text(encoding="utf-8")
        source = str(path)
    try:
        obj = json.loads(raw)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"invalid JSON: {exc.msg}", path=source) from exc
    if not isinstance(obj, dict):
        raise SchemaError("lexicon must be an object of language -> token list", path=source)
    lexicon: dict[str, frozenset[str]] = {}
    for lang, tokens in obj.items():
        if not isinstance(tokens, list) or not all(isinstance(t, str) for t in tokens):
            raise SchemaError(f"lexicon entry {lang!r} must be a list of strings", path=source)
        lexicon[lang] = frozenset(normalize(t) for t in tokens)
    return lexicon


def infer_answer_type(
    answer: str, lang: str, lexicon: Mapping[str, frozenset[str]]
) -> AnswerType:
    """yes_no iff the normalized answer is in the language's lexicon entry set."""
    if lang not in lexicon:
        raise ConfigurationError(f"no yes/no lexicon entry set for language {lang!r}")
    return AnswerType.YES_NO if normalize(answer) in lexicon[lang] else AnswerType.SHORT_SPAN


# ---------------------------------------------------------------------------
# canonical dataset


@dataclass(frozen=True, slots=True)
class Dataset:
    """Validated, immutable bundle of examples plus their rating records."""

    examples: tuple[Example, ...]
    ratings: tuple[RatingRecord, ...]
    metadata: Mapping[str, Any] = field(default_factory=dict)

    def example_index(self) -> dict[str, Example]:
        return {e.example_id: e for e in self.examples}

    def passage_index(self) -> dict[tuple[str, str], Passage]:
        return {(e.example_id, p.passage_id): p for e in self.examples for p in e.passages}


def build_dataset(
    examples: Sequence[Example],
    ratings: Sequence[RatingRecord] = (),
    metadata: Mapping[str, Any] | None = None,
) -> Dataset:
    """Assemble a Dataset, enforcing referential integrity of every rating."""
    check_rating_references(ratings, examples)
    return Dataset(
        examples=tuple(examples),
        ratings=tuple(ratings),
        metadata=dict(metadata or {}),
    )


def load_dataset(
    examples_path: str | Path,
    ratings_path: str | Path | None = None,
    lexicon: Mapping[str, frozenset[str]] | None = None,
) -> Dataset:
    examples, metadata = load_examples_with_metadata(examples_path, lexicon)
    ratings = load_ratings(ratings_path, examples) if ratings_path is not None else []
    return build_dataset(examples, ratings, metadata)
