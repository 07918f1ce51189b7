"""Bundled miniature datasets and count-exact synthetic fixtures.

``build_synthetic`` constructs datasets whose recomputed attribution
statistics equal the requested proportions exactly, because construction is
by count: each example is drawn from a small set of passage-pool shapes
with known (pool, subset) behaviour. Rates must be exactly representable at
the chosen size or the builder refuses.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Mapping

from .errors import UnrepresentableProportionError, ValidationError
from .scoring import hash_unit
from .types import (
    ENGLISH,
    AnswerType,
    AttributionJudgment,
    Example,
    Passage,
    RatingRecord,
    Scenario,
    ScoredPassage,
)

HANDCRAFTED_RESOURCE = "handcrafted_attribution_cases.jsonl"

#: attribution behaviour of each pool shape, as
#: (top1_any, all_any, top1_lang, all_lang, top1_en, all_en)
_SHAPE_BEHAVIOUR = {
    "A": (1, 1, 1, 1, 0, 0),  # rank-1 in-language passage attributed
    "B": (0, 1, 1, 1, 0, 0),  # rank-1 unattributed English, attributed in-language below
    "C": (0, 1, 0, 1, 0, 0),  # top in-language passage unattributed, a later one attributed
    "D": (1, 1, 0, 0, 1, 1),  # attributed English passage only (English-exclusive, rank 1)
    "E": (0, 1, 0, 0, 0, 1),  # English-exclusive with an unattributed English passage on top
    "I": (1, 1, 0, 0, 0, 0),  # attributed passage in a third language only
    "F": (0, 0, 0, 0, 0, 0),  # nothing attributed
}


def _count(rate: float, n: int, name: str) -> int:
    raw = rate * n
    rounded = round(raw)
    if abs(raw - rounded) > 1e-6:
        raise UnrepresentableProportionError(
            f"{name}={rate} is not an exact count at n={n} (got {raw})"
        )
    if not 0 <= rounded <= n:
        raise UnrepresentableProportionError(f"{name}={rate} outside [0, 1] at n={n}")
    return int(rounded)


def _shape_counts(
    n: int,
    top1: int,
    all_: int,
    lang_top1: int | None,
    lang_all: int | None,
    en_top1: int | None,
    en_all: int | None,
) -> dict[str, int]:
    def need(name: str, value: int) -> int:
        if value < 0:
            raise UnrepresentableProportionError(
                f"targets are inconsistent: shape count {name} would be {value}"
            )
        return value

    if lang_top1 is None:
        # subset-free solve: in-language pools only
        return {
            "A": need("A", top1),
            "C": need("C", all_ - top1),
            "F": need("F", n - all_),
            "B": 0,
            "D": 0,
            "E": 0,
            "I": 0,
        }
    assert lang_all is not None and en_top1 is not None and en_all is not None
    d = need("D", en_top1)
    e = need("E", en_all - en_top1)
    c = need("C", lang_all - lang_top1)
    i = need("I", all_ - lang_all - en_all)
    a = need("A", top1 - d - i)
    b = need("B", lang_top1 - a)
    f = need("F", n - all_)
    return {"A": a, "B": b, "C": c, "D": d, "E": e, "I": i, "F": f}


def _other_language(language: str) -> str:
    return "de" if language != "de" else "sw"


def _shape_passages(shape: str, language: str) -> list[tuple[str, int]]:
    """(passage language, gold label) per rank for one pool shape."""
    other = _other_language(language)
    layouts = {
        "A": [(language, 1), (ENGLISH, 0)],
        "B": [(ENGLISH, 0), (language, 1)],
        "C": [(language, 0), (language, 1)],
        "D": [(ENGLISH, 1), (language, 0)],
        "E": [(ENGLISH, 0), (ENGLISH, 1), (language, 0)],
        "I": [(other, 1), (language, 0)],
        "F": [(language, 0), (ENGLISH, 0)],
    }
    return layouts[shape]


@dataclass(frozen=True, slots=True)
class SyntheticFixture:
    """A generated dataset plus its gold judgments and fixture scores."""

    examples: tuple[Example, ...]
    judgments: tuple[AttributionJudgment, ...]
    scores: Mapping[str, tuple[ScoredPassage, ...]]

    def labels(self) -> dict[tuple[str, str], int]:
        return {(j.example_id, j.passage_id): j.label for j in self.judgments}


def build_synthetic(
    language: str,
    n: int,
    top1: float,
    all: float | None = None,
    *,
    lang_top1: float | None = None,
    lang_all: float | None = None,
    en_top1: float | None = None,
    en_all: float | None = None,
    reranked: float | None = None,
    em: float | None = None,
    seed: int = 0,
    scenario: Scenario = Scenario.IN_LANGUAGE,
) -> SyntheticFixture:
    """Generate a dataset whose recomputed statistics equal the targets exactly.

    ``top1``/``all`` are the any-subset attribution rates; the four
    ``lang_*``/``en_*`` rates (given together or not at all) add the
    in-language and English-exclusive subset targets. ``reranked`` plants a
    fixture scorer achieving that reranked attribution rate, and ``em``
    controls the fraction of answers exactly matching their gold answer.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    subset_rates = (lang_top1, lang_all, en_top1, en_all)
    if any(r is not None for r in subset_rates) and any(r is None for r in subset_rates):
        raise ValueError("lang/en subset rates must be given all together or not at all")
    all = top1 if all is None else all
    top1_count = _count(top1, n, "top1")
    all_count = _count(all, n, "all")
    if all_count < top1_count:
        raise UnrepresentableProportionError("'all' rate cannot be below 'top1' rate")
    counts = _shape_counts(
        n,
        top1_count,
        all_count,
        _count(lang_top1, n, "lang_top1") if lang_top1 is not None else None,
        _count(lang_all, n, "lang_all") if lang_all is not None else None,
        _count(en_top1, n, "en_top1") if en_top1 is not None else None,
        _count(en_all, n, "en_all") if en_all is not None else None,
    )
    reranked_count = _count(reranked, n, "reranked") if reranked is not None else None
    if reranked_count is not None and reranked_count > all_count:
        raise UnrepresentableProportionError(
            "reranked rate cannot exceed the 'all' attribution rate"
        )
    em_count = _count(em, n, "em") if em is not None else None

    shapes = [s for s in "ABCDEIF" for _ in range(counts[s])]
    rng = random.Random(seed)
    rng.shuffle(shapes)

    examples: list[Example] = []
    judgments: list[AttributionJudgment] = []
    scores: dict[str, tuple[ScoredPassage, ...]] = {}
    attributed_seen = 0
    for idx, shape in enumerate(shapes):
        eid = f"{language}-{idx:05d}"
        answer = f"answer {language} {idx}"
        if em_count is None:
            gold: tuple[str, ...] = ()
        elif idx < em_count:
            gold = (answer,)
        else:
            gold = (f"other gold {idx}",)
        layout = _shape_passages(shape, language)
        passages = tuple(
            Passage(
                passage_id=f"{eid}-p{rank}",
                text=f"passage {eid} rank {rank} ({plang})",
                language=plang,
                retrieval_rank=rank,
            )
            for rank, (plang, _) in enumerate(layout, start=1)
        )
        examples.append(
            Example(
                example_id=eid,
                query=f"query {language} {idx}?",
                query_language=language,
                answer=answer,
                gold_answers=gold,
                answer_type=AnswerType.SHORT_SPAN,
                passages=passages,
            )
        )
        labels = [label for _, label in layout]
        for p, label in zip(passages, labels):
            judgments.append(
                AttributionJudgment(
                    example_id=eid,
                    passage_id=p.passage_id,
                    scenario=scenario,
                    label=label,
                    valid_rating_count=3,
                    yes_votes=3 if label else 0,
                )
            )
        if reranked_count is not None:
            has_positive = any(labels)
            pick_positive = has_positive and attributed_seen < reranked_count
            if has_positive:
                attributed_seen += 1
            wanted = 1 if pick_positive else 0
            chosen = labels.index(wanted) if wanted in labels else 0
            scores[eid] = tuple(
                ScoredPassage(
                    passage_id=p.passage_id,
                    score=0.9 if i == chosen else 0.1,
                    scorer_name="fixture",
                )
                for i, p in enumerate(passages)
            )
    return SyntheticFixture(tuple(examples), tuple(judgments), scores)


# ---------------------------------------------------------------------------
# handcrafted attribution cases


@dataclass(frozen=True, slots=True)
class HandcraftedCase:
    """A hand-labeled (query, answer, passage) triple for detector checks.

    ``string_match_expected`` is the hand-computed output of the containment
    baseline; ``attribution_label`` is the human attribution gold, which
    intentionally disagrees with the baseline on some cases.
    """

    case_id: str
    query: str
    query_language: str
    answer: str
    answer_type: AnswerType
    gold_answers: tuple[str, ...]
    passage_text: str
    passage_language: str
    attribution_label: int
    string_match_expected: float

    def as_example(self) -> tuple[Example, Passage]:
        passage = Passage(
            passage_id=f"{self.case_id}-p1",
            text=self.passage_text,
            language=self.passage_language,
            retrieval_rank=1,
        )
        example = Example(
            example_id=self.case_id,
            query=self.query,
            query_language=self.query_language,
            answer=self.answer,
            gold_answers=self.gold_answers,
            answer_type=self.answer_type,
            passages=(passage,),
        )
        return example, passage


def handcrafted_cases() -> list[HandcraftedCase]:
    """Load the bundled hand-labeled detector check set."""
    raw = resources.files("xattreval.data").joinpath(HANDCRAFTED_RESOURCE).read_text("utf-8")
    cases = []
    for line in raw.splitlines():
        line = line.strip()
        if not line:
            continue
        obj = json.loads(line)
        cases.append(
            HandcraftedCase(
                case_id=obj["case_id"],
                query=obj["query"],
                query_language=obj["query_language"],
                answer=obj["answer"],
                answer_type=AnswerType(obj["answer_type"]),
                gold_answers=tuple(obj["gold_answers"]),
                passage_text=obj["passage_text"],
                passage_language=obj["passage_language"],
                attribution_label=obj["attribution_label"],
                string_match_expected=float(obj["string_match_expected"]),
            )
        )
    return cases


# ---------------------------------------------------------------------------
# rating synthesis and the bundled demo dataset


def ratings_for_judgments(
    labels: Mapping[tuple[str, str], int],
    scenario: Scenario,
    seed: int = 0,
    dissent_rate: float = 0.25,
    flag_rate: float = 0.1,
) -> list[RatingRecord]:
    """Synthesize three-rater records that aggregate back to ``labels``.

    With probability ``dissent_rate`` one rater disagrees with the majority;
    with probability ``flag_rate`` one rater flags instead (leaving two
    valid agreeing votes, so the triple is never excluded).
    """
    rng = random.Random(seed)
    records: list[RatingRecord] = []
    for (eid, pid), label in sorted(labels.items()):
        majority = bool(label)
        votes: list[bool | None] = [majority, majority, majority]
        if rng.random() < flag_rate:
            votes[2] = None  # flagged
        elif rng.random() < dissent_rate:
            votes[2] = not majority
        for i, vote in enumerate(votes, start=1):
            flagged = vote is None
            records.append(
                RatingRecord(
                    example_id=eid,
                    passage_id=pid,
                    rater_id=f"r{i}",
                    scenario=scenario,
                    interpretable=None if flagged else True,
                    attributed=None if flagged else vote,
                    flagged=flagged,
                )
            )
    return records


DEMO_SPECS: dict[str, dict[str, float]] = {
    "bn": dict(top1=0.25, all=0.45, lang_top1=0.225, lang_all=0.40, en_top1=0.025, en_all=0.05,
               reranked=0.40, em=0.50),
    "fi": dict(top1=0.40, all=0.55, lang_top1=0.35, lang_all=0.45, en_top1=0.025, en_all=0.075,
               reranked=0.50, em=0.50),
    "te": dict(top1=0.20, all=0.30, lang_top1=0.175, lang_all=0.25, en_top1=0.0, en_all=0.025,
               reranked=0.275, em=0.25),
}

DEMO_SIZE = 40
DEMO_SEED = 20240601


def write_demo_dataset(directory: str | Path, seed: int = DEMO_SEED) -> None:
    """Write the bundled offline demo dataset (examples, ratings, judgments, scores)."""
    from .aggregate import aggregate_all
    from .ingest import save_examples, save_judgments, save_ratings, save_scores

    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    examples: list[Example] = []
    s1_labels: dict[tuple[str, str], int] = {}
    score_rows: dict[str, list[ScoredPassage]] = {}
    for lang, spec in DEMO_SPECS.items():
        fixture = build_synthetic(lang, DEMO_SIZE, seed=seed, **spec)
        examples.extend(fixture.examples)
        s1_labels.update(fixture.labels())
        # blended demo scorer: correlated with gold labels, no ties
        for e in fixture.examples:
            row = []
            for p in e.passages:
                label = s1_labels[(e.example_id, p.passage_id)]
                noisy = label if hash_unit(f"{seed}|flip|{e.example_id}|{p.passage_id}") >= 0.2 else 1 - label
                jitter = hash_unit(f"{seed}|jit|{e.example_id}|{p.passage_id}")
                row.append(
                    ScoredPassage(
                        passage_id=p.passage_id,
                        score=round(0.7 * noisy + 0.3 * jitter, 6),
                        scorer_name="demo-noisy-oracle",
                    )
                )
            score_rows[e.example_id] = row

    # S2 labels: S1 with a deterministic ~8% flip rate
    s2_labels = {
        key: (1 - label if hash_unit(f"{seed}|s2|{key[0]}|{key[1]}") < 0.08 else label)
        for key, label in s1_labels.items()
    }
    ratings = ratings_for_judgments(s1_labels, Scenario.IN_LANGUAGE, seed=seed)
    ratings += ratings_for_judgments(s2_labels, Scenario.IN_ENGLISH, seed=seed + 1)
    judgments, excluded = aggregate_all(ratings)
    if excluded:
        raise ValidationError(f"demo ratings unexpectedly exclude triples: {excluded[:3]}")

    meta = {"source_system": "synthetic-demo", "corpus_snapshot": "none", "seed": seed}
    save_examples(examples, directory / "examples.jsonl", metadata=meta)
    save_ratings(ratings, directory / "ratings.jsonl", metadata=meta)
    save_judgments(judgments, directory / "judgments.jsonl", metadata=meta)
    save_scores(score_rows, directory / "scores.jsonl", metadata=meta)
    _write_demo_docs(directory / "docs.jsonl", seed)


def _write_demo_docs(path: Path, seed: int) -> None:
    from .ingest import write_jsonl

    rng = random.Random(seed)
    rows = []
    for lang in ("bn", "fi", "te"):
        for d in range(3):
            doc_id = f"{lang}-doc-{d}"
            n_passages = rng.randint(4, 12)
            passages = [
                {"passage_id": f"{doc_id}-p{i}", "text": f"document {doc_id} passage {i} body"}
                for i in range(1, n_passages + 1)
            ]
            rows.append(
                {
                    "doc_id": doc_id,
                    "language": lang,
                    "query": f"demo query {doc_id}?",
                    "answer": f"demo answer {doc_id}",
                    "positive_passage_id": passages[rng.randrange(n_passages)]["passage_id"],
                    "passages": passages,
                }
            )
    write_jsonl(rows, path, {"format": "mining-docs-v1", "seed": seed})


def demo_data_dir() -> Path:
    """Path of the bundled demo dataset inside the installed package."""
    return Path(str(resources.files("xattreval.data").joinpath("demo")))
