"""Turn raw rater records into gold attribution judgments and agreement stats.

Aggregation is majority vote: drop flagged records (and records whose
interpretability gate failed), require at least two remaining votes, and
label 1 exactly when at least two of them said yes. Everything here is a
pure function over immutable inputs, parallelizable by (example, passage)
key.
"""

from __future__ import annotations

from dataclasses import replace
from typing import Iterable, Mapping, Sequence

from .errors import ConfigurationError, UndefinedMetricError
from .types import ENGLISH, AttributionJudgment, Example, Passage, RatingRecord, Scenario

JudgmentKey = tuple[str, str]


def is_valid_vote(r: RatingRecord) -> bool:
    """A record counts as a vote when it was not flagged, passed the
    interpretability gate, and actually answered the attribution question."""
    return not r.flagged and r.interpretable is not False and r.attributed is not None


def aggregate_ratings(ratings: Sequence[RatingRecord]) -> AttributionJudgment | None:
    """Aggregate all ratings of one (example, passage, scenario) triple.

    Returns None ("excluded") when fewer than two valid votes remain, e.g.
    when two or more raters flagged the triple.
    """
    if not ratings:
        raise ValueError("aggregate_ratings requires at least one rating record")
    keys = {(r.example_id, r.passage_id) for r in ratings}
    if len(keys) > 1:
        raise ValueError(f"ratings span multiple (example, passage) pairs: {sorted(keys)}")
    scenarios = {r.scenario for r in ratings}
    if len(scenarios) > 1:
        raise ValueError("ratings mix annotation scenarios")
    valid = [r for r in ratings if is_valid_vote(r)]
    if len(valid) < 2:
        return None
    yes_votes = sum(1 for r in valid if r.attributed)
    (example_id, passage_id), = keys
    return AttributionJudgment(
        example_id=example_id,
        passage_id=passage_id,
        scenario=next(iter(scenarios)),
        label=1 if yes_votes >= 2 else 0,
        valid_rating_count=len(valid),
        yes_votes=yes_votes,
    )


def aggregate_all(
    ratings: Iterable[RatingRecord],
) -> tuple[list[AttributionJudgment], list[tuple[str, str, Scenario]]]:
    """Aggregate a full rating set; returns (judgments, excluded triple keys).

    Output is sorted by (example_id, passage_id, scenario) so results are
    independent of input order and of any parallel grouping.
    """
    groups: dict[tuple[str, str, Scenario], list[RatingRecord]] = {}
    for r in ratings:
        groups.setdefault((r.example_id, r.passage_id, r.scenario), []).append(r)
    judgments: list[AttributionJudgment] = []
    excluded: list[tuple[str, str, Scenario]] = []
    for key in sorted(groups, key=lambda k: (k[0], k[1], k[2].value)):
        j = aggregate_ratings(groups[key])
        if j is None:
            excluded.append(key)
        else:
            judgments.append(j)
    return judgments, excluded


def judgment_labels(
    judgments: Iterable[AttributionJudgment], scenario: Scenario
) -> dict[JudgmentKey, int]:
    """Index judgment labels of one scenario by (example_id, passage_id)."""
    return {
        (j.example_id, j.passage_id): j.label for j in judgments if j.scenario is scenario
    }


def agreement_with_consensus(
    judgments: Sequence[AttributionJudgment], ratings: Sequence[RatingRecord]
) -> float:
    """Percentage of individual valid ratings matching the aggregated label.

    Only triples with a defined (non-excluded) judgment enter the
    denominator. Raises UndefinedMetricError on an empty population.
    """
    consensus = {(j.example_id, j.passage_id, j.scenario): j.label for j in judgments}
    total = 0
    agreeing = 0
    for r in ratings:
        if not is_valid_vote(r):
            continue
        key = (r.example_id, r.passage_id, r.scenario)
        if key not in consensus:
            continue
        total += 1
        if int(bool(r.attributed)) == consensus[key]:
            agreeing += 1
    if total == 0:
        raise UndefinedMetricError("agreement with consensus is undefined: no valid ratings")
    return 100.0 * agreeing / total


def s1_view_passage_index(examples: Sequence[Example]) -> dict[JudgmentKey, Passage]:
    """Each passage as presented for in-language annotation, keyed by
    (example_id, passage_id).

    Passages not already in the query language are machine-translated into
    it for the in-language scenario, so this view marks them translated and
    records their original language. Text is left untranslated: the view
    feeds metadata predicates (e.g. the translated-only disagreement
    restriction), not scoring.
    """
    out: dict[JudgmentKey, Passage] = {}
    for e in examples:
        for p in e.passages:
            if p.language != e.query_language and not p.translated:
                p = replace(
                    p,
                    language=e.query_language,
                    translated=True,
                    original_language=p.language,
                    original_text=p.text,
                )
            out[(e.example_id, p.passage_id)] = p
    return out


def scenario_disagreement(
    s1: Mapping[JudgmentKey, int],
    s2: Mapping[JudgmentKey, int],
    *,
    translated_only: bool = False,
    passages: Mapping[JudgmentKey, Passage] | None = None,
) -> float:
    """Percentage of shared (example, passage) keys whose labels differ.

    ``translated_only`` restricts to passages whose in-language text was
    machine-translated from English, which requires passage metadata.
    """
    shared = [k for k in s1 if k in s2]
    if translated_only:
        if passages is None:
            raise ConfigurationError("translated_only requires passage metadata")
        shared = [
            k
            for k in shared
            if k in passages
            and passages[k].translated
            and passages[k].original_language == ENGLISH
        ]
    if not shared:
        raise UndefinedMetricError("scenario disagreement is undefined: no shared judgments")
    differing = sum(1 for k in shared if s1[k] != s2[k])
    return 100.0 * differing / len(shared)
