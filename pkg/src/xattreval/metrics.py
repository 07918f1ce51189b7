"""Scalar metrics: exact match, attribution scores, ROC-AUC, calibration.

Attribution (AIS) is the proportion of examples whose answer is supported
by a candidate passage, under a passage pool (``top1`` or ``all``) and a
language subset filter. Undefined metrics raise
:class:`~xattreval.errors.UndefinedMetricError`; they are reported as
absent values, never silently 0.
"""

from __future__ import annotations

from bisect import bisect_left
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Mapping, Sequence

from .errors import UndefinedMetricError
from .scoring import normalize
from .types import ENGLISH, Example

JudgmentKey = tuple[str, str]


class Pool(str, Enum):
    TOP1 = "top1"
    ALL = "all"


class SubsetFilter(str, Enum):
    """Which candidate passages count as potential attribution sources.

    ``english_exclusive`` counts an example only if an English passage is
    attributed while NO passage in the query language is.
    """

    ANY = "any"
    IN_LANGUAGE = "in_language"
    ENGLISH_EXCLUSIVE = "english_exclusive"


class Top1Scope(str, Enum):
    """Whether "top-1" means the top candidate within the filtered subset
    (default) or the overall top-ranked passage."""

    SUBSET = "subset"
    OVERALL = "overall"


# ---------------------------------------------------------------------------
# exact match


def exact_match(answer: str, gold_answers: Sequence[str]) -> int:
    """1 iff the normalized answer equals some normalized gold answer."""
    if not gold_answers:
        raise UndefinedMetricError("exact match is undefined without gold answers")
    norm = normalize(answer)
    return 1 if any(norm == normalize(g) for g in gold_answers) else 0


# ---------------------------------------------------------------------------
# attribution (AIS)


@dataclass(frozen=True, slots=True)
class AisResult:
    """AIS percentage plus the bookkeeping needed for audits.

    ``excluded`` lists example_ids dropped because a pooled passage had no
    judgment; they are not part of the denominator.
    """

    percentage: float
    attributed_count: int
    evaluated_count: int
    counted: tuple[str, ...]
    excluded: tuple[str, ...]


def _example_hit(
    e: Example,
    labels: Mapping[str, int],
    pool: Pool,
    subset: SubsetFilter,
    top1_scope: Top1Scope,
) -> bool:
    passages = e.passages
    if subset is SubsetFilter.ANY:
        candidates = list(passages)
    elif subset is SubsetFilter.IN_LANGUAGE:
        candidates = [p for p in passages if p.language == e.query_language]
    else:
        candidates = [p for p in passages if p.language == ENGLISH]
        # exclusivity: no in-language passage anywhere in the pool is attributed
        if any(labels[p.passage_id] == 1 for p in passages if p.language == e.query_language):
            return False
    if not candidates:
        return False
    if pool is Pool.ALL:
        return any(labels[p.passage_id] == 1 for p in candidates)
    if top1_scope is Top1Scope.SUBSET:
        top = min(candidates, key=lambda p: p.retrieval_rank)
    else:
        top = passages[0]
        if top not in candidates:
            return False
    return labels[top.passage_id] == 1


def ais_detail(
    examples: Sequence[Example],
    judgments: Mapping[JudgmentKey, int],
    pool: Pool | str = Pool.TOP1,
    subset: SubsetFilter | str = SubsetFilter.ANY,
    top1_scope: Top1Scope | str = Top1Scope.SUBSET,
) -> AisResult:
    """Proportion of answers with an attributed passage, with audit detail.

    Every pooled passage of an example must have a judgment; otherwise the
    example is excluded and tallied in ``excluded``.
    """
    pool = Pool(pool)
    subset = SubsetFilter(subset)
    top1_scope = Top1Scope(top1_scope)
    counted: list[str] = []
    excluded: list[str] = []
    evaluated = 0
    for e in examples:
        labels: dict[str, int] = {}
        missing = False
        for p in e.passages:
            label = judgments.get((e.example_id, p.passage_id))
            if label is None:
                missing = True
                break
            labels[p.passage_id] = label
        if missing:
            excluded.append(e.example_id)
            continue
        evaluated += 1
        if _example_hit(e, labels, pool, subset, top1_scope):
            counted.append(e.example_id)
    if evaluated == 0:
        raise UndefinedMetricError("AIS is undefined: no examples with complete judgments")
    return AisResult(
        percentage=100.0 * len(counted) / evaluated,
        attributed_count=len(counted),
        evaluated_count=evaluated,
        counted=tuple(counted),
        excluded=tuple(excluded),
    )


def ais(
    examples: Sequence[Example],
    judgments: Mapping[JudgmentKey, int],
    pool: Pool | str = Pool.TOP1,
    subset: SubsetFilter | str = SubsetFilter.ANY,
    top1_scope: Top1Scope | str = Top1Scope.SUBSET,
) -> float:
    return ais_detail(examples, judgments, pool, subset, top1_scope).percentage


@dataclass(frozen=True, slots=True)
class EmBreakdown:
    """AIS restricted to the EM=1 and EM=0 strata; absent strata are None."""

    of_em: float | None
    non_em: float | None


def ais_breakdown_by_em(
    examples: Sequence[Example],
    judgments: Mapping[JudgmentKey, int],
    em_bits: Mapping[str, int],
    pool: Pool | str = Pool.ALL,
    subset: SubsetFilter | str = SubsetFilter.ANY,
    top1_scope: Top1Scope | str = Top1Scope.SUBSET,
) -> EmBreakdown:
    """AIS within the exactly-matched and non-exactly-matched strata.

    Examples absent from ``em_bits`` (no gold answers) belong to neither
    stratum. An empty stratum yields None, not 0.
    """
    strata = {1: [], 0: []}
    for e in examples:
        bit = em_bits.get(e.example_id)
        if bit is not None:
            strata[bit].append(e)
    values: dict[int, float | None] = {}
    for bit, members in strata.items():
        if not members:
            values[bit] = None
            continue
        try:
            values[bit] = ais(members, judgments, pool, subset, top1_scope)
        except UndefinedMetricError:
            values[bit] = None
    return EmBreakdown(of_em=values[1], non_em=values[0])


# ---------------------------------------------------------------------------
# ROC-AUC and calibration


def _check_score_label_input(scores: Sequence[float], labels: Sequence[int]) -> None:
    if len(scores) != len(labels):
        raise ValueError(f"scores and labels differ in length: {len(scores)} vs {len(labels)}")
    bad = next((l for l in labels if l not in (0, 1)), None)
    if bad is not None:
        raise ValueError(f"labels must be binary, got {bad!r}")


def roc_auc(scores: Sequence[float], labels: Sequence[int]) -> float:
    """Probability a random positive outscores a random negative, ties half.

    Computed in O(n log n) from midranks; exactly equals the brute-force
    pair statistic. Single-class input is undefined.
    """
    _check_score_label_input(scores, labels)
    n = len(scores)
    positives = sum(labels)
    negatives = n - positives
    if positives == 0 or negatives == 0:
        raise UndefinedMetricError("ROC-AUC is undefined unless both classes are present")
    order = sorted(range(n), key=lambda i: scores[i])
    ranks = [0.0] * n
    i = 0
    while i < n:
        j = i
        while j + 1 < n and scores[order[j + 1]] == scores[order[i]]:
            j += 1
        midrank = (i + j) / 2 + 1  # 1-based average rank of the tie block
        for k in range(i, j + 1):
            ranks[order[k]] = midrank
        i = j + 1
    positive_rank_sum = sum(r for r, l in zip(ranks, labels) if l == 1)
    u = positive_rank_sum - positives * (positives + 1) / 2
    return u / (positives * negatives)


def threshold_candidates(scores: Sequence[float]) -> list[float]:
    """Midpoints between adjacent distinct scores plus sentinels outside the range."""
    distinct = sorted(set(scores))
    mids = [(a + b) / 2 for a, b in zip(distinct, distinct[1:])]
    return [distinct[0] - 1.0, *mids, distinct[-1] + 1.0]


def calibrate_threshold(scores: Sequence[float], labels: Sequence[int]) -> float:
    """Threshold maximizing accuracy of ``predict(score >= threshold)``.

    Ties break toward the smallest maximizing candidate. Score equal to the
    threshold predicts positive.
    """
    _check_score_label_input(scores, labels)
    positives = sum(labels)
    if positives == 0 or positives == len(labels):
        raise UndefinedMetricError("calibration is undefined unless both classes are present")
    pos_scores = sorted(s for s, l in zip(scores, labels) if l == 1)
    neg_scores = sorted(s for s, l in zip(scores, labels) if l == 0)
    best_threshold = None
    best_correct = -1
    for t in threshold_candidates(scores):
        # positives predicted 1 (score >= t) + negatives predicted 0 (score < t)
        correct = (len(pos_scores) - bisect_left(pos_scores, t)) + bisect_left(neg_scores, t)
        if correct > best_correct:
            best_correct = correct
            best_threshold = t
    assert best_threshold is not None
    return best_threshold


def accuracy_at(scores: Sequence[float], labels: Sequence[int], threshold: float) -> float:
    """Percentage of labels equal to ``score >= threshold``."""
    _check_score_label_input(scores, labels)
    if not scores:
        raise UndefinedMetricError("accuracy is undefined on empty input")
    correct = sum(1 for s, l in zip(scores, labels) if (1 if s >= threshold else 0) == l)
    return 100.0 * correct / len(scores)


def non_em_detection_rate(
    scores: Sequence[float],
    labels: Sequence[int],
    em_bits: Sequence[int],
    threshold: float,
) -> float:
    """Among attributed (label 1) non-EM examples, percentage detected at the threshold."""
    _check_score_label_input(scores, labels)
    if len(em_bits) != len(scores):
        raise ValueError(f"em_bits and scores differ in length: {len(em_bits)} vs {len(scores)}")
    stratum = [s for s, l, em in zip(scores, labels, em_bits) if em == 0 and l == 1]
    if not stratum:
        raise UndefinedMetricError("non-EM detection rate is undefined: empty stratum")
    detected = sum(1 for s in stratum if s >= threshold)
    return 100.0 * detected / len(stratum)


# ---------------------------------------------------------------------------
# passage language distribution


@dataclass(frozen=True, slots=True)
class LanguageDistribution:
    """Share of pooled passages in the query language, in English, or neither.

    For English queries, English passages count as in-language (definition
    edge: in_language takes precedence over english).
    """

    in_language: float
    english: float
    other: float
    passage_count: int


def passage_language_distribution(
    examples: Sequence[Example],
) -> dict[str, LanguageDistribution]:
    """Distribution of retrieved-passage languages, per query language."""
    counts: dict[str, list[int]] = {}
    for e in examples:
        bucket = counts.setdefault(e.query_language, [0, 0, 0])
        for p in e.passages:
            if p.language == e.query_language:
                bucket[0] += 1
            elif p.language == ENGLISH:
                bucket[1] += 1
            else:
                bucket[2] += 1
    out: dict[str, LanguageDistribution] = {}
    for lang, (in_lang, en, other) in sorted(counts.items()):
        total = in_lang + en + other
        if total == 0:
            continue
        out[lang] = LanguageDistribution(
            in_language=100.0 * in_lang / total,
            english=100.0 * en / total,
            other=100.0 * other / total,
            passage_count=total,
        )
    return out


def em_bits_for(examples: Iterable[Example]) -> dict[str, int]:
    """Exact-match bit per example, skipping examples without gold answers."""
    bits: dict[str, int] = {}
    for e in examples:
        if e.gold_answers:
            bits[e.example_id] = exact_match(e.answer, e.gold_answers)
    return bits
