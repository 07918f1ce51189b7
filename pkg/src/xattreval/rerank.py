"""Select the attribution-maximizing passage per example and quantify gains.

Reranking replaces the retriever's top-1 choice with the passage a scorer
deems most likely to support the answer; ties break toward the original
retrieval rank so an uninformative scorer preserves the retriever prior.
"""

from __future__ import annotations

from statistics import fmean
from typing import Mapping, Sequence

from .errors import UndefinedMetricError
from .metrics import AisResult, JudgmentKey
from .types import Example, ScoredPassage


def rerank(e: Example, scored: Sequence[ScoredPassage]) -> str:
    """Return the passage_id with maximal score; ties break to smaller rank.

    ``scored`` must cover exactly the example's passages.
    """
    ranks = {p.passage_id: p.retrieval_rank for p in e.passages}
    seen = [sp.passage_id for sp in scored]
    if sorted(seen) != sorted(ranks):
        raise ValueError(
            f"scored passages do not cover example {e.example_id!r}:"
            f" expected {sorted(ranks)}, got {sorted(seen)}"
        )
    best = min(scored, key=lambda sp: (-sp.score, ranks[sp.passage_id]))
    return best.passage_id


def reranked_ais_detail(
    examples: Sequence[Example],
    judgments: Mapping[JudgmentKey, int],
    scored_map: Mapping[str, Sequence[ScoredPassage]],
) -> AisResult:
    """AIS of the reranked top-1 choices, with the same audit detail as ais().

    Examples whose selected passage has no judgment are excluded and
    tallied, mirroring the plain AIS exclusion rule.
    """
    counted: list[str] = []
    excluded: list[str] = []
    evaluated = 0
    for e in examples:
        if e.example_id not in scored_map:
            raise ValueError(f"no scores for example {e.example_id!r}")
        selected = rerank(e, scored_map[e.example_id])
        label = judgments.get((e.example_id, selected))
        if label is None:
            excluded.append(e.example_id)
            continue
        evaluated += 1
        if label == 1:
            counted.append(e.example_id)
    if evaluated == 0:
        raise UndefinedMetricError("reranked AIS is undefined: no examples with judgments")
    return AisResult(
        percentage=100.0 * len(counted) / evaluated,
        attributed_count=len(counted),
        evaluated_count=evaluated,
        counted=tuple(counted),
        excluded=tuple(excluded),
    )


def reranked_ais(
    examples: Sequence[Example],
    judgments: Mapping[JudgmentKey, int],
    scored_map: Mapping[str, Sequence[ScoredPassage]],
) -> float:
    return reranked_ais_detail(examples, judgments, scored_map).percentage


def relative_improvement(before: float, after: float) -> float:
    """Signed percentage change from ``before`` to ``after``."""
    if before == 0:
        raise UndefinedMetricError("relative improvement is undefined for a zero baseline")
    return 100.0 * (after - before) / before


def mean_relative_improvement(per_language: Mapping[str, float]) -> float:
    """Arithmetic mean of per-language relative improvements."""
    if not per_language:
        raise UndefinedMetricError("mean relative improvement of an empty mapping")
    return fmean(per_language.values())
