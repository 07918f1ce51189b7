"""Mine attribution-detection training pairs by document-internal negative sampling.

Positives are the answer-bearing passage of a document; negatives are other
passages of the same document, which keeps them topically close (hard
negatives) while guaranteed not to answer the question.
"""

from __future__ import annotations

import hashlib
import logging
import random
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

from .ingest import write_jsonl
from .scoring import DEFAULT_TEMPLATE_ID, TEMPLATES
from .errors import ConfigurationError

logger = logging.getLogger(__name__)

DEFAULT_NEGATIVES_PER_DOCUMENT = 10


@dataclass(frozen=True, slots=True)
class MinedPair:
    """One labeled (query, answer, passage) training pair.

    Label-1 pairs carry the positive passage; label-0 pairs carry a
    different passage from the same source document.
    """

    query: str
    answer: str
    passage_id: str
    passage: str
    label: int
    source_document_id: str
    language: str


def derive_seed(global_seed: int, document_id: str) -> int:
    """Per-document RNG seed, stable across parallel document order."""
    digest = hashlib.sha256(f"{global_seed}|{document_id}".encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "big")


def mine_negatives(
    doc_id: str,
    passages: Sequence[tuple[str, str]],
    positive_id: str,
    query: str,
    answer: str,
    language: str,
    k: int = DEFAULT_NEGATIVES_PER_DOCUMENT,
    seed: int = 0,
) -> list[MinedPair]:
    """Emit one positive pair plus up to ``k`` sampled in-document negatives.

    Sampling is uniform without replacement over passages differing from the
    positive in both id and text, deterministic given (seed, doc_id). A
    single-passage document yields zero negatives with a warning.
    """
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    by_id = dict(passages)
    if len(by_id) != len(passages):
        raise ValueError(f"document {doc_id!r} has duplicate passage ids")
    if positive_id not in by_id:
        raise ValueError(f"positive passage {positive_id!r} not found in document {doc_id!r}")
    positive_text = by_id[positive_id]

    def pair(pid: str, text: str, label: int) -> MinedPair:
        return MinedPair(
            query=query,
            answer=answer,
            passage_id=pid,
            passage=text,
            label=label,
            source_document_id=doc_id,
            language=language,
        )

    candidates = [(pid, text) for pid, text in passages if pid != positive_id and text != positive_text]
    if not candidates:
        logger.warning("document %r has no usable negative passages", doc_id)
        return [pair(positive_id, positive_text, 1)]
    rng = random.Random(derive_seed(seed, doc_id))
    sampled = rng.sample(candidates, min(k, len(candidates)))
    return [pair(positive_id, positive_text, 1)] + [pair(pid, text, 0) for pid, text in sampled]


def training_record(p: MinedPair, template_id: str = DEFAULT_TEMPLATE_ID) -> dict:
    if template_id not in TEMPLATES:
        raise ConfigurationError(f"unknown template_id {template_id!r}")
    return {
        "premise": p.passage,
        "hypothesis": TEMPLATES[template_id](p.query, p.answer),
        "label": p.label,
        "language": p.language,
        "doc_id": p.source_document_id,
    }


def emit_training_file(
    pairs: Iterable[MinedPair],
    template_id: str,
    path: str | Path,
    seed: int = 0,
) -> int:
    """Write instantiated training records, shuffled deterministically by seed.

    The first line is header metadata; returns the number of records written.
    """
    pairs = list(pairs)
    rng = random.Random(seed)
    rng.shuffle(pairs)
    rows = [training_record(p, template_id) for p in pairs]
    metadata = {
        "format": "attribution-training-v1",
        "template_id": template_id,
        "seed": seed,
        "records": len(rows),
    }
    write_jsonl(rows, path, metadata)
    return len(rows)
