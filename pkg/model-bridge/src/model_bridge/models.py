"""Entailment models behind the bridge.

A model maps a (premise, hypothesis) pair to an entailment probability in
[0, 1]. Two families are supported:

* ``overlap-v1`` -- a deterministic lexical heuristic with no external
  weights; the recorded-fixture reference model.
* ``hf:<checkpoint>`` -- any Hugging Face sequence-classification NLI
  checkpoint. Three-class heads contribute the entailment-class softmax
  mass, two-class heads the positive-class probability; the class is
  selected from the checkpoint's label metadata and must be configured
  explicitly when the metadata is ambiguous.
"""

from __future__ import annotations

import math
import re
import threading
import unicodedata
from typing import Protocol


class ModelLoadError(Exception):
    """The requested model cannot be constructed; raised at startup."""


class InferenceError(Exception):
    """A single (premise, hypothesis) pair could not be scored."""


class EntailmentModel(Protocol):
    name: str

    def entail_probability(self, premise: str, hypothesis: str) -> float:
        ...


# ---------------------------------------------------------------------------
# deterministic reference model

_WORD = re.compile(r"\w+")

_HYPOTHESIS_RE = re.compile(r'^the answer to the question "(?P<body>.*)"$', re.DOTALL)
_INFIX = '" is "'

ANSWER_WEIGHT = 0.7


def _normalize(text: str) -> str:
    return " ".join(unicodedata.normalize("NFKC", text).casefold().split())


def _split_hypothesis(hypothesis: str) -> tuple[str, str] | None:
    match = _HYPOTHESIS_RE.match(hypothesis)
    if match is None:
        return None
    query, sep, answer = match.group("body").rpartition(_INFIX)
    if not sep:
        return None
    return query, answer


def _coverage(needle: str, premise_text: str, premise_tokens: set[str]) -> float:
    needle_text = _normalize(needle)
    if needle_text and needle_text in premise_text:
        return 1.0
    tokens = _WORD.findall(needle_text)
    if not tokens:
        return 0.0
    return sum(1 for t in tokens if t in premise_tokens) / len(tokens)


class OverlapModel:
    """Lexical-overlap entailment heuristic; deterministic, no weights.

    Hypotheses in the toolkit's prompt template are decomposed into
    (query, answer); answer containment in the premise dominates the score.
    """

    name = "overlap-v1"

    def entail_probability(self, premise: str, hypothesis: str) -> float:
        premise_text = _normalize(premise)
        premise_tokens = set(_WORD.findall(premise_text))
        parts = _split_hypothesis(hypothesis)
        if parts is None:
            tokens = _WORD.findall(_normalize(hypothesis))
            if not tokens:
                return 0.0
            return sum(1 for t in tokens if t in premise_tokens) / len(tokens)
        query, answer = parts
        return ANSWER_WEIGHT * _coverage(answer, premise_text, premise_tokens) + (
            1.0 - ANSWER_WEIGHT
        ) * _coverage(query, premise_text, premise_tokens)


# ---------------------------------------------------------------------------
# Hugging Face wrapper


class HFEntailmentModel:
    """Wraps a sequence-classification checkpoint as an entailment scorer.

    Model invocation is serialized behind a lock; the service stays
    stateless between requests.
    """

    def __init__(self, checkpoint: str, entailment_label: str = "entailment"):
        try:
            import torch
            from transformers import AutoModelForSequenceClassification, AutoTokenizer
        except ImportError as exc:
            raise ModelLoadError(f"transformers/torch not installed: {exc}") from exc
        try:
            self._tokenizer = AutoTokenizer.from_pretrained(checkpoint)
            self._model = AutoModelForSequenceClassification.from_pretrained(checkpoint)
        except Exception as exc:
            raise ModelLoadError(f"cannot load checkpoint {checkpoint!r}: {exc}") from exc
        self._torch = torch
        self._model.eval()
        self._lock = threading.Lock()
        self.name = checkpoint
        self._entailment_index = self._resolve_entailment_index(entailment_label)

    def _resolve_entailment_index(self, entailment_label: str) -> int:
        id2label = getattr(self._model.config, "id2label", None) or {}
        labels = {str(v).casefold(): int(k) for k, v in id2label.items()}
        wanted = entailment_label.casefold()
        if wanted in labels:
            return labels[wanted]
        if len(labels) == 2:
            # two-class heads: positive class carries the score
            return max(labels.values())
        raise ModelLoadError(
            f"cannot locate label {entailment_label!r} in checkpoint metadata {sorted(labels)};"
            " pass --entailment-label explicitly"
        )

    def entail_probability(self, premise: str, hypothesis: str) -> float:
        with self._lock:
            try:
                inputs = self._tokenizer(
                    premise, hypothesis, return_tensors="pt", truncation=True, max_length=512
                )
                with self._torch.no_grad():
                    logits = self._model(**inputs).logits[0]
                probabilities = self._torch.softmax(logits, dim=-1)
                score = float(probabilities[self._entailment_index])
            except Exception as exc:
                raise InferenceError(str(exc)) from exc
        if math.isnan(score):
            raise InferenceError("model produced NaN")
        return min(1.0, max(0.0, score))


HF_PREFIX = "hf:"


def load_model(model_id: str, entailment_label: str = "entailment") -> EntailmentModel:
    """Construct the model named by ``model_id``; load failures raise at startup."""
    if model_id == OverlapModel.name:
        return OverlapModel()
    if model_id.startswith(HF_PREFIX):
        return HFEntailmentModel(model_id[len(HF_PREFIX):], entailment_label)
    raise ModelLoadError(f"unknown model id {model_id!r} (expected 'overlap-v1' or 'hf:<checkpoint>')")
