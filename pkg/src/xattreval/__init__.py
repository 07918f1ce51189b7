"""Toolkit for evaluating and improving attribution in cross-lingual QA.

Pipeline surface:
  * :mod:`xattreval.ingest` -- file formats and canonical datasets;
  * :mod:`xattreval.aggregate` -- rater records -> gold judgments + agreement;
  * :mod:`xattreval.scoring` -- attribution detectors (string match, remote, mock);
  * :mod:`xattreval.translate` -- translation clients and the persistent cache;
  * :mod:`xattreval.metrics` -- exact match, AIS, ROC-AUC, calibration;
  * :mod:`xattreval.rerank` -- attribution-maximizing passage selection;
  * :mod:`xattreval.mine` -- training-pair mining;
  * :mod:`xattreval.cli` -- the ``xattreval`` command.
"""

from .types import (
    AnswerType,
    AttributionJudgment,
    EvalReport,
    Example,
    LanguageMetrics,
    Passage,
    RatingRecord,
    Scenario,
    ScoredPassage,
)

__version__ = "0.1.0"

__all__ = [
    "AnswerType",
    "AttributionJudgment",
    "EvalReport",
    "Example",
    "LanguageMetrics",
    "Passage",
    "RatingRecord",
    "Scenario",
    "ScoredPassage",
    "__version__",
]
