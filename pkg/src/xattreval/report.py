"""Report assembly and emission in the toolkit's table layouts.

The emitter performs no arithmetic except rounding: every number in a
report is a metrics-module output (the average row is assembled here from
those outputs before rendering). Rounding is half-up at the printed
precision; internal values keep full precision.
"""

from __future__ import annotations

import json
from dataclasses import fields
from decimal import ROUND_HALF_UP, Decimal
from pathlib import Path
from statistics import fmean
from typing import Any, Mapping, Sequence

from .errors import SchemaError
from .types import EvalReport, LanguageMetrics

AVERAGE_KEY = "avg"

FORMATS = ("tsv", "markdown")

_METRIC_FIELDS = tuple(f.name for f in fields(LanguageMetrics))

#: column order; relative_improvement is folded into the ais_reranked cell.
_COLUMNS = (
    "ais_top1",
    "ais_all",
    "ais_reranked",
    "ais_of_em",
    "ais_non_em",
    "subset_any",
    "subset_in_language",
    "subset_english",
    "accuracy",
    "roc_auc",
    "agreement_with_consensus",
    "scenario_disagreement",
    "relative_improvement",
)

ABSENT = "-"


def round_half_up(value: float, digits: int = 1) -> str:
    """Render with half-up rounding at ``digits`` decimals (e.g. 25.84 -> '25.8')."""
    q = Decimal(1).scaleb(-digits)
    return str(Decimal(repr(value)).quantize(q, rounding=ROUND_HALF_UP))


def format_percent(value: float | None) -> str:
    return ABSENT if value is None else round_half_up(value, 1)


def format_auc(value: float | None) -> str:
    """AUC prints on a 0-100 scale with one decimal (0.952 -> '95.2')."""
    return ABSENT if value is None else round_half_up(value * 100.0, 1)


def format_improvement(value: float | None) -> str:
    if value is None:
        return ABSENT
    text = round_half_up(value, 1)
    return f"+{text}%" if not text.startswith("-") else f"{text}%"


def with_average(report: EvalReport, key: str = AVERAGE_KEY) -> EvalReport:
    """Append an average row: the arithmetic mean of each present field.

    A field enters the average only for languages where it is present; a
    field absent everywhere stays absent.
    """
    rows = [(lang, m) for lang, m in report.rows if lang != key]
    averaged: dict[str, float | None] = {}
    for name in _METRIC_FIELDS:
        values = [getattr(m, name) for _, m in rows if getattr(m, name) is not None]
        averaged[name] = fmean(values) if values else None
    return EvalReport(tuple(rows) + ((key, LanguageMetrics(**averaged)),))


# ---------------------------------------------------------------------------
# serialization


def report_to_dict(report: EvalReport) -> dict[str, Any]:
    return {
        "per_language": {
            lang: {name: getattr(m, name) for name in _METRIC_FIELDS if getattr(m, name) is not None}
            for lang, m in report.rows
        }
    }


def report_from_dict(obj: Mapping[str, Any]) -> EvalReport:
    per_language = obj.get("per_language")
    if not isinstance(per_language, dict):
        raise SchemaError("metrics object must carry a 'per_language' mapping")
    result: dict[str, LanguageMetrics] = {}
    for lang, values in per_language.items():
        if not isinstance(values, dict):
            raise SchemaError(f"per_language[{lang!r}] must be an object")
        unknown = set(values) - set(_METRIC_FIELDS)
        if unknown:
            raise SchemaError(f"per_language[{lang!r}]: unknown metric fields {sorted(unknown)}")
        result[lang] = LanguageMetrics(**values)
    return EvalReport.from_mapping(result)


def save_report_metrics(report: EvalReport, path: str | Path) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    payload = json.dumps(report_to_dict(report), ensure_ascii=False, sort_keys=True, indent=2)
    path.write_text(payload + "\n", encoding="utf-8")


def load_report_metrics(path: str | Path) -> EvalReport:
    try:
        obj = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise SchemaError(f"invalid JSON: {exc.msg}", path=str(path)) from exc
    return report_from_dict(obj)


# ---------------------------------------------------------------------------
# rendering


def render_table(headers: Sequence[str], rows: Sequence[Sequence[str]], fmt: str) -> str:
    """Render a generic table as TSV or GitHub-style markdown (one trailing newline)."""
    if fmt == "tsv":
        lines = ["\t".join(headers)] + ["\t".join(row) for row in rows]
        return "\n".join(lines) + "\n"
    if fmt == "markdown":
        lines = [
            "| " + " | ".join(headers) + " |",
            "| " + " | ".join("---" for _ in headers) + " |",
        ]
        lines += ["| " + " | ".join(row) + " |" for row in rows]
        return "\n".join(lines) + "\n"
    raise ValueError(f"unknown report format {fmt!r}; expected one of {FORMATS}")


def _present_columns(report: EvalReport) -> list[str]:
    present = []
    fold_improvement = any(m.ais_reranked is not None for _, m in report.rows)
    for name in _COLUMNS:
        if name == "relative_improvement" and fold_improvement:
            continue  # folded into the ais_reranked cell
        if any(getattr(m, name) is not None for _, m in report.rows):
            present.append(name)
    return present


def _cell(metrics: LanguageMetrics, column: str) -> str:
    value = getattr(metrics, column)
    if column == "ais_reranked":
        if value is None:
            return ABSENT
        rendered = format_percent(value)
        if metrics.relative_improvement is not None:
            rendered += f" ({format_improvement(metrics.relative_improvement)})"
        return rendered
    if column == "roc_auc":
        return format_auc(value)
    if column == "relative_improvement":
        return format_improvement(value)
    return format_percent(value)


def emit_report(results: EvalReport, fmt: str = "tsv") -> str:
    """Deterministic byte output; identical inputs yield identical bytes."""
    columns = _present_columns(results)
    headers = ["lang"] + columns
    rows = [[lang] + [_cell(m, c) for c in columns] for lang, m in results.rows]
    return render_table(headers, rows, fmt)


def write_report(results: EvalReport, fmt: str, path: str | Path) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(emit_report(results, fmt), encoding="utf-8")
