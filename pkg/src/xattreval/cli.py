"""Command-line entry point: ingest, aggregate, agreement, score, calibrate,
evaluate, rerank, mine, report.

Settings resolve as flags > config file > environment (endpoints only), so
an evaluation is reproducible from a single committed config. All outputs
are deterministic: rows sort by (language, example_id) and numbers render
with half-up rounding at one decimal.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import Any, Mapping, Sequence

from . import aggregate as agg
from . import ingest, metrics, mine, rerank, report
from .errors import (
    BatchScoringError,
    ConfigurationError,
    InsufficientPoolError,
    ProtocolError,
    SchemaError,
    ToolkitError,
    TransportError,
    UndefinedMetricError,
    UnrepresentableProportionError,
    ValidationError,
)
from .scoring import MockScorer, ScorerKind, ScorerSpec, build_scorer
from .translate import HttpTranslationClient, TranslationCache
from .types import EvalReport, Example, LanguageMetrics, Scenario, ScoredPassage

ENV_SCORER_ENDPOINT = "XATTR_SCORER_ENDPOINT"
ENV_TRANSLATE_ENDPOINT = "XATTR_TRANSLATE_ENDPOINT"

_FORMAT_ALIASES = {"tsv": "tsv", "md": "markdown", "markdown": "markdown"}
_FORMAT_EXT = {"tsv": "tsv", "markdown": "md"}

_DIAGNOSTIC_CATEGORY: tuple[tuple[type, str], ...] = (
    (TransportError, "transport"),
    (BatchScoringError, "scoring"),
    (ProtocolError, "protocol"),
    (SchemaError, "schema"),
    (ConfigurationError, "config"),
    (UndefinedMetricError, "metric"),
    (UnrepresentableProportionError, "fixture"),
    (InsufficientPoolError, "pool"),
    (ValidationError, "validation"),
    (ToolkitError, "error"),
)


def _category(exc: Exception) -> str:
    for cls, name in _DIAGNOSTIC_CATEGORY:
        if isinstance(exc, cls):
            return name
    return "error"


# ---------------------------------------------------------------------------
# configuration resolution


class Settings:
    """flags > config file > environment (endpoints only)."""

    def __init__(self, args: argparse.Namespace):
        self.args = args
        self.config: dict[str, Any] = {}
        config_path = getattr(args, "config", None)
        if config_path:
            try:
                self.config = json.loads(Path(config_path).read_text(encoding="utf-8"))
            except FileNotFoundError:
                raise ConfigurationError(f"config file not found: {config_path}")
            except json.JSONDecodeError as exc:
                raise ConfigurationError(f"config file {config_path} is not valid JSON: {exc.msg}")
            if not isinstance(self.config, dict):
                raise ConfigurationError(f"config file {config_path} must hold a JSON object")

    def get(self, key: str, env_var: str | None = None, default: Any = None) -> Any:
        value = getattr(self.args, key, None)
        if value is not None:
            return value
        if key in self.config and self.config[key] is not None:
            return self.config[key]
        if env_var and os.environ.get(env_var):
            return os.environ[env_var]
        return default

    def require(self, key: str, flag: str, env_var: str | None = None) -> Any:
        value = self.get(key, env_var)
        if value is None:
            raise ConfigurationError(f"missing required setting {flag!r}")
        return value


def _out_dir(settings: Settings) -> Path:
    out = Path(settings.get("out", default="."))
    out.mkdir(parents=True, exist_ok=True)
    return out


def _fmt(settings: Settings) -> str:
    raw = str(settings.get("format", default="tsv"))
    if raw not in _FORMAT_ALIASES:
        raise ConfigurationError(f"unknown report format {raw!r}; expected tsv or md")
    return _FORMAT_ALIASES[raw]


def _scenario(settings: Settings) -> Scenario:
    raw = str(settings.get("scenario", default=Scenario.IN_LANGUAGE.value))
    try:
        return Scenario(raw)
    except ValueError:
        raise ConfigurationError(f"unknown scenario {raw!r}")


def _languages(examples: Sequence[Example]) -> list[str]:
    return sorted({e.query_language for e in examples})


def _by_language(examples: Sequence[Example]) -> dict[str, list[Example]]:
    grouped: dict[str, list[Example]] = {}
    for e in sorted(examples, key=lambda e: (e.query_language, e.example_id)):
        grouped.setdefault(e.query_language, []).append(e)
    return grouped


def _write_json(obj: Any, path: Path) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(obj, ensure_ascii=False, sort_keys=True, indent=2) + "\n", "utf-8")


# ---------------------------------------------------------------------------
# commands


def cmd_ingest(args: argparse.Namespace) -> int:
    settings = Settings(args)
    out = _out_dir(settings)
    examples, metadata = ingest.load_examples_with_metadata(settings.require("examples", "--examples"))
    ratings = None
    ratings_path = settings.get("ratings")
    if ratings_path:
        ratings = ingest.load_ratings(ratings_path, examples)
    ingest.save_examples(examples, out / "examples.jsonl", metadata or None)
    print(f"ingest: {len(examples)} examples across languages {', '.join(_languages(examples))}")
    if ratings is not None:
        ingest.save_ratings(ratings, out / "ratings.jsonl", metadata or None)
        print(f"ingest: {len(ratings)} rating records")
    return 0


def cmd_aggregate(args: argparse.Namespace) -> int:
    settings = Settings(args)
    out = _out_dir(settings)
    examples = None
    if settings.get("examples"):
        examples = ingest.load_examples(settings.get("examples"))
    ratings = ingest.load_ratings(settings.require("ratings", "--ratings"), examples)
    judgments, excluded = agg.aggregate_all(ratings)
    ingest.save_judgments(judgments, out / "judgments.jsonl", {"excluded_triples": len(excluded)})
    print(f"aggregate: {len(judgments)} judgments, {len(excluded)} excluded triples")
    return 0


def cmd_agreement(args: argparse.Namespace) -> int:
    settings = Settings(args)
    out = _out_dir(settings)
    fmt = _fmt(settings)
    examples = ingest.load_examples(settings.require("examples", "--examples"))
    ratings = ingest.load_ratings(settings.require("ratings", "--ratings"), examples)
    judgments, _ = agg.aggregate_all(ratings)
    language_of = {e.example_id: e.query_language for e in examples}
    passages = agg.s1_view_passage_index(examples)

    rows = []
    payload: dict[str, dict[str, Any]] = {}
    for lang in _languages(examples):
        lang_judgments = [j for j in judgments if language_of.get(j.example_id) == lang]
        lang_ratings = [r for r in ratings if language_of.get(r.example_id) == lang]
        cells: dict[str, Any] = {}
        for scenario in Scenario:
            sj = [j for j in lang_judgments if j.scenario is scenario]
            sr = [r for r in lang_ratings if r.scenario is scenario]
            tag = "s1" if scenario is Scenario.IN_LANGUAGE else "s2"
            # the paper-style example counts mix units; we label both explicitly
            cells[f"n_queries_{tag}"] = len({j.example_id for j in sj})
            cells[f"n_triples_{tag}"] = len(sj)
            try:
                cells[f"agreement_{tag}"] = agg.agreement_with_consensus(sj, sr)
            except UndefinedMetricError:
                cells[f"agreement_{tag}"] = None
        s1 = agg.judgment_labels(lang_judgments, Scenario.IN_LANGUAGE)
        s2 = agg.judgment_labels(lang_judgments, Scenario.IN_ENGLISH)
        for name, translated_only in (("disagreement", False), ("disagreement_translated", True)):
            try:
                cells[name] = agg.scenario_disagreement(
                    s1, s2, translated_only=translated_only, passages=passages
                )
            except UndefinedMetricError:
                cells[name] = None
        payload[lang] = cells
        rows.append(
            [
                lang,
                str(cells["n_queries_s1"]),
                str(cells["n_triples_s1"]),
                str(cells["n_queries_s2"]),
                str(cells["n_triples_s2"]),
                report.format_percent(cells["agreement_s1"]),
                report.format_percent(cells["agreement_s2"]),
                report.format_percent(cells["disagreement"]),
                report.format_percent(cells["disagreement_translated"]),
            ]
        )
    headers = [
        "lang",
        "n_queries_s1",
        "n_triples_s1",
        "n_queries_s2",
        "n_triples_s2",
        "agreement_s1",
        "agreement_s2",
        "disagreement",
        "disagreement_translated",
    ]
    _write_json(payload, out / "agreement.json")
    table = report.render_table(headers, rows, fmt)
    (out / f"agreement_report.{_FORMAT_EXT[fmt]}").write_text(table, "utf-8")
    print(table, end="")
    return 0


_SCORER_KINDS = {
    "string-match": ScorerKind.STRING_MATCH,
    "string-match-tt": ScorerKind.STRING_MATCH_TRANSLATE_TEST,
    "remote": ScorerKind.REMOTE_ENTAILMENT,
    "mock": ScorerKind.MOCK,
}


def _make_scorer(settings: Settings, labels: Mapping[tuple[str, str], int] | None):
    name = str(settings.require("scorer", "--scorer"))
    if name not in _SCORER_KINDS:
        raise ConfigurationError(f"unknown scorer {name!r}")
    kind = _SCORER_KINDS[name]
    endpoint = None
    if kind is ScorerKind.REMOTE_ENTAILMENT:
        endpoint = str(settings.require("endpoint", "--endpoint", ENV_SCORER_ENDPOINT))
    seed = int(settings.get("seed", default=0)) if kind is ScorerKind.MOCK else None
    spec = ScorerSpec(name=name, kind=kind, endpoint=endpoint, seed=seed)

    translation_client = None
    translation_cache = None
    if kind is ScorerKind.STRING_MATCH_TRANSLATE_TEST:
        translate_endpoint = settings.require(
            "translate_endpoint", "--translate-endpoint", ENV_TRANSLATE_ENDPOINT
        )
        translation_client = HttpTranslationClient(str(translate_endpoint))
        cache_path = settings.get("translate_cache")
        translation_cache = TranslationCache(cache_path) if cache_path else None
    mode = str(settings.get("mock_mode", default="hash"))
    return build_scorer(
        spec,
        judgments=labels if mode in ("oracle", "noisy_oracle") else None,
        translation_client=translation_client,
        translation_cache=translation_cache,
        mock_mode=mode,
        epsilon=float(settings.get("epsilon", default=0.0)),
    )


def cmd_score(args: argparse.Namespace) -> int:
    settings = Settings(args)
    out = _out_dir(settings)
    examples = ingest.load_examples(settings.require("examples", "--examples"))
    labels = None
    if settings.get("judgments"):
        judgments = ingest.load_judgments(settings.get("judgments"))
        labels = agg.judgment_labels(judgments, _scenario(settings))
    scorer = _make_scorer(settings, labels)
    jobs = max(1, int(settings.get("jobs", default=1)))

    ordered = sorted(examples, key=lambda e: (e.query_language, e.example_id))
    tasks = [(e, p) for e in ordered for p in e.passages]
    failures: list[tuple[str, str, Exception]] = []
    results: dict[tuple[str, str], float] = {}
    # item-level errors are isolated; a transport failure (endpoint down after
    # retries) aborts the run instead of re-timing-out on every pair
    if jobs == 1:
        for e, p in tasks:
            try:
                results[(e.example_id, p.passage_id)] = scorer.score(e, p)
            except TransportError as exc:
                failures.append((e.example_id, p.passage_id, exc))
                break
            except ToolkitError as exc:
                failures.append((e.example_id, p.passage_id, exc))
    else:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            futures = {(e.example_id, p.passage_id): pool.submit(scorer.score, e, p) for e, p in tasks}
            for key, future in futures.items():
                try:
                    results[key] = future.result()
                except TransportError as exc:
                    failures.append((key[0], key[1], exc))
                    for pending in futures.values():
                        pending.cancel()
                    break
                except ToolkitError as exc:
                    failures.append((key[0], key[1], exc))

    grouped: dict[str, list[ScoredPassage]] = {}
    for e in ordered:
        row = [
            ScoredPassage(p.passage_id, results[(e.example_id, p.passage_id)], scorer.name)
            for p in e.passages
            if (e.example_id, p.passage_id) in results
        ]
        if row:
            grouped[e.example_id] = row
    ingest.save_scores(grouped, out / "scores.jsonl", {"scorer": scorer.name})
    print(f"score: {len(results)} scores from {scorer.name}")
    if failures:
        for eid, pid, exc in failures[:5]:
            print(f"error[{_category(exc)}]: ({eid}, {pid}): {exc}", file=sys.stderr)
        if len(failures) > 5:
            print(f"error: ... and {len(failures) - 5} more item failures", file=sys.stderr)
        return 1
    return 0


def cmd_calibrate(args: argparse.Namespace) -> int:
    settings = Settings(args)
    out = _out_dir(settings)
    fmt = _fmt(settings)
    examples = ingest.load_examples(settings.require("examples", "--examples"))
    scores = ingest.load_scores(settings.require("scores", "--scores"))
    judgments = ingest.load_judgments(settings.require("judgments", "--judgments"))
    labels = agg.judgment_labels(judgments, _scenario(settings))

    def pairs_for(examples_subset: Sequence[Example]) -> tuple[list[float], list[int]]:
        xs: list[float] = []
        ys: list[int] = []
        for e in examples_subset:
            for sp in scores.get(e.example_id, []):
                label = labels.get((e.example_id, sp.passage_id))
                if label is not None:
                    xs.append(sp.score)
                    ys.append(label)
        return xs, ys

    thresholds: dict[str, float] = {}
    per_language: dict[str, LanguageMetrics] = {}
    use_global = bool(settings.get("global_threshold", default=False))
    fixed = settings.get("threshold")
    grouped = _by_language(examples)
    global_threshold: float | None = float(fixed) if fixed is not None else None
    if fixed is not None:
        thresholds["fixed"] = float(fixed)
    elif use_global:
        xs, ys = pairs_for(examples)
        global_threshold = metrics.calibrate_threshold(xs, ys)
        thresholds["global"] = global_threshold
    for lang, members in grouped.items():
        xs, ys = pairs_for(members)
        cells: dict[str, float | None] = {"accuracy": None, "roc_auc": None}
        try:
            threshold = global_threshold if global_threshold is not None else metrics.calibrate_threshold(xs, ys)
            if global_threshold is None:
                thresholds[lang] = threshold
            cells["accuracy"] = metrics.accuracy_at(xs, ys, threshold)
            cells["roc_auc"] = metrics.roc_auc(xs, ys)
        except UndefinedMetricError:
            pass
        per_language[lang] = LanguageMetrics(**cells)

    scope = "fixed" if fixed is not None else ("global" if use_global else "per_language")
    _write_json({"scope": scope, "thresholds": thresholds}, out / "thresholds.json")
    rep = report.with_average(EvalReport.from_mapping(per_language))
    report.save_report_metrics(rep, out / "calibration_metrics.json")
    report.write_report(rep, fmt, out / f"calibration_report.{_FORMAT_EXT[fmt]}")
    print(report.emit_report(rep, fmt), end="")
    return 0


def _pool(settings: Settings) -> metrics.Pool:
    raw = str(settings.get("pool", default=metrics.Pool.ALL.value))
    try:
        return metrics.Pool(raw)
    except ValueError:
        raise ConfigurationError(f"unknown pool {raw!r}")


def _top1_scope(settings: Settings) -> metrics.Top1Scope:
    raw = str(settings.get("top1_scope", default=metrics.Top1Scope.SUBSET.value))
    try:
        return metrics.Top1Scope(raw)
    except ValueError:
        raise ConfigurationError(f"unknown top1 scope {raw!r}")


_SUBSET_ALIASES = {
    "any": metrics.SubsetFilter.ANY,
    "lang": metrics.SubsetFilter.IN_LANGUAGE,
    "in_language": metrics.SubsetFilter.IN_LANGUAGE,
    "en": metrics.SubsetFilter.ENGLISH_EXCLUSIVE,
    "english_exclusive": metrics.SubsetFilter.ENGLISH_EXCLUSIVE,
}


def cmd_evaluate(args: argparse.Namespace) -> int:
    settings = Settings(args)
    out = _out_dir(settings)
    fmt = _fmt(settings)
    examples = ingest.load_examples(settings.require("examples", "--examples"))
    judgments = ingest.load_judgments(settings.require("judgments", "--judgments"))
    labels = agg.judgment_labels(judgments, _scenario(settings))
    pool = _pool(settings)
    scope = _top1_scope(settings)
    subset = _SUBSET_ALIASES[str(settings.get("subset", default="any"))]
    em_bits = metrics.em_bits_for(examples)

    per_language: dict[str, LanguageMetrics] = {}
    exclusions = 0
    for lang, members in _by_language(examples).items():
        cells: dict[str, float | None] = {}

        def maybe(name: str, fn) -> None:
            try:
                cells[name] = fn()
            except UndefinedMetricError:
                cells[name] = None

        maybe(
            "ais_top1",
            lambda: metrics.ais(members, labels, metrics.Pool.TOP1, subset, top1_scope=scope),
        )
        detail = None
        try:
            detail = metrics.ais_detail(members, labels, metrics.Pool.ALL, subset, top1_scope=scope)
            cells["ais_all"] = detail.percentage
        except UndefinedMetricError:
            cells["ais_all"] = None
        if detail is not None:
            exclusions += len(detail.excluded)
        breakdown = metrics.ais_breakdown_by_em(members, labels, em_bits, pool, subset, top1_scope=scope)
        cells["ais_of_em"] = breakdown.of_em
        cells["ais_non_em"] = breakdown.non_em
        for name, sub in (
            ("subset_any", metrics.SubsetFilter.ANY),
            ("subset_in_language", metrics.SubsetFilter.IN_LANGUAGE),
            ("subset_english", metrics.SubsetFilter.ENGLISH_EXCLUSIVE),
        ):
            maybe(name, lambda sub=sub: metrics.ais(members, labels, pool, sub, scope))
        per_language[lang] = LanguageMetrics(**cells)

    rep = report.with_average(EvalReport.from_mapping(per_language))
    report.save_report_metrics(rep, out / "metrics.json")
    report.write_report(rep, fmt, out / f"report.{_FORMAT_EXT[fmt]}")
    if exclusions:
        print(f"evaluate: excluded {exclusions} examples lacking judgments", file=sys.stderr)
    print(report.emit_report(rep, fmt), end="")
    return 0


def cmd_rerank(args: argparse.Namespace) -> int:
    settings = Settings(args)
    out = _out_dir(settings)
    fmt = _fmt(settings)
    examples = ingest.load_examples(settings.require("examples", "--examples"))
    scores = ingest.load_scores(settings.require("scores", "--scores"))
    judgments = ingest.load_judgments(settings.require("judgments", "--judgments"))
    labels = agg.judgment_labels(judgments, _scenario(settings))
    scope = _top1_scope(settings)

    selections = []
    for e in sorted(examples, key=lambda e: (e.query_language, e.example_id)):
        if e.example_id not in scores:
            raise SchemaError(f"no scores for example {e.example_id!r}")
        selected = rerank.rerank(e, scores[e.example_id])
        score = next(sp.score for sp in scores[e.example_id] if sp.passage_id == selected)
        selections.append({"example_id": e.example_id, "selected_passage_id": selected, "score": score})
    ingest.write_jsonl(selections, out / "reranked.jsonl")

    per_language: dict[str, LanguageMetrics] = {}
    for lang, members in _by_language(examples).items():
        cells: dict[str, float | None] = {}
        try:
            top1 = metrics.ais(members, labels, metrics.Pool.TOP1, top1_scope=scope)
            cells["ais_top1"] = top1
            cells["ais_all"] = metrics.ais(members, labels, metrics.Pool.ALL, top1_scope=scope)
            reranked = rerank.reranked_ais(members, labels, scores)
            cells["ais_reranked"] = reranked
            try:
                cells["relative_improvement"] = rerank.relative_improvement(top1, reranked)
            except UndefinedMetricError:
                cells["relative_improvement"] = None
        except UndefinedMetricError:
            pass
        per_language[lang] = LanguageMetrics(**cells)

    rep = report.with_average(EvalReport.from_mapping(per_language))
    report.save_report_metrics(rep, out / "rerank_metrics.json")
    report.write_report(rep, fmt, out / f"rerank_report.{_FORMAT_EXT[fmt]}")
    print(report.emit_report(rep, fmt), end="")
    return 0


def cmd_mine(args: argparse.Namespace) -> int:
    settings = Settings(args)
    out = _out_dir(settings)
    seed = int(settings.get("seed", default=0))
    k = int(settings.get("k", default=mine.DEFAULT_NEGATIVES_PER_DOCUMENT))
    template_id = str(settings.get("template", default="nli-v1"))
    max_records = settings.get("max_records")
    pairs: list[mine.MinedPair] = []
    for lineno, obj in ingest.read_jsonl(settings.require("docs", "--docs")):
        if lineno == 1 and isinstance(obj, dict) and set(obj) == {"_meta"}:
            continue
        try:
            passages = [(p["passage_id"], p["text"]) for p in obj["passages"]]
            pairs.extend(
                mine.mine_negatives(
                    doc_id=obj["doc_id"],
                    passages=passages,
                    positive_id=obj["positive_passage_id"],
                    query=obj["query"],
                    answer=obj["answer"],
                    language=obj["language"],
                    k=k,
                    seed=seed,
                )
            )
        except (KeyError, TypeError) as exc:
            raise SchemaError(f"malformed document record: {exc}", line=lineno)
    # fine-tuning set sizes vary by recipe; cap applies in document order
    if max_records is not None:
        pairs = pairs[: int(max_records)]
    count = mine.emit_training_file(pairs, template_id, out / "training.jsonl", seed=seed)
    positives = sum(1 for p in pairs if p.label == 1)
    print(f"mine: {count} pairs ({positives} positive, {count - positives} negative)")
    return 0


def cmd_report(args: argparse.Namespace) -> int:
    settings = Settings(args)
    out = _out_dir(settings)
    fmt = _fmt(settings)
    rep = report.load_report_metrics(settings.require("metrics", "--metrics"))
    report.write_report(rep, fmt, out / f"report.{_FORMAT_EXT[fmt]}")
    print(report.emit_report(rep, fmt), end="")
    return 0


# ---------------------------------------------------------------------------
# parser


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="JSON config file; flags win over file over env")
    p.add_argument("--out", help="output directory (default: current directory)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="xattreval",
        description="Evaluate and improve the attribution level of cross-lingual QA outputs.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="validate and canonicalize dataset files")
    _add_common(p)
    p.add_argument("--examples")
    p.add_argument("--ratings")
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("aggregate", help="aggregate rater records into gold judgments")
    _add_common(p)
    p.add_argument("--ratings")
    p.add_argument("--examples", help="optional, for referential cross-checks")
    p.set_defaults(func=cmd_aggregate)

    p = sub.add_parser("agreement", help="inter-annotator agreement and scenario disagreement")
    _add_common(p)
    p.add_argument("--examples")
    p.add_argument("--ratings")
    p.add_argument("--format", choices=sorted(_FORMAT_ALIASES))
    p.set_defaults(func=cmd_agreement)

    p = sub.add_parser("score", help="score all (example, passage) pairs with a detector")
    _add_common(p)
    p.add_argument("--examples")
    p.add_argument("--scorer", choices=["string-match", "string-match-tt", "remote", "mock"])
    p.add_argument("--endpoint")
    p.add_argument("--translate-endpoint", dest="translate_endpoint")
    p.add_argument("--translate-cache", dest="translate_cache")
    p.add_argument("--judgments", help="gold labels for the oracle mock modes")
    p.add_argument("--scenario", choices=[s.value for s in Scenario])
    p.add_argument("--mock-mode", dest="mock_mode", choices=list(MockScorer.MODES))
    p.add_argument("--epsilon", type=float)
    p.add_argument("--seed", type=int)
    p.add_argument("--jobs", type=int)
    p.set_defaults(func=cmd_score)

    p = sub.add_parser("calibrate", help="pick decision thresholds and report accuracy/ROC-AUC")
    _add_common(p)
    p.add_argument("--examples")
    p.add_argument("--scores")
    p.add_argument("--judgments")
    p.add_argument("--scenario", choices=[s.value for s in Scenario])
    p.add_argument("--threshold", type=float, help="skip calibration and record this threshold")
    p.add_argument("--global-threshold", dest="global_threshold", action="store_const", const=True)
    p.add_argument("--format", choices=sorted(_FORMAT_ALIASES))
    p.set_defaults(func=cmd_calibrate)

    p = sub.add_parser("evaluate", help="compute attribution metrics and breakdowns")
    _add_common(p)
    p.add_argument("--examples")
    p.add_argument("--judgments")
    p.add_argument("--scenario", choices=[s.value for s in Scenario])
    p.add_argument("--pool", choices=[x.value for x in metrics.Pool])
    p.add_argument("--subset", choices=sorted(_SUBSET_ALIASES))
    p.add_argument("--top1-scope", dest="top1_scope", choices=[x.value for x in metrics.Top1Scope])
    p.add_argument("--format", choices=sorted(_FORMAT_ALIASES))
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("rerank", help="select attribution-maximizing passages and report gains")
    _add_common(p)
    p.add_argument("--examples")
    p.add_argument("--scores")
    p.add_argument("--judgments")
    p.add_argument("--scenario", choices=[s.value for s in Scenario])
    p.add_argument("--top1-scope", dest="top1_scope", choices=[x.value for x in metrics.Top1Scope])
    p.add_argument("--format", choices=sorted(_FORMAT_ALIASES))
    p.set_defaults(func=cmd_rerank)

    p = sub.add_parser("mine", help="mine training pairs by in-document negative sampling")
    _add_common(p)
    p.add_argument("--docs")
    p.add_argument("--k", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--template")
    p.add_argument("--max-records", dest="max_records", type=int)
    p.set_defaults(func=cmd_mine)

    p = sub.add_parser("report", help="render a saved metrics file as tsv or markdown")
    _add_common(p)
    p.add_argument("--metrics")
    p.add_argument("--format", choices=sorted(_FORMAT_ALIASES))
    p.set_defaults(func=cmd_report)

    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ToolkitError as exc:
        print(f"error[{_category(exc)}]: {exc}", file=sys.stderr)
        return 1
    except FileNotFoundError as exc:
        print(f"error[io]: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    raise SystemExit(main())
