"""Wire-protocol conformance checks for scorer services.

Runs a recorded set of fixture pairs through any service implementing the
scorer protocol and verifies: the health endpoint, response schema, score
range, batch/pointwise equivalence, and structured rejection of malformed
bodies. The checks drive the toolkit's own remote-scorer client, so passing
them means the service and this client interoperate.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import requests

from .errors import ProtocolError, ScoreRangeError, ToolkitError, TransportError
from .scoring import PromptTriple, remote_score, remote_score_batch

BATCH_POINTWISE_TOLERANCE = 1e-6

#: recorded fixture pairs: entailed, contradicted-ish, unicode, and quoting cases.
FIXTURE_PAIRS: tuple[PromptTriple, ...] = (
    PromptTriple(
        premise="Kenya is a country in East Africa. Its capital is Nairobi.",
        hypothesis='the answer to the question "What is the capital of Kenya?" is "Nairobi"',
    ),
    PromptTriple(
        premise="The Nile flows through eleven countries before reaching the sea.",
        hypothesis='the answer to the question "What is the capital of Kenya?" is "Paris"',
    ),
    PromptTriple(
        premise="皮膚は人体で最大の臓器である。",
        hypothesis='the answer to the question "人体で最大の臓器は？" is "皮膚"',
    ),
    PromptTriple(
        premise='He said "yes" and left.',
        hypothesis='the answer to the question "Did he say \\"yes\\"?" is "yes"',
    ),
    PromptTriple(premise="", hypothesis=""),
)


@dataclass(frozen=True, slots=True)
class CheckResult:
    name: str
    ok: bool
    detail: str = ""


def _health_check(endpoint: str, timeout: float) -> CheckResult:
    name = "health_endpoint"
    try:
        resp = requests.get(endpoint.rstrip("/") + "/v1/health", timeout=timeout)
    except requests.RequestException as exc:
        return CheckResult(name, False, f"health endpoint unreachable: {exc}")
    if resp.status_code != 200:
        return CheckResult(name, False, f"expected 200, got {resp.status_code}")
    try:
        obj = resp.json()
    except ValueError:
        return CheckResult(name, False, "health response is not JSON")
    if not isinstance(obj, dict) or obj.get("status") != "ok" or not isinstance(obj.get("model"), str):
        return CheckResult(name, False, f"health schema mismatch: {obj!r}")
    return CheckResult(name, True)


def _pointwise_check(endpoint: str, pairs: Sequence[PromptTriple], timeout: float) -> tuple[CheckResult, list[float]]:
    name = "pointwise_scores_valid"
    scores: list[float] = []
    for i, pair in enumerate(pairs):
        try:
            scores.append(remote_score(pair, endpoint, timeout=timeout))
        except ScoreRangeError as exc:
            return CheckResult(name, False, f"pair {i}: {exc}"), scores
        except (ProtocolError, TransportError) as exc:
            return CheckResult(name, False, f"pair {i}: {exc}"), scores
    return CheckResult(name, True), scores


def _batch_check(
    endpoint: str, pairs: Sequence[PromptTriple], pointwise: Sequence[float], timeout: float
) -> CheckResult:
    name = "batch_matches_pointwise"
    try:
        batch = remote_score_batch(pairs, endpoint, timeout=timeout)
    except ToolkitError as exc:
        return CheckResult(name, False, str(exc))
    if len(pointwise) != len(batch):
        return CheckResult(name, False, "pointwise run incomplete")
    worst = max((abs(a - b) for a, b in zip(batch, pointwise)), default=0.0)
    if worst > BATCH_POINTWISE_TOLERANCE:
        return CheckResult(name, False, f"max batch/pointwise gap {worst:.3e} > {BATCH_POINTWISE_TOLERANCE}")
    return CheckResult(name, True)


def _malformed_check(endpoint: str, timeout: float) -> CheckResult:
    name = "malformed_body_rejected"
    try:
        resp = requests.post(endpoint.rstrip("/") + "/v1/score", json={"nope": 1}, timeout=timeout)
    except requests.RequestException as exc:
        return CheckResult(name, False, f"unreachable: {exc}")
    if not 400 <= resp.status_code < 500:
        return CheckResult(name, False, f"expected a 4xx status, got {resp.status_code}")
    try:
        obj = resp.json()
    except ValueError:
        return CheckResult(name, False, "error response is not JSON")
    if not isinstance(obj, dict) or "error" not in obj:
        return CheckResult(name, False, f"error response lacks a structured 'error': {obj!r}")
    return CheckResult(name, True)


def run_checks(
    endpoint: str,
    pairs: Sequence[PromptTriple] = FIXTURE_PAIRS,
    timeout: float = 30.0,
) -> list[CheckResult]:
    """Run every conformance check against ``endpoint``; never raises."""
    results = [_health_check(endpoint, timeout)]
    pointwise, scores = _pointwise_check(endpoint, pairs, timeout)
    results.append(pointwise)
    if pointwise.ok:
        results.append(_batch_check(endpoint, pairs, scores, timeout))
    else:
        results.append(CheckResult("batch_matches_pointwise", False, "skipped: pointwise failed"))
    results.append(_malformed_check(endpoint, timeout))
    return results


def passed(results: Sequence[CheckResult]) -> bool:
    return all(r.ok for r in results)
