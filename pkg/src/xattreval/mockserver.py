"""Deterministic in-process server for the scorer and translation protocols.

Used by offline tests and as a stand-in endpoint while wiring pipelines.
Scores are a lexical-overlap heuristic: hypotheses in the toolkit's prompt
template are parsed back into (query, answer), and the score weights answer
containment in the premise over query-token coverage. Entailed fixture
pairs score high and unrelated pairs score low, deterministically.
"""

from __future__ import annotations

import json
import re
import threading
from contextlib import contextmanager
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from typing import Iterator

from .scoring import invert_hypothesis, normalize

MODEL_NAME = "mock-overlap-v1"

_WORD = re.compile(r"\w+")

ANSWER_WEIGHT = 0.7


def _coverage(needle: str, premise_text: str, premise_tokens: set[str]) -> float:
    """Containment short-circuits (handles unsegmented scripts), else token overlap."""
    needle_text = normalize(needle)
    if needle_text and needle_text in premise_text:
        return 1.0
    tokens = _WORD.findall(needle_text)
    if not tokens:
        return 0.0
    return sum(1 for t in tokens if t in premise_tokens) / len(tokens)


def overlap_score(premise: str, hypothesis: str) -> float:
    premise_text = normalize(premise)
    premise_tokens = set(_WORD.findall(premise_text))
    try:
        query, answer = invert_hypothesis(hypothesis)
    except ValueError:
        tokens = _WORD.findall(normalize(hypothesis))
        if not tokens:
            return 0.0
        return sum(1 for t in tokens if t in premise_tokens) / len(tokens)
    return ANSWER_WEIGHT * _coverage(answer, premise_text, premise_tokens) + (
        1.0 - ANSWER_WEIGHT
    ) * _coverage(query, premise_text, premise_tokens)


def mock_translate(text: str, target: str) -> str:
    return f"[{target}] {text}"


class _Handler(BaseHTTPRequestHandler):
    server_version = "xattreval-mock/1"

    def log_message(self, format: str, *args) -> None:  # noqa: A002 - stdlib signature
        pass

    def _send(self, status: int, payload: dict) -> None:
        body = json.dumps(payload, ensure_ascii=False).encode("utf-8")
        self.send_response(status)
        self.send_header("Content-Type", "application/json; charset=utf-8")
        self.send_header("Content-Length", str(len(body)))
        self.end_headers()
        self.wfile.write(body)

    def _error(self, status: int, code: str, message: str) -> None:
        self._send(status, {"error": {"code": code, "message": message}})

    def _read_body(self) -> dict | None:
        length = int(self.headers.get("Content-Length") or 0)
        raw = self.rfile.read(length)
        try:
            obj = json.loads(raw.decode("utf-8"))
        except (UnicodeDecodeError, json.JSONDecodeError):
            self._error(400, "bad_request", "body must be a JSON object")
            return None
        if not isinstance(obj, dict):
            self._error(400, "bad_request", "body must be a JSON object")
            return None
        return obj

    @staticmethod
    def _pair(obj: dict) -> tuple[str, str] | None:
        premise = obj.get("premise")
        hypothesis = obj.get("hypothesis")
        if not isinstance(premise, str) or not isinstance(hypothesis, str):
            return None
        return premise, hypothesis

    def do_GET(self) -> None:  # noqa: N802 - stdlib naming
        if self.path == "/v1/health":
            self._send(200, {"status": "ok", "model": MODEL_NAME})
        else:
            self._error(404, "not_found", f"unknown path {self.path}")

    def do_POST(self) -> None:  # noqa: N802 - stdlib naming
        obj = self._read_body()
        if obj is None:
            return
        if self.path == "/v1/score":
            pair = self._pair(obj)
            if pair is None:
                self._error(400, "bad_request", "'premise' and 'hypothesis' must be strings")
                return
            self._send(200, {"score": overlap_score(*pair)})
        elif self.path == "/v1/score_batch":
            items = obj.get("items")
            if not isinstance(items, list):
                self._error(400, "bad_request", "'items' must be a list")
                return
            scores = []
            for i, item in enumerate(items):
                pair = self._pair(item) if isinstance(item, dict) else None
                if pair is None:
                    self._error(400, "bad_request", f"items[{i}] must carry string premise/hypothesis")
                    return
                scores.append(overlap_score(*pair))
            self._send(200, {"scores": scores})
        elif self.path == "/v1/translate":
            text = obj.get("text")
            target = obj.get("target")
            source = obj.get("source")
            if not isinstance(text, str) or not isinstance(target, str):
                self._error(400, "bad_request", "'text' and 'target' must be strings")
                return
            if source == target:
                self._send(200, {"text": text})
            else:
                self._send(200, {"text": mock_translate(text, target)})
        else:
            self._error(404, "not_found", f"unknown path {self.path}")


def start_mock_server(port: int = 0) -> tuple[ThreadingHTTPServer, str]:
    """Start the server on ``port`` (0 = ephemeral); returns (server, base_url)."""
    server = ThreadingHTTPServer(("127.0.0.1", port), _Handler)
    thread = threading.Thread(target=server.serve_forever, name="xattreval-mock", daemon=True)
    thread.start()
    host, bound_port = server.server_address[:2]
    return server, f"http://{host}:{bound_port}"


@contextmanager
def running_mock_server(port: int = 0) -> Iterator[str]:
    server, base_url = start_mock_server(port)
    try:
        yield base_url
    finally:
        server.shutdown()
        server.server_close()


def main(argv: list[str] | None = None) -> int:
    import argparse

    parser = argparse.ArgumentParser(description="Run the deterministic mock scorer/translator.")
    parser.add_argument("--port", type=int, default=8645)
    args = parser.parse_args(argv)
    server, base_url = start_mock_server(args.port)
    print(f"mock server listening on {base_url} (Ctrl-C to stop)")
    try:
        threading.Event().wait()
    except KeyboardInterrupt:
        server.shutdown()
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
