"""Recorded-fixture conformance suite for the scorer wire protocol.

Covers: health endpoint, response schema, score range, batch/pointwise
equivalence within 1e-6, structured rejection of malformed bodies, and
item-level error entries in batch responses.
"""

from __future__ import annotations

import threading

import pytest

from model_bridge.app import create_app
from model_bridge.models import InferenceError, OverlapModel

BATCH_POINTWISE_TOLERANCE = 1e-6


class TestHealth:
    def test_schema(self, client):
        resp = client.get("/v1/health")
        assert resp.status_code == 200
        obj = resp.json()
        assert obj["status"] == "ok"
        assert isinstance(obj["model"], str)


class TestScore:
    def test_schema_and_range(self, client, recorded):
        for pair in recorded["pairs"]:
            resp = client.post(
                "/v1/score", json={"premise": pair["premise"], "hypothesis": pair["hypothesis"]}
            )
            assert resp.status_code == 200
            obj = resp.json()
            assert set(obj) == {"score"}
            assert isinstance(obj["score"], (int, float)) and not isinstance(obj["score"], bool)
            assert 0.0 <= obj["score"] <= 1.0

    def test_recorded_golden_values(self, client, recorded):
        for pair in recorded["pairs"]:
            resp = client.post(
                "/v1/score", json={"premise": pair["premise"], "hypothesis": pair["hypothesis"]}
            )
            assert resp.json()["score"] == pytest.approx(pair["expected_score"], abs=1e-12)

    def test_malformed_body_rejected_structured(self, client):
        for body in ({"nope": 1}, {"premise": "x"}, {"premise": 3, "hypothesis": "y"}):
            resp = client.post("/v1/score", json=body)
            assert 400 <= resp.status_code < 500
            assert "error" in resp.json()


class TestScoreBatch:
    def test_positional_alignment_with_pointwise(self, client, recorded):
        items = [
            {"premise": p["premise"], "hypothesis": p["hypothesis"]} for p in recorded["pairs"]
        ]
        batch = client.post("/v1/score_batch", json={"items": items}).json()["scores"]
        assert len(batch) == len(items)
        for item, batched in zip(items, batch):
            pointwise = client.post("/v1/score", json=item).json()["score"]
            assert abs(batched - pointwise) <= BATCH_POINTWISE_TOLERANCE

    def test_empty_batch(self, client):
        assert client.post("/v1/score_batch", json={"items": []}).json() == {"scores": []}

    def test_malformed_batch_rejected(self, client):
        resp = client.post("/v1/score_batch", json={"items": [{"premise": "x"}]})
        assert 400 <= resp.status_code < 500
        assert "error" in resp.json()

    def test_item_level_error_entries(self):
        class Flaky:
            name = "flaky"

            def entail_probability(self, premise: str, hypothesis: str) -> float:
                if "boom" in premise:
                    raise InferenceError("synthetic failure")
                return 0.5

        from fastapi.testclient import TestClient

        client = TestClient(create_app(Flaky()))
        items = [
            {"premise": "fine", "hypothesis": "h"},
            {"premise": "boom", "hypothesis": "h"},
            {"premise": "fine too", "hypothesis": "h"},
        ]
        obj = client.post("/v1/score_batch", json={"items": items}).json()
        assert obj["scores"] == [0.5, None, 0.5]
        assert obj["errors"] == [
            {"index": 1, "code": "inference_failed", "message": "synthetic failure"}
        ]


class TestAgainstPrimaryConformanceSuite:
    """Run the evaluation toolkit's own conformance checker against a live
    server: the bridge and the primary's remote-scorer client interoperate."""

    @pytest.fixture()
    def live_server_url(self):
        import socket

        import uvicorn

        with socket.socket() as sock:
            sock.bind(("127.0.0.1", 0))
            port = sock.getsockname()[1]
        config = uvicorn.Config(
            create_app(OverlapModel()), host="127.0.0.1", port=port, log_level="error"
        )
        server = uvicorn.Server(config)
        thread = threading.Thread(target=server.run, daemon=True)
        thread.start()
        import time

        deadline = time.monotonic() + 10
        while not server.started:
            if time.monotonic() > deadline:
                raise RuntimeError("server did not start")
            time.sleep(0.01)
        yield f"http://127.0.0.1:{port}"
        server.should_exit = True
        thread.join(timeout=5)

    def test_primary_suite_passes(self, live_server_url):
        xattreval_conformance = pytest.importorskip(
            "xattreval.conformance",
            reason="evaluation toolkit not installed; wire protocol checked natively above",
        )
        results = xattreval_conformance.run_checks(live_server_url, timeout=10)
        assert xattreval_conformance.passed(results), [r for r in results if not r.ok]
