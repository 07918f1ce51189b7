from __future__ import annotations

import json
from pathlib import Path

import pytest
from fastapi.testclient import TestClient

from model_bridge.app import create_app
from model_bridge.models import OverlapModel

FIXTURES = Path(__file__).parent.parent / "fixtures"


@pytest.fixture(scope="session")
def recorded():
    return json.loads((FIXTURES / "recorded_pairs.json").read_text("utf-8"))


@pytest.fixture()
def client() -> TestClient:
    return TestClient(create_app(OverlapModel()))
