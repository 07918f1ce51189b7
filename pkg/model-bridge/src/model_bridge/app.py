"""FastAPI application implementing the scorer wire protocol.

Endpoints:
  * ``POST /v1/score``       {"premise", "hypothesis"} -> {"score"}
  * ``POST /v1/score_batch`` {"items": [...]} -> {"scores": [...]} positionally
    aligned; a failed item yields a null score plus an entry under "errors"
    instead of failing the batch
  * ``GET /v1/health``       {"status": "ok", "model": <name>}

Malformed bodies are rejected with a 4xx status and a structured
``{"error": {...}}`` payload.
"""

from __future__ import annotations

from fastapi import FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse
from pydantic import BaseModel

from .models import EntailmentModel, InferenceError


class ScoreRequest(BaseModel):
    premise: str
    hypothesis: str


class BatchScoreRequest(BaseModel):
    items: list[ScoreRequest]


def create_app(model: EntailmentModel) -> FastAPI:
    app = FastAPI(title="model-bridge", version="0.1.0")

    @app.exception_handler(RequestValidationError)
    async def validation_error(request: Request, exc: RequestValidationError) -> JSONResponse:
        return JSONResponse(
            status_code=400,
            content={"error": {"code": "bad_request", "message": str(exc.errors()[:3])}},
        )

    @app.get("/v1/health")
    def health() -> dict:
        return {"status": "ok", "model": model.name}

    @app.post("/v1/score")
    def score(request: ScoreRequest) -> JSONResponse:
        try:
            value = model.entail_probability(request.premise, request.hypothesis)
        except InferenceError as exc:
            return JSONResponse(
                status_code=500,
                content={"error": {"code": "inference_failed", "message": str(exc)}},
            )
        return JSONResponse(content={"score": value})

    @app.post("/v1/score_batch")
    def score_batch(request: BatchScoreRequest) -> JSONResponse:
        scores: list[float | None] = []
        errors: list[dict] = []
        for i, item in enumerate(request.items):
            try:
                scores.append(model.entail_probability(item.premise, item.hypothesis))
            except InferenceError as exc:
                scores.append(None)
                errors.append({"index": i, "code": "inference_failed", "message": str(exc)})
        body: dict = {"scores": scores}
        if errors:
            body["errors"] = errors
        return JSONResponse(content=body)

    return app
