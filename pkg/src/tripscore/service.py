"""Batch scoring service for RL reward feedback.

The catalog, query table, and weights load once at startup and never
mutate, so concurrent scoring shares state safely and rule-only responses
stay deterministic for the lifetime of the process. Startup fails fast on
a broken catalog; there is no degraded serving mode.
"""

from __future__ import annotations

import json
import os
import time as time_mod
from dataclasses import dataclass, field
from typing import Any, Optional, Union

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse
from pydantic import BaseModel, ConfigDict

from . import __version__
from .engine import MODE_FULL, MODE_RULE_ONLY, breakdown_to_dict, score_plan
from .errors import JudgeMalformedResponse, JudgeUnavailable, TripScoreError
from .ingest import (
    load_catalog,
    load_queries,
    load_weights,
    query_from_dict,
    weights_from_dict,
)
from .judge import JudgeConfig, http_judge
from .model import DEFAULT_WEIGHTS, ReferenceCatalog, WeightConfig

BATCH_CAP = 1024


@dataclass
class ServiceConfig:
    catalog_path: str = ""
    queries_path: str = ""
    weights_path: str = ""
    default_mode: str = MODE_RULE_ONLY
    port: int = 8000
    bearer_token: str = ""

    @classmethod
    def load(cls, path: Optional[str] = None, **overrides) -> "ServiceConfig":
        """Config file values, overridden by env, overridden by kwargs."""
        data: dict[str, Any] = {}
        if path:
            with open(path, encoding="utf-8") as fh:
                raw = json.load(fh)
            data.update(
                catalog_path=raw.get("catalog", ""),
                queries_path=raw.get("queries", ""),
                weights_path=raw.get("weights", ""),
                default_mode=raw.get("mode", MODE_RULE_ONLY),
                port=int(raw.get("port", 8000)),
                bearer_token=raw.get("bearerToken", ""),
            )
        if os.environ.get("TRIPSCORE_CATALOG"):
            data["catalog_path"] = os.environ["TRIPSCORE_CATALOG"]
        if os.environ.get("TRIPSCORE_PORT"):
            data["port"] = int(os.environ["TRIPSCORE_PORT"])
        data.update({k: v for k, v in overrides.items() if v is not None})
        return cls(**data)


class ScoreRequestModel(BaseModel):
    model_config = ConfigDict(extra="forbid")

    itinerary: Union[str, dict]
    queryId: Optional[str] = None
    query: Optional[dict] = None
    mode: Optional[str] = None
    weightsOverride: Optional[dict] = None


class BatchRequestModel(BaseModel):
    items: list[ScoreRequestModel]


@dataclass
class ServiceState:
    catalog: ReferenceCatalog
    queries: dict
    weights: WeightConfig
    default_mode: str
    bearer_token: str = ""
    judge_factory: Any = None
    _judge: Any = field(default=None, repr=False)

    def judge(self):
        if self._judge is None and self.judge_factory is not None:
            self._judge = self.judge_factory()
        return self._judge


def build_state(config: ServiceConfig, judge_factory=None) -> ServiceState:
    if not config.catalog_path:
        raise TripScoreError("no catalog configured (TRIPSCORE_CATALOG or config file)")
    catalog = load_catalog(config.catalog_path)
    queries = load_queries(config.queries_path) if config.queries_path else {}
    weights = load_weights(config.weights_path) if config.weights_path else DEFAULT_WEIGHTS
    if judge_factory is None and os.environ.get("JUDGE_URL"):
        judge_factory = lambda: http_judge(JudgeConfig.from_env())  # noqa: E731
    return ServiceState(
        catalog=catalog,
        queries=queries,
        weights=weights,
        default_mode=config.default_mode,
        bearer_token=config.bearer_token,
        judge_factory=judge_factory,
    )


def _error(status: int, code: str, message: str) -> JSONResponse:
    return JSONResponse(status_code=status, content={"error": {"code": code, "message": message}})


def _score_one(state: ServiceState, item: ScoreRequestModel) -> tuple[Optional[dict], Optional[tuple]]:
    """(response dict, None) on success, (None, (status, code, message)) on error."""
    if item.query is not None:
        try:
            query = query_from_dict(item.query)
        except TripScoreError as exc:
            return None, (400, "badQuery", str(exc))
    elif item.queryId is not None:
        query = state.queries.get(item.queryId)
        if query is None:
            return None, (404, "unknownQuery", f"queryId {item.queryId!r} not loaded")
    else:
        return None, (400, "badRequest", "either queryId or an inline query is required")

    mode = item.mode or state.default_mode
    if mode not in (MODE_RULE_ONLY, MODE_FULL):
        return None, (400, "badMode", f"mode must be {MODE_RULE_ONLY} or {MODE_FULL}")
    weights = state.weights
    if item.weightsOverride is not None:
        try:
            weights = weights_from_dict(item.weightsOverride)
        except TripScoreError as exc:
            return None, (400, "badWeights", str(exc))

    judge = None
    if mode == MODE_FULL:
        judge = state.judge()
        if judge is None:
            return None, (503, "judgeUnavailable", "full mode requires a configured judge")

    plan = item.itinerary if isinstance(item.itinerary, str) else json.dumps(item.itinerary)
    started = time_mod.perf_counter()
    try:
        breakdown = score_plan(plan, query, state.catalog, weights=weights, mode=mode, judge=judge)
    except (JudgeUnavailable, JudgeMalformedResponse) as exc:
        return None, (503, "judgeUnavailable", str(exc))
    elapsed_ms = (time_mod.perf_counter() - started) * 1000.0
    return (
        {
            "reward": breakdown.reward,
            "breakdown": breakdown_to_dict(breakdown),
            "engineVersion": __version__,
            "elapsedMs": round(elapsed_ms, 3),
        },
        None,
    )


def create_app(
    config: Optional[ServiceConfig] = None,
    state: Optional[ServiceState] = None,
    judge_factory=None,
) -> FastAPI:
    if state is None:
        state = build_state(config or ServiceConfig.load(), judge_factory=judge_factory)
    app = FastAPI(title="tripscore", version=__version__)
    app.state.engine = state

    def _authorized(request: Request) -> bool:
        if not state.bearer_token:
            return True
        return request.headers.get("Authorization", "") == f"Bearer {state.bearer_token}"

    @app.get("/v1/health")
    def health():
        return {
            "status": "ok",
            "catalogCounts": {
                "pois": len(state.catalog.pois),
                "hotels": len(state.catalog.hotels),
                "transports": len(state.catalog.transports),
                "queries": len(state.queries),
            },
            "engineVersion": __version__,
        }

    @app.post("/v1/score")
    async def score(request: Request):
        if not _authorized(request):
            return _error(401, "unauthorized", "bearer token required")
        try:
            item = ScoreRequestModel.model_validate(await request.json())
        except Exception as exc:
            return _error(400, "badRequest", f"malformed body: {exc}")
        result, error = _score_one(state, item)
        if error:
            return _error(*error)
        return result

    @app.post("/v1/score/batch")
    async def score_batch(request: Request):
        if not _authorized(request):
            return _error(401, "unauthorized", "bearer token required")
        try:
            raw = await request.json()
            if isinstance(raw, dict) and "items" in raw:
                raw = raw["items"]
            if not isinstance(raw, list):
                raise ValueError("expected a JSON array of score requests")
            items = [ScoreRequestModel.model_validate(entry) for entry in raw]
        except Exception as exc:
            return _error(400, "badRequest", f"malformed body: {exc}")
        if len(items) > BATCH_CAP:
            return _error(413, "batchTooLarge", f"batch cap is {BATCH_CAP} items")
        results = []
        for item in items:
            result, error = _score_one(state, item)
            if error:
                status, code, message = error
                results.append({"error": {"code": code, "message": message, "status": status}})
            else:
                results.append(result)
        return results

    return app


def run(config: ServiceConfig, judge_factory=None):  # pragma: no cover - exercised via CLI
    import uvicorn

    state = build_state(config, judge_factory=judge_factory)
    app = create_app(state=state)
    uvicorn.run(app, host="0.0.0.0", port=config.port, log_level="warning")
