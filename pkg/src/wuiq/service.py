"""HTTP service exposing one project over a small JSON API.

Error contract: every failure body is ``{"error": {"code", "message"}}``
(plus ``"field"`` and ``"details"`` when available) with ``code`` drawn
from a closed set: invalid_document, invalid_record, invalid_timing,
invalid_field, configuration, degenerate_weights, unsupported_dimension,
no_accepted_judgments, enumeration_cap, store, missing_weights,
weights_frozen, not_found, unauthorized, internal. Mutating requests are
serialized by a process lock; batch posts accept a ``request_token`` so
a retried request is answered from the audit trail instead of
double-ingesting.
"""

from __future__ import annotations

import json
import threading
from datetime import datetime, timezone

from fastapi import FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse

from . import ahp, engine
from .errors import ValidationError, WuiqError
from .ingest import _matrix_from_judgments
from .store import ProjectStore
from .usability import questionnaire

_ERROR_STATUS = {
    "invalid_document": 400,
    "invalid_record": 400,
    "invalid_timing": 400,
    "invalid_field": 400,
    "configuration": 400,
    "degenerate_weights": 400,
    "unsupported_dimension": 400,
    "no_accepted_judgments": 400,
    "enumeration_cap": 400,
    "store": 400,
    "missing_weights": 409,
    "weights_frozen": 409,
    "not_found": 404,
    "unauthorized": 401,
    "internal": 500,
}


def _error_response(code: str, message: str, field=None, details=None) -> JSONResponse:
    if code not in _ERROR_STATUS:
        code = "internal"
    body = {"error": {"code": code, "message": message}}
    if field:
        body["error"]["field"] = field
    if details:
        body["error"]["details"] = list(details)
    return JSONResponse(status_code=_ERROR_STATUS[code], content=body)


class _NotFound(WuiqError):
    code = "not_found"


def _require(store: ProjectStore, artifact: str) -> dict:
    payload = store.read_artifact(artifact)
    if payload is None:
        raise _NotFound(f"no {artifact} computed yet")
    return payload


def _replayed(store: ProjectStore, token) -> dict | None:
    """A prior successful ingest with this request token, if any."""
    if not token:
        return None
    for entry in store.manifest.audit_trail:
        if entry.get("request_token") == token:
            return entry.get("response")
    return None


def create_app(store: ProjectStore, now_fn=None) -> FastAPI:
    app = FastAPI(title="wuiq", version="1.0")
    lock = threading.Lock()

    def now() -> str:
        if now_fn is not None:
            return now_fn()
        return datetime.now(timezone.utc).isoformat(timespec="seconds")

    @app.exception_handler(WuiqError)
    async def _wuiq_error(request: Request, exc: WuiqError):
        return _error_response(
            exc.code, str(exc),
            field=getattr(exc, "field", None),
            details=getattr(exc, "details", None),
        )

    @app.exception_handler(RequestValidationError)
    async def _body_error(request: Request, exc: RequestValidationError):
        return _error_response("invalid_document",
                               "request body must be a JSON object")

    @app.exception_handler(Exception)
    async def _internal_error(request: Request, exc: Exception):
        return _error_response("internal", "unexpected internal error")

    @app.middleware("http")
    async def _auth(request: Request, call_next):
        expected = store.manifest.config.auth_token
        if expected and request.url.path.startswith("/api/"):
            header = request.headers.get("authorization", "")
            if header != f"Bearer {expected}":
                return _error_response("unauthorized", "missing or wrong bearer token")
        return await call_next(request)

    # -- read side ---------------------------------------------------------

    @app.get("/api/project")
    def get_project():
        config = store.manifest.config.to_dict()
        config.pop("auth_token", None)
        return {
            "project_id": store.manifest.project_id,
            "criteria": list(store.manifest.criteria),
            "created_at": store.manifest.created_at,
            "config": config,
            "log_offsets": store.log_offsets(),
        }

    @app.get("/api/questionnaire")
    def get_questionnaire():
        return {"items": questionnaire()}

    @app.get("/api/surveys")
    def get_surveys():
        view = store.read_log("surveys")
        return {
            "count": view.offset,
            "respondents": [r["respondent_id"] for r in view.records],
            "truncated": view.truncated,
        }

    @app.get("/api/experts")
    def get_experts():
        judgments = engine.latest_per_expert(engine.load_experts(store))
        threshold = store.manifest.config.cr_threshold
        out = []
        for j in judgments:
            report = ahp.consistency(j.matrix, threshold)
            out.append({
                "expert_id": j.expert_id,
                "role": j.role,
                "submitted_at": j.submitted_at,
                "cr": report.cr,
                "accepted": report.accepted,
            })
        return {"count": len(out), "experts": out}

    @app.get("/api/weights")
    def get_weights():
        return _require(store, "weights")

    @app.get("/api/iterations")
    def get_iterations():
        return _require(store, "iterations")

    @app.get("/api/segments/latest")
    def get_segments():
        return _require(store, "segments")

    @app.get("/api/segments/latest/explanations")
    def get_explanations(cluster: int, mode: str = "indicator"):
        segments = _require(store, "segments")
        cached = store.read_artifact("explanations")
        if (
            cached is not None
            and cached.get("cluster") == cluster
            and cached.get("mode") == mode
            and cached.get("segments_computed_at") == segments.get("computed_at")
            and cached.get("input_offsets") == store.log_offsets()
        ):
            return cached
        with lock:
            return engine.run_explanations(store, cluster=cluster, mode=mode, now=now())

    @app.get("/api/report")
    def get_report():
        return engine.build_report(store)

    # -- write side --------------------------------------------------------

    @app.post("/api/experts/preview")
    def preview_expert(payload: dict):
        judgments = payload.get("judgments")
        matrix = _matrix_from_judgments(
            judgments, store.manifest.criteria, "preview"
        )
        report = ahp.consistency(matrix, store.manifest.config.cr_threshold)
        weights = ahp.derive_weights(matrix)
        return {
            "weights": weights.as_dict(),
            "lambda_max": report.lambda_max,
            "ci": report.ci,
            "ri": report.ri,
            "cr": report.cr,
            "accepted": report.accepted,
            "threshold": report.threshold,
        }

    def _ingest(kind: str, payload: dict) -> dict:
        token = payload.get("request_token")
        with lock:
            prior = _replayed(store, token)
            if prior is not None:
                return dict(prior, replayed=True)
            document = json.dumps(payload)
            at = now()
            if kind == "surveys":
                result = engine.ingest_surveys(store, document, at)
            elif kind == "experts":
                result = engine.ingest_experts(store, document, at)
            else:
                result = engine.ingest_audit(store, document, at)
            if token:
                store.manifest.audit_trail[-1]["request_token"] = token
                store.manifest.audit_trail[-1]["response"] = result
                store.save_manifest()
            return result

    @app.post("/api/surveys", status_code=201)
    def post_surveys(payload: dict):
        return _ingest("surveys", payload)

    @app.post("/api/experts", status_code=201)
    def post_experts(payload: dict):
        return _ingest("experts", payload)

    @app.post("/api/lighthouse", status_code=201)
    def post_lighthouse(payload: dict):
        return _ingest("lighthouse", payload)

    @app.post("/api/weights")
    def post_weights(payload: dict | None = None):
        payload = payload or {}
        threshold = payload.get("cr_threshold")
        with lock:
            return engine.compute_weights(
                store,
                threshold=float(threshold) if threshold is not None else None,
                override=bool(payload.get("override", False)),
                now=now(),
            )

    @app.post("/api/iterations", status_code=201)
    def post_iteration(payload: dict | None = None):
        with lock:
            return engine.run_evaluation(store, now())

    @app.post("/api/segments", status_code=201)
    def post_segments(payload: dict | None = None):
        payload = payload or {}
        k = payload.get("k", "auto")
        if k != "auto":
            if not isinstance(k, int) or isinstance(k, bool):
                raise ValidationError("k must be 'auto' or an integer", field="k")
        seed = payload.get("seed")
        if seed is not None and (not isinstance(seed, int) or isinstance(seed, bool)):
            raise ValidationError("seed must be an integer", field="seed")
        with lock:
            return engine.run_segmentation(store, k=k, seed=seed, now=now())

    return app
