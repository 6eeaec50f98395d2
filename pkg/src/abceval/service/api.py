"""HTTP surface for a running campaign, versioned under /v1.

Authentication is pre-shared bearer tokens (minted by the CLI or by
POST /v1/annotators); every token carries an expiry and expired tokens are
rejected on all authenticated routes. Mutations delegate to the campaign,
which serializes them through its store; analyses run as background jobs,
at most one at a time.
"""

from __future__ import annotations

import threading
import time
import uuid
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path
from typing import Optional

from fastapi import Depends, FastAPI, Header, Query, Request, Response
from fastapi.responses import JSONResponse, PlainTextResponse
import json
import logging

from .. import __version__
from ..analysis import AnalysisError, write_report_bundle
from ..campaign import (
    Campaign,
    CampaignError,
    CapReachedError,
    NothingEligibleError,
    ScreeningFailedError,
    TrainingRequiredError,
)
from ..corpus import Conversation, CorpusError
from ..metrics import InvalidResponseError

logger = logging.getLogger("abceval.service")

DEFAULT_SESSION_TTL = 30 * 86400


def _rfc3339(ts: float) -> str:
    return datetime.fromtimestamp(ts, timezone.utc).isoformat().replace("+00:00", "Z")


@dataclass
class ApiSession:
    annotator_id: str
    token: str
    issued_at: float
    expires_at: float


class ApiError(Exception):
    def __init__(self, status: int, detail: str):
        self.status = status
        self.detail = detail


def _conversation_doc(conv: Conversation) -> dict:
    return {
        "id": conv.id,
        "bot_id": conv.bot_id,
        "session_pair_id": conv.session_pair_id,
        "turns": [{"index": t.index, "speaker": t.speaker, "text": t.text}
                  for t in conv.turns],
    }


def create_app(campaign: Campaign,
               session_ttl_seconds: float = DEFAULT_SESSION_TTL,
               clock=time.time) -> FastAPI:
    app = FastAPI(title="chatbot evaluation service", version=__version__)
    sessions: dict[str, ApiSession] = {}
    idempotency: dict[str, dict] = {}
    jobs: dict[str, dict] = {}
    jobs_lock = threading.Lock()

    def mint_session(annotator_id: str, token: str) -> ApiSession:
        now = clock()
        session = ApiSession(annotator_id=annotator_id, token=token,
                             issued_at=now, expires_at=now + session_ttl_seconds)
        sessions[token] = session
        return session

    for annotator in campaign.annotators.values():
        mint_session(annotator.id, annotator.token)
    app.state.sessions = sessions
    app.state.campaign = campaign
    app.state.mint_session = mint_session

    def auth(authorization: Optional[str] = Header(default=None)) -> ApiSession:
        if not authorization or not authorization.startswith("Bearer "):
            raise ApiError(401, "missing bearer token")
        token = authorization.removeprefix("Bearer ").strip()
        session = sessions.get(token)
        if session is None:
            raise ApiError(401, "unknown token")
        if clock() > session.expires_at:
            raise ApiError(401, "token expired")
        return session

    @app.exception_handler(ApiError)
    async def on_api_error(_req: Request, exc: ApiError):
        return JSONResponse(status_code=exc.status, content={"detail": exc.detail})

    def http_status(exc: Exception) -> int:
        if isinstance(exc, (TrainingRequiredError, ScreeningFailedError)):
            return 403
        if isinstance(exc, NothingEligibleError):
            return 404
        if isinstance(exc, CapReachedError):
            return 409
        return 400

    for exc_type in (CampaignError, CorpusError, InvalidResponseError, AnalysisError):
        @app.exception_handler(exc_type)
        async def on_domain_error(_req: Request, exc: Exception):
            return JSONResponse(status_code=http_status(exc),
                                content={"detail": str(exc)})

    @app.middleware("http")
    async def request_log(request: Request, call_next):
        start = clock()
        response = await call_next(request)
        logger.info(json.dumps({
            "method": request.method, "path": request.url.path,
            "status": response.status_code,
            "duration_ms": round((clock() - start) * 1000, 2),
        }))
        return response

    # -- health ------------------------------------------------------------

    @app.get("/health")
    def health():
        return {
            "status": "ok",
            "build": __version__,
            "campaign": {
                "seed": campaign.config.seed,
                "n_conversations": len(campaign.corpus.conversations),
                "n_annotators": len(campaign.annotators),
                "n_records": len(campaign.records),
            },
            "time": _rfc3339(clock()),
        }

    # -- annotators & tasks ------------------------------------------------

    @app.post("/v1/annotators", status_code=201)
    def register_annotator(body: dict):
        display_name = body.get("display_name")
        if not display_name or not isinstance(display_name, str):
            raise ApiError(400, "display_name is required")
        annotator = campaign.register_annotator(display_name)
        session = mint_session(annotator.id, annotator.token)
        return {
            "annotator_id": annotator.id,
            "token": annotator.token,
            "issued_at": _rfc3339(session.issued_at),
            "expires_at": _rfc3339(session.expires_at),
        }

    @app.get("/v1/tasks")
    def list_tasks():
        return {
            "tasks": [
                {
                    "key": task.key,
                    "method": task.method,
                    "labels": list(task.labels),
                    "widget": task.widget,
                    "unit": task.unit,
                    "payment_usd": task.payment_usd,
                    "requires_training": task.method in campaign.config.trained_methods,
                }
                for task in sorted(campaign.schema.tasks.values(), key=lambda t: t.key)
            ]
        }

    # -- training ----------------------------------------------------------

    @app.get("/v1/training/{task_key}/next")
    def next_training(task_key: str, session: ApiSession = Depends(auth)):
        gold_round = campaign.next_training(session.annotator_id, task_key)
        # Gold labels and explanations stay server-side until submission.
        return {
            "task": task_key,
            "round": gold_round.round,
            "conversation": _conversation_doc(gold_round.conversation),
        }

    @app.post("/v1/training/{task_key}/submit")
    def submit_training(task_key: str, body: dict, session: ApiSession = Depends(auth)):
        round_number = body.get("round")
        payload = body.get("payload")
        if not isinstance(round_number, int) or not isinstance(payload, dict):
            raise ApiError(400, "body must carry an integer 'round' and a 'payload' object")
        feedback = campaign.submit_training(session.annotator_id, task_key,
                                            round_number, payload)
        return {
            "task": task_key,
            "round": feedback.round,
            "mistake_count": feedback.mistake_count,
            "disagreements": feedback.disagreements,
            "verdict": feedback.verdict,
        }

    # -- assignments & annotations ----------------------------------------

    @app.get("/v1/assignments/next")
    def next_assignment(task: str = Query(...), session: ApiSession = Depends(auth)):
        campaign.expire_stale()
        assignment = campaign.assign(session.annotator_id, task)
        task_def = campaign.schema.tasks[task]
        if task_def.method == "comparative":
            first, second = campaign.corpus.pairs()[assignment.unit_id]
            unit = {"pair_id": assignment.unit_id,
                    "first": _conversation_doc(first),
                    "second": _conversation_doc(second)}
        else:
            unit = {"conversation":
                    _conversation_doc(campaign.corpus.conversations[assignment.unit_id])}
        return {
            "assignment_id": assignment.id,
            "task": task,
            "opened_at": _rfc3339(assignment.opened_at),
            "expires_at": _rfc3339(assignment.opened_at
                                   + campaign.config.assignment_ttl_seconds),
            "unit": unit,
        }

    @app.post("/v1/annotations", status_code=201)
    def submit_annotation(body: dict, response: Response,
                          session: ApiSession = Depends(auth),
                          idempotency_key: Optional[str] = Header(default=None)):
        assignment_id = body.get("assignment_id")
        payload = body.get("payload")
        if not isinstance(assignment_id, str) or not isinstance(payload, dict):
            raise ApiError(400, "body must carry 'assignment_id' and a 'payload' object")
        if idempotency_key is not None and idempotency_key in idempotency:
            response.status_code = 200
            return idempotency[idempotency_key]
        assignment = campaign.assignments.get(assignment_id)
        if assignment is not None and assignment.annotator_id != session.annotator_id:
            raise ApiError(403, "assignment belongs to a different annotator")
        record = campaign.submit_annotation(assignment_id, payload)
        doc = {
            "record": record.to_dict(),
            "submitted_at": _rfc3339(record.submitted_at),
        }
        if idempotency_key is not None:
            idempotency[idempotency_key] = doc
        return doc

    # -- export ------------------------------------------------------------

    @app.get("/v1/export")
    def export(task: Optional[str] = Query(default=None),
               session: ApiSession = Depends(auth)):
        rows = campaign.export_annotations(task_key=task)
        body = "".join(json.dumps(row, ensure_ascii=False, sort_keys=True) + "\n"
                       for row in rows)
        return PlainTextResponse(content=body, media_type="application/x-ndjson")

    # -- analyses ----------------------------------------------------------

    def run_job(job_id: str, params: dict) -> None:
        out_dir = Path(params.pop("out_dir"))
        try:
            manifest = write_report_bundle(campaign, out_dir, **params)
            with jobs_lock:
                jobs[job_id].update(status="done", manifest=manifest)
        except Exception as exc:  # surface the failure through polling
            with jobs_lock:
                jobs[job_id].update(status="failed", error=str(exc))

    @app.post("/v1/analyses", status_code=202)
    def start_analysis(body: dict, session: ApiSession = Depends(auth)):
        with jobs_lock:
            if any(job["status"] == "running" for job in jobs.values()):
                raise ApiError(409, "an analysis job is already running")
            job_id = uuid.uuid4().hex[:12]
            out_dir = campaign.store_dir / "reports" / job_id
            params = {
                "seed": int(body.get("seed", 0)),
                "reports": body.get("reports"),
                "k": int(body.get("k", 10_000)),
                "downsample": int(body.get("downsample", 32)),
                "beam_width": int(body.get("beam_width", 100)),
                "n_dialogues": int(body.get("n_dialogues",
                                            campaign.config.n_dialogues_for_estimates)),
                "wage_per_hour": float(body.get("wage_per_hour",
                                                campaign.config.wage_per_hour)),
                "out_dir": str(out_dir),
            }
            jobs[job_id] = {"id": job_id, "status": "running",
                            "out_dir": str(out_dir), "params": dict(params)}
        thread = threading.Thread(target=run_job, args=(job_id, params), daemon=True)
        thread.start()
        return {"id": job_id, "status": "running", "out_dir": str(out_dir)}

    @app.get("/v1/analyses/{job_id}")
    def poll_analysis(job_id: str, session: ApiSession = Depends(auth)):
        with jobs_lock:
            job = jobs.get(job_id)
            if job is None:
                raise ApiError(404, f"unknown analysis job {job_id!r}")
            return dict(job)

    return app
