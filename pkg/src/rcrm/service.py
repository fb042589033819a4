"""HTTP trial-conduct service: session-oriented wrapper around the trial
engine with append-only per-session event logs.

State is never stored authoritatively. Every mutation appends one JSON
line to the session's log, and startup rebuilds each session by replaying
its outcome sequence against the recorded seed, verifying that the
recomputed decisions match the persisted ones. The randomization draw is
made server-side at outcome submission and persisted in the same line, so
a retry or refresh cannot re-roll it.
"""
from __future__ import annotations

import json
import os
import secrets
import threading
import uuid
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path

import numpy as np
from fastapi import FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse
from starlette.exceptions import HTTPException as StarletteHTTPException

from rcrm.decisions import DesignVariant
from rcrm.engine import TrialConfig, TrialState, TrialStatus, record_outcomes, start_trial
from rcrm.model import ModelConfig, ValidationError

__all__ = ["ServiceError", "SessionStore", "create_app"]

_MODEL_KEYS = ("skeleton", "target", "prior_mean", "prior_sd", "grid_lo", "grid_hi", "grid_points")
_TRIAL_KEYS = ("variant", "cohort_size", "max_subjects", "pi")
_CREATE_KEYS = _MODEL_KEYS + _TRIAL_KEYS + ("seed",)


class ServiceError(Exception):
    def __init__(self, status: int, code: str, detail: str):
        super().__init__(detail)
        self.status = status
        self.code = code
        self.detail = detail


def _not_found(session_id: str) -> ServiceError:
    return ServiceError(404, "not_found", f"unknown session {session_id!r}")


def _validation(detail: str) -> ServiceError:
    return ServiceError(422, "validation_error", detail)


def _conflict(detail: str) -> ServiceError:
    return ServiceError(409, "conflict", detail)


def config_to_dict(config: TrialConfig) -> dict:
    return {
        "skeleton": list(config.model.skeleton),
        "target": config.model.target,
        "prior_mean": config.model.prior_mean,
        "prior_sd": config.model.prior_sd,
        "grid_lo": config.model.grid_lo,
        "grid_hi": config.model.grid_hi,
        "grid_points": config.model.grid_points,
        "variant": config.variant.value,
        "cohort_size": config.cohort_size,
        "max_subjects": config.max_subjects,
        "pi": config.pi,
    }


def config_from_dict(raw: dict, default_variant: str = "RCRM1") -> TrialConfig:
    unknown = set(raw) - set(_MODEL_KEYS) - set(_TRIAL_KEYS)
    if unknown:
        raise _validation(f"unknown config field {sorted(unknown)[0]!r}")
    try:
        model_kwargs = {k: raw[k] for k in _MODEL_KEYS if k in raw}
        if "skeleton" in model_kwargs:
            if not isinstance(model_kwargs["skeleton"], (list, tuple)):
                raise ValidationError("skeleton must be a list")
            model_kwargs["skeleton"] = tuple(model_kwargs["skeleton"])
        return TrialConfig(
            model=ModelConfig(**model_kwargs),
            variant=DesignVariant.parse(raw.get("variant", default_variant)),
            cohort_size=int(raw.get("cohort_size", 3)),
            max_subjects=int(raw.get("max_subjects", 45)),
            pi=float(raw.get("pi", 0.90)),
        )
    except ValidationError as e:
        raise _validation(str(e)) from None
    except (TypeError, ArithmeticError) as e:
        raise _validation(f"invalid config: {e}") from None


def _jsonable(value):
    return json.loads(json.dumps(value))


@dataclass
class _Session:
    id: str
    created_at: str
    seed: int
    config: TrialConfig
    rng: np.random.Generator
    state: TrialState
    path: Path
    events: list = field(default_factory=list)
    lock: threading.Lock = field(default_factory=threading.Lock, repr=False)


class SessionStore:
    """Owns every session: creation, mutation, persistence, and replay.

    Requests for distinct sessions run concurrently; a per-session lock
    serializes access to each one, so its history is linearizable.
    """

    def __init__(self, state_dir: Path):
        self.state_dir = Path(state_dir)
        self.state_dir.mkdir(parents=True, exist_ok=True)
        self._lock = threading.Lock()
        self._sessions: dict[str, _Session] = {}
        for path in sorted(self.state_dir.glob("*.jsonl")):
            session = self._replay_log(path)
            self._sessions[session.id] = session

    # -- persistence ----------------------------------------------------

    def _append(self, session: _Session, event: dict):
        line = json.dumps(event, sort_keys=True)
        with open(session.path, "a", encoding="utf-8") as f:
            f.write(line + "\n")
            f.flush()
            os.fsync(f.fileno())
        # keep the parsed line, not the original dict, so exports are
        # byte-identical before and after a restart replays the log
        session.events.append(json.loads(line))

    @staticmethod
    def _read_events(path: Path) -> list[dict]:
        events = []
        lines = path.read_text(encoding="utf-8").splitlines()
        for i, line in enumerate(lines):
            if not line.strip():
                continue
            try:
                events.append(json.loads(line))
            except json.JSONDecodeError:
                # a torn final line means the write was never acknowledged
                if i == len(lines) - 1:
                    break
                raise ValidationError(f"corrupt event log {path.name} at line {i + 1}") from None
        return events

    def _replay_log(self, path: Path) -> _Session:
        events = self._read_events(path)
        if not events or events[0].get("event") != "created":
            raise ValidationError(f"event log {path.name} does not start with a created event")
        created = events[0]
        config = config_from_dict(created["config"])
        session = _Session(
            id=created["session_id"],
            created_at=created["created_at"],
            seed=int(created["seed"]),
            config=config,
            rng=np.random.default_rng(int(created["seed"])),
            state=start_trial(config),
            path=path,
            events=[created],
        )
        for event in events[1:]:
            if event.get("event") != "cohort":
                raise ValidationError(f"event log {path.name} has unknown event {event.get('event')!r}")
            expected = session.state.cohorts[-1]
            if event["index"] != expected.index or event["dose"] != expected.dose:
                raise ValidationError(f"event log {path.name} does not match recomputed trial")
            session.state = record_outcomes(session.state, int(event["dlt_count"]), session.rng)
            if self._outcome_event(session, expected, int(event["dlt_count"])) != event:
                raise ValidationError(f"event log {path.name} does not match recomputed trial")
            session.events.append(event)
        return session

    @staticmethod
    def _outcome_event(session: _Session, closed_cohort, dlt_count: int) -> dict:
        state = session.state
        nxt = None
        if state.status is TrialStatus.AWAITING_OUTCOMES:
            nxt = state.cohorts[-1].decision.to_dict()
        return _jsonable({
            "event": "cohort",
            "index": closed_cohort.index,
            "dose": closed_cohort.dose,
            "dlt_count": dlt_count,
            "decision": closed_cohort.decision.to_dict(),
            "status_after": state.status.value,
            "next": nxt,
        })

    # -- operations -----------------------------------------------------

    def create(self, payload: dict | None) -> _Session:
        raw = dict(payload or {})
        unknown = set(raw) - set(_CREATE_KEYS)
        if unknown:
            raise _validation(f"unknown config field {sorted(unknown)[0]!r}")
        seed = raw.pop("seed", None)
        if seed is None:
            seed = secrets.randbits(63)
        elif not isinstance(seed, int) or isinstance(seed, bool) or seed < 0:
            raise _validation("seed must be a nonnegative integer")
        config = config_from_dict(raw)
        session_id = uuid.uuid4().hex
        session = _Session(
            id=session_id,
            created_at=datetime.now(timezone.utc).isoformat(),
            seed=int(seed),
            config=config,
            rng=np.random.default_rng(int(seed)),
            state=start_trial(config),
            path=self.state_dir / f"{session_id}.jsonl",
        )
        baseline = session.state.cohorts[0]
        self._append(session, {
            "event": "created",
            "session_id": session.id,
            "created_at": session.created_at,
            "seed": session.seed,
            "config": config_to_dict(config),
            "baseline": {"index": baseline.index, "dose": baseline.dose,
                         "decision": baseline.decision.to_dict()},
        })
        with self._lock:
            self._sessions[session.id] = session
        return session

    def get(self, session_id: str) -> _Session:
        with self._lock:
            session = self._sessions.get(session_id)
        if session is None:
            raise _not_found(session_id)
        return session

    def submit_cohort(self, session_id: str, dlt_count) -> _Session:
        session = self.get(session_id)
        with session.lock:
            m = session.config.cohort_size
            if not isinstance(dlt_count, int) or isinstance(dlt_count, bool) or not 0 <= dlt_count <= m:
                raise _validation(f"dlt_count must be an integer in 0..{m}")
            if session.state.status is not TrialStatus.AWAITING_OUTCOMES:
                raise _conflict(f"session is terminal ({session.state.status.value})")
            closed = session.state.cohorts[-1]
            session.state = record_outcomes(session.state, dlt_count, session.rng)
            self._append(session, self._outcome_event(session, closed, dlt_count))
        return session

    def export(self, session_id: str) -> dict:
        session = self.get(session_id)
        with session.lock:
            return {
                "session_id": session.id,
                "created_at": session.created_at,
                "seed": session.seed,
                "config": config_to_dict(session.config),
                "status": session.state.status.value,
                "final_mtd": session.state.final_mtd,
                "events": list(session.events),
            }

    def import_export(self, document: dict) -> _Session:
        """Recreate a session from an export document on this store.

        The document's event list is written verbatim as a new log and
        replayed through the engine, which re-verifies every decision.
        """
        events = document.get("events")
        if not events:
            raise _validation("export document has no events")
        session_id = str(document.get("session_id") or events[0].get("session_id"))
        with self._lock:
            if session_id in self._sessions:
                raise _conflict(f"session {session_id!r} already exists")
        path = self.state_dir / f"{session_id}.jsonl"
        if path.exists():
            raise _conflict(f"event log for session {session_id!r} already exists")
        path.write_text("".join(json.dumps(e, sort_keys=True) + "\n" for e in events), encoding="utf-8")
        try:
            session = self._replay_log(path)
        except ValidationError as e:
            path.unlink()
            raise _validation(str(e)) from None
        with self._lock:
            self._sessions[session.id] = session
        return session


def session_view(session: _Session) -> dict:
    """Full session view: config echo, history with provenance, posterior
    summaries, and status. One shape serves create, get, and submit."""
    state = session.state
    post = state.posterior
    last = state.cohorts[-1]
    return {
        "session_id": session.id,
        "created_at": session.created_at,
        "seed": session.seed,
        "config": config_to_dict(session.config),
        "status": state.status.value,
        "final_mtd": state.final_mtd,
        "current_dose": last.dose if state.status is TrialStatus.AWAITING_OUTCOMES else None,
        "cohort_index": last.index if state.status is TrialStatus.AWAITING_OUTCOMES else None,
        "total_subjects": state.total_subjects,
        "total_dlts": state.total_dlts,
        "dose_means": [float(x) for x in post.dose_means],
        "mtd_probs": [float(x) for x in post.mtd_probs],
        "p_overtoxic": float(post.p_overtoxic),
        "last_decision": last.decision.to_dict(),
        "cohorts": [
            {
                "index": c.index,
                "dose": c.dose,
                "dlt_count": c.dlt_count,
                "decision": c.decision.to_dict(),
            }
            for c in state.cohorts
        ],
    }


def create_app(state_dir: Path | str) -> FastAPI:
    """Build the service app, replaying any session logs under state_dir."""
    store = SessionStore(Path(state_dir))
    app = FastAPI(title="dose-escalation conduct service", docs_url=None, redoc_url=None)
    app.state.store = store

    @app.exception_handler(ServiceError)
    async def service_error_handler(request: Request, exc: ServiceError):
        return JSONResponse(status_code=exc.status, content={"error": exc.code, "detail": exc.detail})

    @app.exception_handler(RequestValidationError)
    async def request_validation_handler(request: Request, exc: RequestValidationError):
        return JSONResponse(status_code=422, content={"error": "validation_error", "detail": str(exc)})

    @app.exception_handler(StarletteHTTPException)
    async def http_exception_handler(request: Request, exc: StarletteHTTPException):
        code = {404: "not_found", 405: "method_not_allowed"}.get(exc.status_code, "http_error")
        return JSONResponse(status_code=exc.status_code, content={"error": code, "detail": str(exc.detail)})

    @app.get("/healthz")
    def healthz():
        return {"status": "ok"}

    @app.post("/sessions", status_code=201)
    def create_session(payload: dict | None = None):
        session = store.create(payload)
        return session_view(session)

    @app.get("/sessions/{session_id}")
    def get_session(session_id: str):
        return session_view(store.get(session_id))

    @app.post("/sessions/{session_id}/cohorts")
    def submit_cohort(session_id: str, payload: dict | None = None):
        if not isinstance(payload, dict) or "dlt_count" not in payload:
            raise _validation("body must be a JSON object with a dlt_count field")
        return session_view(store.submit_cohort(session_id, payload["dlt_count"]))

    @app.get("/sessions/{session_id}/export")
    def export_session(session_id: str):
        return store.export(session_id)

    static_dir = Path(__file__).parent / "static"
    if static_dir.is_dir():
        from fastapi.staticfiles import StaticFiles

        app.mount("/", StaticFiles(directory=static_dir, html=True), name="ui")
    return app
