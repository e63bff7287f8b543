"""HTTP/JSON API serving live elicitation sessions.

One session per decision-maker: the client polls the current query, posts a
choice, and finally fetches the recommended menu.  Every accepted response is
appended to the session's event log and fsynced before the request returns,
so a crash loses nothing; refits run on a worker thread off the request path
while the session reports a busy status.

Endpoints (JSON, schema_version 1):
    POST /v1/sessions                 create (idempotency_key supported)
    GET  /v1/sessions/{id}            session state and progress
    GET  /v1/sessions/{id}/query      current pair to compare
    POST /v1/sessions/{id}/response   answer the pending query
    GET  /v1/sessions/{id}/menu?k=    recommended solutions
    GET  /v1/problems                 available problem catalog

Environment: PP_DATA_DIR (log storage), PP_BIND_ADDR (serve default),
PP_AUTH_TOKEN (optional static bearer token).
"""

from __future__ import annotations

import json
import os
import threading
import time
import uuid

import numpy as np
from fastapi import FastAPI, Request
from fastapi.responses import FileResponse, JSONResponse

from . import acquisition as acq
from . import menus as menus_mod
from .dm import NOISE_LOGISTIC, NOISE_NONE, DmConfig, SimulatedDm
from .engine import (
    AWAITING,
    COLLECTING_INITIAL,
    FINISHED,
    READY,
    EngineError,
    SessionState,
    VariantConfig,
    accept_response,
    child_seed,
    complete_interaction,
    initialize_session,
    next_query,
    parse_variant,
    restore_from_events,
)
from .evolution import ParetoApproximation
from .problems import ProblemError, default_utility, make_problem

CATALOG = ("dtlz7-5-2", "dtlz7-5-3", "dtlz2-9-6", "wfg3-14-9", "carcab-7-9")

SCHEMA_VERSION = 1


def _error(status: int, message: str, **extra) -> JSONResponse:
    return JSONResponse({"error": message, **extra}, status_code=status)


class SessionRuntime:
    """In-memory handle for one session: engine state, lock, persistence."""

    def __init__(self, session_id: str, state: SessionState, log_path: str, meta: dict):
        self.id = session_id
        self.state = state
        self.log_path = log_path
        self.meta = meta
        self.lock = threading.Lock()
        self.busy = False
        self.persisted = 0
        self.menu_cache: dict = {}
        self.applied_seqs: dict[int, int] = {}  # seq -> choice
        self.error: str | None = None

    def persist(self, fsync: bool = True) -> None:
        """Append any new events to the log (atomic rewrite on restore)."""
        events = self.state.events
        if self.persisted > len(events):
            raise EngineError("persisted more events than exist")
        mode = "a" if os.path.exists(self.log_path) and self.persisted > 0 else "w"
        with open(self.log_path, mode) as fh:
            for event in events[self.persisted:]:
                fh.write(json.dumps(event) + "\n")
            fh.flush()
            if fsync:
                os.fsync(fh.fileno())
        self.persisted = len(events)

    def status_word(self) -> str:
        if self.error:
            return "failed"
        if self.busy:
            return "busy"
        return self.state.status


class SessionStore:
    """Registry of sessions on one data directory, with an id index."""

    def __init__(self, data_dir: str):
        self.data_dir = data_dir
        os.makedirs(data_dir, exist_ok=True)
        self.index_path = os.path.join(data_dir, "index.json")
        self.index: dict = {}
        if os.path.exists(self.index_path):
            with open(self.index_path) as fh:
                self.index = json.load(fh)
        self.sessions: dict[str, SessionRuntime] = {}
        self.idempotency: dict[str, dict] = self.index.pop("_idempotency", {})
        self.lock = threading.Lock()

    def save_index(self) -> None:
        doc = dict(self.index)
        doc["_idempotency"] = self.idempotency
        tmp = self.index_path + ".tmp"
        with open(tmp, "w") as fh:
            json.dump(doc, fh, indent=1, sort_keys=True)
            fh.flush()
            os.fsync(fh.fileno())
        os.replace(tmp, self.index_path)

    def add(self, runtime: SessionRuntime) -> None:
        with self.lock:
            self.sessions[runtime.id] = runtime
            self.index[runtime.id] = {
                "log": os.path.basename(runtime.log_path),
                **runtime.meta,
            }
            self.save_index()

    def get(self, session_id: str) -> SessionRuntime | None:
        runtime = self.sessions.get(session_id)
        if runtime is not None:
            return runtime
        entry = self.index.get(session_id)
        if entry is None or session_id.startswith("_"):
            return None
        return self._restore(session_id, entry)

    def _restore(self, session_id: str, entry: dict) -> SessionRuntime:
        log_path = os.path.join(self.data_dir, entry["log"])
        events = []
        lines = []
        with open(log_path) as fh:
            lines = [line.strip() for line in fh if line.strip()]
        for pos, line in enumerate(lines):
            try:
                events.append(json.loads(line))
            except json.JSONDecodeError:
                if pos == len(lines) - 1:
                    break  # torn final line from a crash mid-append
                raise
        dm = None
        if entry.get("dm_mode") == "simulated":
            problem = make_problem(entry["problem"])
            noise = entry.get("noise_level")
            dm = SimulatedDm(
                DmConfig(
                    default_utility(problem),
                    NOISE_LOGISTIC if noise else NOISE_NONE,
                    noise,
                    entry["dm_seed"],
                )
            )
        state = restore_from_events(events, dm=dm)
        if dm is not None:
            dm.calls = sum(1 for e in events if e["kind"] == "response")
        runtime = SessionRuntime(session_id, state, log_path, entry)
        runtime.applied_seqs = {
            e["seq"]: e["choice"] for e in events if e["kind"] == "response"
        }
        # regenerated events are bit-identical to the log; rewrite atomically
        tmp = log_path + ".tmp"
        with open(tmp, "w") as fh:
            for event in state.events:
                fh.write(json.dumps(event) + "\n")
            fh.flush()
            os.fsync(fh.fileno())
        os.replace(tmp, log_path)
        runtime.persisted = len(state.events)
        with self.lock:
            self.sessions[session_id] = runtime
        return runtime


def _query_doc(runtime: SessionRuntime, include_decisions: bool) -> dict:
    state = runtime.state
    q = state.pending
    problem = state.problem
    total_initial = len([e for e in state.events if e["kind"] == "initial-pair"])
    doc = {
        "schema_version": SCHEMA_VERSION,
        "seq": q.seq,
        "origin": q.origin,
        "objective_names": list(problem.objective_names),
        "orientations": list(problem.orientation),
        "options": [
            {"objectives": [float(v) for v in q.y1_raw]},
            {"objectives": [float(v) for v in q.y2_raw]},
        ],
        "progress": {
            "interaction": state.interaction_index,
            "budget": state.variant.budget,
            "initial_remaining": len(state.pending_initial),
            "initial_total": total_initial,
        },
    }
    if include_decisions:
        doc["options"][0]["decision"] = [float(v) for v in q.x1]
        doc["options"][1]["decision"] = [float(v) for v in q.x2]
    return doc


def _state_doc(runtime: SessionRuntime) -> dict:
    state = runtime.state
    return {
        "schema_version": SCHEMA_VERSION,
        "id": runtime.id,
        "status": runtime.status_word(),
        "busy": runtime.busy,
        "error": runtime.error,
        "problem": state.problem.name,
        "variant": state.variant.label,
        "dm_mode": runtime.meta.get("dm_mode", "live"),
        "progress": {
            "interaction": state.interaction_index,
            "budget": state.variant.budget,
            "initial_remaining": len(state.pending_initial),
        },
        "has_pending_query": state.pending is not None,
        "menu_ready": state.status == FINISHED,
    }


def create_app(
    data_dir: str | None = None,
    allow_early_menu: bool = False,
    auth_token: str | None = None,
) -> FastAPI:
    data_dir = data_dir or os.environ.get("PP_DATA_DIR", "pp-data")
    auth_token = auth_token if auth_token is not None else os.environ.get("PP_AUTH_TOKEN")
    store = SessionStore(data_dir)
    app = FastAPI(title="prefpareto session service", version="1")
    app.state.store = store

    repo_root = os.path.dirname(os.path.dirname(os.path.dirname(os.path.abspath(__file__))))
    ui_dir = os.environ.get("PP_UI_DIR") or os.path.join(repo_root, "frontend", "dist")

    @app.middleware("http")
    async def check_auth(request: Request, call_next):
        if auth_token:
            header = request.headers.get("authorization", "")
            if header != f"Bearer {auth_token}":
                return _error(401, "missing or invalid bearer token")
        return await call_next(request)

    @app.get("/v1/problems")
    def list_problems():
        out = []
        for name in CATALOG:
            problem = make_problem(name)
            out.append(
                {
                    "id": name,
                    "d": problem.d,
                    "m": problem.m,
                    "objective_names": list(problem.objective_names),
                    "orientations": list(problem.orientation),
                    "default_utility": default_utility(problem).kind,
                }
            )
        return {"schema_version": SCHEMA_VERSION, "problems": out}

    @app.post("/v1/sessions", status_code=201)
    async def create_session(request: Request):
        try:
            body = await request.json()
        except Exception:
            return _error(400, "request body must be JSON")
        if not isinstance(body, dict):
            return _error(400, "request body must be a JSON object")

        key = body.get("idempotency_key")
        body_fingerprint = json.dumps(
            {k: v for k, v in body.items() if k != "idempotency_key"}, sort_keys=True
        )
        if key is not None:
            known = store.idempotency.get(str(key))
            if known is not None:
                if known["body"] != body_fingerprint:
                    return _error(
                        409, "idempotency key already used with a different body"
                    )
                return JSONResponse(
                    {"id": known["id"], "status": "exists"}, status_code=200
                )

        problem_id = body.get("problem")
        if not isinstance(problem_id, str):
            return _error(400, "field 'problem' must be a problem id", field="problem")
        try:
            problem = make_problem(problem_id)
        except ProblemError as exc:
            return _error(400, str(exc), field="problem")

        variant_label = body.get("variant", "int-obj")
        budget = body.get("budget", 50)
        if not isinstance(budget, int) or budget < 0:
            return _error(400, "field 'budget' must be a non-negative integer", field="budget")
        initial_pairs = body.get("initial_pairs")
        if initial_pairs is not None and (
            not isinstance(initial_pairs, int) or initial_pairs < 1
        ):
            return _error(400, "field 'initial_pairs' must be a positive integer",
                          field="initial_pairs")
        mono = body.get("monotonicity") or {}
        dm_mode = body.get("dm_mode", "live")
        if dm_mode not in ("live", "simulated"):
            return _error(400, "field 'dm_mode' must be 'live' or 'simulated'",
                          field="dm_mode")
        seed = body.get("seed", int(time.time_ns() % (2**31)))
        if not isinstance(seed, int):
            return _error(400, "field 'seed' must be an integer", field="seed")
        try:
            variant = parse_variant(
                str(variant_label),
                budget=budget,
                initial_pairs=initial_pairs,
                menu_k=body.get("menu_k", 4),
                monotonicity_count=int(mono.get("count", 0)),
                monotonicity_delta=float(mono.get("delta", 2.0)),
                fit_iters=int(body.get("fit_iters", 400)),
                eval_budget=int(body.get("eval_budget", 1000)),
                restarts=int(body.get("restarts", 4)),
            )
        except (EngineError, ValueError) as exc:
            return _error(400, str(exc), field="variant")

        pareto = None
        if body.get("pareto"):
            pdoc = body["pareto"]
            try:
                pareto = ParetoApproximation(
                    np.asarray(pdoc["decisions"], dtype=float),
                    np.asarray(pdoc["objectives"], dtype=float),
                    str(pdoc.get("generator", "external")),
                    int(pdoc.get("generations", 0)),
                    int(pdoc.get("population", 0)),
                )
            except Exception as exc:
                return _error(400, f"invalid pareto payload: {exc}", field="pareto")

        noise_level = body.get("noise_level")
        dm = None
        if dm_mode == "simulated":
            dm = SimulatedDm(
                DmConfig(
                    default_utility(problem),
                    NOISE_LOGISTIC if noise_level else NOISE_NONE,
                    noise_level,
                    child_seed(seed, 1),
                )
            )

        session_id = uuid.uuid4().hex[:12]
        meta = {
            "problem": problem_id,
            "dm_mode": dm_mode,
            "noise_level": noise_level,
            "dm_seed": child_seed(seed, 1),
            "created": time.time(),
        }
        try:
            state = initialize_session(problem, variant, dm=None, pareto=pareto, seed=seed)
        except EngineError as exc:
            return _error(400, str(exc))
        log_path = os.path.join(store.data_dir, f"{session_id}.ndjson")
        runtime = SessionRuntime(session_id, state, log_path, meta)
        runtime.persist()
        store.add(runtime)
        if key is not None:
            store.idempotency[str(key)] = {"id": session_id, "body": body_fingerprint}
            store.save_index()

        if dm is not None:
            runtime.busy = True

            def autorun():
                try:
                    with runtime.lock:
                        state = runtime.state
                        while state.status in (COLLECTING_INITIAL, READY, AWAITING):
                            if state.pending is None:
                                next_query(state)
                            q = state.pending
                            resp = dm.respond(
                                state.oriented(q.y1_raw), state.oriented(q.y2_raw)
                            )
                            accept_response(state, resp)
                            complete_interaction(state)
                            runtime.persist(fsync=False)
                        runtime.persist()
                except Exception as exc:
                    runtime.error = f"{type(exc).__name__}: {exc}"
                finally:
                    runtime.busy = False

            threading.Thread(target=autorun, daemon=True).start()

        return {"id": session_id, "status": runtime.status_word()}

    @app.get("/v1/sessions/{session_id}")
    def get_session(session_id: str):
        runtime = store.get(session_id)
        if runtime is None:
            return _error(404, "unknown session id")
        return _state_doc(runtime)

    @app.get("/v1/sessions/{session_id}/query")
    def get_query(session_id: str, decisions: bool = False):
        runtime = store.get(session_id)
        if runtime is None:
            return _error(404, "unknown session id")
        if runtime.busy:
            return _error(409, "refit in progress", busy=True)
        state = runtime.state
        if state.pending is None:
            if state.status == FINISHED:
                return _error(
                    409, "session finished; fetch the menu",
                    menu=f"/v1/sessions/{session_id}/menu",
                )
            return _error(409, "no pending query")
        return _query_doc(runtime, decisions)

    @app.post("/v1/sessions/{session_id}/response", status_code=202)
    async def post_response(session_id: str, request: Request):
        runtime = store.get(session_id)
        if runtime is None:
            return _error(404, "unknown session id")
        try:
            body = await request.json()
        except Exception:
            return _error(400, "request body must be JSON")
        choice = body.get("choice")
        if choice not in (1, 2):
            return _error(400, "field 'choice' must be 1 or 2", field="choice")
        seq = body.get("seq")
        if not isinstance(seq, int):
            return _error(400, "field 'seq' must be an integer", field="seq")
        with runtime.lock:
            if seq in runtime.applied_seqs:
                return _error(409, "response for this sequence number already applied",
                              seq=seq)
            if runtime.busy:
                return _error(409, "refit in progress", busy=True)
            state = runtime.state
            if state.pending is None:
                return _error(409, "no pending query")
            if state.pending.seq != seq:
                return _error(
                    409, "out-of-order response", expected=state.pending.seq, got=seq,
                )
            accept_response(state, choice)
            runtime.applied_seqs[seq] = choice
            runtime.persist()  # durable before the 202 goes out
            needs_refit = state.pending is None
            if needs_refit:
                runtime.busy = True

        if needs_refit:

            def finish():
                try:
                    with runtime.lock:
                        complete_interaction(runtime.state)
                        if runtime.state.status == READY:
                            next_query(runtime.state)
                        runtime.persist()
                except Exception as exc:
                    runtime.error = f"{type(exc).__name__}: {exc}"
                finally:
                    runtime.busy = False

            threading.Thread(target=finish, daemon=True).start()

        return {
            "accepted": True,
            "seq": seq,
            "status": runtime.status_word(),
            "progress": {
                "interaction": runtime.state.interaction_index,
                "budget": runtime.state.variant.budget,
            },
        }

    @app.get("/v1/sessions/{session_id}/menu")
    def get_menu(session_id: str, k: int | None = None):
        runtime = store.get(session_id)
        if runtime is None:
            return _error(404, "unknown session id")
        if runtime.busy:
            return _error(409, "refit in progress", busy=True)
        state = runtime.state
        if state.status != FINISHED and not allow_early_menu:
            return _error(409, "session not finished (start the service with "
                               "--allow-early to permit early menus)")
        if state.posterior is None:
            return _error(409, "no posterior yet; answer the initial queries first")
        k = k or state.variant.menu_k
        X, Y_raw = state.queried_decisions()
        if not 1 <= k <= X.shape[0]:
            return _error(400, f"menu size must lie in [1, {X.shape[0]}]", field="k")
        cache_key = (k, state.refit_count)
        with runtime.lock:
            if cache_key not in runtime.menu_cache:
                inputs = (
                    Y_raw * state.signs[None, :]
                    if state.variant.model_space == "objective"
                    else X
                )
                menu = menus_mod.select_menu(
                    state.posterior,
                    acq.CandidateSet(X, inputs),
                    k,
                    menus_mod.MenuConfig(
                        mc_samples=state.variant.menu_mc_samples,
                        seed=child_seed(state.seed, 5, k),
                    ),
                )
                doc = menu.to_doc()
                doc["objectives"] = [
                    [float(v) for v in Y_raw[i]] for i in menu.indices
                ]
                doc["objective_names"] = list(state.problem.objective_names)
                doc["orientations"] = list(state.problem.orientation)
                doc["schema_version"] = SCHEMA_VERSION
                runtime.menu_cache[cache_key] = doc
        return runtime.menu_cache[cache_key]

    if os.path.isdir(ui_dir):

        @app.get("/")
        def ui_index():
            return FileResponse(os.path.join(ui_dir, "index.html"))

        @app.get("/app.js")
        def ui_bundle():
            return FileResponse(os.path.join(ui_dir, "app.js"), media_type="text/javascript")

        @app.get("/style.css")
        def ui_style():
            return FileResponse(os.path.join(ui_dir, "style.css"), media_type="text/css")

    return app
