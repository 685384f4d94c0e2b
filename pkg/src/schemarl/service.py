"""HTTP service: dataset/constraints/workload/params loading, run lifecycle
with a live episode event stream, schema listing, what-if evaluation and DDL
export. One active run per service instance.

The training loop runs on a background thread; stop requests are honored at
episode boundaries. Per-episode summaries are pushed as server-sent events
(`id: <episode>` + `data: <json>` frames) and mirrored to the run directory.
"""

from __future__ import annotations

import json
import threading
from pathlib import Path

from fastapi import FastAPI, HTTPException, Query, Request
from fastapi.responses import HTMLResponse, PlainTextResponse, StreamingResponse

from .catalog import Catalog, EntityFact, SourceManifest, build_catalog
from .engine import merge_tables
from .errors import SchemarlError
from .learner import Environment, LearnParams, train
from .runs import EpisodeWriter, ddl_for_signature, write_ddl, write_result, write_run_inputs
from .schema import (
    ConstraintPool,
    JoinAction,
    SchemaState,
    parse_constraints,
    signature,
)
from .schema import _tables_joinable  # joinability between whole tables
from .workload import Workload, parse_workload, workload_cost

PHASES = ("IDLE", "LOADED", "RUNNING", "STOPPED", "DONE")


def evaluate_whatif(groups: list[list[int]], env: Environment) -> dict:
    """Cost a user-supplied attribute grouping without running the learner.

    Groups must partition all attributes. Each group is materialized by
    merging its single-attribute tables in ascending-id order (falling back
    to any joinable order); an unconnectable group yields a violation report
    naming the first pair that cannot be joined.
    """
    n = env.n_attrs
    flat = sorted(a for g in groups for a in g)
    if flat != list(range(n)):
        raise ValueError(f"groups must form a partition of attributes 0..{n - 1}")

    state0 = env.initial_state
    tables = []
    for group in sorted(tuple(sorted(g)) for g in groups):
        merged = state0.host_of(group[0])
        remaining = list(group[1:])
        while remaining:
            pick = None
            for candidate in remaining:
                if _tables_joinable(env.pool, merged, state0.host_of(candidate)):
                    pick = candidate
                    break
            if pick is None:
                return {"realizable": False,
                        "violation": [min(merged.attrs), remaining[0]],
                        "detail": f"attributes {min(merged.attrs)} and {remaining[0]} "
                                  "cannot be joined under the constraint pool"}
            merged = merge_tables(merged, state0.host_of(pick), env.pool,
                                  JoinAction(min(merged.attrs), pick))
            remaining.remove(pick)
        tables.append(merged)

    state = SchemaState(tables=tuple(tables),
                        attr_location={a: t.id for t in tables for a in t.attrs})
    report = workload_cost(env.workload, state, env.pool,
                           unanswerable_penalty=env.penalty)
    return {"realizable": True, "signature": signature(state),
            "cost": report.total, "storage": report.storage,
            "report": report.to_json()}


class RunManager:
    """Holds the loaded dataset, run lifecycle state and the event log."""

    def __init__(self, runs_dir: str | Path = "runs"):
        self.runs_dir = Path(runs_dir)
        self.lock = threading.Lock()
        self.cond = threading.Condition(self.lock)
        self.phase = "IDLE"
        self.manifest: SourceManifest | None = None
        self.catalog: Catalog | None = None
        self.facts: list[EntityFact] | None = None
        self.pool = ConstraintPool()
        self.constraints_text = ""
        self.workload: Workload | None = None
        self.workload_text = ""
        self.params = LearnParams()
        self.env: Environment | None = None
        self.events: list[dict] = []
        self.seen: dict[str, dict] = {}
        self.result = None
        self.episode_done = 0
        self.run_path: Path | None = None
        self.error: str | None = None
        self._stop = False
        self._thread: threading.Thread | None = None
        self._run_seq = 0

    # -- loading ------------------------------------------------------------

    def _require_not_running(self):
        if self.phase == "RUNNING":
            raise PhaseViolation("a run is in progress")

    def load_dataset(self, manifest_doc: dict) -> dict:
        with self.lock:
            self._require_not_running()
            manifest = SourceManifest.from_json(manifest_doc)
            catalog, facts = build_catalog(manifest)
            self.manifest, self.catalog, self.facts = manifest, catalog, facts
            self.pool = ConstraintPool()
            self.constraints_text = ""
            self.workload = None
            self.workload_text = ""
            self.env = None
            self.result = None
            self.events = []
            self.seen = {}
            self.episode_done = 0
            self.phase = "LOADED"
            return catalog.to_json()

    def load_constraints(self, text: str) -> dict:
        with self.lock:
            self._require_not_running()
            self._require_dataset()
            pool = parse_constraints(text, self.catalog)
            self.pool = pool
            self.constraints_text = text
            self.env = None
            if self.workload_text:
                # re-validate the workload against the new pool
                self.workload = parse_workload(self.workload_text, self.catalog, pool)
            self.phase = "LOADED"
            return {"classes": pool.classes()}

    def load_workload(self, doc: dict) -> dict:
        with self.lock:
            self._require_not_running()
            self._require_dataset()
            text = json.dumps(doc)
            workload = parse_workload(text, self.catalog, self.pool)
            self.workload = workload
            self.workload_text = text
            self.env = None
            self.phase = "LOADED"
            return {"queries": [{"name": q.name, "project": list(q.project),
                                 "predicates": len(q.predicates), "weight": q.weight}
                                for q in workload.queries]}

    def load_params(self, doc: dict) -> dict:
        with self.lock:
            self._require_not_running()
            try:
                self.params = LearnParams.from_json(doc)
            except (ValueError, TypeError) as exc:
                raise SchemarlError(str(exc)) from exc
            if self.phase in ("STOPPED", "DONE"):
                self.phase = "LOADED"
            return self.params.to_json()

    def _require_dataset(self):
        if self.catalog is None:
            raise PhaseViolation("no dataset loaded")

    def ensure_env(self) -> Environment:
        if self.catalog is None or self.workload is None:
            raise PhaseViolation("dataset and workload must be loaded first")
        if self.env is None:
            self.env = Environment(self.catalog, self.facts, self.pool, self.workload)
        return self.env

    # -- lifecycle ------------------------------------------------------------

    def start(self) -> dict:
        with self.lock:
            if self.phase == "RUNNING":
                raise PhaseViolation("a run is already in progress")
            if self.phase == "IDLE":
                raise PhaseViolation("no dataset loaded")
        env = self.ensure_env()
        with self.lock:
            self._run_seq += 1
            self.run_path = self.runs_dir / f"run-{self._run_seq:04d}"
            write_run_inputs(self.run_path, self.manifest, self.catalog,
                             self.constraints_text, self.workload_text, self.params)
            self.events = []
            self.seen = {}
            self.result = None
            self.error = None
            self.episode_done = 0
            self._stop = False
            initial = env.cost(env.initial_state)
            self.seen[signature(env.initial_state)] = {
                "cost": initial.total, "storage": initial.storage, "first_episode": 0}
            self.phase = "RUNNING"
            self._thread = threading.Thread(target=self._train_loop, args=(env,),
                                            daemon=True)
            self._thread.start()
            return {"run": self.run_path.name, "episodes": self.params.episodes}

    def stop(self) -> dict:
        with self.lock:
            if self.phase != "RUNNING":
                raise PhaseViolation(f"cannot stop in phase {self.phase}")
            self._stop = True
            return {"stopping": True}

    def _train_loop(self, env: Environment):
        writer = EpisodeWriter(self.run_path)
        params = self.params

        def on_episode(record, best_time, best_space):
            writer.append(record)
            event = {"episode": record.episode,
                     "final_cost": record.final_cost,
                     "final_storage": record.final_storage,
                     "best_cost": best_time.cost,
                     "best_storage": best_space.storage,
                     "baseline_time": params.baseline_time,
                     "baseline_space": params.baseline_space}
            with self.cond:
                self.events.append(event)
                self.episode_done = record.episode + 1
                for step in record.steps:
                    if step.signature_after not in self.seen:
                        self.seen[step.signature_after] = {
                            "cost": step.cost_after, "storage": step.storage_after,
                            "first_episode": record.episode}
                self.cond.notify_all()

        try:
            result = train(env, params, on_episode=on_episode,
                           should_stop=lambda: self._stop)
            write_result(self.run_path, result)
            write_ddl(self.run_path, result.best_by_time.signature, self.catalog)
            with self.cond:
                self.result = result
                self.phase = "DONE" if len(result.episodes) == params.episodes else "STOPPED"
                self.cond.notify_all()
        except Exception as exc:  # surfaced through /run/status
            with self.cond:
                self.error = str(exc)
                self.phase = "STOPPED"
                self.cond.notify_all()
        finally:
            writer.close()

    def status(self) -> dict:
        with self.lock:
            best = None
            if self.seen:
                sig, entry = min(self.seen.items(),
                                 key=lambda kv: (kv[1]["cost"], kv[1]["storage"], kv[0]))
                best = {"signature": sig, **entry}
            return {"phase": self.phase, "episode_done": self.episode_done,
                    "episodes_total": self.params.episodes, "best": best,
                    "run": self.run_path.name if self.run_path else None,
                    "error": self.error}

    def schemas(self, sort: str) -> list[dict]:
        with self.lock:
            if sort == "time":
                key = lambda kv: (kv[1]["cost"], kv[1]["storage"], kv[0])
            else:
                key = lambda kv: (kv[1]["storage"], kv[1]["cost"], kv[0])
            return [{"signature": sig, **entry}
                    for sig, entry in sorted(self.seen.items(), key=key)]

    def event_stream(self, since: int):
        index = max(since, 0)
        while True:
            with self.cond:
                self.cond.wait_for(
                    lambda: index < len(self.events) or self.phase != "RUNNING",
                    timeout=0.5)
                batch = list(self.events[index:])
                finished = self.phase != "RUNNING"
            for event in batch:
                yield f"id: {event['episode']}\ndata: {json.dumps(event)}\n\n"
            index += len(batch)
            if finished and index >= len(self.events):
                return


class PhaseViolation(SchemarlError):
    pass


def create_app(runs_dir: str | Path = "runs", ui_dir: str | Path | None = None) -> FastAPI:
    app = FastAPI(title="schemarl", version="0.1.0")
    manager = RunManager(runs_dir)
    app.state.manager = manager

    def guard(fn, *args):
        try:
            return fn(*args)
        except PhaseViolation as exc:
            raise HTTPException(status_code=409, detail=str(exc)) from exc
        except (SchemarlError, ValueError) as exc:
            raise HTTPException(status_code=422, detail=str(exc)) from exc

    @app.post("/v1/dataset")
    async def post_dataset(request: Request):
        return guard(manager.load_dataset, await request.json())

    @app.post("/v1/constraints")
    async def post_constraints(request: Request):
        body = await request.body()
        return guard(manager.load_constraints, body.decode("utf-8"))

    @app.post("/v1/workload")
    async def post_workload(request: Request):
        return guard(manager.load_workload, await request.json())

    @app.post("/v1/params")
    async def post_params(request: Request):
        return guard(manager.load_params, await request.json())

    @app.post("/v1/run/start")
    async def post_start():
        return guard(manager.start)

    @app.post("/v1/run/stop")
    async def post_stop():
        return guard(manager.stop)

    @app.get("/v1/run/status")
    async def get_status():
        return manager.status()

    @app.get("/v1/run/events")
    async def get_events(since: int = Query(default=0)):
        return StreamingResponse(manager.event_stream(since),
                                 media_type="text/event-stream")

    @app.get("/v1/schemas")
    async def get_schemas(sort: str = Query(default="time")):
        if sort not in ("time", "space"):
            raise HTTPException(status_code=422, detail="sort must be 'time' or 'space'")
        return manager.schemas(sort)

    @app.post("/v1/whatif")
    async def post_whatif(request: Request):
        doc = await request.json()
        groups = doc.get("groups")
        if not isinstance(groups, list) or not all(isinstance(g, list) for g in groups):
            raise HTTPException(status_code=422, detail="body must carry 'groups': [[ids], ...]")
        env = guard(manager.ensure_env)
        return guard(evaluate_whatif, groups, env)

    @app.get("/v1/export/ddl")
    async def get_ddl(signature: str = Query(...)):
        with manager.lock:
            if manager.catalog is None:
                raise HTTPException(status_code=409, detail="no dataset loaded")
            known = signature in manager.seen
            catalog = manager.catalog
        if not known:
            raise HTTPException(status_code=404, detail=f"unknown signature {signature!r}")
        return PlainTextResponse(ddl_for_signature(signature, catalog),
                                 media_type="application/sql")

    if ui_dir is not None and Path(ui_dir).is_dir():
        from fastapi.staticfiles import StaticFiles
        app.mount("/", StaticFiles(directory=str(ui_dir), html=True), name="ui")
    else:
        @app.get("/", response_class=HTMLResponse)
        async def index():
            return ("<h1>schemarl</h1><p>API under <code>/v1</code>; "
                    "see the repository README for the endpoint list.</p>")

    return app
