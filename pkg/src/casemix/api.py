"""HTTP service for the planner workbench.

Sessions hold a what-if state: the current per-group utility config and an
append-only history of solves for renegotiation comparisons. Solves run
one at a time per session (HTTP 409 on overlap); separate sessions are
fully isolated. Infeasible or degenerate-zero solves come back as 422
with the diagnostics in the body.
"""
from __future__ import annotations

import json
import os
import threading
from dataclasses import dataclass, field
from typing import Any

from fastapi import FastAPI, HTTPException, Request
from fastapi.middleware.cors import CORSMiddleware
from pydantic import BaseModel, Field

from . import io as cio
from .instance import Caseload, HospitalInstance, InstanceError
from .model import build_model, compute_upper_bounds
from .pareto import check_pareto
from .scalarize import (AsfConfig, GoalConfig, ScalarizeError, SolveResult,
                        solve_asf, solve_gam, solve_gpm)
from .sensitivity import SweepError, SweepSpec, run_sweep
from .utility import (TEMPLATE_INFO, UfSpec, UtilityError, instantiate)


class SolveRequest(BaseModel):
    objective: str = "mmu"                    # mmu | msu | asf
    eps1: float | None = None
    eps2: float | None = None
    method: str = "ufm"                       # ufm | gam | gpm
    goals: dict[str, float] | str | None = "bounds"
    gam_weights: str = "absolute"
    gpm_mode: str = "sum"
    relative: bool = True
    tie_break: str = "none"


class SweepRequest(BaseModel):
    template: str
    param: str
    values: list[Any]
    pct: bool = True
    objectives: list[str] = Field(default_factory=lambda: ["mmu", "msu"])
    fixed_params: dict[str, float] = Field(default_factory=dict)


class ParetoRequest(BaseModel):
    which: str | int = "latest"


class PreviewRequest(BaseModel):
    template: str
    params: dict[str, Any] = Field(default_factory=dict)
    weight: float = 1.0
    group: str | None = None
    upper_bound: float | None = None
    points: int = 200


@dataclass
class Session:
    id: str
    uf_config: dict | None = None
    history: list[dict] = field(default_factory=list)
    lock: threading.Lock = field(default_factory=threading.Lock)


def create_app(instance: HospitalInstance | None = None,
               session_store: str | None = None) -> FastAPI:
    """Build the service app.

    ``session_store`` optionally names a JSON file; session configs and
    histories are persisted there after every mutation and loaded back on
    startup, so what-if states survive restarts.
    """
    instance = instance or cio.load_bundled_instance()
    app = FastAPI(title="casemix planning service", version="1")
    app.add_middleware(CORSMiddleware, allow_origins=["*"],
                       allow_methods=["*"], allow_headers=["*"])

    bounds = compute_upper_bounds(instance)
    base_program = build_model(instance)
    sessions: dict[str, Session] = {}
    sessions_lock = threading.Lock()

    if session_store:
        try:
            with open(session_store, encoding="utf-8") as f:
                saved = json.load(f)
            for sid, blob in saved.items():
                sessions[sid] = Session(id=sid,
                                        uf_config=blob.get("uf_config"),
                                        history=blob.get("history", []))
        except FileNotFoundError:
            pass

    def persist() -> None:
        if not session_store:
            return
        with sessions_lock:
            blob = {sid: {"uf_config": s.uf_config, "history": s.history}
                    for sid, s in sessions.items()}
        tmp = f"{session_store}.tmp"
        with open(tmp, "w", encoding="utf-8") as f:
            json.dump(blob, f)
        os.replace(tmp, session_store)

    def session(sid: str) -> Session:
        with sessions_lock:
            if sid not in sessions:
                sessions[sid] = Session(id=sid)
            return sessions[sid]

    def bad_request(exc: Exception) -> HTTPException:
        return HTTPException(status_code=400, detail=str(exc))

    @app.get("/api/instance")
    def instance_summary():
        beds = {"theatre": 0, "ward": 0, "icu": 0}
        counts = {"theatre": 0, "ward": 0, "icu": 0}
        for r in instance.resources:
            beds[r.kind] += r.bed_count
            counts[r.kind] += 1
        return {
            "name": instance.name,
            "horizon_weeks": instance.horizon_weeks,
            "resources": {
                "counts": counts,
                "beds": beds,
                "items": [{"id": r.id, "kind": r.kind, "bed_count": r.bed_count,
                           "weekly_hours": r.weekly_hours}
                          for r in instance.resources],
            },
            "groups": [{"id": g.id,
                        "subtypes": [s.id for s in g.subtypes],
                        "treatment_limit": g.treatment_limit}
                       for g in instance.groups],
            "bounds": bounds,
            "total_bound": sum(bounds.values()),
            "templates": TEMPLATE_INFO,
        }

    @app.put("/api/sessions/{sid}/uf-config")
    def put_uf_config(sid: str, payload: dict):
        try:
            cio.load_uf_config(payload, bounds)
        except (UtilityError, InstanceError) as exc:
            raise bad_request(exc)
        sess = session(sid)
        sess.uf_config = payload
        persist()
        return {"session": sid, "groups_configured": len(bounds)}

    @app.get("/api/sessions/{sid}/uf-config")
    def get_uf_config(sid: str):
        sess = session(sid)
        return {"session": sid, "uf_config": sess.uf_config}

    def _result_payload(result: SolveResult) -> dict:
        return result.to_dict()

    def _run_solve(sess: Session, req: SolveRequest) -> SolveResult:
        if req.method == "ufm":
            if not sess.uf_config:
                raise ScalarizeError("session has no utility configuration")
            specs = cio.load_uf_config(sess.uf_config, bounds)
            plfs = {g: instantiate(specs[g], bounds[g]) for g in bounds}
            weights = {g: specs[g].weight for g in specs}
            if req.objective == "mmu":
                cfg = AsfConfig(req.eps1 if req.eps1 is not None else 1.0,
                                req.eps2 or 0.0, weights)
            elif req.objective == "msu":
                cfg = AsfConfig(req.eps1 or 0.0,
                                req.eps2 if req.eps2 is not None else 1.0,
                                weights)
            else:
                cfg = AsfConfig(req.eps1 or 0.0, req.eps2 or 0.0, weights)
            return solve_asf(base_program, plfs, cfg, tie_break=req.tie_break)
        goals = dict(bounds) if req.goals in (None, "bounds") else {
            g: float(v) for g, v in req.goals.items()}
        cfg = GoalConfig(goals=goals, bounds=bounds,
                         gam_weights=req.gam_weights, relative=req.relative)
        if req.method == "gam":
            return solve_gam(base_program, cfg)
        if req.method == "gpm":
            return solve_gpm(base_program, cfg, mode=req.gpm_mode)
        raise ScalarizeError(f"unknown method {req.method!r}")

    @app.post("/api/sessions/{sid}/solve")
    def post_solve(sid: str, req: SolveRequest):
        sess = session(sid)
        if not sess.lock.acquire(blocking=False):
            raise HTTPException(status_code=409, detail="solve in progress")
        try:
            try:
                result = _run_solve(sess, req)
            except (ScalarizeError, UtilityError, InstanceError) as exc:
                raise bad_request(exc)
            payload = _result_payload(result)
            entry = {"index": len(sess.history),
                     "request": req.model_dump(),
                     "uf_config": sess.uf_config,
                     "result": payload}
            sess.history.append(entry)
            persist()
            if not result.is_optimal or result.zeroed:
                raise HTTPException(status_code=422, detail=payload)
            return payload
        finally:
            sess.lock.release()

    @app.post("/api/sessions/{sid}/sweep")
    def post_sweep(sid: str, req: SweepRequest):
        sess = session(sid)
        if not sess.lock.acquire(blocking=False):
            raise HTTPException(status_code=409, detail="solve in progress")
        try:
            try:
                values = tuple(tuple(v) if isinstance(v, list) else v
                               for v in req.values)
                spec = SweepSpec(template=req.template, param=req.param,
                                 values=values, pct=req.pct,
                                 objectives=tuple(req.objectives),
                                 fixed_params=req.fixed_params)
                report = run_sweep(instance, spec, bounds=bounds)
            except (SweepError, UtilityError) as exc:
                raise bad_request(exc)
            return report.to_dict()
        finally:
            sess.lock.release()

    @app.post("/api/sessions/{sid}/pareto-check")
    def post_pareto(sid: str, req: ParetoRequest):
        sess = session(sid)
        if not sess.history:
            raise HTTPException(status_code=400, detail="session has no solves")
        idx = len(sess.history) - 1 if req.which == "latest" else int(req.which)
        if not 0 <= idx < len(sess.history):
            raise HTTPException(status_code=400,
                                detail=f"history index {idx} out of range")
        entry = sess.history[idx]
        caseload_dict = entry["result"].get("caseload")
        if not caseload_dict:
            raise HTTPException(status_code=422,
                                detail="selected solve has no caseload")
        audit = check_pareto(instance, Caseload.from_dict(caseload_dict))
        return {"which": idx, **audit.to_dict()}

    @app.get("/api/sessions/{sid}/history")
    def get_history(sid: str):
        sess = session(sid)
        return {
            "session": sid,
            "entries": [
                {"index": e["index"],
                 "request": e["request"],
                 "summary": {
                     "method": e["result"]["method"],
                     "total_output": e["result"]["total_output"],
                     "sum_utility": e["result"]["sum_utility"],
                     "min_utility": e["result"]["min_utility"],
                     "zeroed": e["result"]["zeroed"],
                 },
                 "case_mix_pct": e["result"]["case_mix_pct"],
                 "utilities": e["result"]["utilities"]}
                for e in sess.history],
        }

    @app.post("/api/uf/preview")
    def post_preview(req: PreviewRequest):
        if req.group is not None:
            if req.group not in bounds:
                raise HTTPException(status_code=400,
                                    detail=f"unknown group {req.group!r}")
            ub = bounds[req.group]
        elif req.upper_bound:
            ub = float(req.upper_bound)
        else:
            raise HTTPException(status_code=400,
                                detail="give either group or upper_bound")
        try:
            spec = UfSpec(template=req.template, params=req.params,
                          weight=req.weight)
            plf = instantiate(spec, ub)
        except UtilityError as exc:
            raise bad_request(exc)
        pts = max(2, min(req.points, 2000))
        xs = [ub * i / (pts - 1) for i in range(pts)]
        return {
            "upper_bound": ub,
            "x": xs,
            "u": [plf.evaluate(x) for x in xs],
            "plf": plf.to_dict(),
            "is_concave": plf.is_concave(),
            "jumps": plf.jumps(),
        }

    @app.get("/api/health")
    def health():
        return {"status": "ok", "groups": len(bounds)}

    return app
