"""HTTP+JSON service over a live session: the explorer UI's only interface.

All mutations funnel through one lock (single writer); reads snapshot under
the same lock, so no request ever sees a half-applied change. The event
stream replays the log from any sequence number and then follows live
appends, in order, to any number of subscribers. Errors map onto
``{"code", "message", "seq?"}`` bodies with the exception class as code.
"""

from __future__ import annotations

import asyncio
import json
import threading
from pathlib import Path
from typing import Optional

from fastapi import FastAPI, Request
from fastapi.responses import HTMLResponse, JSONResponse, PlainTextResponse, StreamingResponse

from . import boolfn, commands, model, sim
from .errors import (
    ArgumentError,
    BindError,
    UnknownCommand,
    UnknownGate,
    UnknownNet,
    UnknownSubmodule,
    WorkbenchError,
)
from .session import Session

_NOT_FOUND = (UnknownGate, UnknownNet, UnknownSubmodule, UnknownCommand)


def _error_response(exc: WorkbenchError) -> JSONResponse:
    body = {"code": exc.code, "message": str(exc)}
    seq = getattr(exc, "seq", None)
    if seq is not None and seq >= 0:
        body["seq"] = seq
    status = 404 if isinstance(exc, _NOT_FOUND) else 400
    return JSONResponse(body, status_code=status)


def create_app(session: Session,
               frontend_dir: Optional[Path] = None) -> FastAPI:
    app = FastAPI(title="gatelab", docs_url=None, redoc_url=None)
    lock = threading.RLock()

    @app.exception_handler(WorkbenchError)
    async def _workbench_error(request: Request, exc: WorkbenchError):
        return _error_response(exc)

    # -- static explorer ---------------------------------------------------

    @app.get("/", response_class=HTMLResponse)
    def index():
        if frontend_dir is not None:
            page = frontend_dir / "index.html"
            if page.exists():
                return page.read_text()
        return ("<html><body><h1>gatelab service</h1>"
                "<p>No explorer build found; use the JSON API.</p>"
                "</body></html>")

    @app.get("/static/{name}")
    def static(name: str):
        if frontend_dir is None:
            raise UnknownCommand("no frontend build configured")
        target = (frontend_dir / name).resolve()
        if not str(target).startswith(str(frontend_dir.resolve())) \
                or not target.exists():
            raise UnknownCommand(f"no static file {name!r}")
        media = "text/javascript" if name.endswith(".js") else "text/plain"
        return PlainTextResponse(target.read_text(), media_type=media)

    # -- reads -------------------------------------------------------------

    @app.get("/netlist/summary")
    def summary():
        with lock:
            nl = session.netlist
            kinds: dict[str, int] = {}
            for g in nl.gates.values():
                kinds[g.gate_type] = kinds.get(g.gate_type, 0) + 1
            return {
                "name": nl.name,
                "gates": len(nl.gates),
                "nets": len(nl.nets),
                "inputs": list(nl.input_ports),
                "outputs": list(nl.output_ports),
                "clock": nl.nets[nl.clock_net].name if nl.clock_net else None,
                "submodules": len(nl.submodules),
                "kinds": dict(sorted(kinds.items())),
                "digest": session.digest(),
            }

    @app.get("/graph")
    def graph_window(center: int, radius: int = 2):
        radius = max(1, min(int(radius), 5))
        with lock:
            nl = session.netlist
            nl.gate(center)
            seen = {center}
            frontier = [center]
            for _ in range(radius):
                nxt = []
                for gid in frontier:
                    for other in (nl.neighbors(gid, "fanin")
                                  | nl.neighbors(gid, "fanout")):
                        if other not in seen:
                            seen.add(other)
                            nxt.append(other)
                frontier = nxt
            nodes = []
            for gid in sorted(seen):
                g = nl.gates[gid]
                nodes.append({
                    "id": gid, "name": g.name, "type": g.gate_type,
                    "submodules": nl.submodules_of_gate(gid),
                })
            edges = []
            for gid in sorted(seen):
                for sink in sorted(nl.neighbors(gid, "fanout")):
                    if sink in seen:
                        edges.append([gid, sink])
            return {"center": center, "radius": radius,
                    "nodes": nodes, "edges": edges}

    @app.get("/gate/{gate_id}")
    def gate_details(gate_id: int):
        with lock:
            nl = session.netlist
            g = nl.gate(gate_id)
            names = {n.id: n.name for n in nl.nets.values()}
            function = None
            out_net = g.pins.get(model.output_pin(g.gate_type))
            if g.gate_type != "FF" and out_net is not None:
                try:
                    fn = boolfn.net_function(nl, out_net)
                    function = fn.to_sop_text(names)
                except WorkbenchError:
                    function = None
            return {
                "id": g.id, "name": g.name, "type": g.gate_type,
                "init": g.init,
                "pins": {pin: {"net": nid, "name": names[nid]}
                         for pin, nid in sorted(g.pins.items())},
                "submodules": nl.submodules_of_gate(gate_id),
                "color": nl.effective_color(gate_id),
                "function": function,
            }

    @app.get("/submodules")
    def submodules():
        with lock:
            return [{
                "id": s.id, "name": s.name, "color": list(s.color),
                "parent": s.parent, "gates": sorted(s.gate_ids),
            } for s in sorted(session.netlist.submodules.values(),
                              key=lambda s: s.id)]

    @app.get("/trace")
    def trace_endpoint(probe: str, cycles: int = 16, seed: Optional[int] = None):
        with lock:
            probes = [p for p in probe.split(",") if p]
            data = session.run_op("sim", {
                "cycles": max(1, min(cycles, 4096)),
                "seed": seed,
                "probes": probes,
            })
            return {"probes": data["probes"], "csv": data["csv"]}

    # -- mutations -----------------------------------------------------------

    @app.post("/submodules", status_code=201)
    async def create_submodule(request: Request):
        body = await _json_body(request)
        name = body.get("name")
        if not isinstance(name, str) or not name:
            raise ArgumentError("body must carry a non-empty 'name'")
        color = body.get("color")
        if color is not None and (not isinstance(color, list) or len(color) != 3):
            raise ArgumentError("'color' must be [r,g,b]")
        actor = _actor(body, "user")
        with lock:
            sid = session.run_op("create_submodule",
                                 {"name": name, "color": color}, actor=actor)
            sub = session.netlist.submodules[sid]
            return {"id": sid, "name": sub.name, "color": list(sub.color)}

    @app.post("/submodules/{sid}/gates")
    async def add_gates(sid: int, request: Request):
        body = await _json_body(request)
        gates = body.get("gates")
        if not isinstance(gates, list) or not all(isinstance(g, int) for g in gates):
            raise ArgumentError("body must carry 'gates': [int, ...]")
        actor = _actor(body, "user")
        with lock:
            members = session.run_op("assign_gates",
                                     {"submodule": sid, "gates": gates},
                                     actor=actor)
            return {"id": sid, "gates": members}

    @app.post("/command")
    async def run_command(request: Request):
        body = await _json_body(request)
        line = body.get("line")
        if not isinstance(line, str) or not line.strip():
            raise ArgumentError("body must carry a command 'line'")
        actor = _actor(body, "script")
        with lock:
            result = commands.run_command(session, line, actor=actor)
            return {"verb": result.verb, "ok": True, "text": result.text,
                    "data": _jsonable(result.data), "events": result.events}

    # -- events ----------------------------------------------------------------

    @app.get("/events")
    def events(since: int = 0):
        with lock:
            records = [] if session.log is None else session.log.records
            return [json.loads(r.to_json()) for r in records if r.seq >= since]

    @app.get("/events/stream")
    async def events_stream(since: int = 0, follow: bool = True):
        async def generator():
            cursor = since
            while True:
                with lock:
                    records = [] if session.log is None else session.log.records
                    fresh = [r for r in records if r.seq >= cursor]
                    if fresh:
                        cursor = fresh[-1].seq + 1
                for rec in fresh:
                    yield f"id: {rec.seq}\ndata: {rec.to_json()}\n\n"
                if not follow:
                    return
                await asyncio.sleep(0.05)

        return StreamingResponse(generator(), media_type="text/event-stream")

    return app


async def _json_body(request: Request) -> dict:
    try:
        body = await request.json()
    except Exception:
        raise ArgumentError("request body must be JSON") from None
    if not isinstance(body, dict):
        raise ArgumentError("request body must be a JSON object")
    return body


def _actor(body: dict, default: str) -> str:
    actor = body.get("actor", default)
    if actor not in ("user", "script", "system"):
        raise ArgumentError(f"unknown actor {actor!r}")
    return actor


def _jsonable(data):
    try:
        json.dumps(data)
        return data
    except TypeError:
        return json.loads(json.dumps(data, default=str))


def serve(session: Session, host: str = "127.0.0.1", port: int = 8321,
          frontend_dir: Optional[Path] = None) -> None:
    """Run the service until interrupted; raises BindError when the address
    is unavailable."""
    import uvicorn

    app = create_app(session, frontend_dir=frontend_dir)
    config = uvicorn.Config(app, host=host, port=port, log_level="warning")
    server = uvicorn.Server(config)
    try:
        server.run()
    except (OSError, SystemExit) as exc:
        raise BindError(f"cannot bind {host}:{port}: {exc}") from exc
