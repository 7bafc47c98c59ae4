"""Real-time WebSocket bridge between the simulation loop and a browser.

One :class:`BridgeSession` owns one :class:`SimulationLoop`. Clients send
JSON events; the pacing task drains them at each tick boundary (arrival
order), steps the loop, and broadcasts a full state snapshot. A snapshot
therefore never shows a half-applied event, and a session driven through
``handle_event``/``tick`` produces exactly the same run as the headless
harness given the equivalent script.

Wire schema (one JSON object per text frame):

  server -> client
    {"type": "state", tick, time, scenario, paused, finished,
     ego: {s, lane, lateral, v, a, indicator, behavior},
     vehicles: [{id, kind, lane, s, lateral, v, length, width,
                 flagged, flag_direction, flag_p, selected, injected}],
     plan: {behavior, expected_cost, indicator, samples: [[t, s, y, v]..]},
     camera: {eye, forward, up, hfov_deg, aspect},
     road: {lane_count, lane_width, merge: [[lane, s_start, s_end]..]},
     last_ack}
    {"type": "ack", "event": ..., "ok": bool, ...}   # per handled event
    {"type": "error", "message": ...}                # protocol violation

  client -> server
    {"type": "intervene", "u": 0..1, "v": 0..1}
    {"type": "intervene_by_id", "vehicle_id": ..., "direction": "left"|"right"}
    {"type": "pause"} | {"type": "resume"} | {"type": "reset"}
    {"type": "load_scenario", "name": ...}

Failed gaze selections and injections come back as acks carrying the error
name (NoSelectableVehicle, AmbiguousDirection, VehicleNotRelevant, ...) so
the client can show and sound the rejection.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Optional

from .gaze import (AmbiguousDirection, DegenerateTarget, NoSelectableVehicle,
                   OutOfScreen, camera_for_ego, infer_direction,
                   screen_to_ray, select_vehicle)
from .harness import RunMetrics, metrics_from_loop
from .intervention import InvalidDirection, VehicleNotRelevant, inject
from .prediction import BehaviorLabel
from .scenario import ScenarioConfig
from .simloop import SimulationLoop
from .world import relevant_vehicles

_GAZE_ERRORS = (OutOfScreen, DegenerateTarget, NoSelectableVehicle,
                AmbiguousDirection, VehicleNotRelevant, InvalidDirection)
_DIRECTIONS = {"left": BehaviorLabel.CHANGE_LEFT,
               "right": BehaviorLabel.CHANGE_RIGHT}


class ProtocolError(Exception):
    """Malformed client message (unknown type, missing or bad fields)."""


class BridgeSession:
    """Synchronous core of one interactive session.

    ``handle_event`` validates and stages one client event; ``tick`` applies
    staged injections through the regular loop path and returns the fresh
    snapshot (None while paused or finished). The network layer adds pacing
    and fan-out but no logic.
    """

    def __init__(self, catalog: dict[str, ScenarioConfig], name: str,
                 aspect: float = 16.0 / 9.0):
        if name not in catalog:
            raise KeyError(name)
        self.catalog = catalog
        self.aspect = aspect
        self.last_ack: Optional[dict] = None
        self._load(name)

    def _load(self, name: str) -> None:
        self.name = name
        self.config = self.catalog[name]
        self.loop = SimulationLoop(self.config)
        self.paused = False
        self.selected_id: Optional[str] = None
        self.pending: list[tuple[str, BehaviorLabel]] = []

    # ---------- events ----------

    def handle_event(self, event: dict) -> dict:
        """Apply one validated client event; return its acknowledgement.

        Raises :class:`ProtocolError` for malformed messages; domain
        failures (nothing selectable, vehicle not relevant, ...) are
        acknowledged with ``ok: false`` and the error name instead.
        """
        if not isinstance(event, dict) or "type" not in event:
            raise ProtocolError("missing event type")
        kind = event["type"]
        handler = getattr(self, f"_on_{kind}", None)
        if handler is None:
            raise ProtocolError(f"unknown event type: {kind}")
        ack = handler(event)
        if "seq" in event:
            ack["seq"] = event["seq"]
        self.last_ack = ack
        return ack

    def _stage(self, vehicle_id: str, direction: BehaviorLabel) -> None:
        # validation only; the record is created inside the next tick
        inject(self.loop.scene, vehicle_id, direction, [])
        self.pending.append((vehicle_id, direction))

    def _on_intervene(self, event: dict) -> dict:
        u, v = _number(event, "u"), _number(event, "v")
        scene = self.loop.scene
        camera = camera_for_ego(scene.road, scene.ego, self.aspect)
        try:
            ray = screen_to_ray(camera, u, v)
            vehicle = select_vehicle(ray, scene)
            direction = infer_direction(vehicle, scene.ego)
            self._stage(vehicle.id, direction)
        except _GAZE_ERRORS as exc:
            return {"type": "ack", "event": "intervene", "ok": False,
                    "error": type(exc).__name__, "detail": str(exc)}
        self.selected_id = vehicle.id
        return {"type": "ack", "event": "intervene", "ok": True,
                "vehicle_id": vehicle.id, "direction": direction.value}

    def _on_intervene_by_id(self, event: dict) -> dict:
        vehicle_id = event.get("vehicle_id")
        direction = _DIRECTIONS.get(str(event.get("direction")).lower())
        if not isinstance(vehicle_id, str) or direction is None:
            raise ProtocolError("intervene_by_id needs vehicle_id and direction left|right")
        try:
            self._stage(vehicle_id, direction)
        except _GAZE_ERRORS as exc:
            return {"type": "ack", "event": "intervene_by_id", "ok": False,
                    "error": type(exc).__name__, "detail": str(exc)}
        self.selected_id = vehicle_id
        return {"type": "ack", "event": "intervene_by_id", "ok": True,
                "vehicle_id": vehicle_id, "direction": direction.value}

    def _on_pause(self, event: dict) -> dict:
        self.paused = True
        return {"type": "ack", "event": "pause", "ok": True}

    def _on_resume(self, event: dict) -> dict:
        self.paused = False
        return {"type": "ack", "event": "resume", "ok": True}

    def _on_reset(self, event: dict) -> dict:
        self._load(self.name)
        return {"type": "ack", "event": "reset", "ok": True}

    def _on_load_scenario(self, event: dict) -> dict:
        name = event.get("name")
        if name not in self.catalog:
            return {"type": "ack", "event": "load_scenario", "ok": False,
                    "error": "UnknownScenario", "detail": str(name)}
        self._load(name)
        return {"type": "ack", "event": "load_scenario", "ok": True,
                "name": name}

    # ---------- stepping ----------

    @property
    def finished(self) -> bool:
        return self.loop.finished

    def tick(self) -> Optional[dict]:
        """Advance one tick unless paused or finished; return the snapshot."""
        if self.paused or self.loop.finished:
            return None
        injections, self.pending = self.pending, []
        self.loop.step_tick(injections)
        return self.wire_state()

    def metrics(self) -> RunMetrics:
        return metrics_from_loop(self.loop)

    def wire_state(self) -> Optional[dict]:
        """Snapshot of the most recently executed tick (None before the first)."""
        if not self.loop.rows:
            return None
        row = self.loop.rows[-1]
        scene = row.scene
        flagged = {vid for vid, _ in row.flags}
        vehicles = []
        for veh in relevant_vehicles(scene):
            direction, p = row.pred_display.get(veh.id, ("", 0.0))
            vehicles.append({
                "id": veh.id, "kind": veh.kind, "lane": veh.lane_index,
                "s": veh.s, "lateral": veh.lateral_offset, "v": veh.v,
                "length": veh.length, "width": veh.width,
                "flagged": veh.id in flagged, "flag_direction": direction,
                "flag_p": p, "selected": veh.id == self.selected_id,
                "injected": veh.id in row.injected_ids,
            })
        ego = scene.ego
        camera = camera_for_ego(scene.road, ego, self.aspect)
        plan = row.plan
        return {
            "type": "state",
            "tick": row.tick,
            "time": row.time,
            "scenario": self.name,
            "paused": self.paused,
            "finished": self.loop.finished,
            "ego": {"id": ego.id, "s": ego.s, "lane": ego.lane_index,
                    "lateral": ego.lateral_offset, "v": ego.v,
                    "a": row.a_eff, "length": ego.length, "width": ego.width,
                    "indicator": plan.indicator,
                    "behavior": plan.behavior.value},
            "vehicles": vehicles,
            "plan": {"behavior": plan.behavior.value,
                     "expected_cost": plan.expected_cost,
                     "indicator": plan.indicator,
                     "samples": [list(s) for s in plan.samples]},
            "camera": {"eye": list(camera.eye),
                       "forward": list(camera.forward),
                       "up": list(camera.up),
                       "hfov_deg": camera.hfov_deg,
                       "aspect": camera.aspect},
            "road": {"lane_count": scene.road.lane_count,
                     "lane_width": scene.road.lane_width,
                     "merge": [list(m) for m in scene.road.merge_sections]},
            "last_ack": self.last_ack,
        }


def _number(event: dict, key: str) -> float:
    value = event.get(key)
    if not isinstance(value, (int, float)) or isinstance(value, bool):
        raise ProtocolError(f"{key} must be a number")
    return float(value)


def load_catalog(scenario_dir: Path) -> dict[str, ScenarioConfig]:
    """All ``*.cfg`` scenarios in a directory, keyed by file stem."""
    from .harness import load_scenario_file
    catalog = {}
    for path in sorted(Path(scenario_dir).glob("*.cfg")):
        catalog[path.stem] = load_scenario_file(path)
    return catalog


# ---------- network layer ----------

def create_app(scenario_dir: Path, rtf: float = 1.0,
               scenario: Optional[str] = None,
               static_dir: Optional[Path] = None):
    """FastAPI app: ``/ws`` for the session, ``/scenarios`` for the catalog.

    ``rtf`` is simulated seconds per wall second and must be positive. When
    ``static_dir`` exists the built interface is served from ``/``.
    """
    import asyncio
    from contextlib import asynccontextmanager, suppress

    from fastapi import FastAPI, WebSocket, WebSocketDisconnect
    from starlette.routing import WebSocketRoute

    if rtf <= 0.0:
        raise ValueError("real-time factor must be positive")
    catalog = load_catalog(scenario_dir)
    if not catalog:
        raise ValueError(f"no *.cfg scenarios in {scenario_dir}")
    name = scenario if scenario is not None else next(iter(sorted(catalog)))
    session = BridgeSession(catalog, name)

    clients: set[WebSocket] = set()
    queue: list[tuple[WebSocket, dict]] = []

    async def _send(ws: WebSocket, payload: dict) -> None:
        try:
            await ws.send_text(json.dumps(payload))
        except Exception:
            clients.discard(ws)

    async def _pace() -> None:
        while True:
            staged, queue[:] = list(queue), []
            for ws, event in staged:
                try:
                    ack = session.handle_event(event)
                except ProtocolError as exc:
                    ack = {"type": "error", "message": str(exc)}
                await _send(ws, ack)
            state = session.tick()
            if state is not None:
                text = json.dumps(state)
                for ws in list(clients):
                    try:
                        await ws.send_text(text)
                    except Exception:
                        clients.discard(ws)
            await asyncio.sleep(session.config.dt / rtf)

    @asynccontextmanager
    async def lifespan(app):
        task = asyncio.create_task(_pace())
        yield
        task.cancel()
        with suppress(asyncio.CancelledError):
            await task

    app = FastAPI(lifespan=lifespan)
    app.state.session = session

    @app.get("/scenarios")
    def scenarios():
        return {"scenarios": sorted(catalog), "current": session.name}

    # registered as a bare route: with postponed annotation evaluation the
    # decorator cannot resolve the locally imported WebSocket type and would
    # mistake the parameter for a query field
    async def ws_endpoint(ws: WebSocket):
        await ws.accept()
        clients.add(ws)
        state = session.wire_state()
        if state is not None:
            await _send(ws, state)
        try:
            while True:
                raw = await ws.receive_text()
                try:
                    event = json.loads(raw)
                except json.JSONDecodeError:
                    await _send(ws, {"type": "error", "message": "invalid JSON"})
                    continue
                if not isinstance(event, dict):
                    await _send(ws, {"type": "error", "message": "expected an object"})
                    continue
                queue.append((ws, event))
        except WebSocketDisconnect:
            pass
        finally:
            clients.discard(ws)

    app.router.routes.append(WebSocketRoute("/ws", ws_endpoint))

    if static_dir is not None and Path(static_dir).is_dir():
        from fastapi.staticfiles import StaticFiles
        app.mount("/", StaticFiles(directory=static_dir, html=True))
    return app


def serve(scenario_dir: Path, port: int = 8700, rtf: float = 1.0,
          scenario: Optional[str] = None) -> None:
    import uvicorn

    static = Path("frontend/dist")
    app = create_app(scenario_dir, rtf=rtf, scenario=scenario,
                     static_dir=static if static.is_dir() else None)
    uvicorn.run(app, host="127.0.0.1", port=port, log_level="warning")
