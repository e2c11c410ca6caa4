"""FastAPI service exposing the live simulation.

One asyncio task owns the World and advances it in small tick batches
paced to the wall clock (ticks are never dropped; if the host falls
behind, simulated time slews).  WebSocket sessions talk JSON frames:

  server -> client: ``hello`` (config echo, protocol "1"), ``snapshot``,
                    ``onset``, ``rejected``
  client -> server: ``set_param``, ``set_edge``, ``add_agent``,
                    ``remove_agent``, ``pause``, ``resume``, ``reset``,
                    ``reseed``

Every broadcast frame carries a global monotonically increasing ``seq``,
so clients can detect gaps; the per-connection hello carries the current
seq as an anchor.  Commands are queued and applied by the owner task
between tick batches, so their effects are atomic at tick boundaries.
All frames are serialized once and fanned out to every session.
"""

from __future__ import annotations

import asyncio
import json
from pathlib import Path

from fastapi import FastAPI, HTTPException, WebSocket, WebSocketDisconnect
from fastapi.staticfiles import StaticFiles
from pydantic import BaseModel, ConfigDict

from vocalsync import engine, experiments
from vocalsync.model import (
    AgentParams,
    ConfigError,
    SimConfig,
    Topology,
    config_from_dict,
    validate_config,
)

PROTOCOL_VERSION = "1"
BATCH_MS = 20.0          # commands apply and frames flush on this wall cadence
SESSION_QUEUE_MAX = 512  # overflowing sessions drop oldest frames (visible as seq gaps)


class _Session:
    _next_id = 0

    def __init__(self) -> None:
        self.id = _Session._next_id
        _Session._next_id += 1
        self.queue: asyncio.Queue[str] = asyncio.Queue(maxsize=SESSION_QUEUE_MAX)

    def push(self, text: str) -> None:
        try:
            self.queue.put_nowait(text)
        except asyncio.QueueFull:
            try:
                self.queue.get_nowait()
            except asyncio.QueueEmpty:
                pass
            self.queue.put_nowait(text)


class LiveSim:
    """Engine owner: steps the world, applies commands, broadcasts frames."""

    def __init__(self, params: list[AgentParams], topo: Topology, sim: SimConfig):
        self.world = engine.World(params, topo, sim)
        self.seq = 0
        self.sessions: dict[int, _Session] = {}
        self.inbox: asyncio.Queue[tuple[_Session | None, dict]] = asyncio.Queue()
        self._events_sent = 0
        self._snaps_sent = 0

    # -- frames ----------------------------------------------------------

    def _hello(self, seq: int) -> dict:
        return {
            "type": "hello",
            "protocol": PROTOCOL_VERSION,
            "seq": seq,
            "config": self.world.config_dict(),
        }

    def _broadcast(self, frame: dict) -> None:
        self.seq += 1
        frame["seq"] = self.seq
        text = json.dumps(frame)
        for s in self.sessions.values():
            s.push(text)

    def _flush_world_output(self) -> None:
        events = self.world.events
        while self._events_sent < len(events):
            e = events[self._events_sent]
            self._events_sent += 1
            self._broadcast({
                "type": "onset",
                "time_ms": e.time_ms,
                "agent_id": e.agent_id,
                "amplitude": e.amplitude,
                "duration_ms": e.duration_ms,
            })
        snaps = self.world.snapshots
        while self._snaps_sent < len(snaps):
            s = snaps[self._snaps_sent]
            self._snaps_sent += 1
            self._broadcast({
                "type": "snapshot",
                "time_ms": s.time_ms,
                "order_parameter": s.order_parameter,
                "agents": [
                    {
                        "id": a.id,
                        "phase": a.phase,
                        "current_period_ms": a.current_period_ms,
                        "last_onset_time_ms": a.last_onset_time_ms,
                    }
                    for a in s.agents
                ],
            })
        # A live session runs indefinitely: drop history once broadcast so
        # the world's buffers stay bounded.
        if self._events_sent > 4096:
            del self.world.events[: self._events_sent]
            self._events_sent = 0
        if self._snaps_sent > 4096:
            del self.world.snapshots[: self._snaps_sent]
            self._snaps_sent = 0

    # -- command handling --------------------------------------------------

    def _drain_inbox(self) -> None:
        while True:
            try:
                session, msg = self.inbox.get_nowait()
            except asyncio.QueueEmpty:
                return
            kind = msg.get("type")
            if kind == "__attach__":
                self.sessions[session.id] = session
                session.push(json.dumps(self._hello(self.seq)))
                continue
            if kind == "__detach__":
                self.sessions.pop(session.id, None)
                continue
            new_world, ok, reason = engine.apply_command(self.world, msg)
            if not ok:
                if session is not None:
                    session.push(json.dumps({"type": "rejected", "reason": reason}))
                continue
            if new_world is not self.world:
                # Reset: fresh world, fresh cursors, re-announce to everyone.
                self.world = new_world
                self._events_sent = 0
                self._snaps_sent = 0
                self._broadcast(self._hello(0))

    # -- owner loop ----------------------------------------------------------

    async def run_forever(self) -> None:
        loop = asyncio.get_running_loop()
        deadline = loop.time()
        while True:
            self._drain_inbox()
            tick = self.world.sim.tick_ms
            batch = max(1, int(round(BATCH_MS / tick)))
            if not self.world.paused:
                self.world.step(batch)
                self._flush_world_output()
            deadline += batch * tick / 1000.0
            delay = deadline - loop.time()
            if delay > 0:
                await asyncio.sleep(delay)
            else:
                # Behind wall clock: slew rather than dropping ticks.
                deadline = loop.time()
                await asyncio.sleep(0)


# -- REST models ------------------------------------------------------------


class HealthResponse(BaseModel):
    status: str


class ValidateResponse(BaseModel):
    valid: bool
    violations: list[str]


class AgentStateModel(BaseModel):
    id: int
    phase: float
    current_period_ms: float
    last_onset_time_ms: float | None


class StateResponse(BaseModel):
    time_ms: float
    paused: bool
    seq: int
    n_agents: int
    order_parameter: float
    agents: list[AgentStateModel]


class ExperimentRequest(BaseModel):
    model_config = ConfigDict(extra="forbid")

    n_agents: int = 8
    mode: str = "both"  # feedback | action_reaction | both
    trials: int = 10
    cycles_per_trial: int = 120
    seed: int = 0
    master_period_ms: float = 500.0
    jitter_sigma_ms: float = 3.0
    reaction_latency_ms: float = 23.8
    gain_other: float = 1.0
    gain_self: float = 0.1
    warmup_cycles: int = 20


class ExperimentRowModel(BaseModel):
    position: int
    mode: str
    mean_error_ms: float
    std_error_ms: float
    n_onsets: int
    trials: int


class ExperimentResponse(BaseModel):
    rows: list[ExperimentRowModel]


class RunRequest(BaseModel):
    model_config = ConfigDict(extra="forbid")

    config: dict
    seed: int | None = None
    include_events: bool = False


class OnsetModel(BaseModel):
    time_ms: float
    agent_id: int
    amplitude: float
    duration_ms: float


class RunResponse(BaseModel):
    n_onsets: int
    n_snapshots: int
    events: list[OnsetModel] | None = None


def create_app(params: list[AgentParams], topo: Topology, sim: SimConfig) -> FastAPI:
    live = LiveSim(params, topo, sim)

    async def lifespan(app: FastAPI):
        task = asyncio.create_task(live.run_forever())
        try:
            yield
        finally:
            task.cancel()
            try:
                await task
            except asyncio.CancelledError:
                pass

    app = FastAPI(title="vocalsync", lifespan=lifespan)
    app.state.live = live

    @app.get("/health", response_model=HealthResponse)
    async def health():
        return HealthResponse(status="ok")

    @app.get("/config")
    async def config_echo() -> dict:
        return live.world.config_dict()

    @app.get("/state", response_model=StateResponse)
    async def state():
        snap = live.world.snapshot()
        return StateResponse(
            time_ms=live.world.time_ms,
            paused=live.world.paused,
            seq=live.seq,
            n_agents=len(live.world.params),
            order_parameter=snap.order_parameter,
            agents=[AgentStateModel(
                id=a.id, phase=a.phase,
                current_period_ms=a.current_period_ms,
                last_onset_time_ms=a.last_onset_time_ms,
            ) for a in snap.agents],
        )

    @app.post("/validate", response_model=ValidateResponse)
    async def validate(doc: dict):
        try:
            p, t, s = config_from_dict(doc)
        except ConfigError as e:
            return ValidateResponse(valid=False, violations=[str(v) for v in e.violations])
        violations = validate_config(p, t, s)
        return ValidateResponse(valid=not violations, violations=[str(v) for v in violations])

    @app.post("/experiment", response_model=ExperimentResponse)
    async def run_experiment(req: ExperimentRequest):
        slave = AgentParams(
            id=0, preferred_period_ms=req.master_period_ms,
            gain_other=req.gain_other, gain_self=req.gain_self,
            jitter_sigma_ms=req.jitter_sigma_ms,
            reaction_latency_ms=req.reaction_latency_ms,
        )
        kwargs = dict(
            n_agents=req.n_agents, trials=req.trials,
            cycles_per_trial=req.cycles_per_trial, slave_template=slave,
            master_period_ms=req.master_period_ms, seed=req.seed,
            warmup_cycles=req.warmup_cycles,
        )
        if req.mode == "both":
            fb, ar = await asyncio.to_thread(experiments.compare_modes, **kwargs)
            tables = [fb, ar]
        else:
            tables = [await asyncio.to_thread(
                experiments.chain_experiment, mode=req.mode, **kwargs)]
        rows = [ExperimentRowModel(**r.__dict__) for t in tables for r in t.rows]
        return ExperimentResponse(rows=rows)

    @app.post("/run", response_model=RunResponse)
    async def run_batch(req: RunRequest):
        try:
            p, t, s = config_from_dict(req.config)
        except ConfigError as e:
            raise HTTPException(status_code=422, detail=[str(v) for v in e.violations])
        if req.seed is not None:
            from dataclasses import replace
            s = replace(s, seed=req.seed)
        violations = validate_config(p, t, s)
        if violations:
            raise HTTPException(status_code=422, detail=[str(v) for v in violations])
        log, snaps = await asyncio.to_thread(engine.run, p, t, s)
        return RunResponse(
            n_onsets=len(log),
            n_snapshots=len(snaps),
            events=[OnsetModel(**e.__dict__) for e in log] if req.include_events else None,
        )

    @app.websocket("/ws")
    async def websocket_endpoint(ws: WebSocket):
        await ws.accept()
        session = _Session()
        await live.inbox.put((session, {"type": "__attach__"}))

        async def writer():
            while True:
                await ws.send_text(await session.queue.get())

        writer_task = asyncio.create_task(writer())
        try:
            while True:
                raw = await ws.receive_text()
                try:
                    msg = json.loads(raw)
                    if not isinstance(msg, dict):
                        raise ValueError("frame must be a JSON object")
                except ValueError as e:
                    session.push(json.dumps(
                        {"type": "rejected", "reason": f"malformed frame: {e}"}))
                    continue
                await live.inbox.put((session, msg))
        except WebSocketDisconnect:
            pass
        finally:
            writer_task.cancel()
            await live.inbox.put((session, {"type": "__detach__"}))

    dist = Path(__file__).resolve().parents[2] / "frontend" / "dist"
    if dist.is_dir():
        app.mount("/ui", StaticFiles(directory=str(dist), html=True), name="ui")

    return app
