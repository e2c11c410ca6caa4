"""Deterministic fixed-timestep simulation loop.

Time advances in ticks of ``tick_ms``.  Each feedback-mode agent carries
its current beat cycle ``[cycle_start, cycle_end)`` explicitly; the phase
shown in snapshots is the elapsed fraction of that cycle, so beat times
are exact rather than quantized to ticks.  Within a tick the order is
fixed: beat wraps (agents in id order), delivery of the onsets emitted by
those wraps, firing of due action-reaction onsets plus their delivery,
then a snapshot if one is due.  Everything observable is a pure function
of (configuration, seed).

Correction timing.  A heard onset pairs with the nearest own beat (the
most recent one or the predicted next one).  Its asynchrony joins that
beat's correction group, and the group steers the beat interval that
*follows* the paired beat: onsets pairing with the upcoming beat are
folded in when it fires, while onsets pairing with the beat already past
refine the in-flight cycle end.  Both cases apply a correction exactly
one beat after the paired beat, which keeps the error recurrence
``a_next = (1 - gain_other) * a`` exact for either sign of the error.

Noise enters in one place only: emitted onset times get a Normal(0,
jitter_sigma) offset from a per-agent counter-based stream derived from
(seed, agent id), so editing one agent never disturbs another agent's
noise sequence.  The internal beat grid is never jittered.
"""

from __future__ import annotations

import io
import json
import math
from dataclasses import dataclass, replace

import numpy as np

from vocalsync import controller
from vocalsync.metrics import order_parameter
from vocalsync.model import (
    AgentParams,
    AgentState,
    SimConfig,
    Topology,
    OnsetEvent,
    ConfigError,
    config_to_dict,
    validate_agent,
    validate_config,
)

# Minimum spacing enforced between one agent's consecutive onsets, so the
# per-agent event order stays strict even under extreme jitter draws.
_MIN_ONSET_GAP_MS = 1e-6


@dataclass(frozen=True)
class AgentSnapshot:
    id: int
    phase: float
    current_period_ms: float
    last_onset_time_ms: float | None


@dataclass(frozen=True)
class Snapshot:
    time_ms: float
    order_parameter: float
    agents: tuple[AgentSnapshot, ...]


@dataclass
class EventLog:
    """Onsets in global (time_ms, agent_id) order."""

    events: list[OnsetEvent]

    def __iter__(self):
        return iter(self.events)

    def __len__(self) -> int:
        return len(self.events)

    def for_agent(self, agent_id: int) -> list[OnsetEvent]:
        return [e for e in self.events if e.agent_id == agent_id]

    def times_of(self, agent_id: int) -> list[float]:
        return [e.time_ms for e in self.events if e.agent_id == agent_id]

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write("time_ms,agent_id,amplitude,duration_ms\n")
        for e in self.events:
            buf.write(f"{e.time_ms:.3f},{e.agent_id},{e.amplitude:.4f},{e.duration_ms:.3f}\n")
        return buf.getvalue()

    @staticmethod
    def from_csv(text: str) -> "EventLog":
        lines = text.strip().splitlines()
        events = []
        for line in lines[1:]:
            t, a, amp, dur = line.split(",")
            events.append(OnsetEvent(float(t), int(a), float(amp), float(dur)))
        return EventLog(events)


def snapshots_to_jsonl(snapshots: list[Snapshot]) -> str:
    out = []
    for s in snapshots:
        out.append(json.dumps({
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
        }))
    return "\n".join(out) + ("\n" if out else "")


def _agent_rng(seed: int, agent_id: int) -> np.random.Generator:
    return np.random.Generator(
        np.random.Philox(np.random.SeedSequence(entropy=seed, spawn_key=(agent_id,)))
    )


class World:
    """Owns all mutable simulation state.

    Strictly single-threaded: callers advance it with step() and mutate it
    with apply_command() between steps.  Snapshots and events are plain
    values and may be shared freely once produced.
    """

    def __init__(
        self,
        params: list[AgentParams],
        topo: Topology,
        sim: SimConfig,
        initial_phases: dict[int, float] | None = None,
        validate: bool = True,
    ):
        if validate:
            violations = validate_config(params, topo, sim)
            if violations:
                raise ConfigError(violations)
        self.sim = sim
        self.params: dict[int, AgentParams] = {p.id: p for p in params}
        self.listens: dict[int, set[int]] = {
            k: set(v) for k, v in topo.listens_to.items()
        }
        for k in self.params:
            self.listens.setdefault(k, set())
        self.states: dict[int, AgentState] = {}
        self.rngs: dict[int, np.random.Generator] = {}
        self.tick_index = 0
        self.paused = False
        self.events: list[OnsetEvent] = []
        self.snapshots: list[Snapshot] = []
        self._next_snapshot_ms = sim.snapshot_every_ms
        initial_phases = initial_phases or {}
        for p in params:
            self._init_agent(p, initial_phases.get(p.id, 0.0))

    # -- construction helpers ------------------------------------------

    def _init_agent(self, p: AgentParams, phase0: float) -> None:
        st = AgentState(phase=phase0, current_period_ms=p.preferred_period_ms)
        if p.mode == "feedback":
            # Anchor the first cycle so the first beat lands (1 - phase0)
            # of a period into the run.
            now = self.time_ms
            st.cycle_start_ms = now - phase0 * p.preferred_period_ms
            st.cycle_base_len_ms = p.preferred_period_ms
            st.cycle_end_ms = st.cycle_start_ms + p.preferred_period_ms
        self.states[p.id] = st
        self.rngs[p.id] = _agent_rng(self.sim.seed, p.id)

    @property
    def time_ms(self) -> float:
        return self.tick_index * self.sim.tick_ms

    @property
    def agent_ids(self) -> list[int]:
        return sorted(self.params)

    def topology(self) -> Topology:
        ids = self.agent_ids
        remap = {old: new for new, old in enumerate(ids)}
        return Topology(
            n_agents=len(ids),
            listens_to={
                remap[k]: frozenset(remap[s] for s in v)
                for k, v in self.listens.items()
                if k in remap
            },
        )

    def config_dict(self) -> dict:
        """Current configuration in the file-format document shape.

        Agent ids are preserved as-is; after removals they may be sparse,
        in which case the document is a live echo rather than a loadable
        dense config.
        """
        ids = self.agent_ids
        return {
            "sim": config_to_dict([], Topology(0, {}), self.sim)["sim"],
            "agents": [config_to_dict([self.params[i]], Topology(1, {}), self.sim)["agents"][0]
                       for i in ids],
            "edges": sorted([k, s] for k, v in self.listens.items() for s in v if k in self.params),
        }

    # -- core stepping ---------------------------------------------------

    def step(self, n_ticks: int) -> None:
        """Advance exactly n_ticks (no-op while paused).

        Ticks with nothing due are skipped in bulk; all state changes
        happen at event ticks, so splitting a run into arbitrary step()
        calls yields byte-identical results.
        """
        if self.paused or n_ticks <= 0:
            return
        tick = self.sim.tick_ms
        target = self.tick_index + n_ticks
        while self.tick_index < target:
            t_next = self._next_snapshot_ms
            for i in self.agent_ids:
                st = self.states[i]
                if st.cycle_end_ms is not None:
                    t_next = min(t_next, st.cycle_end_ms)
                if st.pending_reactions:
                    t_next = min(t_next, min(st.pending_reactions.values()))
            jump = max(self.tick_index + 1, math.ceil(t_next / tick - 1e-9))
            self.tick_index = min(target, jump)
            self._process_tick(self.time_ms)

    def _process_tick(self, now: float) -> None:
        emitted: list[OnsetEvent] = []
        for i in self.agent_ids:
            st = self.states[i]
            while st.cycle_end_ms is not None and st.cycle_end_ms <= now:
                emitted.append(self._wrap_beat(i))
        self._deliver(emitted, now)

        due: list[tuple[float, int, int]] = []
        for i in self.agent_ids:
            for src, t_fire in self.states[i].pending_reactions.items():
                if t_fire <= now:
                    due.append((t_fire, i, src))
        due.sort()
        reacted: list[OnsetEvent] = []
        for t_fire, i, src in due:
            del self.states[i].pending_reactions[src]
            reacted.append(self._emit(i, t_fire))
        # Reaction onsets are heard in this same tick; reactions they
        # trigger are scheduled now but fire no earlier than the next tick,
        # which bounds zero-latency echo chains to one hop per tick.
        self._deliver(reacted, now)

        while self._next_snapshot_ms <= now:
            self._next_snapshot_ms += self.sim.snapshot_every_ms
            self.snapshots.append(self.snapshot())

    def _emit(self, agent_id: int, nominal_time: float) -> OnsetEvent:
        p = self.params[agent_id]
        st = self.states[agent_id]
        t = nominal_time
        if p.jitter_sigma_ms > 0.0:
            t += float(self.rngs[agent_id].normal(0.0, p.jitter_sigma_ms))
        if st.last_onset_time_ms is not None:
            t = max(t, st.last_onset_time_ms + _MIN_ONSET_GAP_MS)
        t = max(t, 0.0)
        ev = OnsetEvent(
            time_ms=t,
            agent_id=agent_id,
            amplitude=p.amplitude,
            duration_ms=p.mark_space_ratio * st.current_period_ms,
        )
        st.last_onset_time_ms = t
        self.events.append(ev)
        return ev

    def _wrap_beat(self, agent_id: int) -> OnsetEvent:
        p = self.params[agent_id]
        st = self.states[agent_id]
        beat = st.cycle_end_ms
        ev = self._emit(agent_id, beat + p.phase_offset * st.current_period_ms)

        # Onsets already paired with this beat become the active correction
        # group for the cycle it opens.
        st.asynchrony_sum_ms = st.ahead_sum_ms
        st.asynchrony_count = st.ahead_count
        st.ahead_sum_ms = 0.0
        st.ahead_count = 0
        upd = controller.feedback_update(st, p)
        st.current_period_ms = upd.new_period_ms
        st.cycle_start_ms = beat
        st.cycle_base_len_ms = upd.new_period_ms
        st.cycle_end_ms = beat + upd.new_period_ms + upd.phase_shift_ms
        return ev

    def _deliver(self, onsets: list[OnsetEvent], now: float) -> None:
        for ev in onsets:
            for listener in self.agent_ids:
                if ev.agent_id not in self.listens.get(listener, ()):
                    continue
                lp = self.params[listener]
                if ev.amplitude < lp.hearing_threshold:
                    continue
                if lp.mode == "action_reaction":
                    pend = self.states[listener].pending_reactions
                    if ev.agent_id not in pend:
                        pend[ev.agent_id] = controller.action_reaction_update(ev.time_ms, lp)
                else:
                    self._hear(listener, ev.time_ms)

    def _hear(self, listener: int, heard_ms: float) -> None:
        p = self.params[listener]
        st = self.states[listener]
        if st.cycle_start_ms is None or st.cycle_end_ms is None:
            return
        span = st.cycle_end_ms - st.cycle_start_ms
        a = controller.nearest_beat_offset(st.cycle_end_ms, span, heard_ms)
        # The onset joins the correction group of its paired beat.  Emission
        # times may sit slightly outside the listener's current cycle (same-
        # tick races, onset offsets into the next cycle), so the paired beat
        # is recovered from the fold rather than compared to the two cycle
        # edges directly.
        if heard_ms + a >= st.cycle_end_ms - 1e-9:
            st.ahead_sum_ms += a
            st.ahead_count += 1
        else:
            st.asynchrony_sum_ms += a
            st.asynchrony_count += 1
            shift = controller.phase_shift_for(
                st.asynchrony_sum_ms, st.asynchrony_count,
                p.gain_other, st.cycle_base_len_ms,
            )
            st.cycle_end_ms = st.cycle_start_ms + st.cycle_base_len_ms + shift

    # -- observation ------------------------------------------------------

    def snapshot(self) -> Snapshot:
        now = self.time_ms
        agents = []
        phases = []
        for i in self.agent_ids:
            st = self.states[i]
            ph = st.phase_at(now)
            phases.append(ph)
            agents.append(AgentSnapshot(
                id=i,
                phase=ph,
                current_period_ms=st.current_period_ms,
                last_onset_time_ms=st.last_onset_time_ms,
            ))
        return Snapshot(
            time_ms=now,
            order_parameter=order_parameter(phases) if phases else 0.0,
            agents=tuple(agents),
        )

    def event_log(self) -> EventLog:
        return EventLog(sorted(self.events, key=lambda e: (e.time_ms, e.agent_id)))

    # -- live commands -----------------------------------------------------

    def set_param(self, agent_id: int, name: str, value) -> tuple[bool, str]:
        if agent_id not in self.params:
            return False, f"unknown agent id {agent_id}"
        if name == "id":
            return False, "id cannot be changed"
        old = self.params[agent_id]
        if not hasattr(old, name):
            return False, f"unknown field {name!r}"
        try:
            candidate = replace(old, **{name: value})
        except (TypeError, ValueError) as e:
            return False, str(e)
        bad = validate_agent(candidate)
        if bad:
            return False, "; ".join(str(v) for v in bad)
        if name == "preferred_period_ms" and value < 10.0 * self.sim.tick_ms:
            return False, (f"preferred_period_ms = {value!r} below temporal resolution "
                           f"guard (10 * tick_ms = {10.0 * self.sim.tick_ms:g})")
        self.params[agent_id] = candidate
        if name == "mode" and value != old.mode:
            self._switch_mode(agent_id, value)
        return True, ""

    def _switch_mode(self, agent_id: int, mode: str) -> None:
        st = self.states[agent_id]
        p = self.params[agent_id]
        if mode == "action_reaction":
            st.cycle_start_ms = None
            st.cycle_end_ms = None
            st.cycle_base_len_ms = None
            st.asynchrony_sum_ms = 0.0
            st.asynchrony_count = 0
            st.ahead_sum_ms = 0.0
            st.ahead_count = 0
        else:
            st.pending_reactions.clear()
            st.current_period_ms = p.preferred_period_ms
            st.cycle_start_ms = self.time_ms
            st.cycle_base_len_ms = p.preferred_period_ms
            st.cycle_end_ms = st.cycle_start_ms + p.preferred_period_ms

    def set_edge(self, listener: int, source: int, on: bool) -> tuple[bool, str]:
        if listener not in self.params:
            return False, f"unknown agent id {listener}"
        if source not in self.params:
            return False, f"unknown agent id {source}"
        if listener == source:
            return False, f"self-edge {listener}->{source} not allowed"
        if on:
            self.listens.setdefault(listener, set()).add(source)
        else:
            self.listens.get(listener, set()).discard(source)
        return True, ""

    def add_agent(self, p: AgentParams, phase0: float = 0.0) -> tuple[bool, str]:
        if p.id in self.params:
            return False, f"agent id {p.id} already exists"
        bad = validate_agent(p)
        if bad:
            return False, "; ".join(str(v) for v in bad)
        if p.preferred_period_ms < 10.0 * self.sim.tick_ms:
            return False, "preferred_period_ms below temporal resolution guard"
        self.params[p.id] = p
        self.listens.setdefault(p.id, set())
        self._init_agent(p, phase0)
        return True, ""

    def remove_agent(self, agent_id: int) -> tuple[bool, str]:
        if agent_id not in self.params:
            return False, f"unknown agent id {agent_id}"
        if len(self.params) == 1:
            return False, "at least one agent required"
        del self.params[agent_id]
        del self.states[agent_id]
        del self.rngs[agent_id]
        self.listens.pop(agent_id, None)
        for sources in self.listens.values():
            sources.discard(agent_id)
        return True, ""

    def reseed(self, seed: int) -> tuple[bool, str]:
        if not isinstance(seed, int) or not (0 <= seed <= 2**64 - 1):
            return False, f"seed = {seed!r} out of [0, 2^64)"
        self.sim = replace(self.sim, seed=seed)
        for i in self.agent_ids:
            self.rngs[i] = _agent_rng(seed, i)
        return True, ""


def apply_command(world: World, command: dict) -> tuple[World, bool, str]:
    """Dispatch one live-steering command; applied between ticks.

    Returns (world, ok, reason).  A ``reset`` builds a fresh World from the
    embedded config document; every other command mutates in place.  On
    rejection the world is unchanged.
    """
    if not isinstance(command, dict) or "type" not in command:
        return world, False, "command must be an object with a 'type' field"
    kind = command["type"]
    try:
        if kind == "set_param":
            ok, why = world.set_param(command["agent"], command["field"], command["value"])
        elif kind == "set_edge":
            ok, why = world.set_edge(command["listener"], command["source"], bool(command["on"]))
        elif kind == "add_agent":
            from vocalsync.model import config_from_dict  # local: avoids import cycle at module load
            doc = {"agents": [command["params"]], "edges": []}
            params, _, _ = config_from_dict(doc)
            ok, why = world.add_agent(params[0], float(command.get("phase", 0.0)))
        elif kind == "remove_agent":
            ok, why = world.remove_agent(command["agent"])
        elif kind == "pause":
            world.paused = True
            ok, why = True, ""
        elif kind == "resume":
            world.paused = False
            ok, why = True, ""
        elif kind == "reseed":
            ok, why = world.reseed(command["seed"])
        elif kind == "reset":
            from vocalsync.model import config_from_dict
            params, topo, sim = config_from_dict(command["config"])
            new = World(params, topo, sim)
            return new, True, ""
        else:
            return world, False, f"unknown command type {kind!r}"
    except ConfigError as e:
        return world, False, "; ".join(str(v) for v in e.violations)
    except (KeyError, TypeError, ValueError) as e:
        return world, False, f"malformed {kind} command: {e}"
    return world, ok, why


def run(
    params: list[AgentParams],
    topo: Topology,
    sim: SimConfig,
    initial_phases: dict[int, float] | None = None,
) -> tuple[EventLog, list[Snapshot]]:
    """Simulate the full configured duration and return the ordered log."""
    world = World(params, topo, sim, initial_phases=initial_phases)
    world.step(int(round(sim.duration_ms / sim.tick_ms)))
    return world.event_log(), world.snapshots
