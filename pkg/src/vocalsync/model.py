"""Domain types, configuration schema, validation, and seeded individuality.

All types here are plain values.  ``AgentParams``, ``Topology`` and
``SimConfig`` are frozen after validation and safe to share; ``AgentState``
is the per-agent mutable rhythm state owned by the engine.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, fields, replace
from typing import Iterable, Mapping

import numpy as np

VOICE_KINDS = ("human", "bird", "insect")
MODES = ("feedback", "action_reaction")

# Sampling ranges (Hz) for randomized per-agent pitch, by voice kind.
PITCH_RANGES_HZ = {
    "human": (90.0, 300.0),
    "bird": (1500.0, 4000.0),
    "insect": (3000.0, 6000.0),
}

PERIOD_BOUNDS_MS = (10.0, 10000.0)
GAIN_OTHER_BOUNDS = (0.0, 4.0)
GAIN_SELF_BOUNDS = (0.0, 1.0)
SEED_MAX = 2**64 - 1


@dataclass(frozen=True)
class AgentParams:
    """Static configuration of one vocal agent."""

    id: int
    preferred_period_ms: float = 500.0
    gain_other: float = 1.0          # weight on heard-onset asynchrony (phase loop)
    gain_self: float = 0.1           # pull of the period back toward preferred (rhythm loop)
    amplitude: float = 0.8
    mark_space_ratio: float = 0.2    # vocalization duration as a fraction of the current period
    phase_offset: float = 0.0        # onset position within the beat cycle, in [0, 1)
    pitch_hz: float = 150.0
    voice_kind: str = "human"
    mode: str = "feedback"
    reaction_latency_ms: float = 23.8
    jitter_sigma_ms: float = 3.0     # std of motor noise on emitted onset times
    hearing_threshold: float = 0.0   # minimum source amplitude to be heard


@dataclass
class AgentState:
    """Evolving rhythm state of one agent.

    The beat grid is carried as the current cycle ``[cycle_start_ms,
    cycle_end_ms)``; ``cycle_end_ms`` is the next beat and may be refined
    while the cycle is in flight (see the engine).  ``asynchrony_sum_ms``
    and ``asynchrony_count`` accumulate the heard-onset asynchronies that
    feed the next phase correction.  Agents in action-reaction mode keep
    no beat grid (``cycle_start_ms is None``) and only carry
    ``pending_reactions``.
    """

    phase: float = 0.0
    current_period_ms: float = 500.0
    asynchrony_sum_ms: float = 0.0
    asynchrony_count: int = 0
    last_onset_time_ms: float | None = None
    pending_reactions: dict[int, float] = field(default_factory=dict)
    # Beat grid internals (feedback mode only).
    cycle_start_ms: float | None = None
    cycle_end_ms: float | None = None
    cycle_base_len_ms: float | None = None
    # Asynchronies already paired with the *upcoming* beat; they become the
    # active accumulator once that beat fires.
    ahead_sum_ms: float = 0.0
    ahead_count: int = 0

    def phase_at(self, time_ms: float) -> float:
        if self.cycle_start_ms is None or self.cycle_end_ms is None:
            return self.phase
        span = self.cycle_end_ms - self.cycle_start_ms
        if span <= 0.0:
            return 0.0
        p = (time_ms - self.cycle_start_ms) / span
        return min(max(p, 0.0), math.nextafter(1.0, 0.0))


@dataclass(frozen=True)
class Topology:
    """Directed listening graph: ``listens_to[k]`` is the set of agents k hears."""

    n_agents: int
    listens_to: Mapping[int, frozenset[int]]

    def sources_of(self, listener: int) -> frozenset[int]:
        return self.listens_to.get(listener, frozenset())

    def n_edges(self) -> int:
        return sum(len(s) for s in self.listens_to.values())


@dataclass(frozen=True)
class SimConfig:
    tick_ms: float = 1.0
    duration_ms: float = 10000.0
    seed: int = 0
    warmup_cycles: int = 20
    snapshot_every_ms: float = 50.0


@dataclass(frozen=True)
class OnsetEvent:
    """One vocalization onset."""

    time_ms: float
    agent_id: int
    amplitude: float
    duration_ms: float


@dataclass(frozen=True)
class Violation:
    """A single configuration constraint failure."""

    where: str    # "agent 3", "topology", "sim"
    field: str
    message: str

    def __str__(self) -> str:
        return f"{self.where}: {self.field} {self.message}"


def _check_range(
    out: list[Violation], where: str, name: str, value: float,
    lo: float | None, hi: float | None,
    lo_open: bool = False, hi_open: bool = False,
) -> None:
    lo_txt = "(" if lo_open else "["
    hi_txt = ")" if hi_open else "]"
    bad = False
    if lo is not None and (value < lo or (lo_open and value == lo)):
        bad = True
    if hi is not None and (value > hi or (hi_open and value == hi)):
        bad = True
    if bad:
        lo_s = "-inf" if lo is None else f"{lo:g}"
        hi_s = "inf" if hi is None else f"{hi:g}"
        out.append(Violation(where, name, f"= {value!r} out of {lo_txt}{lo_s}, {hi_s}{hi_txt}"))


def validate_agent_field(agent: AgentParams, name: str, value) -> list[Violation]:
    """Bounds for one field of one agent, reusing the global rules.

    Used both by whole-config validation and by live parameter updates.
    """
    where = f"agent {agent.id}"
    out: list[Violation] = []
    if name == "preferred_period_ms":
        _check_range(out, where, name, value, *PERIOD_BOUNDS_MS)
    elif name == "gain_other":
        _check_range(out, where, name, value, *GAIN_OTHER_BOUNDS)
    elif name == "gain_self":
        _check_range(out, where, name, value, *GAIN_SELF_BOUNDS)
    elif name == "amplitude":
        _check_range(out, where, name, value, 0.0, 1.0)
    elif name == "mark_space_ratio":
        _check_range(out, where, name, value, 0.0, 1.0)
    elif name == "phase_offset":
        _check_range(out, where, name, value, 0.0, 1.0, hi_open=True)
    elif name == "pitch_hz":
        _check_range(out, where, name, value, 0.0, None, lo_open=True)
    elif name == "voice_kind":
        if value not in VOICE_KINDS:
            out.append(Violation(where, name, f"= {value!r} not one of {VOICE_KINDS}"))
    elif name == "mode":
        if value not in MODES:
            out.append(Violation(where, name, f"= {value!r} not one of {MODES}"))
    elif name == "reaction_latency_ms":
        _check_range(out, where, name, value, 0.0, None)
        if isinstance(value, (int, float)) and value >= agent.preferred_period_ms:
            out.append(Violation(
                where, name,
                f"= {value!r} must be below preferred_period_ms ({agent.preferred_period_ms:g})"))
    elif name == "jitter_sigma_ms":
        _check_range(out, where, name, value, 0.0, None)
    elif name == "hearing_threshold":
        _check_range(out, where, name, value, 0.0, 1.0)
    elif name == "id":
        if not isinstance(value, int) or value < 0:
            out.append(Violation(where, name, f"= {value!r} must be a non-negative integer"))
    else:
        out.append(Violation(where, name, "unknown field"))
    return out


_NUMERIC_AGENT_FIELDS = (
    "preferred_period_ms", "gain_other", "gain_self", "amplitude",
    "mark_space_ratio", "phase_offset", "pitch_hz",
    "reaction_latency_ms", "jitter_sigma_ms", "hearing_threshold",
)


def validate_agent(agent: AgentParams) -> list[Violation]:
    out: list[Violation] = []
    out += validate_agent_field(agent, "id", agent.id)
    for name in _NUMERIC_AGENT_FIELDS:
        value = getattr(agent, name)
        if not isinstance(value, (int, float)) or isinstance(value, bool) or not np.isfinite(value):
            out.append(Violation(f"agent {agent.id}", name, f"= {value!r} not a finite number"))
            continue
        out += validate_agent_field(agent, name, value)
    out += validate_agent_field(agent, "voice_kind", agent.voice_kind)
    out += validate_agent_field(agent, "mode", agent.mode)
    return out


def validate_topology(topo: Topology, n_agents: int) -> list[Violation]:
    out: list[Violation] = []
    if topo.n_agents != n_agents:
        out.append(Violation("topology", "n_agents",
                             f"= {topo.n_agents} does not match agent count {n_agents}"))
    if topo.n_agents < 1:
        out.append(Violation("topology", "n_agents", f"= {topo.n_agents} must be >= 1"))
    for listener, sources in topo.listens_to.items():
        if not (0 <= listener < n_agents):
            out.append(Violation("topology", "edge", f"unknown agent id {listener}"))
        for src in sources:
            if not (0 <= src < n_agents):
                out.append(Violation("topology", "edge", f"unknown agent id {src}"))
            if src == listener:
                out.append(Violation("topology", "edge",
                                     f"self-edge {listener}->{src} not allowed"))
    return out


def validate_sim(sim: SimConfig, params: Iterable[AgentParams]) -> list[Violation]:
    out: list[Violation] = []
    _check_range(out, "sim", "tick_ms", sim.tick_ms, 0.0, None, lo_open=True)
    _check_range(out, "sim", "duration_ms", sim.duration_ms, 0.0, None, lo_open=True)
    _check_range(out, "sim", "snapshot_every_ms", sim.snapshot_every_ms, 0.0, None, lo_open=True)
    if not isinstance(sim.warmup_cycles, int) or sim.warmup_cycles < 0:
        out.append(Violation("sim", "warmup_cycles",
                             f"= {sim.warmup_cycles!r} must be a non-negative integer"))
    if not isinstance(sim.seed, int) or not (0 <= sim.seed <= SEED_MAX):
        out.append(Violation("sim", "seed", f"= {sim.seed!r} out of [0, 2^64)"))
    periods = [p.preferred_period_ms for p in params
               if isinstance(p.preferred_period_ms, (int, float))]
    if periods and isinstance(sim.tick_ms, (int, float)) and sim.tick_ms > 0:
        # Temporal resolution guard: at least ten ticks per beat.
        if sim.tick_ms > min(periods) / 10.0:
            out.append(Violation(
                "sim", "tick_ms",
                f"= {sim.tick_ms:g} exceeds min preferred_period_ms/10 ({min(periods) / 10.0:g})"))
    return out


def validate_config(
    params: list[AgentParams], topo: Topology, sim: SimConfig
) -> list[Violation]:
    """Collect every constraint violation in the configuration.

    Returns an empty list iff the configuration is valid.  Never raises on
    bad values; every problem is reported, not just the first.
    """
    out: list[Violation] = []
    if len(params) < 1:
        out.append(Violation("agents", "count", "at least one agent required"))
    ids = [p.id for p in params]
    if sorted(ids) != list(range(len(params))):
        out.append(Violation("agents", "id", f"ids {ids} must be exactly 0..{len(params) - 1}"))
    for p in params:
        out += validate_agent(p)
    out += validate_topology(topo, len(params))
    out += validate_sim(sim, params)
    return out


def randomize_individuality(params: list[AgentParams], seed: int) -> list[AgentParams]:
    """Resample each agent's pitch within its voice kind's range.

    Deterministic in (params, seed); one uniform draw per agent in list
    order, so an agent's pitch depends only on its position and the seed.
    All other fields are untouched.
    """
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence(seed)))
    out = []
    for p in params:
        lo, hi = PITCH_RANGES_HZ[p.voice_kind]
        out.append(replace(p, pitch_hz=float(rng.uniform(lo, hi))))
    return out


# --- configuration file format -------------------------------------------
#
# One JSON document:
#   {"sim": {...}, "agents": [{...}, ...], "edges": [[listener, source], ...]}
# Field names match the dataclasses exactly; unknown fields are rejected.

_AGENT_FIELDS = {f.name for f in fields(AgentParams)}
_SIM_FIELDS = {f.name for f in fields(SimConfig)}


class ConfigError(ValueError):
    """Raised when a config document cannot even be structurally decoded."""

    def __init__(self, violations: list[Violation]):
        self.violations = violations
        super().__init__("; ".join(str(v) for v in violations))


def config_from_dict(doc: dict) -> tuple[list[AgentParams], Topology, SimConfig]:
    """Decode the JSON document form. Raises ConfigError on structural problems.

    Semantic bounds are *not* checked here; run validate_config on the result.
    """
    errs: list[Violation] = []
    if not isinstance(doc, dict):
        raise ConfigError([Violation("config", "root", "must be a JSON object")])
    unknown = set(doc) - {"sim", "agents", "edges"}
    for k in sorted(unknown):
        errs.append(Violation("config", k, "unknown field"))

    sim_doc = doc.get("sim", {})
    if not isinstance(sim_doc, dict):
        errs.append(Violation("sim", "sim", "must be an object"))
        sim_doc = {}
    for k in sorted(set(sim_doc) - _SIM_FIELDS):
        errs.append(Violation("sim", k, "unknown field"))
    sim_kwargs = {k: v for k, v in sim_doc.items() if k in _SIM_FIELDS}

    agents_doc = doc.get("agents", [])
    if not isinstance(agents_doc, list):
        errs.append(Violation("agents", "agents", "must be an array"))
        agents_doc = []
    params: list[AgentParams] = []
    for i, a in enumerate(agents_doc):
        if not isinstance(a, dict):
            errs.append(Violation(f"agent #{i}", "entry", "must be an object"))
            continue
        for k in sorted(set(a) - _AGENT_FIELDS):
            errs.append(Violation(f"agent #{i}", k, "unknown field"))
        kwargs = {k: v for k, v in a.items() if k in _AGENT_FIELDS}
        kwargs.setdefault("id", i)
        try:
            params.append(AgentParams(**kwargs))
        except TypeError as e:
            errs.append(Violation(f"agent #{i}", "entry", f"bad fields: {e}"))

    edges_doc = doc.get("edges", [])
    listens: dict[int, set[int]] = {p.id: set() for p in params if isinstance(p.id, int)}
    if not isinstance(edges_doc, list):
        errs.append(Violation("topology", "edges", "must be an array of [listener, source]"))
        edges_doc = []
    for e in edges_doc:
        if (not isinstance(e, list)) or len(e) != 2 or not all(isinstance(x, int) for x in e):
            errs.append(Violation("topology", "edge", f"{e!r} must be [listener, source] ints"))
            continue
        listener, src = e
        listens.setdefault(listener, set()).add(src)

    if errs:
        raise ConfigError(errs)
    topo = Topology(
        n_agents=len(params),
        listens_to={k: frozenset(v) for k, v in listens.items()},
    )
    sim = SimConfig(**sim_kwargs)
    return params, topo, sim


def config_to_dict(
    params: list[AgentParams], topo: Topology, sim: SimConfig
) -> dict:
    """Full explicit document; config_from_dict(config_to_dict(c)) == c."""
    return {
        "sim": {f.name: getattr(sim, f.name) for f in fields(SimConfig)},
        "agents": [
            {f.name: getattr(p, f.name) for f in fields(AgentParams)} for p in params
        ],
        "edges": sorted(
            [listener, src]
            for listener, sources in topo.listens_to.items()
            for src in sources
        ),
    }


def load_config(path: str) -> tuple[list[AgentParams], Topology, SimConfig]:
    with open(path, "r", encoding="utf-8") as fh:
        doc = json.load(fh)
    return config_from_dict(doc)


def dump_config(
    params: list[AgentParams], topo: Topology, sim: SimConfig, path: str
) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(config_to_dict(params, topo, sim), fh, indent=2)
        fh.write("\n")
