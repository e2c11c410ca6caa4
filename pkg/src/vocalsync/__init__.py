"""Multi-agent simulator of rhythmic vocal synchrony.

A population of vocalizing agents listens to each other over a directed
graph.  Each agent runs two proportional feedback loops: one nudges its
beat phase toward the onsets it hears, the other pulls its period back
toward its own preferred rhythm.  An action-reaction baseline (fire a
fixed latency after a heard onset) is included for comparison.
"""

from vocalsync.model import (
    AgentParams,
    AgentState,
    OnsetEvent,
    SimConfig,
    Topology,
    Violation,
    config_from_dict,
    config_to_dict,
    load_config,
    randomize_individuality,
    validate_config,
)
from vocalsync.engine import World, Snapshot, EventLog, run
from vocalsync.topology import (
    build_chain,
    build_complete,
    build_ring,
    build_star,
    edges_of,
    from_edge_list,
)

__version__ = "0.1.0"

__all__ = [
    "AgentParams",
    "AgentState",
    "OnsetEvent",
    "SimConfig",
    "Topology",
    "Violation",
    "World",
    "Snapshot",
    "EventLog",
    "run",
    "build_chain",
    "build_ring",
    "build_star",
    "build_complete",
    "from_edge_list",
    "edges_of",
    "config_from_dict",
    "config_to_dict",
    "load_config",
    "randomize_individuality",
    "validate_config",
]
