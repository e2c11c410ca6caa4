"""Constructors and queries for directed listening graphs.

Edges are stored listener -> sources, so "who can agent k hear" is one
lookup.  All constructors produce graphs that pass model validation.
"""

from __future__ import annotations

from vocalsync.model import Topology


def _topology(n: int, listens: dict[int, set[int]]) -> Topology:
    full = {k: frozenset(listens.get(k, set())) for k in range(n)}
    return Topology(n_agents=n, listens_to=full)


def build_chain(n: int) -> Topology:
    """Pacemaker chain: agent 0 hears nobody, agent k hears only k-1."""
    if n < 2:
        raise ValueError(f"chain needs n >= 2, got {n}")
    return _topology(n, {k: {k - 1} for k in range(1, n)})


def build_ring(n: int) -> Topology:
    """Directed loop: agent k hears (k-1) mod n."""
    if n < 2:
        raise ValueError(f"ring needs n >= 2, got {n}")
    return _topology(n, {k: {(k - 1) % n} for k in range(n)})


def build_star(n: int) -> Topology:
    """All agents listen to agent 0; agent 0 hears nobody."""
    if n < 1:
        raise ValueError(f"star needs n >= 1, got {n}")
    return _topology(n, {k: {0} for k in range(1, n)})


def build_complete(n: int) -> Topology:
    """Every agent hears every other agent."""
    if n < 1:
        raise ValueError(f"complete needs n >= 1, got {n}")
    return _topology(n, {k: set(range(n)) - {k} for k in range(n)})


def from_edge_list(n: int, edges: list[tuple[int, int]]) -> Topology:
    """Build from explicit (listener, source) pairs."""
    if n < 1:
        raise ValueError(f"need n >= 1, got {n}")
    listens: dict[int, set[int]] = {}
    for listener, src in edges:
        if not (0 <= listener < n):
            raise ValueError(f"unknown agent id {listener}")
        if not (0 <= src < n):
            raise ValueError(f"unknown agent id {src}")
        if listener == src:
            raise ValueError(f"self-edge {listener}->{src} not allowed")
        listens.setdefault(listener, set()).add(src)
    return _topology(n, listens)


def edges_of(topo: Topology) -> list[tuple[int, int]]:
    """Sorted (listener, source) pairs; inverse of from_edge_list."""
    return sorted(
        (listener, src)
        for listener, sources in topo.listens_to.items()
        for src in sources
    )
