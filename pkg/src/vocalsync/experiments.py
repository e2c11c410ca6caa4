"""Reproducible batch harness for the pacemaker-chain experiment.

A chain of n agents is driven by a noiseless, non-listening master at a
fixed period; every slave's onsets are scored against the master's with
the nearest-onset pairing from the metrics module.  Trials are
independent: trial t draws its world seed and the slaves' initial phases
from streams derived via SeedSequence(seed, trial), errors are pooled
across trials per chain position, and results are reduced in trial order
so the output is deterministic.
"""

from __future__ import annotations

import io
from dataclasses import dataclass, replace

import numpy as np

from vocalsync.engine import run
from vocalsync.metrics import SUMMARY_CSV_HEADER, sync_error_series, summarize
from vocalsync.model import AgentParams, SimConfig
from vocalsync.topology import build_chain

# Spawn-key tag separating the initial-phase stream from the world seed stream.
_PHASE_STREAM = 1


@dataclass(frozen=True)
class ExperimentRow:
    position: int            # 2..n (the master is position 1)
    mode: str
    mean_error_ms: float
    std_error_ms: float
    n_onsets: int
    trials: int


@dataclass(frozen=True)
class ExperimentTable:
    rows: tuple[ExperimentRow, ...]

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write(SUMMARY_CSV_HEADER + "\n")
        for r in self.rows:
            buf.write(
                f"{r.position},{r.mode},{r.mean_error_ms:.6f},"
                f"{r.std_error_ms:.6f},{r.n_onsets},{r.trials}\n"
            )
        return buf.getvalue()

    def means(self) -> list[float]:
        return [r.mean_error_ms for r in self.rows]

    def stds(self) -> list[float]:
        return [r.std_error_ms for r in self.rows]

    def __str__(self) -> str:
        lines = ["position  mode             mean_ms      std_ms       n"]
        for r in self.rows:
            lines.append(
                f"{r.position:>8}  {r.mode:<15} {r.mean_error_ms:>+10.3f}  "
                f"{r.std_error_ms:>10.3f}  {r.n_onsets:>6}"
            )
        return "\n".join(lines)


def _trial_seed(seed: int, trial: int) -> int:
    ss = np.random.SeedSequence(entropy=seed, spawn_key=(trial,))
    return int(ss.generate_state(1, dtype=np.uint64)[0])


def _trial_phases(seed: int, trial: int, n_agents: int) -> dict[int, float]:
    ss = np.random.SeedSequence(entropy=seed, spawn_key=(trial, _PHASE_STREAM))
    rng = np.random.Generator(np.random.Philox(ss))
    return {k: float(rng.uniform(0.0, 1.0)) for k in range(1, n_agents)}


def chain_experiment(
    n_agents: int = 8,
    mode: str = "feedback",
    trials: int = 10,
    cycles_per_trial: int = 120,
    slave_template: AgentParams | None = None,
    master_period_ms: float = 500.0,
    seed: int = 0,
    warmup_cycles: int = 20,
    tick_ms: float = 1.0,
) -> ExperimentTable:
    """Per-position synchronization error statistics for one mode.

    ``slave_template`` carries the slave gains, jitter and latency; its id
    and mode are overridden per position.  The master is noiseless,
    listens to nobody, and free-runs at ``master_period_ms``.
    """
    if n_agents < 2:
        raise ValueError("chain experiment needs at least 2 agents")
    if trials < 1:
        raise ValueError("need at least 1 trial")
    template = slave_template or AgentParams(id=0)
    topo = build_chain(n_agents)
    duration = cycles_per_trial * master_period_ms

    pooled: dict[int, list[float]] = {k: [] for k in range(1, n_agents)}
    for trial in range(trials):
        params = [AgentParams(
            id=0,
            preferred_period_ms=master_period_ms,
            jitter_sigma_ms=0.0,
            mode="feedback",
        )]
        for k in range(1, n_agents):
            params.append(replace(
                template, id=k, mode=mode,
                preferred_period_ms=template.preferred_period_ms,
            ))
        sim = SimConfig(
            tick_ms=tick_ms,
            duration_ms=duration,
            seed=_trial_seed(seed, trial),
            warmup_cycles=warmup_cycles,
        )
        phases = _trial_phases(seed, trial, n_agents) if mode == "feedback" else None
        log, _ = run(params, topo, sim, initial_phases=phases)
        ref = log.times_of(0)
        for k in range(1, n_agents):
            series = sync_error_series(ref, log.times_of(k), warmup_cycles=warmup_cycles)
            pooled[k].extend(series.errors)

    rows = []
    for k in range(1, n_agents):
        mean, std, n = summarize(pooled[k])
        rows.append(ExperimentRow(
            position=k + 1, mode=mode,
            mean_error_ms=mean, std_error_ms=std,
            n_onsets=n, trials=trials,
        ))
    return ExperimentTable(tuple(rows))


def compare_modes(
    n_agents: int = 8,
    trials: int = 10,
    cycles_per_trial: int = 120,
    slave_template: AgentParams | None = None,
    master_period_ms: float = 500.0,
    seed: int = 0,
    warmup_cycles: int = 20,
    tick_ms: float = 1.0,
) -> tuple[ExperimentTable, ExperimentTable]:
    """Both modes on identical trial seeds."""
    kwargs = dict(
        n_agents=n_agents, trials=trials, cycles_per_trial=cycles_per_trial,
        slave_template=slave_template, master_period_ms=master_period_ms,
        seed=seed, warmup_cycles=warmup_cycles, tick_ms=tick_ms,
    )
    return (
        chain_experiment(mode="feedback", **kwargs),
        chain_experiment(mode="action_reaction", **kwargs),
    )


def combined_csv(tables: list[ExperimentTable]) -> str:
    buf = io.StringIO()
    buf.write(SUMMARY_CSV_HEADER + "\n")
    for t in tables:
        for r in t.rows:
            buf.write(
                f"{r.position},{r.mode},{r.mean_error_ms:.6f},"
                f"{r.std_error_ms:.6f},{r.n_onsets},{r.trials}\n"
            )
    return buf.getvalue()


def provenance_report(
    tables: list[ExperimentTable],
    n_agents: int,
    trials: int,
    cycles_per_trial: int,
    slave_template: AgentParams,
    master_period_ms: float,
    seed: int,
    warmup_cycles: int,
    tick_ms: float,
) -> dict:
    """Results plus the complete settings needed to rerun them."""
    return {
        "settings": {
            "n_agents": n_agents,
            "trials": trials,
            "cycles_per_trial": cycles_per_trial,
            "master_period_ms": master_period_ms,
            "seed": seed,
            "warmup_cycles": warmup_cycles,
            "tick_ms": tick_ms,
            "slave_template": {
                k: v for k, v in slave_template.__dict__.items() if k != "id"
            },
        },
        "tables": [
            {"mode": t.rows[0].mode if t.rows else "", "rows": [r.__dict__ for r in t.rows]}
            for t in tables
        ],
    }
