"""Command-line entry points: batch runs, experiments, rendering, serving.

The batch commands drive the core package directly and never need the
service to be running.  Exit codes: 0 success, 1 invalid configuration
or flags, 2 I/O failure.
"""

from __future__ import annotations

import json
import os
import sys
from dataclasses import replace
from pathlib import Path

import click

from vocalsync import engine, experiments, metrics
from vocalsync.audio import render, write_wav
from vocalsync.model import (
    AgentParams,
    ConfigError,
    load_config,
    validate_config,
)

ENV_SEED = "VOCALSYNC_SEED"
ENV_PORT = "VOCALSYNC_PORT"


def _load_validated(config_path: str, seed: int | None):
    try:
        params, topo, sim = load_config(config_path)
    except ConfigError as e:
        for v in e.violations:
            click.echo(f"invalid config: {v}", err=True)
        sys.exit(1)
    except OSError as e:
        click.echo(f"cannot read config: {e}", err=True)
        sys.exit(2)
    if seed is None and ENV_SEED in os.environ:
        seed = int(os.environ[ENV_SEED])
    if seed is not None:
        sim = replace(sim, seed=seed)
    violations = validate_config(params, topo, sim)
    if violations:
        for v in violations:
            click.echo(f"invalid config: {v}", err=True)
        sys.exit(1)
    return params, topo, sim


def _run_summary_rows(log: engine.EventLog, params, warmup: int) -> list[dict]:
    """Per-agent sync stats against the lowest-id agent that produced onsets."""
    with_onsets = sorted({e.agent_id for e in log})
    if not with_onsets:
        return []
    ref_id = with_onsets[0]
    ref = log.times_of(ref_id)
    by_id = {p.id: p for p in params}
    rows = []
    for aid in with_onsets:
        if aid == ref_id:
            continue
        try:
            series = metrics.sync_error_series(ref, log.times_of(aid), warmup)
            mean, std, n = metrics.summarize(series)
        except ValueError:
            continue
        rows.append({
            "position": aid + 1,
            "mode": by_id[aid].mode if aid in by_id else "unknown",
            "mean_error_ms": mean,
            "std_error_ms": std,
            "n_onsets": n,
            "trials": 1,
        })
    return rows


@click.group()
def main():
    """Simulate populations of rhythmically vocalizing agents."""


@main.command("run")
@click.argument("config_path", type=click.Path())
@click.option("--out-dir", "-o", default=".", show_default=True,
              help="Directory for events.csv, snapshots.jsonl, summary.csv.")
@click.option("--seed", type=int, default=None,
              help=f"Override the config seed (also {ENV_SEED}).")
def cli_run(config_path: str, out_dir: str, seed: int | None):
    """Simulate CONFIG_PATH and write the event log, snapshots and summary."""
    params, topo, sim = _load_validated(config_path, seed)
    log, snapshots = engine.run(params, topo, sim)
    out = Path(out_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
        (out / "events.csv").write_text(log.to_csv())
        (out / "snapshots.jsonl").write_text(engine.snapshots_to_jsonl(snapshots))
        rows = _run_summary_rows(log, params, sim.warmup_cycles)
        (out / "summary.csv").write_text(metrics.summary_rows_to_csv(rows))
    except OSError as e:
        click.echo(f"write failed: {e}", err=True)
        sys.exit(2)
    click.echo(f"{len(log)} onsets, {len(snapshots)} snapshots -> {out}")


@main.command("experiment")
@click.option("--n", "n_agents", default=8, show_default=True, type=click.IntRange(min=2))
@click.option("--mode", type=click.Choice(["feedback", "action-reaction", "both"]),
              default="both", show_default=True)
@click.option("--trials", default=10, show_default=True, type=click.IntRange(min=1))
@click.option("--cycles", default=120, show_default=True, type=click.IntRange(min=1))
@click.option("--seed", type=int, default=None)
@click.option("--period", default=500.0, show_default=True, help="Master period (ms).")
@click.option("--jitter", default=3.0, show_default=True, help="Slave motor noise std (ms).")
@click.option("--latency", default=23.8, show_default=True,
              help="Action-reaction latency (ms).")
@click.option("--gain-other", default=1.0, show_default=True)
@click.option("--gain-self", default=0.1, show_default=True)
@click.option("--warmup", default=20, show_default=True, type=click.IntRange(min=0))
@click.option("--out", type=click.Path(), default=None, help="Also write the table as CSV.")
@click.option("--report", type=click.Path(), default=None,
              help="Write a JSON report embedding the full settings for provenance.")
def cli_experiment(n_agents, mode, trials, cycles, seed, period, jitter, latency,
                   gain_other, gain_self, warmup, out, report):
    """Pacemaker-chain experiment: per-position sync error vs. the master."""
    if seed is None:
        seed = int(os.environ.get(ENV_SEED, "0"))
    slave = AgentParams(
        id=0, preferred_period_ms=period, gain_other=gain_other,
        gain_self=gain_self, jitter_sigma_ms=jitter, reaction_latency_ms=latency,
    )
    kwargs = dict(
        n_agents=n_agents, trials=trials, cycles_per_trial=cycles,
        slave_template=slave, master_period_ms=period, seed=seed,
        warmup_cycles=warmup,
    )
    if mode == "both":
        tables = list(experiments.compare_modes(**kwargs))
    else:
        tables = [experiments.chain_experiment(mode=mode.replace("-", "_"), **kwargs)]
    for t in tables:
        click.echo(str(t))
        click.echo("")
    try:
        if out:
            Path(out).write_text(experiments.combined_csv(tables))
            click.echo(f"table -> {out}")
        if report:
            doc = experiments.provenance_report(tables, tick_ms=1.0, **kwargs)
            Path(report).write_text(json.dumps(doc, indent=2) + "\n")
            click.echo(f"report -> {report}")
    except OSError as e:
        click.echo(f"write failed: {e}", err=True)
        sys.exit(2)


@main.command("render")
@click.argument("config_path", type=click.Path())
@click.option("--out", "-o", default="out.wav", show_default=True)
@click.option("--events", "events_path", type=click.Path(), default=None,
              help="Render an existing events.csv instead of simulating.")
@click.option("--sample-rate", default=44100, show_default=True)
@click.option("--seed", type=int, default=None)
def cli_render(config_path, out, events_path, sample_rate, seed):
    """Render a run of CONFIG_PATH (or an existing event log) to WAV."""
    params, topo, sim = _load_validated(config_path, seed)
    if events_path:
        try:
            log = engine.EventLog.from_csv(Path(events_path).read_text())
        except OSError as e:
            click.echo(f"cannot read events: {e}", err=True)
            sys.exit(2)
    else:
        log, _ = engine.run(params, topo, sim)
    try:
        buf = render(log, params, sample_rate_hz=sample_rate)
    except ValueError as e:
        click.echo(f"render failed: {e}", err=True)
        sys.exit(1)
    try:
        write_wav(buf, out, sample_rate_hz=sample_rate)
    except OSError as e:
        click.echo(f"write failed: {e}", err=True)
        sys.exit(2)
    click.echo(f"{len(log)} onsets -> {out} ({len(buf) / sample_rate:.2f} s)")


@main.command("serve")
@click.argument("config_path", type=click.Path())
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", type=int, default=None,
              help=f"Default 8000 (also {ENV_PORT}).")
@click.option("--seed", type=int, default=None)
def cli_serve(config_path, host, port, seed):
    """Serve the live simulation (WebSocket protocol + REST) for the dashboard."""
    import uvicorn

    from vocalsync.service import create_app

    params, topo, sim = _load_validated(config_path, seed)
    if port is None:
        port = int(os.environ.get(ENV_PORT, "8000"))
    app = create_app(params, topo, sim)
    uvicorn.run(app, host=host, port=port, log_level="info")


if __name__ == "__main__":
    main()
