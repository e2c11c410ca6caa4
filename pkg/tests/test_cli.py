import json

import pytest
from click.testing import CliRunner

from vocalsync.cli import main
from vocalsync.model import SimConfig, AgentParams, config_to_dict
from vocalsync.topology import build_ring


@pytest.fixture
def runner():
    return CliRunner()


@pytest.fixture
def ring_config(tmp_path):
    params = [AgentParams(id=k) for k in range(8)]
    sim = SimConfig(duration_ms=4000.0, seed=3)
    doc = config_to_dict(params, build_ring(8), sim)
    path = tmp_path / "ring8.json"
    path.write_text(json.dumps(doc))
    return path


def test_run_writes_three_files(runner, ring_config, tmp_path):
    out = tmp_path / "out"
    result = runner.invoke(main, ["run", str(ring_config), "--out-dir", str(out)])
    assert result.exit_code == 0, result.output
    for name in ("events.csv", "snapshots.jsonl", "summary.csv"):
        assert (out / name).exists()
    header = (out / "events.csv").read_text().splitlines()[0]
    assert header == "time_ms,agent_id,amplitude,duration_ms"
    assert (out / "summary.csv").read_text().splitlines()[0] == \
        "position,mode,mean_error_ms,std_error_ms,n_onsets,trials"


def test_run_rejects_invalid_config(runner, tmp_path):
    doc = {"agents": [{"id": 0, "gain_other": 5.0}], "edges": []}
    path = tmp_path / "bad.json"
    path.write_text(json.dumps(doc))
    result = runner.invoke(main, ["run", str(path), "--out-dir", str(tmp_path / "o")])
    assert result.exit_code == 1
    assert "agent 0" in result.output and "gain_other" in result.output


def test_run_seed_override_is_deterministic(runner, ring_config, tmp_path):
    outs = []
    for sub in ("a", "b"):
        out = tmp_path / sub
        result = runner.invoke(
            main, ["run", str(ring_config), "--out-dir", str(out), "--seed", "7"])
        assert result.exit_code == 0
        outs.append((out / "events.csv").read_bytes())
    assert outs[0] == outs[1]
    out = tmp_path / "c"
    result = runner.invoke(
        main, ["run", str(ring_config), "--out-dir", str(out), "--seed", "8"])
    assert result.exit_code == 0
    assert (out / "events.csv").read_bytes() != outs[0]


def test_experiment_action_reaction_table(runner, tmp_path):
    csv_path = tmp_path / "table.csv"
    result = runner.invoke(main, [
        "experiment", "--n", "8", "--mode", "action-reaction",
        "--jitter", "0", "--latency", "23.8", "--trials", "2", "--cycles", "40",
        "--out", str(csv_path),
    ])
    assert result.exit_code == 0, result.output
    lines = csv_path.read_text().strip().splitlines()
    assert len(lines) == 8  # header + positions 2..8
    means = [float(line.split(",")[2]) for line in lines[1:]]
    for k, m in enumerate(means, start=1):
        assert m == pytest.approx(-23.8 * k, abs=1e-6)


def test_experiment_two_agent_feedback(runner):
    result = runner.invoke(main, [
        "experiment", "--n", "2", "--mode", "feedback", "--jitter", "0",
        "--trials", "1", "--cycles", "60",
    ])
    assert result.exit_code == 0
    row = [line for line in result.output.splitlines() if line.strip().startswith("2")][0]
    mean = float(row.split()[2])
    assert abs(mean) < 1.0


def test_experiment_rejects_zero_trials(runner):
    result = runner.invoke(main, ["experiment", "--trials", "0"])
    assert result.exit_code != 0
    assert "trials" in result.output.lower()


def test_render_writes_wav(runner, tmp_path):
    params = [AgentParams(id=0, voice_kind="bird")]
    doc = config_to_dict(params, __import__("vocalsync.model", fromlist=["Topology"]).Topology(1, {}),
                         SimConfig(duration_ms=1500.0, seed=0))
    cfg = tmp_path / "solo.json"
    cfg.write_text(json.dumps(doc))
    wav = tmp_path / "solo.wav"
    result = runner.invoke(main, ["render", str(cfg), "-o", str(wav)])
    assert result.exit_code == 0, result.output
    data = wav.read_bytes()
    assert data[:4] == b"RIFF" and data[8:12] == b"WAVE"


def test_render_from_existing_events(runner, ring_config, tmp_path):
    out = tmp_path / "out"
    assert runner.invoke(main, ["run", str(ring_config), "-o", str(out)]).exit_code == 0
    wav = tmp_path / "log.wav"
    result = runner.invoke(main, [
        "render", str(ring_config), "--events", str(out / "events.csv"),
        "-o", str(wav)])
    assert result.exit_code == 0, result.output
    assert wav.exists()


def test_env_seed_override(runner, ring_config, tmp_path, monkeypatch):
    monkeypatch.setenv("VOCALSYNC_SEED", "7")
    out_env = tmp_path / "env"
    assert runner.invoke(main, ["run", str(ring_config), "-o", str(out_env)]).exit_code == 0
    monkeypatch.delenv("VOCALSYNC_SEED")
    out_flag = tmp_path / "flag"
    assert runner.invoke(
        main, ["run", str(ring_config), "-o", str(out_flag), "--seed", "7"]).exit_code == 0
    assert (out_env / "events.csv").read_bytes() == (out_flag / "events.csv").read_bytes()
