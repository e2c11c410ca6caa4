import json
import time

import pytest
from fastapi.testclient import TestClient

from vocalsync.model import AgentParams, SimConfig, config_to_dict
from vocalsync.service import create_app
from vocalsync.topology import build_chain


def make_app(n=2, period=200.0, snapshot_every=20.0, jitter=0.0):
    params = [AgentParams(id=0, preferred_period_ms=period, jitter_sigma_ms=0.0)]
    for k in range(1, n):
        params.append(AgentParams(
            id=k, preferred_period_ms=period, jitter_sigma_ms=jitter))
    sim = SimConfig(duration_ms=1e9, seed=4, snapshot_every_ms=snapshot_every)
    return create_app(params, build_chain(n) if n > 1 else
                      __import__("vocalsync.model", fromlist=["Topology"]).Topology(1, {}),
                      sim)


def recv_until(ws, kind, limit=400):
    for _ in range(limit):
        frame = json.loads(ws.receive_text())
        if frame["type"] == kind:
            return frame
    raise AssertionError(f"no {kind} frame within {limit} messages")


def collect(ws, kind, count, limit=600):
    out = []
    for _ in range(limit):
        frame = json.loads(ws.receive_text())
        if frame["type"] == kind:
            out.append(frame)
            if len(out) == count:
                return out
    raise AssertionError(f"only {len(out)} {kind} frames within {limit} messages")


def test_health_and_state():
    with TestClient(make_app()) as client:
        assert client.get("/health").json() == {"status": "ok"}
        state = client.get("/state").json()
        assert state["n_agents"] == 2
        assert not state["paused"]


def test_validate_endpoint():
    with TestClient(make_app()) as client:
        good = config_to_dict([AgentParams(id=0)],
                              __import__("vocalsync.model", fromlist=["Topology"]).Topology(1, {}),
                              SimConfig())
        res = client.post("/validate", json=good).json()
        assert res["valid"] and res["violations"] == []
        good["agents"][0]["gain_other"] = 5.0
        res = client.post("/validate", json=good).json()
        assert not res["valid"]
        assert any("gain_other" in v for v in res["violations"])


def test_experiment_endpoint():
    with TestClient(make_app()) as client:
        req = {"mode": "action_reaction", "trials": 1, "cycles_per_trial": 30,
               "n_agents": 4, "jitter_sigma_ms": 0.0}
        rows = client.post("/experiment", json=req).json()["rows"]
        assert [r["position"] for r in rows] == [2, 3, 4]
        assert rows[0]["mean_error_ms"] == pytest.approx(-23.8, abs=1e-6)


def test_run_endpoint_and_rejection():
    with TestClient(make_app()) as client:
        doc = config_to_dict([AgentParams(id=0, jitter_sigma_ms=0.0)],
                             __import__("vocalsync.model", fromlist=["Topology"]).Topology(1, {}),
                             SimConfig(duration_ms=2000.0))
        res = client.post("/run", json={"config": doc, "include_events": True}).json()
        assert res["n_onsets"] == 4
        assert [e["time_ms"] for e in res["events"]] == [500.0, 1000.0, 1500.0, 2000.0]
        doc["agents"][0]["gain_other"] = 9.0
        assert client.post("/run", json={"config": doc}).status_code == 422


def test_hello_then_snapshots_with_contiguous_seq():
    with TestClient(make_app()) as client:
        with client.websocket_connect("/ws") as ws:
            hello = json.loads(ws.receive_text())
            assert hello["type"] == "hello"
            assert hello["protocol"] == "1"
            assert len(hello["config"]["agents"]) == 2
            frames = [json.loads(ws.receive_text()) for _ in range(30)]
            seqs = [f["seq"] for f in frames]
            assert seqs == list(range(hello["seq"] + 1, hello["seq"] + 31))
            kinds = {f["type"] for f in frames}
            assert "snapshot" in kinds and "onset" in kinds


def test_set_param_rejection_only_to_sender():
    with TestClient(make_app()) as client:
        with client.websocket_connect("/ws") as ws:
            json.loads(ws.receive_text())
            ws.send_text(json.dumps({
                "type": "set_param", "agent": 1, "field": "gain_other", "value": 9.9}))
            frame = recv_until(ws, "rejected")
            assert "gain_other" in frame["reason"]
            assert "seq" not in frame


def test_malformed_frame_rejected():
    with TestClient(make_app()) as client:
        with client.websocket_connect("/ws") as ws:
            json.loads(ws.receive_text())
            ws.send_text("this is not json")
            frame = recv_until(ws, "rejected")
            assert "malformed" in frame["reason"]
            ws.send_text("[1,2,3]")
            frame = recv_until(ws, "rejected")
            assert "malformed" in frame["reason"]


def test_reset_rebroadcasts_hello():
    with TestClient(make_app()) as client:
        with client.websocket_connect("/ws") as ws:
            json.loads(ws.receive_text())
            doc = config_to_dict(
                [AgentParams(id=0), AgentParams(id=1), AgentParams(id=2)],
                build_chain(3), SimConfig(duration_ms=1e9, snapshot_every_ms=20.0))
            ws.send_text(json.dumps({"type": "reset", "config": doc}))
            hello = recv_until(ws, "hello")
            assert len(hello["config"]["agents"]) == 3


def test_pause_and_resume():
    with TestClient(make_app()) as client:
        with client.websocket_connect("/ws") as ws:
            json.loads(ws.receive_text())
            ws.send_text(json.dumps({"type": "pause"}))
            time.sleep(0.15)
            t1 = client.get("/state").json()["time_ms"]
            time.sleep(0.15)
            t2 = client.get("/state").json()["time_ms"]
            assert t1 == t2
            ws.send_text(json.dumps({"type": "resume"}))
            time.sleep(0.2)
            assert client.get("/state").json()["time_ms"] > t2


def test_add_remove_agent_over_protocol():
    with TestClient(make_app(n=2)) as client:
        with client.websocket_connect("/ws") as ws:
            hello = json.loads(ws.receive_text())
            assert [a["id"] for a in hello["config"]["agents"]] == [0, 1]
            ws.send_text(json.dumps({
                "type": "add_agent",
                "params": {"id": 2, "preferred_period_ms": 300.0},
            }))
            for _ in range(200):
                f = json.loads(ws.receive_text())
                if f["type"] == "snapshot" and len(f["agents"]) == 3:
                    assert [a["id"] for a in f["agents"]] == [0, 1, 2]
                    break
            else:
                raise AssertionError("agent 2 never appeared in snapshots")
            ws.send_text(json.dumps({"type": "remove_agent", "agent": 2}))
            for _ in range(200):
                f = json.loads(ws.receive_text())
                if f["type"] == "snapshot" and len(f["agents"]) == 2:
                    break
            else:
                raise AssertionError("agent 2 never left the snapshots")
            # duplicate id is rejected
            ws.send_text(json.dumps({"type": "add_agent", "params": {"id": 0}}))
            frame = recv_until(ws, "rejected")
            assert "already exists" in frame["reason"]


def test_reseed_over_protocol():
    with TestClient(make_app(n=2, jitter=2.0)) as client:
        with client.websocket_connect("/ws") as ws:
            json.loads(ws.receive_text())
            ws.send_text(json.dumps({"type": "reseed", "seed": 2**63}))
            # bad seed is rejected, good one silently applies
            ws.send_text(json.dumps({"type": "reseed", "seed": -1}))
            frame = recv_until(ws, "rejected")
            assert "seed" in frame["reason"]


def test_live_buffers_stay_bounded():
    # The owner loop trims world history once broadcast, so an unattended
    # long-running session cannot grow without bound.
    from vocalsync.service import LiveSim
    from vocalsync.model import Topology

    params = [AgentParams(id=0, preferred_period_ms=200.0, jitter_sigma_ms=0.0)]
    sim = SimConfig(duration_ms=1e9, seed=0, snapshot_every_ms=20.0)
    live = LiveSim(params, Topology(1, {}), sim)
    for _ in range(40):
        live.world.step(5000)
        live._flush_world_output()
    assert len(live.world.events) < 5000
    assert len(live.world.snapshots) < 5000
    assert live.seq > 10000  # everything was still broadcast exactly once


def test_two_clients_see_identical_sequences():
    with TestClient(make_app()) as client:
        with client.websocket_connect("/ws") as ws1, \
                client.websocket_connect("/ws") as ws2:
            json.loads(ws1.receive_text())
            json.loads(ws2.receive_text())
            s1 = collect(ws1, "snapshot", 6)
            s2 = collect(ws2, "snapshot", 6)
            by_seq1 = {f["seq"]: f for f in s1}
            by_seq2 = {f["seq"]: f for f in s2}
            shared = sorted(set(by_seq1) & set(by_seq2))
            assert len(shared) >= 4
            for seq in shared:
                assert by_seq1[seq] == by_seq2[seq]


def test_protocol_round_trip_gain_other_zero():
    # A scripted client releases one agent from the other-loop and watches,
    # within ten snapshots, its period hold its preferred rhythm while its
    # onset intervals detach from the upstream rhythm.
    params = [
        AgentParams(id=0, preferred_period_ms=240.0, jitter_sigma_ms=0.0),
        AgentParams(id=1, preferred_period_ms=200.0, gain_other=1.0,
                    gain_self=1.0, jitter_sigma_ms=0.0),
    ]
    sim = SimConfig(duration_ms=1e9, seed=0, snapshot_every_ms=20.0)
    app = create_app(params, build_chain(2), sim)
    with TestClient(app) as client:
        with client.websocket_connect("/ws") as ws:
            json.loads(ws.receive_text())
            # entrained to the slower master first
            collect(ws, "snapshot", 10)
            ws.send_text(json.dumps({
                "type": "set_param", "agent": 1, "field": "gain_other", "value": 0.0}))
            snaps = collect(ws, "snapshot", 10)
            periods = [a["current_period_ms"] for s in snaps for a in s["agents"]
                       if a["id"] == 1]
            assert periods[-1] == pytest.approx(200.0, abs=1.0)
            deltas = [abs(p - 200.0) for p in periods]
            assert deltas[-1] <= deltas[0] + 1e-9
            # onset spacing returns to the preferred period
            onsets = collect(ws, "onset", 12)
            own = [f["time_ms"] for f in onsets if f["agent_id"] == 1]
            gaps = [b - a for a, b in zip(own, own[1:])]
            assert gaps and all(g == pytest.approx(200.0, abs=1.0) for g in gaps)
