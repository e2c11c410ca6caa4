import { describe, expect, it } from "vitest";

import { DashboardState } from "../src/state.js";
import { ConfigDoc, ServerFrame } from "../src/protocol.js";

const config: ConfigDoc = {
  sim: { tick_ms: 1, duration_ms: 1e9, seed: 0, warmup_cycles: 20, snapshot_every_ms: 50 },
  agents: [
    { id: 0, preferred_period_ms: 500, gain_other: 1, gain_self: 0.1, amplitude: 0.8,
      mark_space_ratio: 0.2, phase_offset: 0, pitch_hz: 150, voice_kind: "human",
      mode: "feedback", reaction_latency_ms: 23.8, jitter_sigma_ms: 3, hearing_threshold: 0 },
    { id: 1, preferred_period_ms: 500, gain_other: 1, gain_self: 0.1, amplitude: 0.8,
      mark_space_ratio: 0.2, phase_offset: 0, pitch_hz: 150, voice_kind: "bird",
      mode: "feedback", reaction_latency_ms: 23.8, jitter_sigma_ms: 3, hearing_threshold: 0 },
  ],
  edges: [[1, 0]],
};

const hello: ServerFrame = { type: "hello", protocol: "1", seq: 5, config };

function snapshotAt(seq: number, t: number): ServerFrame {
  return { type: "snapshot", seq, time_ms: t, order_parameter: 0.5, agents: [] };
}

describe("DashboardState", () => {
  it("hello installs the config and anchors seq", () => {
    const s = new DashboardState();
    s.apply(hello);
    expect(s.agents.length).toBe(2);
    expect(s.edges).toEqual([[1, 0]]);
    s.apply(snapshotAt(6, 50));
    expect(s.gapCount).toBe(0);
  });

  it("a reset hello clears accumulated charts", () => {
    const s = new DashboardState();
    s.apply(hello);
    s.apply(snapshotAt(6, 50));
    s.apply({ type: "onset", seq: 7, time_ms: 60, agent_id: 0, amplitude: 0.8, duration_ms: 100 });
    expect(s.timeline.length).toBe(1);
    expect(s.onsets.length).toBe(1);
    s.apply({ type: "hello", protocol: "1", seq: 8, config });
    expect(s.timeline.length).toBe(0);
    expect(s.onsets.length).toBe(0);
  });

  it("detects seq gaps", () => {
    const s = new DashboardState();
    s.apply(hello);
    s.apply(snapshotAt(6, 50));
    s.apply(snapshotAt(9, 200));
    expect(s.gapCount).toBe(1);
  });

  it("keeps bounded chart buffers", () => {
    const s = new DashboardState();
    s.apply(hello);
    for (let i = 0; i < 5000; i++) s.apply(snapshotAt(6 + i, 50 * i));
    expect(s.timeline.length).toBeLessThanOrEqual(600);
  });

  it("collects rejections without touching sim state", () => {
    const s = new DashboardState();
    s.apply(hello);
    const before = JSON.stringify(s.config);
    s.apply({ type: "rejected", reason: "gain_other out of [0, 4]" });
    expect(s.lastRejection).toContain("gain_other");
    expect(s.rejectionCount).toBe(1);
    expect(JSON.stringify(s.config)).toBe(before);
  });

  it("windows the raster marks by time", () => {
    const s = new DashboardState();
    s.apply(hello);
    for (let i = 0; i < 10; i++) {
      s.apply({ type: "onset", seq: 6 + i, time_ms: 100 * i, agent_id: i % 2,
                amplitude: 0.8, duration_ms: 50 });
    }
    const marks = s.onsetsInWindow(900, 300);
    expect(marks.map((m) => m.time_ms)).toEqual([600, 700, 800, 900]);
  });

  it("mirrors local edge toggles until the next hello", () => {
    const s = new DashboardState();
    s.apply(hello);
    s.applyEdgeLocal(0, 1, true);
    expect(s.edges).toContainEqual([0, 1]);
    s.applyEdgeLocal(1, 0, false);
    expect(s.edges).not.toContainEqual([1, 0]);
  });
});
