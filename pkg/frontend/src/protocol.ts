// Wire types for the live simulation protocol (JSON text frames over one
// WebSocket).  Server frames carry a monotonically increasing `seq`
// except `rejected`, which is a direct reply to the sender only.

export interface AgentConfig {
  id: number;
  preferred_period_ms: number;
  gain_other: number;
  gain_self: number;
  amplitude: number;
  mark_space_ratio: number;
  phase_offset: number;
  pitch_hz: number;
  voice_kind: "human" | "bird" | "insect";
  mode: "feedback" | "action_reaction";
  reaction_latency_ms: number;
  jitter_sigma_ms: number;
  hearing_threshold: number;
}

export interface SimSettings {
  tick_ms: number;
  duration_ms: number;
  seed: number;
  warmup_cycles: number;
  snapshot_every_ms: number;
}

export interface ConfigDoc {
  sim: SimSettings;
  agents: AgentConfig[];
  edges: [number, number][]; // [listener, source]
}

export interface HelloFrame {
  type: "hello";
  protocol: string;
  seq: number;
  config: ConfigDoc;
}

export interface AgentSnapshot {
  id: number;
  phase: number;
  current_period_ms: number;
  last_onset_time_ms: number | null;
}

export interface SnapshotFrame {
  type: "snapshot";
  seq: number;
  time_ms: number;
  order_parameter: number;
  agents: AgentSnapshot[];
}

export interface OnsetFrame {
  type: "onset";
  seq: number;
  time_ms: number;
  agent_id: number;
  amplitude: number;
  duration_ms: number;
}

export interface RejectedFrame {
  type: "rejected";
  reason: string;
}

export type ServerFrame = HelloFrame | SnapshotFrame | OnsetFrame | RejectedFrame;

export type Command =
  | { type: "set_param"; agent: number; field: string; value: number | string }
  | { type: "set_edge"; listener: number; source: number; on: boolean }
  | { type: "add_agent"; params: Partial<AgentConfig> }
  | { type: "remove_agent"; agent: number }
  | { type: "pause" }
  | { type: "resume" }
  | { type: "reset"; config: ConfigDoc }
  | { type: "reseed"; seed: number };

const SERVER_TYPES = new Set(["hello", "snapshot", "onset", "rejected"]);

export function parseFrame(raw: string): ServerFrame | null {
  let data: unknown;
  try {
    data = JSON.parse(raw);
  } catch {
    return null;
  }
  if (typeof data !== "object" || data === null) return null;
  const type = (data as { type?: unknown }).type;
  if (typeof type !== "string" || !SERVER_TYPES.has(type)) return null;
  return data as ServerFrame;
}

// Tracks broadcast seq continuity; `rejected` frames carry no seq and are
// ignored.  Returns the number of frames missed since the last one seen.
export class SeqTracker {
  private last: number | null = null;
  gaps = 0;
  missed = 0;

  observe(frame: ServerFrame): number {
    const seq = (frame as { seq?: unknown }).seq;
    if (typeof seq !== "number") return 0;
    let missedNow = 0;
    if (this.last !== null && seq > this.last + 1) {
      missedNow = seq - this.last - 1;
      this.gaps += 1;
      this.missed += missedNow;
    }
    if (this.last === null || seq > this.last) this.last = seq;
    return missedNow;
  }

  // A hello anchors the counter (connect or reset) without counting a gap.
  anchor(seq: number): void {
    this.last = seq;
  }

  reset(): void {
    this.last = null;
    this.gaps = 0;
    this.missed = 0;
  }
}
