// Dashboard store: a pure reduction of the frame stream.  The dashboard
// keeps no simulation state of its own — everything shown is rebuilt from
// hello/snapshot/onset frames, so closing and reopening the page never
// changes engine behavior.

import {
  AgentConfig,
  ConfigDoc,
  ServerFrame,
  SeqTracker,
  SnapshotFrame,
} from "./protocol.js";

export interface OnsetMark {
  time_ms: number;
  agent_id: number;
}

export interface TimelinePoint {
  time_ms: number;
  order_parameter: number;
}

const TIMELINE_CAPACITY = 600; // ~30 s at the default 20 Hz snapshot rate
const RASTER_CAPACITY = 4000;

export class DashboardState {
  config: ConfigDoc | null = null;
  latest: SnapshotFrame | null = null;
  timeline: TimelinePoint[] = [];
  onsets: OnsetMark[] = [];
  seq = new SeqTracker();
  connected = false;
  lastRejection: string | null = null;
  rejectionCount = 0;

  get agents(): AgentConfig[] {
    return this.config?.agents ?? [];
  }

  get edges(): [number, number][] {
    return this.config?.edges ?? [];
  }

  get gapCount(): number {
    return this.seq.gaps;
  }

  apply(frame: ServerFrame): void {
    switch (frame.type) {
      case "hello":
        // Connect or reset: rebuild everything from the config echo.
        this.config = frame.config;
        this.seq.anchor(frame.seq);
        this.latest = null;
        this.timeline = [];
        this.onsets = [];
        break;
      case "snapshot":
        this.seq.observe(frame);
        this.latest = frame;
        this.timeline.push({
          time_ms: frame.time_ms,
          order_parameter: frame.order_parameter,
        });
        if (this.timeline.length > TIMELINE_CAPACITY) {
          this.timeline.splice(0, this.timeline.length - TIMELINE_CAPACITY);
        }
        break;
      case "onset":
        this.seq.observe(frame);
        this.onsets.push({ time_ms: frame.time_ms, agent_id: frame.agent_id });
        if (this.onsets.length > RASTER_CAPACITY) {
          this.onsets.splice(0, this.onsets.length - RASTER_CAPACITY);
        }
        break;
      case "rejected":
        this.lastRejection = frame.reason;
        this.rejectionCount += 1;
        break;
    }
  }

  // Mirror a local edge toggle so the view tracks commands we just sent;
  // the next hello (on reset) remains authoritative.
  applyEdgeLocal(listener: number, source: number, on: boolean): void {
    if (!this.config) return;
    const without = this.config.edges.filter(
      ([l, s]) => !(l === listener && s === source),
    );
    this.config.edges = on ? [...without, [listener, source]] : without;
  }

  applyParamLocal(agent: number, field: string, value: number | string): void {
    const a = this.config?.agents.find((x) => x.id === agent);
    if (a) (a as unknown as Record<string, number | string>)[field] = value;
  }

  onsetsInWindow(now_ms: number, window_ms: number): OnsetMark[] {
    const cutoff = now_ms - window_ms;
    return this.onsets.filter((o) => o.time_ms >= cutoff && o.time_ms <= now_ms);
  }
}
