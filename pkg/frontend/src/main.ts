import { LiveClient, defaultWsUrl } from "./client.js";
import { DashboardState } from "./state.js";
import { SynchronyTimeline } from "./timeline.js";
import { BeatRaster } from "./raster.js";
import { AgentPanels } from "./panel.js";
import { TopologyEditor } from "./topology.js";
import { PRESETS, edgeDiff } from "./presets.js";
import { Command } from "./protocol.js";

function el<T extends HTMLElement>(id: string): T {
  return document.getElementById(id) as T;
}

const state = new DashboardState();
const statusEl = el<HTMLSpanElement>("status");
const gapEl = el<HTMLSpanElement>("gaps");
const noticeEl = el<HTMLDivElement>("notice");
const timeEl = el<HTMLSpanElement>("sim-time");

function notify(text: string): void {
  noticeEl.textContent = text;
}

const client = new LiveClient({
  url: defaultWsUrl(window.location),
  onFrame: (frame) => {
    state.apply(frame);
    if (frame.type === "hello") {
      panels.render(state.agents);
      redrawTopology();
    } else if (frame.type === "rejected") {
      notify(`rejected: ${frame.reason}`);
      panels.revert(state.agents);
    }
  },
  onStatus: (connected) => {
    state.connected = connected;
    statusEl.textContent = connected ? "live" : "stale";
    statusEl.className = connected ? "ok" : "stale";
  },
});

const send = (cmd: Command): boolean => {
  const ok = client.send(cmd);
  if (!ok) notify("not connected; command dropped");
  else if (cmd.type === "set_param") {
    state.applyParamLocal(cmd.agent, cmd.field, cmd.value);
  }
  return ok;
};

const panels = new AgentPanels(el("agents"), send);
const timeline = new SynchronyTimeline(el<HTMLCanvasElement>("timeline"));
const raster = new BeatRaster(el<HTMLCanvasElement>("raster"));
const topo = new TopologyEditor(
  el("topology") as unknown as SVGSVGElement, send, notify);
topo.onLocalToggle = (listener, source, on) => {
  state.applyEdgeLocal(listener, source, on);
  redrawTopology();
};

function redrawTopology(): void {
  topo.render(state.agents.map((a) => a.id), state.edges);
}

for (const name of Object.keys(PRESETS)) {
  el<HTMLButtonElement>(`preset-${name}`).addEventListener("click", () => {
    const ids = state.agents.map((a) => a.id);
    for (const op of edgeDiff(state.edges, PRESETS[name](ids))) {
      send({ type: "set_edge", ...op });
      state.applyEdgeLocal(op.listener, op.source, op.on);
    }
    redrawTopology();
    notify(`applied ${name} preset`);
  });
}

el<HTMLButtonElement>("pause").addEventListener("click", () => send({ type: "pause" }));
el<HTMLButtonElement>("resume").addEventListener("click", () => send({ type: "resume" }));
el<HTMLButtonElement>("reseed").addEventListener("click", () => {
  send({ type: "reseed", seed: Math.floor(Math.random() * 2 ** 32) });
});

function frame(): void {
  timeline.draw(state.timeline);
  const now = state.latest?.time_ms ?? 0;
  raster.draw(state.agents.map((a) => a.id),
    state.onsetsInWindow(now, 20000), now);
  gapEl.textContent = state.gapCount ? `gaps: ${state.gapCount}` : "";
  timeEl.textContent = state.latest
    ? `${(state.latest.time_ms / 1000).toFixed(1)} s  R=${state.latest.order_parameter.toFixed(2)}`
    : "";
  requestAnimationFrame(frame);
}

client.connect();
requestAnimationFrame(frame);
