// Beat raster: one row per agent, one tick per onset; vertical bunching
// of ticks across rows is the visual signature of synchrony.

import { OnsetMark } from "./state.js";

const ROW_COLORS = [
  "#4fd1c5", "#f6ad55", "#fc8181", "#63b3ed",
  "#b794f4", "#68d391", "#f687b3", "#ecc94b",
];

export class BeatRaster {
  private ctx: CanvasRenderingContext2D;

  constructor(private canvas: HTMLCanvasElement, private windowMs = 20000) {
    this.ctx = canvas.getContext("2d")!;
  }

  draw(agentIds: number[], marks: OnsetMark[], nowMs: number): void {
    const { width: w, height: h } = this.canvas;
    const g = this.ctx;
    g.clearRect(0, 0, w, h);
    if (!agentIds.length) return;
    const rowH = h / agentIds.length;
    const rowOf = new Map(agentIds.map((id, i) => [id, i]));
    g.font = "10px sans-serif";
    g.textBaseline = "middle";
    agentIds.forEach((id, i) => {
      g.strokeStyle = "#2a2f3a";
      g.beginPath();
      g.moveTo(0, (i + 1) * rowH);
      g.lineTo(w, (i + 1) * rowH);
      g.stroke();
      g.fillStyle = "#8b95a8";
      g.fillText(String(id), 4, i * rowH + rowH / 2);
    });
    const tStart = nowMs - this.windowMs;
    for (const m of marks) {
      const row = rowOf.get(m.agent_id);
      if (row === undefined || m.time_ms < tStart) continue;
      const x = ((m.time_ms - tStart) / this.windowMs) * w;
      g.strokeStyle = ROW_COLORS[row % ROW_COLORS.length];
      g.lineWidth = 2;
      g.beginPath();
      g.moveTo(x, row * rowH + 3);
      g.lineTo(x, (row + 1) * rowH - 3);
      g.stroke();
    }
  }
}
