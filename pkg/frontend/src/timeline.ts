// Scrolling canvas chart of the population order parameter (0..1).

import { TimelinePoint } from "./state.js";

export class SynchronyTimeline {
  private ctx: CanvasRenderingContext2D;

  constructor(private canvas: HTMLCanvasElement, private windowMs = 20000) {
    this.ctx = canvas.getContext("2d")!;
  }

  draw(points: TimelinePoint[]): void {
    const { width: w, height: h } = this.canvas;
    const g = this.ctx;
    g.clearRect(0, 0, w, h);
    g.strokeStyle = "#2a2f3a";
    g.lineWidth = 1;
    for (const frac of [0, 0.5, 1]) {
      const y = h - frac * (h - 8) - 4;
      g.beginPath();
      g.moveTo(0, y);
      g.lineTo(w, y);
      g.stroke();
    }
    if (!points.length) return;
    const tEnd = points[points.length - 1].time_ms;
    const tStart = tEnd - this.windowMs;
    g.strokeStyle = "#4fd1c5";
    g.lineWidth = 2;
    g.beginPath();
    let started = false;
    for (const p of points) {
      if (p.time_ms < tStart) continue;
      const x = ((p.time_ms - tStart) / this.windowMs) * w;
      const y = h - p.order_parameter * (h - 8) - 4;
      if (!started) {
        g.moveTo(x, y);
        started = true;
      } else {
        g.lineTo(x, y);
      }
    }
    g.stroke();
  }
}
