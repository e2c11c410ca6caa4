// Node-and-arrow topology editor drawn as SVG.  Clicking node A then node
// B toggles the edge "B listens to A" with a single set_edge command;
// self-edges are refused locally (the server would reject them anyway).

import { Command } from "./protocol.js";
import { Edge } from "./presets.js";

const SVG_NS = "http://www.w3.org/2000/svg";

export class TopologyEditor {
  private pendingSource: number | null = null;
  onLocalToggle: ((listener: number, source: number, on: boolean) => void) | null = null;

  constructor(
    private svg: SVGSVGElement,
    private send: (cmd: Command) => boolean,
    private notify: (text: string) => void,
  ) {}

  render(agentIds: number[], edges: Edge[]): void {
    this.svg.textContent = "";
    const w = this.svg.viewBox.baseVal.width || 360;
    const h = this.svg.viewBox.baseVal.height || 360;
    const cx = w / 2;
    const cy = h / 2;
    const radius = Math.min(w, h) / 2 - 36;
    const pos = new Map<number, { x: number; y: number }>();
    agentIds.forEach((id, i) => {
      const angle = (2 * Math.PI * i) / agentIds.length - Math.PI / 2;
      pos.set(id, {
        x: cx + radius * Math.cos(angle),
        y: cy + radius * Math.sin(angle),
      });
    });

    const marker = document.createElementNS(SVG_NS, "marker");
    marker.setAttribute("id", "arrow");
    marker.setAttribute("markerWidth", "8");
    marker.setAttribute("markerHeight", "8");
    marker.setAttribute("refX", "7");
    marker.setAttribute("refY", "3");
    marker.setAttribute("orient", "auto");
    const tip = document.createElementNS(SVG_NS, "path");
    tip.setAttribute("d", "M0,0 L7,3 L0,6 z");
    tip.setAttribute("fill", "#8b95a8");
    marker.appendChild(tip);
    this.svg.appendChild(marker);

    // arrows point source -> listener ("listener hears source")
    for (const [listener, source] of edges) {
      const a = pos.get(source);
      const b = pos.get(listener);
      if (!a || !b) continue;
      const dx = b.x - a.x;
      const dy = b.y - a.y;
      const len = Math.hypot(dx, dy) || 1;
      const trim = 16 / len;
      const line = document.createElementNS(SVG_NS, "line");
      line.setAttribute("x1", String(a.x + dx * trim));
      line.setAttribute("y1", String(a.y + dy * trim));
      line.setAttribute("x2", String(b.x - dx * trim));
      line.setAttribute("y2", String(b.y - dy * trim));
      line.setAttribute("stroke", "#8b95a8");
      line.setAttribute("stroke-width", "1.5");
      line.setAttribute("marker-end", "url(#arrow)");
      this.svg.appendChild(line);
    }

    const edgeSet = new Set(edges.map(([l, s]) => `${l}<-${s}`));
    for (const id of agentIds) {
      const p = pos.get(id)!;
      const group = document.createElementNS(SVG_NS, "g");
      group.setAttribute("cursor", "pointer");
      const circle = document.createElementNS(SVG_NS, "circle");
      circle.setAttribute("cx", String(p.x));
      circle.setAttribute("cy", String(p.y));
      circle.setAttribute("r", "14");
      circle.setAttribute("fill", this.pendingSource === id ? "#f6ad55" : "#1f2733");
      circle.setAttribute("stroke", "#4fd1c5");
      const label = document.createElementNS(SVG_NS, "text");
      label.setAttribute("x", String(p.x));
      label.setAttribute("y", String(p.y + 4));
      label.setAttribute("text-anchor", "middle");
      label.setAttribute("fill", "#e7ecf3");
      label.setAttribute("font-size", "12");
      label.textContent = String(id);
      group.append(circle, label);
      group.addEventListener("click", () => this.clickNode(id, edgeSet));
      this.svg.appendChild(group);
    }
  }

  private clickNode(id: number, edgeSet: Set<string>): void {
    if (this.pendingSource === null) {
      this.pendingSource = id;
      this.notify(`source ${id} selected; click a listener to toggle the edge`);
      return;
    }
    const source = this.pendingSource;
    this.pendingSource = null;
    if (source === id) {
      this.notify("self-edge refused");
      return;
    }
    const on = !edgeSet.has(`${id}<-${source}`);
    this.send({ type: "set_edge", listener: id, source, on });
    this.onLocalToggle?.(id, source, on);
    this.notify(`${on ? "added" : "removed"} edge: ${id} listens to ${source}`);
  }
}
