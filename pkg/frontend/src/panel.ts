// Per-agent control panels: one slider per tunable parameter.  A slider
// release sends exactly one set_param command; a rejection reverts the
// control to the last value echoed by the server and surfaces the reason.

import { clampParam, PARAM_BOUNDS } from "./bounds.js";
import { AgentConfig, Command } from "./protocol.js";

const SLIDER_FIELDS = [
  "gain_other",
  "gain_self",
  "preferred_period_ms",
  "amplitude",
  "mark_space_ratio",
] as const;

export class AgentPanels {
  private inputs = new Map<string, HTMLInputElement>();

  constructor(
    private root: HTMLElement,
    private send: (cmd: Command) => boolean,
  ) {}

  render(agents: AgentConfig[]): void {
    this.root.textContent = "";
    this.inputs.clear();
    for (const agent of agents) {
      const card = document.createElement("div");
      card.className = "agent-card";
      const title = document.createElement("h3");
      title.textContent = `agent ${agent.id} (${agent.voice_kind}, ${agent.mode})`;
      card.appendChild(title);
      for (const field of SLIDER_FIELDS) {
        card.appendChild(this.sliderRow(agent, field));
      }
      this.root.appendChild(card);
    }
  }

  private sliderRow(agent: AgentConfig, field: string): HTMLElement {
    const bound = PARAM_BOUNDS[field];
    const row = document.createElement("label");
    row.className = "slider-row";
    const name = document.createElement("span");
    name.textContent = field;
    const value = document.createElement("span");
    value.className = "value";
    const input = document.createElement("input");
    input.type = "range";
    input.min = String(bound.min);
    input.max = String(bound.max);
    input.step = String(bound.step);
    const current = (agent as unknown as Record<string, number>)[field];
    input.value = String(current);
    value.textContent = Number(current).toFixed(2);
    input.addEventListener("input", () => {
      value.textContent = Number(input.value).toFixed(2);
    });
    input.addEventListener("change", () => {
      const v = clampParam(field, Number(input.value));
      input.value = String(v);
      value.textContent = v.toFixed(2);
      input.dataset.lastSent = String(v);
      this.send({ type: "set_param", agent: agent.id, field, value: v });
    });
    this.inputs.set(`${agent.id}:${field}`, input);
    row.append(name, input, value);
    return row;
  }

  // Called when the server rejects a command: revert controls to the
  // authoritative config values.
  revert(agents: AgentConfig[]): void {
    for (const agent of agents) {
      for (const field of SLIDER_FIELDS) {
        const input = this.inputs.get(`${agent.id}:${field}`);
        if (!input) continue;
        const v = (agent as unknown as Record<string, number>)[field];
        input.value = String(v);
        const label = input.parentElement?.querySelector(".value");
        if (label) label.textContent = Number(v).toFixed(2);
      }
    }
  }
}
