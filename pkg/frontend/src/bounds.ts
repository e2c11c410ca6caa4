// Slider bounds mirror the server's validation; typed values are clamped
// client-side before a command is sent, so in-range gestures are never
// rejected for bounds.

export interface Bound {
  min: number;
  max: number;
  step: number;
  maxExclusive?: boolean;
}

export const PARAM_BOUNDS: Record<string, Bound> = {
  preferred_period_ms: { min: 10, max: 10000, step: 1 },
  gain_other: { min: 0, max: 4, step: 0.01 },
  gain_self: { min: 0, max: 1, step: 0.01 },
  amplitude: { min: 0, max: 1, step: 0.01 },
  mark_space_ratio: { min: 0, max: 1, step: 0.01 },
  phase_offset: { min: 0, max: 1, step: 0.01, maxExclusive: true },
  jitter_sigma_ms: { min: 0, max: 50, step: 0.1 },
  reaction_latency_ms: { min: 0, max: 1000, step: 0.1 },
  hearing_threshold: { min: 0, max: 1, step: 0.01 },
};

export function clampParam(field: string, value: number): number {
  const b = PARAM_BOUNDS[field];
  if (!b || !Number.isFinite(value)) return b ? b.min : 0;
  let v = Math.min(Math.max(value, b.min), b.max);
  if (b.maxExclusive && v >= b.max) v = b.max - b.step;
  return v;
}
