// Topology presets matching the simulator's constructors.
// Edges are [listener, source] pairs.

export type Edge = [number, number];

export function chainEdges(ids: number[]): Edge[] {
  return ids.slice(1).map((id, i) => [id, ids[i]] as Edge);
}

export function ringEdges(ids: number[]): Edge[] {
  const n = ids.length;
  if (n < 2) return [];
  return ids.map((id, k) => [id, ids[(k - 1 + n) % n]] as Edge);
}

export function starEdges(ids: number[]): Edge[] {
  return ids.slice(1).map((id) => [id, ids[0]] as Edge);
}

export function completeEdges(ids: number[]): Edge[] {
  const out: Edge[] = [];
  for (const a of ids) for (const b of ids) if (a !== b) out.push([a, b]);
  return out;
}

export const PRESETS: Record<string, (ids: number[]) => Edge[]> = {
  chain: chainEdges,
  ring: ringEdges,
  star: starEdges,
  complete: completeEdges,
};

export function edgeKey([listener, source]: Edge): string {
  return `${listener}<-${source}`;
}

// Commands needed to morph the current edge set into the target one.
export function edgeDiff(
  current: Edge[],
  target: Edge[],
): { listener: number; source: number; on: boolean }[] {
  const have = new Set(current.map(edgeKey));
  const want = new Set(target.map(edgeKey));
  const ops: { listener: number; source: number; on: boolean }[] = [];
  for (const e of target) if (!have.has(edgeKey(e))) ops.push({ listener: e[0], source: e[1], on: true });
  for (const e of current) if (!want.has(edgeKey(e))) ops.push({ listener: e[0], source: e[1], on: false });
  return ops;
}
