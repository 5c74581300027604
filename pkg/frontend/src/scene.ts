/** Build a drawable scene from a graph window plus submodule metadata.
 *
 * Mirrors the service's color rules: a gate is filled with the color of the
 * deepest submodule it belongs to (smallest id wins depth ties), and carries
 * one small colored square per membership so overlapping groupings stay
 * visible.
 */

import { GraphWindow, StaleWindowError, Submodule } from "./types.js";
import { layoutWindow, Point } from "./layout.js";

export const NEUTRAL_FILL = "#d9d9d9";

export interface SceneNode {
  id: number;
  name: string;
  type: string;
  x: number;
  y: number;
  fill: string;
  squares: { submodule: number; color: string }[];
  selected: boolean;
}

export interface Scene {
  center: number;
  nodes: SceneNode[];
  edges: { from: Point; to: Point; fromId: number; toId: number }[];
}

export function cssColor(rgb: [number, number, number]): string {
  const [r, g, b] = rgb;
  return `#${((1 << 24) | (r << 16) | (g << 8) | b).toString(16).slice(1)}`;
}

export function submoduleDepth(sub: Submodule, byId: Map<number, Submodule>): number {
  let depth = 0;
  let parent = sub.parent;
  const seen = new Set<number>();
  while (parent !== null && !seen.has(parent)) {
    seen.add(parent);
    depth += 1;
    parent = byId.get(parent)?.parent ?? null;
  }
  return depth;
}

export function effectiveFill(
  memberships: Submodule[],
  byId: Map<number, Submodule>,
): string {
  if (memberships.length === 0) return NEUTRAL_FILL;
  let best = memberships[0];
  let bestDepth = submoduleDepth(best, byId);
  for (const sub of memberships.slice(1)) {
    const depth = submoduleDepth(sub, byId);
    if (depth > bestDepth || (depth === bestDepth && sub.id < best.id)) {
      best = sub;
      bestDepth = depth;
    }
  }
  return cssColor(best.color);
}

export function buildScene(
  window: GraphWindow,
  submodules: Submodule[],
  selection: Set<number>,
  layoutSeed = 1,
): Scene {
  const windowIds = new Set(window.nodes.map((n) => n.id));
  const missing = [...selection].filter((id) => !windowIds.has(id));
  if (missing.length > 0) {
    throw new StaleWindowError(missing);
  }
  const byId = new Map(submodules.map((s) => [s.id, s]));
  const positions = layoutWindow(window, { seed: layoutSeed });
  const nodes: SceneNode[] = window.nodes.map((node) => {
    const memberships = submodules
      .filter((s) => s.gates.includes(node.id))
      .sort((a, b) => a.id - b.id);
    const point = positions.get(node.id)!;
    return {
      id: node.id,
      name: node.name,
      type: node.type,
      x: point.x,
      y: point.y,
      fill: effectiveFill(memberships, byId),
      squares: memberships.map((s) => ({ submodule: s.id, color: cssColor(s.color) })),
      selected: selection.has(node.id),
    };
  });
  const edges = window.edges
    .filter(([u, v]) => windowIds.has(u) && windowIds.has(v))
    .map(([u, v]) => ({
      from: positions.get(u)!,
      to: positions.get(v)!,
      fromId: u,
      toId: v,
    }));
  return { center: window.center, nodes, edges };
}
