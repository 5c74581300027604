/** Deterministic force-directed layout for one graph window.
 *
 * Same window, same seed, same positions: screenshots and tests reproduce.
 * A few dozen iterations of spring forces on a seeded initial placement is
 * plenty for windows of a few hundred nodes.
 */

import { GraphWindow } from "./types.js";

export interface Point {
  x: number;
  y: number;
}

/** mulberry32: tiny seeded PRNG, good enough for initial placement. */
export function mulberry32(seed: number): () => number {
  let a = seed >>> 0;
  return () => {
    a = (a + 0x6d2b79f5) >>> 0;
    let t = a;
    t = Math.imul(t ^ (t >>> 15), t | 1);
    t ^= t + Math.imul(t ^ (t >>> 7), t | 61);
    return ((t ^ (t >>> 14)) >>> 0) / 4294967296;
  };
}

export function layoutWindow(
  window: GraphWindow,
  options: { seed?: number; iterations?: number; size?: number } = {},
): Map<number, Point> {
  const { seed = 1, iterations = 60, size = 600 } = options;
  const ids = window.nodes.map((n) => n.id).sort((a, b) => a - b);
  const rand = mulberry32(seed);
  const pos = new Map<number, Point>();
  for (const id of ids) {
    pos.set(id, { x: rand() * size, y: rand() * size });
  }
  if (ids.length <= 1) return pos;

  const k = size / Math.sqrt(ids.length); // preferred edge length
  for (let step = 0; step < iterations; step++) {
    const disp = new Map<number, Point>(ids.map((id) => [id, { x: 0, y: 0 }]));
    // pairwise repulsion
    for (let i = 0; i < ids.length; i++) {
      for (let j = i + 1; j < ids.length; j++) {
        const a = pos.get(ids[i])!;
        const b = pos.get(ids[j])!;
        let dx = a.x - b.x;
        let dy = a.y - b.y;
        let d2 = dx * dx + dy * dy;
        if (d2 < 0.01) {
          dx = 0.1 * (i % 2 === 0 ? 1 : -1);
          dy = 0.1;
          d2 = dx * dx + dy * dy;
        }
        const force = (k * k) / d2;
        const da = disp.get(ids[i])!;
        const db = disp.get(ids[j])!;
        da.x += dx * force;
        da.y += dy * force;
        db.x -= dx * force;
        db.y -= dy * force;
      }
    }
    // spring attraction along edges
    for (const [u, v] of window.edges) {
      const a = pos.get(u);
      const b = pos.get(v);
      if (!a || !b) continue;
      const dx = a.x - b.x;
      const dy = a.y - b.y;
      const dist = Math.sqrt(dx * dx + dy * dy) || 0.1;
      const force = (dist * dist) / k / dist;
      const da = disp.get(u)!;
      const db = disp.get(v)!;
      da.x -= dx * force;
      da.y -= dy * force;
      db.x += dx * force;
      db.y += dy * force;
    }
    const temperature = (size / 10) * (1 - step / iterations);
    for (const id of ids) {
      const d = disp.get(id)!;
      const len = Math.sqrt(d.x * d.x + d.y * d.y) || 1;
      const p = pos.get(id)!;
      p.x += (d.x / len) * Math.min(len, temperature);
      p.y += (d.y / len) * Math.min(len, temperature);
      p.x = Math.min(size, Math.max(0, p.x));
      p.y = Math.min(size, Math.max(0, p.y));
    }
  }
  // round for stable comparisons
  for (const p of pos.values()) {
    p.x = Math.round(p.x * 100) / 100;
    p.y = Math.round(p.y * 100) / 100;
  }
  return pos;
}
