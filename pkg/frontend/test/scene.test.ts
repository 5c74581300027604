import { describe, expect, it } from "vitest";

import { buildScene, cssColor, effectiveFill, NEUTRAL_FILL } from "../src/scene.js";
import { GraphWindow, StaleWindowError, Submodule } from "../src/types.js";

const window2: GraphWindow = {
  center: 1,
  radius: 2,
  nodes: [
    { id: 1, name: "g1", type: "LUT2", submodules: [] },
    { id: 2, name: "g2", type: "FF", submodules: [] },
    { id: 3, name: "g3", type: "MUX2", submodules: [] },
  ],
  edges: [
    [1, 2],
    [2, 3],
  ],
};

function sub(id: number, gates: number[], parent: number | null = null): Submodule {
  return { id, name: `m${id}`, color: [10 * id, 20 * id, 30 * id], parent, gates };
}

describe("scene building", () => {
  it("draws one membership square per submodule", () => {
    const scene = buildScene(window2, [sub(1, [1, 2]), sub(2, [2])], new Set());
    const byId = new Map(scene.nodes.map((n) => [n.id, n]));
    expect(byId.get(2)!.squares.length).toBe(2);
    expect(byId.get(1)!.squares.length).toBe(1);
    expect(byId.get(2)!.squares.map((s) => s.submodule)).toEqual([1, 2]);
  });

  it("uses neutral fill and no squares for ungrouped gates", () => {
    const scene = buildScene(window2, [sub(1, [1])], new Set());
    const node3 = scene.nodes.find((n) => n.id === 3)!;
    expect(node3.fill).toBe(NEUTRAL_FILL);
    expect(node3.squares).toEqual([]);
  });

  it("fills with the deepest submodule's color", () => {
    const outer = sub(1, [1]);
    const inner = sub(2, [1], 1); // child of outer
    const byId = new Map([outer, inner].map((s) => [s.id, s]));
    expect(effectiveFill([outer, inner], byId)).toBe(cssColor(inner.color));
    // depth tie: smaller id wins
    const a = sub(3, [1]);
    const b = sub(4, [1]);
    const flat = new Map([a, b].map((s) => [s.id, s]));
    expect(effectiveFill([b, a], flat)).toBe(cssColor(a.color));
  });

  it("marks selected nodes and keeps edges inside the window", () => {
    const scene = buildScene(window2, [], new Set([2]));
    expect(scene.nodes.find((n) => n.id === 2)!.selected).toBe(true);
    expect(scene.edges.length).toBe(2);
  });

  it("raises StaleWindow for selection ids outside the window", () => {
    expect(() => buildScene(window2, [], new Set([99]))).toThrow(StaleWindowError);
  });

  it("recolor shows up without a window refetch", () => {
    const before = buildScene(window2, [sub(1, [1])], new Set());
    const recolored: Submodule = { ...sub(1, [1]), color: [250, 0, 0] };
    const after = buildScene(window2, [recolored], new Set());
    expect(before.nodes.find((n) => n.id === 1)!.fill).not.toBe(
      after.nodes.find((n) => n.id === 1)!.fill,
    );
    expect(after.nodes.find((n) => n.id === 1)!.fill).toBe(cssColor([250, 0, 0]));
  });
});
