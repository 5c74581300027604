/** UI parity against the real service: 20 scripted user actions must yield
 * exactly 20 user-actor events, and after the stream drains the rendered
 * submodule membership must equal the service's ground truth.
 */

import { spawn, spawnSync, ChildProcess } from "node:child_process";
import { mkdtempSync, rmSync } from "node:fs";
import { createServer } from "node:net";
import { tmpdir } from "node:os";
import { join } from "node:path";
import { afterAll, beforeAll, describe, expect, it } from "vitest";

import { ApiClient } from "../src/api.js";
import { buildScene } from "../src/scene.js";
import { ExplorerController } from "../src/state.js";

const REPO_ROOT = join(__dirname, "..", "..");

function freePort(): Promise<number> {
  return new Promise((resolve, reject) => {
    const probe = createServer();
    probe.listen(0, "127.0.0.1", () => {
      const address = probe.address();
      if (address && typeof address === "object") {
        const port = address.port;
        probe.close(() => resolve(port));
      } else {
        reject(new Error("no port"));
      }
    });
  });
}

async function waitForService(base: string, timeoutMs = 30_000): Promise<void> {
  const deadline = Date.now() + timeoutMs;
  for (;;) {
    try {
      const r = await fetch(`${base}/netlist/summary`);
      if (r.ok) return;
    } catch {
      /* not up yet */
    }
    if (Date.now() > deadline) throw new Error("service did not come up");
    await new Promise((r) => setTimeout(r, 200));
  }
}

describe("live service parity", () => {
  let server: ChildProcess | null = null;
  let base = "";
  let workDir = "";
  let ffIds: number[] = [];

  beforeAll(async () => {
    workDir = mkdtempSync(join(tmpdir(), "gatelab-ui-"));
    const gen = spawnSync(
      "python3",
      ["-m", "gatelab.cli", "gen", "fsm_sea_of_gates", "--seed", "2",
       "--out", workDir, "--knob", "padding=250"],
      { cwd: REPO_ROOT, encoding: "utf-8" },
    );
    expect(gen.status, gen.stderr).toBe(0);
    const sidecar = JSON.parse(
      spawnSync("cat", [join(workDir, "sidecar.json")], { encoding: "utf-8" }).stdout,
    );
    ffIds = sidecar.fsm_ff_ids;

    const port = await freePort();
    base = `http://127.0.0.1:${port}`;
    server = spawn(
      "python3",
      ["-m", "gatelab.cli", "serve", join(workDir, "project.json"),
       "--host", "127.0.0.1", "--port", String(port)],
      { cwd: REPO_ROOT, stdio: ["ignore", "pipe", "pipe"] },
    );
    await waitForService(base);
  });

  afterAll(() => {
    server?.kill();
    if (workDir) rmSync(workDir, { recursive: true, force: true });
  });

  it("20 user actions -> exactly 20 user events, membership converges", async () => {
    const api = new ApiClient(base);
    const controller = new ExplorerController(api);
    await controller.focus(ffIds[0], 2);
    await controller.syncEvents();
    const userEventsBefore = (await api.events(0)).filter(
      (e) => e.actor === "user",
    ).length;

    // the scripted session: 2 creates, 3 assigns, 15 selects = 20 actions
    const windowIds = controller.window!.nodes.map((n) => n.id);
    const actions: Array<() => Promise<unknown>> = [];
    actions.push(() => controller.dispatch({ kind: "create-submodule", name: "fsm" }));
    actions.push(() => controller.dispatch({ kind: "select", ids: ffIds }));
    actions.push(() => controller.dispatch({ kind: "assign-selection", submodule: 1 }));
    actions.push(() => controller.dispatch({ kind: "create-submodule", name: "periphery" }));
    actions.push(() => controller.dispatch({ kind: "select", ids: windowIds.slice(0, 3) }));
    actions.push(() => controller.dispatch({ kind: "assign-selection", submodule: 2 }));
    actions.push(() => controller.dispatch({ kind: "select", ids: windowIds.slice(3, 5) }));
    actions.push(() => controller.dispatch({ kind: "assign-selection", submodule: 2 }));
    for (let i = actions.length; i < 20; i++) {
      const pick = windowIds[i % windowIds.length];
      actions.push(() => controller.dispatch({ kind: "select", ids: [pick] }));
    }
    expect(actions.length).toBe(20);
    for (const action of actions) {
      const result = (await action()) as { ok?: boolean };
      expect(result.ok).not.toBe(false);
    }

    // exactly 20 user-actor events arrived in the log
    const userEvents = (await api.events(0)).filter((e) => e.actor === "user");
    expect(userEvents.length - userEventsBefore).toBe(20);

    // drain the stream, then rendered membership == service ground truth
    await controller.syncEvents();
    const rendered = controller.viewSubmodules();
    const groundTruth = await api.submodules();
    expect(rendered).toEqual(groundTruth);

    // and the scene draws the right membership squares
    const scene = buildScene(controller.window!, rendered, controller.state.selection);
    const fsmNode = scene.nodes.find((n) => n.id === ffIds[0]);
    expect(fsmNode).toBeDefined();
    expect(fsmNode!.squares.map((s) => s.submodule)).toContain(1);
  });

  it("console commands log as script actor and return tables", async () => {
    const api = new ApiClient(base);
    const before = (await api.events(0)).length;
    const response = await api.command("fsm-candidates 5", "script");
    expect(response.text).toContain("rank");
    const events = await api.events(0);
    expect(events.length).toBe(before + 1);
    expect(events[events.length - 1].actor).toBe("script");
    expect(events[events.length - 1].op).toBe("fsm_candidates");
  });
});
