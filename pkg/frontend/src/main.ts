/** Browser bootstrap: wires the controller, console, and canvas together. */

import { ApiClient } from "./api.js";
import { CommandConsole } from "./console.js";
import { readEventStream } from "./events.js";
import { buildScene } from "./scene.js";
import { drawScene, hitTest } from "./render.js";
import { ExplorerController } from "./state.js";
import { StaleWindowError } from "./types.js";

const api = new ApiClient("");
const controller = new ExplorerController(api);
const commandConsole = new CommandConsole(api);

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing element #${id}`);
  return node as T;
}

async function refresh(): Promise<void> {
  const canvas = el<HTMLCanvasElement>("graph");
  if (controller.window === null) return;
  try {
    const scene = buildScene(
      controller.window,
      controller.viewSubmodules(),
      controller.state.selection,
    );
    drawScene(canvas, scene);
    (canvas as { dataset: DOMStringMap }).dataset.scene = JSON.stringify(
      scene.nodes.map((n) => ({ id: n.id, squares: n.squares.length })),
    );
  } catch (error) {
    if (error instanceof StaleWindowError && controller.state.center !== null) {
      await controller.focus(controller.state.center);
      await refresh();
    } else {
      throw error;
    }
  }
}

async function showDetails(gateId: number): Promise<void> {
  const details = await api.gate(gateId);
  const panel = el<HTMLPreElement>("details");
  const pins = Object.entries(details.pins)
    .map(([pin, net]) => `  ${pin} -> ${net.name}`)
    .join("\n");
  panel.textContent = [
    `gate ${details.id} (${details.name})`,
    `type ${details.type}${details.init ? ` INIT=${details.init}` : ""}`,
    pins,
    details.function ? `f = ${details.function}` : "",
    `submodules: ${details.submodules.join(", ") || "none"}`,
  ].join("\n");
}

function appendLog(line: string): void {
  const log = el<HTMLPreElement>("eventlog");
  log.textContent += line + "\n";
  log.scrollTop = log.scrollHeight;
}

async function bootstrap(): Promise<void> {
  const summary = await api.summary();
  el<HTMLSpanElement>("title").textContent =
    `${summary.name}: ${summary.gates} gates, ${summary.nets} nets`;

  const firstGate = 1;
  await controller.focus(firstGate);
  await controller.syncEvents();
  await refresh();

  const canvas = el<HTMLCanvasElement>("graph");
  canvas.addEventListener("click", async (event) => {
    const rect = canvas.getBoundingClientRect();
    const scene = buildScene(
      controller.window!,
      controller.viewSubmodules(),
      controller.state.selection,
    );
    const gate = hitTest(scene, event.clientX - rect.left, event.clientY - rect.top);
    if (gate !== null) {
      await controller.dispatch({ kind: "select", ids: [gate] });
      await showDetails(gate);
      await refresh();
    }
  });
  canvas.addEventListener("dblclick", async (event) => {
    const rect = canvas.getBoundingClientRect();
    const scene = buildScene(
      controller.window!,
      controller.viewSubmodules(),
      controller.state.selection,
    );
    const gate = hitTest(scene, event.clientX - rect.left, event.clientY - rect.top);
    if (gate !== null) {
      await controller.focus(gate);
      await refresh();
    }
  });

  el<HTMLButtonElement>("group").addEventListener("click", async () => {
    const name = el<HTMLInputElement>("groupname").value || "group";
    const created = await controller.dispatch({ kind: "create-submodule", name });
    if (created.ok && controller.state.activeSubmodule !== null) {
      await controller.dispatch({
        kind: "assign-selection",
        submodule: controller.state.activeSubmodule,
      });
    }
    await refresh();
  });

  const input = el<HTMLInputElement>("console");
  input.addEventListener("keydown", async (event) => {
    if (event.key === "Enter" && input.value.trim()) {
      const entry = await commandConsole.run(input.value.trim());
      appendLog(`$ ${entry.line}`);
      appendLog(entry.text);
      input.value = "";
      await refresh();
    } else if (event.key === "ArrowUp") {
      input.value = commandConsole.recall(1) ?? input.value;
    }
  });

  // live event stream keeps the view reconciled with the model
  void readEventStream("", (record) => {
    controller.feed.push(record);
    appendLog(`#${record.seq} [${record.actor}] ${record.op}`);
    void refresh();
  }, { since: controller.feed.cursor });
}

void bootstrap();
