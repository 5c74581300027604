/** View state and the action dispatcher.
 *
 * The controller never trusts its own mutations: every user action becomes
 * exactly one service call (hence exactly one logged user-actor event), the
 * view updates optimistically, and the authoritative submodule table is
 * rebuilt purely from the event stream. Once the stream drains, the rendered
 * membership equals what GET /submodules would say; if a service call fails,
 * the optimistic change rolls back and the error lands in the console log.
 */

import { ApiClient } from "./api.js";
import { EventFeed } from "./events.js";
import { EventRecord, GraphWindow, ServiceError, Submodule } from "./types.js";

export type RGB = [number, number, number];

export interface ViewState {
  center: number | null;
  radius: number; // clamped to 1..5
  selection: Set<number>;
  activeSubmodule: number | null;
  consoleHistory: string[];
}

export type UserAction =
  | { kind: "select"; ids: number[] }
  | { kind: "create-submodule"; name: string; color?: RGB }
  | { kind: "assign-selection"; submodule: number };

export interface DispatchResult {
  ok: boolean;
  error?: string;
}

export function clampRadius(radius: number): number {
  return Math.max(1, Math.min(5, Math.round(radius)));
}

export class ExplorerController {
  readonly state: ViewState = {
    center: null,
    radius: 2,
    selection: new Set(),
    activeSubmodule: null,
    consoleHistory: [],
  };
  window: GraphWindow | null = null;
  /** Event-sourced ground truth. */
  private authoritative = new Map<number, Submodule>();
  /** Optimistic additions awaiting stream confirmation. Drafts start under a
   * negative temporary id and move to the real id once the POST answers. */
  private pendingCreates = new Map<number, Submodule>();
  private pendingAssigns = new Map<number, Set<number>>(); // sid -> gates
  private nextTempId = -1;
  readonly feed = new EventFeed();
  readonly errors: string[] = [];

  constructor(private readonly api: ApiClient) {
    this.feed.onRecord((record) => this.applyEvent(record));
  }

  // -- window ------------------------------------------------------------

  async focus(center: number, radius = this.state.radius): Promise<GraphWindow> {
    this.state.radius = clampRadius(radius);
    const window = await this.api.graphWindow(center, this.state.radius);
    this.window = window;
    this.state.center = center;
    // selection must stay inside the fetched window
    const ids = new Set(window.nodes.map((n) => n.id));
    for (const id of [...this.state.selection]) {
      if (!ids.has(id)) this.state.selection.delete(id);
    }
    return window;
  }

  // -- event-sourced submodules -------------------------------------------

  applyEvent(record: EventRecord): void {
    const args = record.args ? (JSON.parse(record.args) as Record<string, unknown>) : {};
    switch (record.op) {
      case "create_submodule": {
        const id = record.targets[0];
        this.authoritative.set(id, {
          id,
          name: String(args.name ?? `submodule ${id}`),
          color: (args.color as RGB) ?? [128, 128, 128],
          parent: null,
          gates: [],
        });
        this.pendingCreates.delete(id); // stream confirmed the draft
        break;
      }
      case "assign_gates": {
        const sid = Number(args.submodule ?? record.targets[0]);
        const gates = (args.gates as number[]) ?? [];
        const sub = this.authoritative.get(sid);
        if (sub) {
          const merged = new Set(sub.gates);
          for (const g of gates) merged.add(g);
          sub.gates = [...merged].sort((a, b) => a - b);
        }
        const pending = this.pendingAssigns.get(sid);
        if (pending) {
          for (const g of gates) pending.delete(g);
          if (pending.size === 0) this.pendingAssigns.delete(sid);
        }
        break;
      }
      case "set_parent": {
        const sid = Number(args.submodule ?? record.targets[0]);
        const sub = this.authoritative.get(sid);
        if (sub) sub.parent = args.parent === null ? null : Number(args.parent);
        break;
      }
      default:
        break; // analyses and model edits don't touch the submodule table
    }
  }

  /** Drain the service's backlog into the table (tests and initial load). */
  async syncEvents(): Promise<number> {
    const records = await this.api.events(this.feed.cursor);
    for (const record of records) this.feed.push(record);
    return records.length;
  }

  /** What the scene renders: ground truth merged with optimistic edits. */
  viewSubmodules(): Submodule[] {
    const merged = new Map<number, Submodule>();
    for (const [id, sub] of this.authoritative) {
      merged.set(id, { ...sub, gates: [...sub.gates] });
    }
    for (const [tempId, draft] of this.pendingCreates) {
      merged.set(tempId, { ...draft, gates: [...draft.gates] });
    }
    for (const [sid, gates] of this.pendingAssigns) {
      const sub = merged.get(sid);
      if (sub) {
        const all = new Set(sub.gates);
        for (const g of gates) all.add(g);
        sub.gates = [...all].sort((a, b) => a - b);
      }
    }
    return [...merged.values()].sort((a, b) => a.id - b.id);
  }

  // -- actions ----------------------------------------------------------------

  async dispatch(action: UserAction): Promise<DispatchResult> {
    switch (action.kind) {
      case "select":
        return this.doSelect(action.ids);
      case "create-submodule":
        return this.doCreate(action.name, action.color);
      case "assign-selection":
        return this.doAssign(action.submodule);
    }
  }

  private fail(error: unknown): DispatchResult {
    const message =
      error instanceof ServiceError
        ? `${error.code}: ${error.message}`
        : String(error);
    this.errors.push(message);
    return { ok: false, error: message };
  }

  private async doSelect(ids: number[]): Promise<DispatchResult> {
    const previous = new Set(this.state.selection);
    this.state.selection = new Set(ids);
    try {
      await this.api.command(`select ${ids.join(" ")}`.trim(), "user");
      return { ok: true };
    } catch (error) {
      this.state.selection = previous;
      return this.fail(error);
    }
  }

  private async doCreate(name: string, color?: RGB): Promise<DispatchResult> {
    const tempId = this.nextTempId--;
    const draft: Submodule = {
      id: tempId,
      name,
      color: color ?? [128, 128, 128],
      parent: null,
      gates: [],
    };
    this.pendingCreates.set(tempId, draft);
    try {
      const created = await this.api.createSubmodule(name, color);
      this.pendingCreates.delete(tempId);
      if (!this.authoritative.has(created.id)) {
        draft.id = created.id;
        this.pendingCreates.set(created.id, draft);
      }
      this.state.activeSubmodule = created.id;
      return { ok: true };
    } catch (error) {
      this.pendingCreates.delete(tempId);
      return this.fail(error);
    }
  }

  private async doAssign(submodule: number): Promise<DispatchResult> {
    const gates = [...this.state.selection].sort((a, b) => a - b);
    const pending = this.pendingAssigns.get(submodule) ?? new Set<number>();
    for (const g of gates) pending.add(g);
    this.pendingAssigns.set(submodule, pending);
    try {
      await this.api.addGates(submodule, gates);
      return { ok: true };
    } catch (error) {
      const current = this.pendingAssigns.get(submodule);
      if (current) {
        for (const g of gates) current.delete(g);
        if (current.size === 0) this.pendingAssigns.delete(submodule);
      }
      return this.fail(error);
    }
  }
}
