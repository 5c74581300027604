/** DTOs of the netlist service API. */

export interface NetlistSummary {
  name: string;
  gates: number;
  nets: number;
  inputs: string[];
  outputs: string[];
  clock: string | null;
  submodules: number;
  kinds: Record<string, number>;
  digest: string;
}

export interface GraphNode {
  id: number;
  name: string;
  type: string;
  submodules: number[];
}

export interface GraphWindow {
  center: number;
  radius: number;
  nodes: GraphNode[];
  edges: [number, number][];
}

export interface GateDetails {
  id: number;
  name: string;
  type: string;
  init: string | null;
  pins: Record<string, { net: number; name: string }>;
  submodules: number[];
  color: [number, number, number] | null;
  function: string | null;
}

export interface Submodule {
  id: number;
  name: string;
  color: [number, number, number];
  parent: number | null;
  gates: number[];
}

export interface EventRecord {
  seq: number;
  t_ms: number;
  session: string;
  actor: "user" | "script" | "system";
  op: string;
  targets: number[];
  args: string;
  digest?: string;
}

export interface CommandResponse {
  verb: string;
  ok: boolean;
  text: string;
  data: unknown;
  events: number[];
}

export interface ServiceErrorBody {
  code: string;
  message: string;
  seq?: number;
}

/** Raised when the service answers with a {code, message} error body. */
export class ServiceError extends Error {
  constructor(readonly code: string, message: string, readonly status: number) {
    super(message);
    this.name = "ServiceError";
  }
}

/** Raised when a scene refers to ids the last fetched window no longer has. */
export class StaleWindowError extends Error {
  constructor(readonly missing: number[]) {
    super(`window is stale; missing ids ${missing.join(", ")}`);
    this.name = "StaleWindowError";
  }
}
