/** Thin typed client over the service; fetch is injectable for tests. */

import {
  CommandResponse,
  EventRecord,
  GateDetails,
  GraphWindow,
  NetlistSummary,
  ServiceError,
  ServiceErrorBody,
  Submodule,
} from "./types.js";

export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

export class ApiClient {
  constructor(
    readonly base: string,
    private readonly fetchImpl: FetchLike = (url, init) => fetch(url, init),
  ) {}

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const response = await this.fetchImpl(this.base + path, init);
    if (!response.ok) {
      let body: ServiceErrorBody = { code: "HttpError", message: response.statusText };
      try {
        body = (await response.json()) as ServiceErrorBody;
      } catch {
        /* non-JSON error body */
      }
      throw new ServiceError(body.code, body.message, response.status);
    }
    return (await response.json()) as T;
  }

  summary(): Promise<NetlistSummary> {
    return this.request("/netlist/summary");
  }

  graphWindow(center: number, radius: number): Promise<GraphWindow> {
    return this.request(`/graph?center=${center}&radius=${radius}`);
  }

  gate(id: number): Promise<GateDetails> {
    return this.request(`/gate/${id}`);
  }

  submodules(): Promise<Submodule[]> {
    return this.request("/submodules");
  }

  createSubmodule(name: string, color?: [number, number, number]): Promise<{ id: number }> {
    return this.request("/submodules", {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(color ? { name, color } : { name }),
    });
  }

  addGates(submodule: number, gates: number[]): Promise<{ id: number; gates: number[] }> {
    return this.request(`/submodules/${submodule}/gates`, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify({ gates }),
    });
  }

  command(line: string, actor: "user" | "script" = "script"): Promise<CommandResponse> {
    return this.request("/command", {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify({ line, actor }),
    });
  }

  events(since = 0): Promise<EventRecord[]> {
    return this.request(`/events?since=${since}`);
  }

  trace(probes: string[], cycles: number, seed?: number): Promise<{ probes: string[]; csv: string }> {
    const seedArg = seed === undefined ? "" : `&seed=${seed}`;
    return this.request(`/trace?probe=${probes.join(",")}&cycles=${cycles}${seedArg}`);
  }
}
