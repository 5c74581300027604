/** Server-sent event reader built on fetch streams (works in browser and node). */

import { EventRecord } from "./types.js";
import { FetchLike } from "./api.js";

export type EventHandler = (record: EventRecord) => void;

/** Parse an SSE byte stream, emitting one EventRecord per `data:` block. */
export async function readEventStream(
  base: string,
  onRecord: EventHandler,
  options: { since?: number; follow?: boolean; fetchImpl?: FetchLike; signal?: AbortSignal } = {},
): Promise<void> {
  const { since = 0, follow = true, signal } = options;
  const fetchImpl = options.fetchImpl ?? ((url, init) => fetch(url, init));
  const response = await fetchImpl(
    `${base}/events/stream?since=${since}&follow=${follow}`,
    { signal },
  );
  if (!response.ok || response.body === null) {
    throw new Error(`event stream unavailable: ${response.status}`);
  }
  const reader = response.body.getReader();
  const decoder = new TextDecoder();
  let buffer = "";
  for (;;) {
    const { done, value } = await reader.read();
    if (done) break;
    buffer += decoder.decode(value, { stream: true });
    let sep;
    while ((sep = buffer.indexOf("\n\n")) >= 0) {
      const block = buffer.slice(0, sep);
      buffer = buffer.slice(sep + 2);
      for (const line of block.split("\n")) {
        if (line.startsWith("data: ")) {
          onRecord(JSON.parse(line.slice(6)) as EventRecord);
        }
      }
    }
  }
}

/** In-order event dispatcher with monotone-seq checking. */
export class EventFeed {
  private nextSeq: number;
  private handlers: EventHandler[] = [];

  constructor(since = 0) {
    this.nextSeq = since;
  }

  onRecord(handler: EventHandler): void {
    this.handlers.push(handler);
  }

  push(record: EventRecord): void {
    if (record.seq < this.nextSeq) return; // replayed backlog overlap
    this.nextSeq = record.seq + 1;
    for (const handler of this.handlers) handler(record);
  }

  get cursor(): number {
    return this.nextSeq;
  }
}
