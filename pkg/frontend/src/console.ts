/** Command console: the workbench vocabulary verbatim, logged as script. */

import { ApiClient } from "./api.js";
import { ServiceError } from "./types.js";

export interface ConsoleEntry {
  line: string;
  ok: boolean;
  text: string;
}

export class CommandConsole {
  readonly history: string[] = [];
  readonly entries: ConsoleEntry[] = [];

  constructor(private readonly api: ApiClient) {}

  async run(line: string): Promise<ConsoleEntry> {
    this.history.push(line);
    let entry: ConsoleEntry;
    try {
      const response = await this.api.command(line, "script");
      entry = { line, ok: true, text: response.text };
    } catch (error) {
      const text =
        error instanceof ServiceError
          ? `${error.code}: ${error.message}`
          : String(error);
      entry = { line, ok: false, text };
    }
    this.entries.push(entry);
    return entry;
  }

  recall(back: number): string | undefined {
    return this.history[this.history.length - back];
  }
}
