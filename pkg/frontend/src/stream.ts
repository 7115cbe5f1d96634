// Resumable NDJSON record stream. The line source is injected: a browser
// implementation reads fetch bodies, tests yield scripted lines. Reconnects
// always resume from the last seen seq, so the console never drops or
// double-applies a record.

import type { LogRecord } from "./types.js";

export type LineSource = (sinceSeq: number) => AsyncIterable<string>;

export interface StreamOptions {
  reconnectDelayMs?: number;
  maxConnects?: number; // tests bound the reconnect loop
}

export class RecordStream {
  lastSeq: number;
  connects = 0;
  private running = false;

  constructor(
    private readonly source: LineSource,
    private readonly onRecord: (record: LogRecord) => void | Promise<void>,
    private readonly options: StreamOptions = {},
  ) {
    this.lastSeq = 0;
  }

  stop(): void {
    this.running = false;
  }

  async run(since: number): Promise<void> {
    this.lastSeq = since;
    this.running = true;
    const maxConnects = this.options.maxConnects ?? Infinity;
    while (this.running && this.connects < maxConnects) {
      this.connects += 1;
      try {
        for await (const line of this.source(this.lastSeq)) {
          if (!this.running) return;
          const trimmed = line.trim();
          if (!trimmed) continue;
          const record = JSON.parse(trimmed) as LogRecord;
          if (record.seq <= this.lastSeq) continue; // duplicate guard
          this.lastSeq = record.seq;
          await this.onRecord(record);
        }
      } catch {
        // drop through to reconnect
      }
      if (this.running && this.options.reconnectDelayMs) {
        await new Promise((resolve) =>
          setTimeout(resolve, this.options.reconnectDelayMs),
        );
      }
    }
  }
}

/** Browser line source over the gateway's streaming endpoint. */
export function fetchLineSource(
  baseUrl: string,
  fetchImpl: (url: string) => Promise<Response>,
): LineSource {
  return async function* (sinceSeq: number): AsyncIterable<string> {
    const response = await fetchImpl(`${baseUrl}/v1/stream?since=${sinceSeq}`);
    if (!response.ok || !response.body) {
      throw new Error(`stream failed: ${response.status}`);
    }
    const reader = response.body.getReader();
    const decoder = new TextDecoder();
    let buffer = "";
    for (;;) {
      const { done, value } = await reader.read();
      if (done) break;
      buffer += decoder.decode(value, { stream: true });
      const lines = buffer.split("\n");
      buffer = lines.pop() ?? "";
      yield* lines;
    }
    if (buffer.trim()) yield buffer;
  };
}
