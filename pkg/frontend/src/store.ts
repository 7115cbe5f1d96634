// Console state. Two rules govern everything here:
//   1. zero fabrication - every displayed value came from a gateway payload;
//   2. pending-state honesty - a mutation renders as pending until the
//      confirming record arrives on the stream, and no optimistic state
//      survives a contradicting record.

import type { GatewayClient } from "./gateway.js";
import type {
  ConflictPayload,
  LogRecord,
  MetricsReport,
  ParamSpec,
  VerdictChoice,
} from "./types.js";

export type CardState = "actionable" | "submitted";

export interface ConflictCard {
  conflict: ConflictPayload;
  state: CardState;
  appliesAt?: number;
  notice?: string;
}

export interface ParamControl {
  spec: ParamSpec;
  pending?: number; // awaiting PARAM confirmation
  error?: string;
}

export interface TopologyState {
  nodes: string[];
  edges: { a: string; b: string; w: number }[];
  communities: Record<string, number>;
}

export class ConsoleStore {
  tick = 0;
  cards: ConflictCard[] = []; // server order: deadline asc, id asc
  params = new Map<string, ParamControl>();
  topology: TopologyState | null = null;
  topologyError: string | null = null;
  metrics: MetricsReport | null = null;
  metricsRaw = ""; // exact endpoint bytes, displayed verbatim
  notices: string[] = [];
  connected = false;
  private listeners: (() => void)[] = [];

  constructor(private readonly client: GatewayClient) {}

  onChange(listener: () => void): void {
    this.listeners.push(listener);
  }

  private emit(): void {
    for (const listener of this.listeners) listener();
  }

  note(message: string): void {
    this.notices.unshift(message);
    this.notices = this.notices.slice(0, 8);
  }

  async loadInitial(): Promise<void> {
    const summary = await this.client.summary();
    if (summary.ok) {
      this.tick = summary.data.tick;
      this.params = new Map(
        Object.entries(summary.data.params).map(([name, spec]) => [
          name,
          { spec } satisfies ParamControl,
        ]),
      );
      this.connected = true;
    } else {
      this.connected = false;
      this.note(`summary fetch failed: ${summary.error.message}`);
    }
    const pending = await this.client.pendingConflicts();
    if (pending.ok) {
      this.cards = pending.data.conflicts.map((conflict) => ({
        conflict,
        state: "actionable" as const,
      }));
    } else {
      this.note(`queue fetch failed: ${pending.error.message} (stale data)`);
    }
    await this.refreshTopology();
    await this.refreshMetrics();
    this.emit();
  }

  async refreshTopology(): Promise<void> {
    const result = await this.client.topology();
    if (!result.ok) {
      this.topologyError = result.error.message;
      return;
    }
    const body = result.data;
    if (!Array.isArray(body.nodes) || !Array.isArray(body.edges) || typeof body.communities !== "object") {
      this.topology = null;
      this.topologyError = `unexpected topology payload shape (schema v1)`;
      return;
    }
    this.topology = body;
    this.topologyError = null;
  }

  async refreshMetrics(): Promise<void> {
    const result = await this.client.metrics();
    if (result.ok) {
      this.metrics = result.data;
      this.metricsRaw = result.raw;
    }
  }

  card(conflictId: number): ConflictCard | undefined {
    return this.cards.find((card) => card.conflict.id === conflictId);
  }

  private removeCard(conflictId: number): void {
    this.cards = this.cards.filter((card) => card.conflict.id !== conflictId);
  }

  /** Stream reducer: records are the source of truth, applied in seq order. */
  async handleRecord(record: LogRecord): Promise<void> {
    this.tick = Math.max(this.tick, record.tick + (record.kind === "METRICS" ? 1 : 0));
    switch (record.kind) {
      case "CONFLICT": {
        const event = record.payload["event"];
        if (event === "escalated") {
          const conflict = record.payload["conflict"] as unknown as ConflictPayload;
          if (!this.card(conflict.id)) {
            this.cards.push({ conflict, state: "actionable" });
            this.cards.sort(
              (x, y) =>
                x.conflict.deadline_tick - y.conflict.deadline_tick ||
                x.conflict.id - y.conflict.id,
            );
          }
        } else if (event === "expired") {
          const id = record.payload["conflict_id"] as number;
          if (this.card(id)) {
            this.note(`conflict #${id} expired unarbitrated (denied)`);
            this.removeCard(id);
          }
        }
        break;
      }
      case "VERDICT": {
        const outcome = record.payload["outcome"];
        const command = record.payload["command"] as { conflict_id?: number };
        const id = command?.conflict_id;
        if (typeof id !== "number") break;
        if (outcome === "applied") {
          const conflict = record.payload["conflict"] as unknown as ConflictPayload;
          if (this.card(id)) {
            this.note(`conflict #${id} ${conflict.status} by ${conflict.verdict_by}`);
            this.removeCard(id);
          }
        } else if (this.card(id)?.state === "submitted") {
          // Our submission lost the race at apply time.
          this.note(`conflict #${id} already resolved`);
          this.removeCard(id);
        }
        break;
      }
      case "PARAM": {
        const outcome = record.payload["outcome"];
        const command = record.payload["command"] as { name?: string };
        const name = command?.name;
        if (!name) break;
        const control = this.params.get(name);
        if (!control) break;
        if (outcome === "applied") {
          const change = record.payload["change"] as { to: number };
          control.spec = { ...control.spec, value: change.to };
          control.pending = undefined;
          control.error = undefined;
        } else {
          control.pending = undefined;
          control.error = String(record.payload["reason"] ?? "rejected");
        }
        break;
      }
      case "METRICS": {
        await this.refreshMetrics();
        break;
      }
      default:
        break;
    }
    this.emit();
  }

  async submitVerdict(
    conflictId: number,
    verdict: VerdictChoice,
    content?: string,
  ): Promise<void> {
    const card = this.card(conflictId);
    if (!card || card.state !== "actionable") return;
    if (verdict === "amend" && !content?.trim()) {
      card.notice = "amendment text required";
      this.emit();
      return;
    }
    card.state = "submitted";
    card.notice = undefined;
    this.emit();
    const result = await this.client.postVerdict(conflictId, verdict, content);
    if (result.ok) {
      card.appliesAt = result.data.applies_at_tick;
    } else if (result.error.code === "conflict_state") {
      this.note(`conflict #${conflictId} already resolved`);
      this.removeCard(conflictId);
    } else if (result.error.code === "network") {
      card.state = "actionable";
      card.notice = "gateway unreachable, try again";
    } else {
      card.state = "actionable";
      card.notice = result.error.message;
    }
    this.emit();
  }

  async tuneParam(name: string, value: number): Promise<void> {
    const control = this.params.get(name);
    if (!control) return;
    const { min, max } = control.spec;
    if (Number.isNaN(value) || value < min || value > max) {
      control.error = `value must be within [${min}, ${max}]`;
      this.emit();
      return;
    }
    control.error = undefined;
    control.pending = value;
    this.emit();
    const result = await this.client.patchParam(name, value);
    if (!result.ok) {
      control.pending = undefined;
      control.error = result.error.message;
    }
    this.emit();
  }
}
