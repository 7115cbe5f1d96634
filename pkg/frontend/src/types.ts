// Payload shapes mirroring the gateway API (docs/api.md). The console never
// fabricates data: everything rendered traces back to one of these.

export interface MetricsReport {
  tick: number;
  clustering: number;
  sync: number;
  consistency: number;
  value_efficacy: number | null;
}

export interface ParamSpec {
  name: string;
  min: number;
  max: number;
  value: number;
}

export interface Summary {
  tick: number;
  agents: number;
  pending_conflicts: number;
  params: Record<string, ParamSpec>;
  metrics: MetricsReport;
}

export interface ViolationEntry {
  layer: string;
  tag: string;
  severity: string;
}

export interface ConflictPayload {
  id: number;
  action: {
    agent: string;
    tick: number;
    tag: string;
    utterance: string;
    utterance_tags: string[];
    stack: unknown;
  };
  violated: ViolationEntry[];
  status: string;
  verdict_by: string | null;
  amended_content: string | null;
  deadline_tick: number;
  created_tick: number;
}

export interface TopologyPayload {
  nodes: string[];
  edges: { a: string; b: string; w: number }[];
  communities: Record<string, number>;
}

export interface LogRecord {
  seq: number;
  tick: number;
  kind: string;
  payload: Record<string, unknown>;
  chain: string;
}

export interface ApiError {
  code: "not_found" | "conflict_state" | "validation" | "internal" | "network";
  message: string;
  entity: string | null;
}

export type VerdictChoice = "approve" | "deny" | "amend";
