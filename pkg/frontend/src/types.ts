/** Wire types mirroring the PDS HTTP API. */

export type GrantState = "PENDING" | "ACTIVE" | "REVOKED";

export interface Grant {
  grant_id: string;
  client_id: string;
  scopes: string[];
  state: GrantState;
  created_at: string;
  decided_at: string | null;
}

export interface AuditEntry {
  seq: number;
  timestamp: string;
  client_id: string;
  endpoint: string;
  scope_used: string | null;
  subject_ids: string[];
  outcome: "ALLOWED" | "DENIED";
  anomaly_flags: string[];
}

export interface Question {
  question_id: string;
  version: number;
  inputs: string[];
  params: Record<string, unknown>;
  output_schema_id: string;
  schedule_period_seconds: number;
  required_scope: string;
}

export interface AnswerSubject {
  recording_id: string | null;
  window_start: string;
  window_end: string;
}

export interface Answer {
  answer_id: string;
  question_id: string;
  version: number;
  subject: AnswerSubject;
  payload: unknown;
  computed_at: string;
}

/** One question's answers as revealed by a scope preview. */
export interface ScopePreviewEntry {
  question_id: string;
  answers: Answer[];
}

export interface ConsoleConfig {
  /** Empty string means "same origin as the served bundle". */
  server_url: string;
  polling_interval_seconds?: number;
}
