/** Console state: grants by lifecycle stage, the audit tail, inline errors.
 *
 * All server interaction funnels through poll() and the explicit actions;
 * errors are recorded on the state for inline rendering, never swallowed.
 */

import { ApiError, PdsApi } from "./api.js";
import type { AuditEntry, Grant, ScopePreviewEntry } from "./types.js";

export type GrantAction = "approve" | "deny" | "revoke";

export interface ConsoleState {
  grants: Grant[];
  audit: AuditEntry[];
  lastError: string | null;
  lastPollAt: string | null;
}

const AUDIT_TAIL = 500;

export class ConsoleStore {
  readonly state: ConsoleState = {
    grants: [],
    audit: [],
    lastError: null,
    lastPollAt: null,
  };

  constructor(private readonly api: PdsApi) {}

  /** One poll cycle: refresh grants and extend the audit tail. */
  async poll(): Promise<void> {
    try {
      const sinceSeq = this.state.audit.length
        ? this.state.audit[this.state.audit.length - 1].seq
        : 0;
      const [grants, newEntries] = await Promise.all([
        this.api.listGrants(),
        this.api.getAudit(sinceSeq),
      ]);
      this.state.grants = grants;
      this.state.audit = [...this.state.audit, ...newEntries].slice(-AUDIT_TAIL);
      this.state.lastPollAt = new Date().toISOString();
      this.state.lastError = null;
    } catch (err) {
      this.state.lastError = describeError(err);
    }
  }

  pending(): Grant[] {
    return this.state.grants.filter((g) => g.state === "PENDING");
  }

  active(): Grant[] {
    return this.state.grants.filter((g) => g.state === "ACTIVE");
  }

  revoked(): Grant[] {
    return this.state.grants.filter((g) => g.state === "REVOKED");
  }

  /** Approve/deny a pending grant or revoke an active one, then re-poll.
   * An action failure stays visible through the refresh that follows it. */
  async actOnGrant(grantId: string, action: GrantAction): Promise<void> {
    let actionError: string | null = null;
    try {
      if (action === "approve") await this.api.decideGrant(grantId, true);
      else if (action === "deny") await this.api.decideGrant(grantId, false);
      else await this.api.revokeGrant(grantId);
    } catch (err) {
      actionError = describeError(err);
    }
    await this.poll();
    if (actionError !== null) {
      this.state.lastError = actionError;
    }
  }

  /** Exactly what a token holding `scope` would receive, question by question. */
  async previewScope(scope: string): Promise<ScopePreviewEntry[]> {
    const questions = await this.api.listQuestions();
    const matching = questions.filter((q) => q.required_scope === scope);
    const preview: ScopePreviewEntry[] = [];
    for (const q of matching) {
      preview.push({ question_id: q.question_id, answers: await this.api.getAnswers(q.question_id) });
    }
    return preview;
  }

  /** Scopes a preview can be asked for: every installed question's scope. */
  async knownScopes(): Promise<string[]> {
    const questions = await this.api.listQuestions();
    return [...new Set(questions.map((q) => q.required_scope))].sort();
  }
}

export function describeError(err: unknown): string {
  if (err instanceof ApiError) return `${err.code}: ${err.message}`;
  return String(err);
}
