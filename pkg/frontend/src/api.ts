/** Typed client for the documented PDS endpoints, nothing else.
 *
 * The owner credential travels only in the Authorization header; it is never
 * part of a URL, so it cannot leak via history, logs, or referrers.
 */

import type { Answer, AuditEntry, Grant, Question } from "./types.js";

export class ApiError extends Error {
  constructor(
    public readonly code: string,
    message: string,
    public readonly status: number,
  ) {
    super(message);
    this.name = "ApiError";
  }
}

export class PdsApi {
  constructor(
    private readonly serverUrl: string,
    private readonly credential: string,
  ) {}

  /** Absolute URL for an API path; contains no credential by construction. */
  urlFor(path: string): string {
    return this.serverUrl.replace(/\/$/, "") + path;
  }

  private async call<T>(method: string, path: string, body?: unknown): Promise<T> {
    let response: Response;
    try {
      response = await fetch(this.urlFor(path), {
        method,
        headers: {
          Authorization: `Bearer ${this.credential}`,
          ...(body !== undefined ? { "Content-Type": "application/json" } : {}),
        },
        body: body !== undefined ? JSON.stringify(body) : undefined,
      });
    } catch (err) {
      throw new ApiError("NetworkError", String(err), 0);
    }
    const text = await response.text();
    let parsed: unknown = null;
    try {
      parsed = text ? JSON.parse(text) : null;
    } catch {
      throw new ApiError("BadResponse", `non-JSON response (HTTP ${response.status})`, response.status);
    }
    if (!response.ok) {
      const err = parsed as { error?: string; message?: string } | null;
      throw new ApiError(err?.error ?? "ApiError", err?.message ?? text, response.status);
    }
    return parsed as T;
  }

  async listGrants(): Promise<Grant[]> {
    const out = await this.call<{ grants: Grant[] }>("GET", "/v1/grants");
    return out.grants;
  }

  async decideGrant(grantId: string, approve: boolean): Promise<Grant> {
    const out = await this.call<{ grant: Grant }>(
      "POST",
      `/v1/grants/${encodeURIComponent(grantId)}/decision`,
      { approve },
    );
    return out.grant;
  }

  async revokeGrant(grantId: string): Promise<Grant> {
    return this.call<Grant>("DELETE", `/v1/grants/${encodeURIComponent(grantId)}`);
  }

  async listQuestions(): Promise<Question[]> {
    const out = await this.call<{ questions: Question[] }>("GET", "/v1/questions");
    return out.questions;
  }

  async getAnswers(questionId: string): Promise<Answer[]> {
    const out = await this.call<{ answers: Answer[] }>(
      "GET",
      `/v1/answers/${encodeURIComponent(questionId)}`,
    );
    return out.answers;
  }

  async getAudit(sinceSeq: number): Promise<AuditEntry[]> {
    const out = await this.call<{ entries: AuditEntry[] }>(
      "GET",
      `/v1/audit?since=${encodeURIComponent(String(sinceSeq))}`,
    );
    return out.entries;
  }
}
