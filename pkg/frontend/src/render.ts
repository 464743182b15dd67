/** Pure HTML renderers: state in, markup out. The DOM wiring lives in app.ts,
 * so everything visual is testable as strings. */

import type { AuditEntry, Grant, ScopePreviewEntry } from "./types.js";
import type { ConsoleStore } from "./state.js";

export function escapeHtml(value: string): string {
  return value
    .replaceAll("&", "&amp;")
    .replaceAll("<", "&lt;")
    .replaceAll(">", "&gt;")
    .replaceAll('"', "&quot;");
}

const BADGE_LABELS: Record<string, string> = {
  RATE_EXCEEDED: "rate",
  FIRST_SCOPE_USE: "first use",
  DENIED_ACCESS: "denied",
};

export function renderAnomalyBadges(flags: string[]): string {
  return flags
    .map((flag) => {
      const label = BADGE_LABELS[flag] ?? flag.toLowerCase();
      return `<span class="badge badge-${escapeHtml(flag.toLowerCase())}" title="${escapeHtml(flag)}">${escapeHtml(label)}</span>`;
    })
    .join(" ");
}

function grantRow(grant: Grant, actions: string[]): string {
  const buttons = actions
    .map(
      (action) =>
        `<button data-action="${action}" data-grant="${escapeHtml(grant.grant_id)}">${action}</button>`,
    )
    .join(" ");
  return (
    `<li class="grant grant-${grant.state.toLowerCase()}">` +
    `<code>${escapeHtml(grant.grant_id)}</code> ` +
    `<strong>${escapeHtml(grant.client_id)}</strong> ` +
    `<span class="scopes">${grant.scopes.map(escapeHtml).join(", ")}</span> ` +
    buttons +
    `</li>`
  );
}

export function renderGrantLists(store: ConsoleStore): string {
  const pending = store.pending();
  const active = store.active();
  const revoked = store.revoked();
  const section = (title: string, grants: Grant[], actions: string[]) => {
    const body = grants.length
      ? `<ul>${grants.map((g) => grantRow(g, actions)).join("")}</ul>`
      : `<p class="empty">none</p>`;
    return `<section><h3>${title} (${grants.length})</h3>${body}</section>`;
  };
  return (
    section("Pending", pending, ["approve", "deny"]) +
    section("Active", active, ["revoke"]) +
    section("Revoked", revoked, [])
  );
}

export function renderAuditTimeline(entries: AuditEntry[]): string {
  if (!entries.length) return `<p class="empty">no audit entries yet</p>`;
  const rows = [...entries]
    .reverse()
    .map(
      (e) =>
        `<tr class="outcome-${e.outcome.toLowerCase()}">` +
        `<td>${e.seq}</td>` +
        `<td>${escapeHtml(e.timestamp)}</td>` +
        `<td>${escapeHtml(e.client_id)}</td>` +
        `<td>${escapeHtml(e.endpoint)}</td>` +
        `<td>${escapeHtml(e.scope_used ?? "")}</td>` +
        `<td>${e.outcome}</td>` +
        `<td>${renderAnomalyBadges(e.anomaly_flags)}</td>` +
        `</tr>`,
    )
    .join("");
  return (
    `<table class="audit"><thead><tr>` +
    `<th>#</th><th>time</th><th>client</th><th>endpoint</th><th>scope</th><th>outcome</th><th>flags</th>` +
    `</tr></thead><tbody>${rows}</tbody></table>`
  );
}

export function renderScopePreview(scope: string, preview: ScopePreviewEntry[]): string {
  if (!preview.length) {
    return `<p class="empty">no installed question requires scope <code>${escapeHtml(scope)}</code></p>`;
  }
  const blocks = preview
    .map(
      (entry) =>
        `<details open><summary><code>${escapeHtml(entry.question_id)}</code> ` +
        `(${entry.answers.length} answer(s))</summary>` +
        `<pre>${escapeHtml(JSON.stringify(entry.answers, null, 2))}</pre></details>`,
    )
    .join("");
  return `<div class="preview"><p>a token with <code>${escapeHtml(scope)}</code> receives exactly:</p>${blocks}</div>`;
}

export function renderErrorBanner(error: string | null): string {
  if (!error) return "";
  return `<div class="error-banner" role="alert">${escapeHtml(error)}</div>`;
}

export function renderStatusLine(lastPollAt: string | null, intervalSeconds: number): string {
  const when = lastPollAt ? `last poll ${escapeHtml(lastPollAt)}` : "not polled yet";
  return `<span class="status">${when} &middot; every ${intervalSeconds}s</span>`;
}
