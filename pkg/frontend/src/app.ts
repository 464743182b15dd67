/** Console entry point: login, polling, grant actions, audit, scope preview.
 *
 * The owner credential lives in a variable for the lifetime of the page and
 * in the Authorization header of API calls - never in a URL or in storage.
 */

import { PdsApi } from "./api.js";
import { Poller } from "./poller.js";
import { ConsoleStore, describeError, type GrantAction } from "./state.js";
import {
  renderAuditTimeline,
  renderErrorBanner,
  renderGrantLists,
  renderScopePreview,
  renderStatusLine,
} from "./render.js";
import type { ConsoleConfig } from "./types.js";

const DEFAULT_POLL_SECONDS = 5;

async function loadConfig(): Promise<ConsoleConfig> {
  try {
    const resp = await fetch("./config.json");
    if (resp.ok) return (await resp.json()) as ConsoleConfig;
  } catch {
    // fall through to same-origin default
  }
  return { server_url: "" };
}

function byId(id: string): HTMLElement {
  const el = document.getElementById(id);
  if (!el) throw new Error(`missing element #${id}`);
  return el;
}

function startConsole(store: ConsoleStore, intervalSeconds: number): void {
  byId("login").hidden = true;
  byId("console").hidden = false;

  const redraw = () => {
    byId("error").innerHTML = renderErrorBanner(store.state.lastError);
    byId("grants").innerHTML = renderGrantLists(store);
    byId("audit").innerHTML = renderAuditTimeline(store.state.audit);
    byId("status").innerHTML = renderStatusLine(store.state.lastPollAt, intervalSeconds);
  };

  const poller = new Poller(async () => {
    await store.poll();
    redraw();
  }, intervalSeconds);
  poller.start();

  byId("grants").addEventListener("click", (event) => {
    const target = event.target as HTMLElement;
    const action = target.dataset.action as GrantAction | undefined;
    const grantId = target.dataset.grant;
    if (!action || !grantId) return;
    void store.actOnGrant(grantId, action).then(redraw);
  });

  byId("preview-form").addEventListener("submit", (event) => {
    event.preventDefault();
    const scope = (byId("preview-scope") as HTMLInputElement).value.trim();
    if (!scope) return;
    store
      .previewScope(scope)
      .then((preview) => {
        byId("preview").innerHTML = renderScopePreview(scope, preview);
      })
      .catch((err) => {
        byId("error").innerHTML = renderErrorBanner(describeError(err));
      });
  });

  void store.knownScopes().then((scopes) => {
    (byId("preview-scope") as HTMLInputElement).placeholder =
      scopes.length ? `e.g. ${scopes[0]}` : "q:band_power";
  });
}

async function main(): Promise<void> {
  const config = await loadConfig();
  const interval = config.polling_interval_seconds ?? DEFAULT_POLL_SECONDS;
  const serverUrl = config.server_url || window.location.origin;

  byId("login-form").addEventListener("submit", (event) => {
    event.preventDefault();
    const credential = (byId("credential") as HTMLInputElement).value;
    if (!credential) return;
    (byId("credential") as HTMLInputElement).value = "";
    const api = new PdsApi(serverUrl, credential);
    const store = new ConsoleStore(api);
    startConsole(store, interval);
  });
}

if (typeof document !== "undefined") {
  void main();
}
