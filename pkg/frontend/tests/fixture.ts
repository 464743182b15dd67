/** Live PDS fixture: a real server process driven only through its
 * documented interfaces (config file + CLI entry point + HTTP API). */

import { spawn, spawnSync, type ChildProcess } from "node:child_process";
import { mkdtempSync, readFileSync, writeFileSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";

export interface PdsFixture {
  url: string;
  owner: string;
  ownerHeaders: { Authorization: string };
  stop: () => void;
}

const PYTHON = process.env.NEUROPDS_PYTHON ?? "python3";

function sleep(ms: number): Promise<void> {
  return new Promise((resolve) => setTimeout(resolve, ms));
}

async function waitForServer(url: string, owner: string, child: ChildProcess): Promise<void> {
  for (let attempt = 0; attempt < 100; attempt++) {
    if (child.exitCode !== null) {
      throw new Error(`PDS process exited early with code ${child.exitCode}`);
    }
    try {
      const resp = await fetch(`${url}/v1/questions`, {
        headers: { Authorization: `Bearer ${owner}` },
      });
      if (resp.ok) return;
    } catch {
      // not listening yet
    }
    await sleep(100);
  }
  throw new Error("PDS did not become reachable within 10s");
}

async function ownerPost(url: string, owner: string, path: string, body: unknown): Promise<unknown> {
  const resp = await fetch(url + path, {
    method: "POST",
    headers: { Authorization: `Bearer ${owner}`, "Content-Type": "application/json" },
    body: JSON.stringify(body),
  });
  if (!resp.ok) throw new Error(`${path} -> HTTP ${resp.status}: ${await resp.text()}`);
  return resp.json();
}

/** Start a PDS, install a question, upload a synthetic recording, compute. */
export async function startPds(): Promise<PdsFixture> {
  const dir = mkdtempSync(join(tmpdir(), "npds-console-"));
  const port = 18000 + Math.floor(Math.random() * 8000);
  const owner = `owner-${Math.random().toString(36).slice(2)}`;
  const url = `http://127.0.0.1:${port}`;
  const configPath = join(dir, "pds.json");
  writeFileSync(
    configPath,
    JSON.stringify({
      listen_addr: `127.0.0.1:${port}`,
      storage_path: join(dir, "store"),
      owner_credential: owner,
      schedule_tick_seconds: 3600,
    }),
  );

  const child = spawn(PYTHON, ["-m", "neuropds.cli", "serve", "--config", configPath], {
    stdio: ["ignore", "pipe", "pipe"],
  });
  await waitForServer(url, owner, child);

  await ownerPost(url, owner, "/v1/questions", {
    question_id: "band_power",
    inputs: ["RAW"],
    output_schema_id: "band_power",
    required_scope: "q:band_power",
    params: { band: "alpha" },
  });
  await ownerPost(url, owner, "/v1/questions", {
    question_id: "drowsiness",
    inputs: ["RAW"],
    output_schema_id: "drowsiness",
    required_scope: "q:drowsiness",
    params: {},
  });

  // A recording via the collector path: generate with the CLI, upload over HTTP.
  const specPath = join(dir, "spec.txt");
  writeFileSync(
    specPath,
    "rate\t128\nseconds\t8\nuser\talice\nchannel\tCZ\nsin\tamp=10 freq=10 phase=0\nnoise\tstdev=1\n",
  );
  const recPath = join(dir, "rec.eeg");
  const gen = spawnSync(PYTHON, [
    "-m", "neuropds.cli", "generate", "--spec", specPath, "--seed", "1", "--out", recPath,
  ]);
  if (gen.status !== 0) throw new Error(`generate failed: ${gen.stderr}`);

  const grant = (await fetch(`${url}/v1/grants`, {
    method: "POST",
    headers: { "Content-Type": "application/json" },
    body: JSON.stringify({ client_id: "fixture-collector", scopes: ["upload"] }),
  }).then((r) => r.json())) as { grant_id: string };
  const decision = (await ownerPost(url, owner, `/v1/grants/${grant.grant_id}/decision`, {
    approve: true,
  })) as { token: string };
  const upload = await fetch(`${url}/v1/recordings`, {
    method: "POST",
    headers: { Authorization: `Bearer ${decision.token}` },
    body: new Uint8Array(readFileSync(recPath)),
  });
  if (upload.status !== 201) throw new Error(`upload failed: ${await upload.text()}`);
  await ownerPost(url, owner, "/v1/compute/run", {});

  return {
    url,
    owner,
    ownerHeaders: { Authorization: `Bearer ${owner}` },
    stop: () => {
      child.kill("SIGTERM");
    },
  };
}
