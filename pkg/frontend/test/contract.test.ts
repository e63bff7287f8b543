// Contract round trip against the real service: create -> answer every
// query with a scripted chooser -> fetch the menu. Every payload passes
// through the zod schemas via ApiClient, and the duplicate-click rule is
// exercised against the live endpoint.

import { spawn, ChildProcess } from "node:child_process";
import { mkdtempSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";
import { afterAll, beforeAll, describe, expect, it } from "vitest";
import { ApiClient } from "../src/client";
import { pollUntil } from "../src/poll";

const PORT = 8765 + Math.floor(Math.random() * 1000);
const BASE = `http://127.0.0.1:${PORT}`;

let server: ChildProcess;

beforeAll(async () => {
  const dataDir = mkdtempSync(join(tmpdir(), "pp-ui-test-"));
  server = spawn(
    "python3",
    [
      "-c",
      "import uvicorn; from prefpareto.service import create_app; " +
        `uvicorn.run(create_app(data_dir=${JSON.stringify(dataDir)}), ` +
        `host='127.0.0.1', port=${PORT}, log_level='warning')`,
    ],
    { stdio: ["ignore", "inherit", "inherit"] },
  );
  await pollUntil(
    async () => {
      try {
        const resp = await fetch(`${BASE}/v1/problems`);
        return resp.ok;
      } catch {
        return false;
      }
    },
    (ok) => ok,
    { intervalMs: 250, backoffFactor: 1.1, timeoutMs: 60_000 },
  );
});

afterAll(() => {
  server?.kill();
});

describe("live service round trip", () => {
  it("create -> query/respond loop -> menu, schema-validated throughout", async () => {
    const client = new ApiClient(BASE);
    const catalog = await client.problems();
    expect(catalog.problems.map((p) => p.id)).toContain("dtlz7-5-3");

    const created = await client.createSession({
      problem: "dtlz7-5-3",
      variant: "int-obj",
      budget: 2,
      initial_pairs: 2,
      dm_mode: "live",
      seed: 42,
      fit_iters: 60,
      eval_budget: 120,
      restarts: 2,
    });
    const id = created.id;

    const clicks: { seq: number; choice: 1 | 2 }[] = [];
    for (;;) {
      const state = await pollUntil(
        () => client.state(id),
        (s) => !s.busy,
        { intervalMs: 150, backoffFactor: 1.2 },
      );
      expect(state.error).toBeNull();
      if (state.status === "finished") {
        break;
      }
      const query = await client.query(id);
      // scripted human: prefer the option whose first objective is better
      // under its orientation
      const [a, b] = query.options.map((o) => o.objectives[0]);
      const better = query.orientations[0] === "min" ? (a <= b ? 1 : 2) : a >= b ? 1 : 2;
      const ack = await client.respond(id, query.seq, better as 1 | 2);
      expect(ack.seq).toBe(query.seq);
      clicks.push({ seq: query.seq, choice: better as 1 | 2 });
    }
    expect(clicks.length).toBe(4); // 2 warm-up pairs + budget 2

    // the server saw exactly the clicks we sent, in order
    const menu = await client.menu(id, 3);
    expect(menu.k).toBe(3);
    expect(menu.objectives).toHaveLength(3);
    expect(menu.prefix_values.length).toBe(3);
    const sorted = [...menu.prefix_values].sort((x, y) => x - y);
    expect(menu.prefix_values).toEqual(sorted); // nested menus never lose value
  });

  it("duplicate clicks reach the server once and conflict afterwards", async () => {
    const client = new ApiClient(BASE);
    const created = await client.createSession({
      problem: "dtlz7-5-3",
      variant: "int-obj",
      budget: 1,
      initial_pairs: 2,
      dm_mode: "live",
      seed: 43,
      fit_iters: 60,
      eval_budget: 120,
      restarts: 2,
    });
    const id = created.id;
    const query = await client.query(id);

    // the client-side guard merges same-seq submissions into one request
    const [first, second] = await Promise.all([
      client.respond(id, query.seq, 1),
      client.respond(id, query.seq, 1),
    ]);
    expect(first).toEqual(second);

    // a forced raw re-send of the same sequence number is rejected with 409
    // and does not advance the session
    const raw = await fetch(`${BASE}/v1/sessions/${id}/response`, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify({ seq: query.seq, choice: 2 }),
    });
    expect(raw.status).toBe(409);
    const next = await client.query(id);
    expect(next.seq).toBe(query.seq + 1);
  });

  it("resuming mid-session returns the same pending query", async () => {
    const client = new ApiClient(BASE);
    const created = await client.createSession({
      problem: "dtlz7-5-3",
      variant: "int-obj",
      budget: 1,
      initial_pairs: 2,
      dm_mode: "live",
      seed: 44,
      fit_iters: 60,
      eval_budget: 120,
      restarts: 2,
    });
    const before = await client.query(created.id);
    // a page refresh keeps only the session id; a fresh client must see
    // exactly the same pending query
    const fresh = new ApiClient(BASE);
    const after = await fresh.query(created.id);
    expect(after).toEqual(before);
  });
});
