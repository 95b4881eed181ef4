/** Round-trip acceptance against the real planning service.
 *
 * Spawns `casemix serve` on the bundled hospital instance, drives the UI
 * store exactly as the browser panels do, and checks the displayed
 * numbers against direct API calls.
 */
import { spawn, ChildProcess } from "node:child_process";
import { afterAll, beforeAll, describe, expect, it } from "vitest";

import { ApiClient } from "../src/api.js";
import { Store } from "../src/state.js";
import { exact } from "../src/format.js";

const PORT = 8931;
const BASE = `http://127.0.0.1:${PORT}`;

let server: ChildProcess;

async function waitForServer(timeoutMs = 60_000): Promise<void> {
  const deadline = Date.now() + timeoutMs;
  while (Date.now() < deadline) {
    try {
      const resp = await fetch(`${BASE}/api/health`);
      if (resp.ok) return;
    } catch {
      /* not up yet */
    }
    await new Promise((r) => setTimeout(r, 300));
  }
  throw new Error("planning service did not come up");
}

beforeAll(async () => {
  server = spawn("casemix", ["serve", "--port", String(PORT)], {
    stdio: "ignore",
  });
  await waitForServer();
}, 90_000);

afterAll(() => {
  server?.kill();
});

describe("UI round trip", () => {
  it("editing the aspiration from 10% to 30% and solving shows the same N "
     + "as direct API calls, bit for bit", async () => {
    const store = new Store(new ApiClient(BASE), "ui-roundtrip");
    await store.load();

    store.setDefaultEntry({ template: "UF3", aspiration_pct: 10 });
    await store.runSolve({ method: "ufm", objective: "mmu",
                           tie_break: "min-output" });
    const shown10 = exact(store.state.lastResult?.total_output);

    store.setDefaultEntry({ template: "UF3", aspiration_pct: 30 });
    await store.runSolve({ method: "ufm", objective: "mmu",
                           tie_break: "min-output" });
    const shown30 = exact(store.state.lastResult?.total_output);

    // independent client, separate session, same requests
    const direct = new ApiClient(BASE);
    await direct.putUfConfig("direct-check",
                             { default: { template: "UF3", aspiration_pct: 10 } });
    const d10 = await direct.solve("direct-check",
                                   { method: "ufm", objective: "mmu",
                                     tie_break: "min-output" });
    await direct.putUfConfig("direct-check",
                             { default: { template: "UF3", aspiration_pct: 30 } });
    const d30 = await direct.solve("direct-check",
                                   { method: "ufm", objective: "mmu",
                                     tie_break: "min-output" });

    expect(shown10).toBe(exact(d10.total_output));
    expect(shown30).toBe(exact(d30.total_output));
    expect(shown10).not.toBe(shown30);
    // the session history kept both runs for renegotiation
    expect(store.state.history.length).toBe(2);
  }, 60_000);

  it("a 40% indifference tier on the max-min objective raises the zeroed "
     + "banner", async () => {
    const store = new Store(new ApiClient(BASE), "ui-zeroed");
    await store.load();
    store.setDefaultEntry({ template: "UF2", indifference_pct: 40 });
    await store.runSolve({ method: "ufm", objective: "mmu" });
    expect(store.state.zeroedBanner).toBe(true);
    expect(store.state.lastResult?.zeroed).toBe(true);
    expect(store.state.lastResult?.total_output).toBe(0);
  }, 60_000);

  it("curve preview agrees with server-side evaluation within 1e-6 at all "
     + "sampled points", async () => {
    const store = new Store(new ApiClient(BASE), "ui-preview");
    await store.load();
    store.setDefaultEntry({ template: "UF8", indifference_pct: 30 });
    await store.refreshPreview("CARD");
    const preview = store.state.preview!;
    expect(preview.x.length).toBe(200);

    // evaluate the returned piecewise description independently
    const { anchor, breakpoints, slopes, domain_max } = preview.plf;
    const evalPlf = (n: number): number => {
      let value = anchor;
      let cursor = 0;
      let si = 0;
      let k = 0;
      while (k < breakpoints.length) {
        const b = breakpoints[k]!;
        const dup = k + 1 < breakpoints.length && breakpoints[k + 1] === b;
        const upto = Math.min(n, b);
        if (upto > cursor) value += slopes[si]! * (upto - cursor);
        if (n < b) return value;
        cursor = Math.max(cursor, b);
        if (dup) {
          if (n >= b) value += slopes[si + 1]!;
          si += 2;
          k += 2;
        } else {
          si += 1;
          k += 1;
        }
      }
      if (n > cursor) value += slopes[si]! * (Math.min(n, domain_max) - cursor);
      return value;
    };
    for (let i = 0; i < preview.x.length; i++) {
      expect(Math.abs(preview.u[i]! - evalPlf(preview.x[i]!))).toBeLessThanOrEqual(1e-6);
    }
    // the step lands where it was configured: 30% of the group's bound
    const bound = store.state.instance!.bounds["CARD"]!;
    const below = preview.x.map((x, i) => [x, preview.u[i]!] as const)
      .filter(([x]) => x < 0.3 * bound - 1e-9);
    expect(below.every(([, u]) => u === 0)).toBe(true);
    expect(preview.jumps.length).toBe(1);
  }, 60_000);

  it("the dominance audit of a plateau solve reports a positive repair gap",
     async () => {
    const store = new Store(new ApiClient(BASE), "ui-pareto");
    await store.load();
    store.setDefaultEntry({ template: "UF3", aspiration_pct: 10 });
    await store.runSolve({ method: "ufm", objective: "mmu",
                           tie_break: "min-output" });
    await store.runParetoCheck("latest");
    const audit = store.state.pareto!;
    expect(audit.is_pareto).toBe(false);
    expect(audit.diff).toBeGreaterThan(0);
    expect(audit.corrected_total).toBeGreaterThan(audit.base_total);
  }, 60_000);

  it("sweeps come back with rows and case-mix statistics for the charts",
     async () => {
    const store = new Store(new ApiClient(BASE), "ui-sweep");
    await store.load();
    await store.runSweep({ template: "UF3", param: "aspiration",
                           from: 10, to: 30, step: 10,
                           objectives: ["mmu", "msu"] });
    const report = store.state.sweep!;
    expect(report.rows.length).toBe(6);
    expect(Object.keys(report.case_mix_diff).length).toBeGreaterThan(0);
    const mmu10 = report.rows.find((r) => r.objective === "mmu" && r.value === 10)!;
    expect(mmu10.min_u).toBeGreaterThan(99.9);
  }, 120_000);
});
