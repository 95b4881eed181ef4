import { describe, expect, it, vi } from "vitest";

import { ApiClient, ApiError, SolveResult } from "../src/api.js";
import {
  buildConfig, compareEntries, initialState, sessionFromUrl, Store,
} from "../src/state.js";

function fakeInstance() {
  return {
    name: "toy",
    horizon_weeks: 1,
    resources: { counts: {}, beds: {}, items: [] },
    groups: [
      { id: "A", subtypes: ["S0"], treatment_limit: null },
      { id: "B", subtypes: ["S0"], treatment_limit: null },
    ],
    bounds: { A: 100, B: 50 },
    total_bound: 150,
    templates: { UF1: { label: "linear", params: [], optional: [] } },
  };
}

function okResult(n: number): SolveResult {
  return {
    method: "asf", status: "optimal", objective_value: n,
    caseload: { group_totals: { A: n, B: 0 }, subtype_totals: {}, allocation: {} },
    utilities: { A: 1, B: 0 }, total_output: n, sum_utility: 1,
    min_utility: 0, case_mix_pct: { A: 100, B: 0 }, zeroed: false,
    details: {}, solver: {},
  };
}

function mockApi(overrides: Partial<Record<keyof ApiClient, unknown>> = {}): ApiClient {
  const api = new ApiClient("");
  Object.assign(api, {
    instance: vi.fn(async () => fakeInstance()),
    getUfConfig: vi.fn(async () => ({ session: "s", uf_config: null })),
    putUfConfig: vi.fn(async () => ({ session: "s" })),
    solve: vi.fn(async () => okResult(42)),
    history: vi.fn(async () => ({ session: "s", entries: [] })),
    ...overrides,
  });
  return api;
}

describe("session id", () => {
  it("reads the session from the query string", () => {
    expect(sessionFromUrl("?session=abc%20d")).toBe("abc d");
    expect(sessionFromUrl("?x=1&session=s7")).toBe("s7");
  });

  it("generates a fresh id otherwise", () => {
    const a = sessionFromUrl("");
    const b = sessionFromUrl("");
    expect(a).toMatch(/^s-/);
    expect(a).not.toBe(b);
  });
});

describe("config building", () => {
  it("default covers all groups until an override is made", () => {
    const state = initialState("s");
    state.groupEditors = {
      A: { useDefault: true, entry: { template: "UF1" } },
      B: { useDefault: true, entry: { template: "UF1" } },
    };
    const cfg = buildConfig(state);
    expect(Object.keys(cfg)).toEqual(["default"]);
  });

  it("overrides appear as per-group entries", () => {
    const state = initialState("s");
    state.groupEditors = {
      A: { useDefault: false, entry: { template: "UF8", indifference_pct: 30 } },
      B: { useDefault: true, entry: { template: "UF1" } },
    };
    const cfg = buildConfig(state);
    expect(cfg["A"]).toEqual({ template: "UF8", indifference_pct: 30 });
    expect(cfg["B"]).toBeUndefined();
  });
});

describe("store", () => {
  it("loads the instance and seeds per-group editors", async () => {
    const store = new Store(mockApi(), "s");
    await store.load();
    expect(store.state.instance?.groups.length).toBe(2);
    expect(Object.keys(store.state.groupEditors)).toEqual(["A", "B"]);
  });

  it("solve pushes the config first and stores the result", async () => {
    const api = mockApi();
    const store = new Store(api, "s");
    await store.load();
    await store.runSolve({ method: "ufm", objective: "msu" });
    expect(api.putUfConfig).toHaveBeenCalledOnce();
    expect(store.state.lastResult?.total_output).toBe(42);
    expect(store.state.zeroedBanner).toBe(false);
  });

  it("a zeroed 422 response still lands as a result with the banner up", async () => {
    const zeroed = { ...okResult(0), zeroed: true, total_output: 0 };
    const api = mockApi({
      solve: vi.fn(async () => {
        throw new ApiError(422, zeroed);
      }),
    });
    const store = new Store(api, "s");
    await store.load();
    await store.runSolve({ method: "ufm", objective: "mmu" });
    expect(store.state.zeroedBanner).toBe(true);
    expect(store.state.lastResult?.total_output).toBe(0);
    expect(store.state.solveError).toBeNull();
  });

  it("config validation errors surface inline and block the solve", async () => {
    const api = mockApi({
      putUfConfig: vi.fn(async () => {
        throw new ApiError(400, "group A: aspiration 999 exceeds the bound");
      }),
    });
    const store = new Store(api, "s");
    await store.load();
    await store.runSolve({ method: "ufm", objective: "mmu" });
    expect(store.state.configError).toContain("aspiration");
    expect(api.solve).not.toHaveBeenCalled();
  });

  it("only one solve runs at a time", async () => {
    let resolveSolve!: (r: SolveResult) => void;
    const api = mockApi({
      solve: vi.fn(() => new Promise<SolveResult>((res) => (resolveSolve = res))),
    });
    const store = new Store(api, "s");
    await store.load();
    const first = store.runSolve({ method: "gam" });
    const second = store.runSolve({ method: "gam" });
    resolveSolve(okResult(1));
    await Promise.all([first, second]);
    expect(api.solve).toHaveBeenCalledTimes(1);
  });
});

describe("history comparison", () => {
  it("diffs the three headline metrics", () => {
    const mk = (n: number, su: number, mu: number) => ({
      index: 0, request: {}, case_mix_pct: null, utilities: null,
      summary: { method: "asf", total_output: n, sum_utility: su,
                 min_utility: mu, zeroed: false },
    });
    const rows = compareEntries(mk(100, 50, 10), mk(120, 45, 10));
    expect(rows[0]).toMatchObject({ metric: "total output", diff: 20 });
    expect(rows[1]).toMatchObject({ diff: -5 });
    expect(rows[2]).toMatchObject({ diff: 0 });
  });
});
