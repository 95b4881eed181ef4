/** Workbench state: one planning session's what-if loop.
 *
 * The store orchestrates API calls and keeps the latest payloads; every
 * displayed figure is taken verbatim from those payloads. Mutations go
 * through async actions; subscribers re-render after each change.
 */

import {
  ApiClient,
  ApiError,
  HistoryEntry,
  InstanceSummary,
  ParetoAudit,
  PlfPreview,
  SolveRequest,
  SolveResult,
  SweepReport,
  UfConfig,
  UfEntry,
} from "./api.js";

export interface GroupEditor {
  useDefault: boolean;
  entry: UfEntry;
}

export interface SweepForm {
  template: string;
  param: string;
  from: number;
  to: number;
  step: number;
  objectives: string[];
}

export interface StoreState {
  session: string;
  instance: InstanceSummary | null;
  defaultEntry: UfEntry;
  groupEditors: Record<string, GroupEditor>;
  configError: string | null;
  configDirty: boolean;
  solveInFlight: boolean;
  lastResult: SolveResult | null;
  zeroedBanner: boolean;
  solveError: string | null;
  history: HistoryEntry[];
  compare: [number, number] | null;
  preview: PlfPreview | null;
  previewGroup: string | null;
  previewError: string | null;
  sweep: SweepReport | null;
  sweepError: string | null;
  pareto: ParetoAudit | null;
  paretoError: string | null;
}

export const DEFAULT_ENTRY: UfEntry = { template: "UF3", aspiration_pct: 40 };

export function initialState(session: string): StoreState {
  return {
    session,
    instance: null,
    defaultEntry: { ...DEFAULT_ENTRY },
    groupEditors: {},
    configError: null,
    configDirty: true,
    solveInFlight: false,
    lastResult: null,
    zeroedBanner: false,
    solveError: null,
    history: [],
    compare: null,
    preview: null,
    previewGroup: null,
    previewError: null,
    sweep: null,
    sweepError: null,
    pareto: null,
    paretoError: null,
  };
}

/** Session id from the URL (shareable what-if state), else a fresh one. */
export function sessionFromUrl(search: string): string {
  const match = /[?&]session=([^&]+)/.exec(search);
  if (match) return decodeURIComponent(match[1]!);
  return `s-${Math.random().toString(36).slice(2, 10)}`;
}

export function buildConfig(state: StoreState): UfConfig {
  const config: UfConfig = { default: { ...state.defaultEntry } };
  for (const [gid, editor] of Object.entries(state.groupEditors)) {
    if (!editor.useDefault) config[gid] = { ...editor.entry };
  }
  return config;
}

/** Difference rows between two history entries (display arithmetic only). */
export function compareEntries(
  a: HistoryEntry,
  b: HistoryEntry,
): { metric: string; a: number | null; b: number | null; diff: number | null }[] {
  const metrics: [string, (e: HistoryEntry) => number | null][] = [
    ["total output", (e) => e.summary.total_output],
    ["sum of utilities", (e) => e.summary.sum_utility],
    ["minimum utility", (e) => e.summary.min_utility],
  ];
  return metrics.map(([metric, get]) => {
    const va = get(a);
    const vb = get(b);
    return {
      metric,
      a: va,
      b: vb,
      diff: va !== null && vb !== null ? vb - va : null,
    };
  });
}

export type Listener = (state: StoreState) => void;

export class Store {
  state: StoreState;
  private listeners: Listener[] = [];

  constructor(
    public api: ApiClient,
    session: string,
  ) {
    this.state = initialState(session);
  }

  subscribe(fn: Listener): void {
    this.listeners.push(fn);
  }

  private emit(): void {
    for (const fn of this.listeners) fn(this.state);
  }

  patch(partial: Partial<StoreState>): void {
    Object.assign(this.state, partial);
    this.emit();
  }

  async load(): Promise<void> {
    const instance = await this.api.instance();
    const editors: Record<string, GroupEditor> = {};
    for (const g of instance.groups) {
      editors[g.id] = { useDefault: true, entry: { ...DEFAULT_ENTRY } };
    }
    this.patch({ instance, groupEditors: editors });
    const existing = await this.api.getUfConfig(this.state.session);
    if (existing.uf_config) this.adoptConfig(existing.uf_config);
  }

  adoptConfig(config: UfConfig): void {
    const editors = { ...this.state.groupEditors };
    const def = config["default"];
    for (const gid of Object.keys(editors)) {
      const entry = config[gid];
      editors[gid] = entry
        ? { useDefault: false, entry: { ...entry } }
        : { useDefault: true, entry: { ...(def ?? DEFAULT_ENTRY) } };
    }
    this.patch({
      defaultEntry: { ...(def ?? DEFAULT_ENTRY) },
      groupEditors: editors,
      configDirty: false,
    });
  }

  setDefaultEntry(entry: UfEntry): void {
    this.patch({ defaultEntry: entry, configDirty: true, configError: null });
  }

  setGroupEditor(gid: string, editor: GroupEditor): void {
    this.patch({
      groupEditors: { ...this.state.groupEditors, [gid]: editor },
      configDirty: true,
      configError: null,
    });
  }

  /** Push the edited config; inline error (e.g. aspiration above the
   * attainable bound) lands in configError. */
  async pushConfig(): Promise<boolean> {
    try {
      await this.api.putUfConfig(this.state.session, buildConfig(this.state));
      this.patch({ configError: null, configDirty: false });
      return true;
    } catch (err) {
      this.patch({ configError: describe(err) });
      return false;
    }
  }

  async refreshPreview(group: string | null): Promise<void> {
    const gid = group ?? this.state.previewGroup ?? this.state.instance?.groups[0]?.id;
    if (!gid) return;
    const editor = this.state.groupEditors[gid];
    const entry = editor && !editor.useDefault ? editor.entry : this.state.defaultEntry;
    const { template, weight: _weight, ...params } = entry;
    try {
      const preview = await this.api.preview({
        template,
        params: params as Record<string, number | string>,
        group: gid,
        points: 200,
      });
      this.patch({ preview, previewGroup: gid, previewError: null });
    } catch (err) {
      this.patch({ preview: null, previewGroup: gid, previewError: describe(err) });
    }
  }

  async runSolve(req: SolveRequest): Promise<void> {
    if (this.state.solveInFlight) return;
    this.patch({ solveInFlight: true, solveError: null, zeroedBanner: false });
    try {
      if (req.method === "ufm" || req.method === undefined) {
        const ok = await this.pushConfig();
        if (!ok) {
          this.patch({ solveInFlight: false });
          return;
        }
      }
      const result = await this.api.solve(this.state.session, req);
      this.patch({ lastResult: result, zeroedBanner: result.zeroed });
    } catch (err) {
      if (err instanceof ApiError && err.resultDetail) {
        const result = err.resultDetail;
        this.patch({ lastResult: result, zeroedBanner: result.zeroed, solveError: null });
      } else {
        this.patch({ solveError: describe(err) });
      }
    } finally {
      this.patch({ solveInFlight: false });
      await this.refreshHistory();
    }
  }

  async refreshHistory(): Promise<void> {
    try {
      const payload = await this.api.history(this.state.session);
      this.patch({ history: payload.entries });
    } catch {
      /* history is advisory; leave the previous copy */
    }
  }

  async runSweep(form: SweepForm): Promise<void> {
    const values: number[] = [];
    for (let v = form.from; v <= form.to + 1e-9; v += form.step) {
      values.push(Number(v.toFixed(9)));
    }
    try {
      const report = await this.api.sweep(this.state.session, {
        template: form.template,
        param: form.param,
        values,
        objectives: form.objectives,
      });
      this.patch({ sweep: report, sweepError: null });
    } catch (err) {
      this.patch({ sweepError: describe(err) });
    }
  }

  async runParetoCheck(which: string | number = "latest"): Promise<void> {
    try {
      const audit = await this.api.paretoCheck(this.state.session, which);
      this.patch({ pareto: audit, paretoError: null });
    } catch (err) {
      this.patch({ paretoError: describe(err) });
    }
  }
}

function describe(err: unknown): string {
  if (err instanceof ApiError) {
    return typeof err.detail === "string" ? err.detail : JSON.stringify(err.detail);
  }
  return err instanceof Error ? err.message : String(err);
}
