/** Typed client for the casemix planning service. The UI displays numbers
 * from these payloads verbatim; it never recomputes utilities or caseloads. */

export interface InstanceSummary {
  name: string;
  horizon_weeks: number;
  resources: {
    counts: Record<string, number>;
    beds: Record<string, number>;
    items: { id: string; kind: string; bed_count: number; weekly_hours: number }[];
  };
  groups: { id: string; subtypes: string[]; treatment_limit: number | null }[];
  bounds: Record<string, number>;
  total_bound: number;
  templates: Record<string, { label: string; params: string[]; optional: string[] }>;
}

export interface Caseload {
  group_totals: Record<string, number>;
  subtype_totals: Record<string, number>;
  allocation: Record<string, number>;
}

export interface SolveResult {
  method: string;
  status: string;
  objective_value: number | null;
  caseload: Caseload | null;
  utilities: Record<string, number> | null;
  total_output: number | null;
  sum_utility: number | null;
  min_utility: number | null;
  case_mix_pct: Record<string, number> | null;
  zeroed: boolean;
  details: Record<string, unknown>;
  solver: Record<string, unknown>;
}

export interface SweepRow {
  value: number | number[];
  objective: string;
  N: number | null;
  sum_u: number | null;
  min_u: number | null;
  zeroed: boolean;
  status: string;
  error: string | null;
}

export interface SweepReport {
  template: string;
  param: string;
  pct: boolean;
  bounds: Record<string, number>;
  rows: SweepRow[];
  case_mix: Record<string, Record<string, number> | null>;
  case_mix_diff: Record<string, { min_pct: number; max_pct: number; range: number }>;
}

export interface ParetoAudit {
  which?: number;
  is_pareto: boolean;
  base_total: number;
  corrected_total: number;
  diff: number;
  diff_pct: number;
  zeroed_base: boolean;
  corrected: Caseload;
}

export interface PlfPreview {
  upper_bound: number;
  x: number[];
  u: number[];
  plf: { anchor: number; breakpoints: number[]; slopes: number[]; domain_max: number };
  is_concave: boolean;
  jumps: [number, number][];
}

export interface HistoryEntry {
  index: number;
  request: Record<string, unknown>;
  summary: {
    method: string;
    total_output: number | null;
    sum_utility: number | null;
    min_utility: number | null;
    zeroed: boolean;
  };
  case_mix_pct: Record<string, number> | null;
  utilities: Record<string, number> | null;
}

export interface UfEntry {
  template: string;
  weight?: number;
  [param: string]: string | number | undefined;
}

export type UfConfig = Record<string, UfEntry>;

export interface SolveRequest {
  objective?: string;
  eps1?: number | null;
  eps2?: number | null;
  method?: string;
  goals?: Record<string, number> | string | null;
  gam_weights?: string;
  gpm_mode?: string;
  relative?: boolean;
  tie_break?: string;
}

/** Error carrying the HTTP status and the server's diagnostic payload. */
export class ApiError extends Error {
  constructor(
    public status: number,
    public detail: unknown,
  ) {
    super(typeof detail === "string" ? detail : `HTTP ${status}`);
  }

  /** 422 solve responses still carry the full result (e.g. zeroed runs). */
  get resultDetail(): SolveResult | null {
    if (this.detail && typeof this.detail === "object" && "zeroed" in (this.detail as object)) {
      return this.detail as SolveResult;
    }
    return null;
  }
}

export class ApiClient {
  constructor(public baseUrl: string = "") {}

  private async request<T>(method: string, path: string, body?: unknown): Promise<T> {
    const resp = await fetch(this.baseUrl + path, {
      method,
      headers: body !== undefined ? { "Content-Type": "application/json" } : undefined,
      body: body !== undefined ? JSON.stringify(body) : undefined,
    });
    const payload = resp.status === 204 ? null : await resp.json();
    if (!resp.ok) {
      throw new ApiError(resp.status, (payload as { detail?: unknown })?.detail ?? payload);
    }
    return payload as T;
  }

  instance(): Promise<InstanceSummary> {
    return this.request("GET", "/api/instance");
  }

  putUfConfig(session: string, config: UfConfig): Promise<{ session: string }> {
    return this.request("PUT", `/api/sessions/${session}/uf-config`, config);
  }

  getUfConfig(session: string): Promise<{ session: string; uf_config: UfConfig | null }> {
    return this.request("GET", `/api/sessions/${session}/uf-config`);
  }

  solve(session: string, req: SolveRequest): Promise<SolveResult> {
    return this.request("POST", `/api/sessions/${session}/solve`, req);
  }

  sweep(
    session: string,
    req: {
      template: string;
      param: string;
      values: (number | number[])[];
      pct?: boolean;
      objectives?: string[];
      fixed_params?: Record<string, number>;
    },
  ): Promise<SweepReport> {
    return this.request("POST", `/api/sessions/${session}/sweep`, req);
  }

  paretoCheck(session: string, which: string | number = "latest"): Promise<ParetoAudit> {
    return this.request("POST", `/api/sessions/${session}/pareto-check`, { which });
  }

  history(session: string): Promise<{ session: string; entries: HistoryEntry[] }> {
    return this.request("GET", `/api/sessions/${session}/history`);
  }

  preview(req: {
    template: string;
    params?: Record<string, number | string>;
    group?: string;
    upper_bound?: number;
    points?: number;
  }): Promise<PlfPreview> {
    return this.request("POST", "/api/uf/preview", req);
  }
}
