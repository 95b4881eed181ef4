/** DOM wiring for the four workbench panels. Rendering only: all figures
 * come from the store's API payloads. */

import { InstanceSummary, UfEntry } from "./api.js";
import { barChart, lineChart, plfChart, rangeChart, Series } from "./charts.js";
import { exact, fmt, fmtSigned, pct } from "./format.js";
import { compareEntries, Store, StoreState } from "./state.js";

const PARAM_FIELDS = [
  "indifference_pct", "aspiration_pct", "reference_pct", "alpha", "beta",
  "steepness", "tier_utility", "income", "penalty",
] as const;

const OBJECTIVE_COLORS: Record<string, string> = { mmu: "#4878d0", msu: "#d65f5f" };

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  attrs: Record<string, string> = {},
  ...children: (Node | string)[]
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  for (const [k, v] of Object.entries(attrs)) {
    if (k === "class") node.className = v;
    else node.setAttribute(k, v);
  }
  node.append(...children);
  return node;
}

export function mount(root: HTMLElement, store: Store): void {
  root.innerHTML = `
    <header>
      <h1>Case-mix planner</h1>
      <span id="session-tag" class="muted"></span>
    </header>
    <div class="banner hidden" id="zeroed-banner" role="alert">
      Degenerate zero solution: with the current curves, no caseload beats
      treating nobody on the max-min objective. Flat zero-utility segments
      are the usual cause; slope them or lower the thresholds.
    </div>
    <main>
      <section id="panel-editor"><h2>Utility functions</h2>
        <div class="row">
          <div id="editor-controls"></div>
          <figure><div id="plf-plot"></div>
            <figcaption id="plf-caption" class="muted"></figcaption></figure>
        </div>
        <p id="config-error" class="error hidden"></p>
      </section>
      <section id="panel-solve"><h2>Solve</h2>
        <div id="solve-controls"></div>
        <p id="solve-error" class="error hidden"></p>
        <div id="scorecards" class="cards"></div>
        <div class="row">
          <figure><figcaption>caseload (patients treated)</figcaption>
            <div id="caseload-chart"></div></figure>
          <figure><figcaption>case mix (% of total)</figcaption>
            <div id="casemix-chart"></div></figure>
        </div>
        <div id="utilities-table"></div>
        <h3>History</h3>
        <div id="history-table"></div>
        <div id="compare-table"></div>
      </section>
      <section id="panel-sweep"><h2>Sensitivity sweep</h2>
        <div id="sweep-controls"></div>
        <p id="sweep-error" class="error hidden"></p>
        <div class="row" id="sweep-charts"></div>
        <figure><figcaption>case-mix variation across the sweep</figcaption>
          <div id="sweep-range"></div></figure>
      </section>
      <section id="panel-pareto"><h2>Dominance audit</h2>
        <div id="pareto-controls"></div>
        <p id="pareto-error" class="error hidden"></p>
        <div id="pareto-result"></div>
        <figure><figcaption>current caseload with repaired overlay</figcaption>
          <div id="pareto-chart"></div></figure>
      </section>
    </main>`;

  buildSolveControls(store);
  buildSweepControls(store);
  buildParetoControls(store);
  store.subscribe((state) => render(state, store));
  render(store.state, store);
}

function render(state: StoreState, store: Store): void {
  byId("session-tag").textContent = `session ${state.session}`;
  byId("zeroed-banner").classList.toggle("hidden", !state.zeroedBanner);
  renderEditor(state, store);
  renderError("config-error", state.configError);
  renderError("solve-error", state.solveError);
  renderError("sweep-error", state.sweepError);
  renderError("pareto-error", state.paretoError);
  renderResult(state);
  renderHistory(state, store);
  renderSweep(state);
  renderPareto(state);
}

function byId(id: string): HTMLElement {
  return document.getElementById(id) as HTMLElement;
}

function renderError(id: string, message: string | null): void {
  const node = byId(id);
  node.classList.toggle("hidden", !message);
  node.textContent = message ?? "";
}

// -- utility editor -----------------------------------------------------------

function entryForm(
  instance: InstanceSummary,
  entry: UfEntry,
  onChange: (e: UfEntry) => void,
): HTMLElement {
  const wrap = el("div", { class: "entry-form" });
  const select = el("select");
  for (const t of Object.keys(instance.templates)) {
    const opt = el("option", { value: t }, `${t} - ${instance.templates[t]!.label}`);
    if (t === entry.template) opt.selected = true;
    select.append(opt);
  }
  select.addEventListener("change", () => onChange({ template: select.value }));
  wrap.append(el("label", {}, "template ", select));
  const info = instance.templates[entry.template];
  const relevant = PARAM_FIELDS.filter((f) => {
    const bare = f.replace(/_pct$/, "");
    return info?.params.includes(bare) || info?.optional.includes(bare)
      || info?.params.includes(f) || info?.optional.includes(f);
  });
  for (const field of relevant) {
    const input = el("input", {
      type: "number", step: "any",
      value: entry[field] !== undefined ? String(entry[field]) : "",
      placeholder: field.endsWith("_pct") ? "% of bound" : "",
    });
    input.addEventListener("change", () => {
      const next = { ...entry };
      if (input.value === "") delete next[field];
      else next[field] = Number(input.value);
      onChange(next);
    });
    wrap.append(el("label", {}, `${field} `, input));
  }
  return wrap;
}

function renderEditor(state: StoreState, store: Store): void {
  const host = byId("editor-controls");
  host.innerHTML = "";
  if (!state.instance) {
    host.append("loading instance...");
    return;
  }
  const instance = state.instance;
  host.append(el("h3", {}, "Default for all groups"));
  host.append(entryForm(instance, state.defaultEntry, (entry) => {
    store.setDefaultEntry(entry);
    void store.refreshPreview(null);
  }));

  const groupSel = el("select", { id: "preview-group" });
  for (const g of instance.groups) {
    const opt = el("option", { value: g.id },
      `${g.id} (bound ${fmt(instance.bounds[g.id])})`);
    if (g.id === (state.previewGroup ?? instance.groups[0]?.id)) opt.selected = true;
    groupSel.append(opt);
  }
  groupSel.addEventListener("change", () => void store.refreshPreview(groupSel.value));
  host.append(el("h3", {}, "Per-group override"), el("label", {}, "group ", groupSel));

  const gid = state.previewGroup ?? instance.groups[0]?.id;
  if (gid) {
    const editor = state.groupEditors[gid] ?? { useDefault: true, entry: { ...state.defaultEntry } };
    const toggle = el("input", { type: "checkbox" });
    toggle.checked = editor.useDefault;
    toggle.addEventListener("change", () => {
      store.setGroupEditor(gid, {
        useDefault: toggle.checked,
        entry: toggle.checked ? { ...state.defaultEntry } : { ...editor.entry },
      });
      void store.refreshPreview(gid);
    });
    host.append(el("label", { class: "toggle" }, toggle, " use the default curve"));
    if (!editor.useDefault) {
      host.append(entryForm(instance, editor.entry, (entry) => {
        store.setGroupEditor(gid, { useDefault: false, entry });
        void store.refreshPreview(gid);
      }));
    }
  }

  const plot = byId("plf-plot");
  const caption = byId("plf-caption");
  if (state.previewError) {
    plot.innerHTML = "";
    caption.textContent = state.previewError;
    caption.classList.add("error");
  } else if (state.preview) {
    caption.classList.remove("error");
    plot.innerHTML = plfChart(state.preview.x, state.preview.u, state.preview.jumps);
    caption.textContent =
      `${state.previewGroup}: bound ${fmt(state.preview.upper_bound)}, ` +
      `${state.preview.is_concave ? "concave (plain LP)" : "needs piece selection"}` +
      (state.preview.jumps.length ? `, ${state.preview.jumps.length} jump(s)` : "");
  }
}

// -- solve panel ----------------------------------------------------------------

function buildSolveControls(store: Store): void {
  const host = byId("solve-controls");
  const objective = el("select", { id: "objective" });
  for (const [v, label] of [["mmu", "max-min utility (MMU)"],
                            ["msu", "max-sum utility (MSU)"],
                            ["asf", "custom blend"],
                            ["gam", "goal attainment"],
                            ["gpm", "goal programming"]] as const) {
    objective.append(el("option", { value: v }, label));
  }
  const eps1 = el("input", { id: "eps1", type: "number", step: "any", value: "1" });
  const eps2 = el("input", { id: "eps2", type: "number", step: "any", value: "0.001" });
  const gpmMode = el("select", { id: "gpm-mode" });
  gpmMode.append(el("option", { value: "sum" }, "sum of deviations"));
  gpmMode.append(el("option", { value: "minimax-under" }, "worst under-deviation"));
  const run = el("button", { id: "run-solve" }, "Solve");
  run.addEventListener("click", () => {
    const kind = objective.value;
    if (kind === "gam" || kind === "gpm") {
      void store.runSolve({ method: kind, goals: "bounds",
                            gpm_mode: gpmMode.value, relative: true });
    } else if (kind === "asf") {
      void store.runSolve({ method: "ufm", objective: "asf",
                            eps1: Number(eps1.value), eps2: Number(eps2.value) });
    } else {
      void store.runSolve({ method: "ufm", objective: kind });
    }
  });
  host.append(
    el("label", {}, "objective ", objective),
    el("label", {}, "eps1 ", eps1),
    el("label", {}, "eps2 ", eps2),
    el("label", {}, "GPM mode ", gpmMode),
    run,
  );
}

function renderResult(state: StoreState): void {
  const cards = byId("scorecards");
  const result = state.lastResult;
  cards.innerHTML = "";
  byId("run-solve")?.toggleAttribute("disabled", state.solveInFlight);
  if (!result) return;
  const entries: [string, string][] = [
    ["total treated", exact(result.total_output)],
    ["sum of utilities", exact(result.sum_utility)],
    ["minimum utility", exact(result.min_utility)],
    ["method", `${result.method}${result.zeroed ? " (zeroed)" : ""}`],
  ];
  for (const [label, value] of entries) {
    cards.append(el("div", { class: "card" },
      el("div", { class: "card-label" }, label),
      el("div", { class: "card-value" }, value)));
  }
  const groups = state.instance?.groups.map((g) => g.id) ?? [];
  const totals = result.caseload
    ? groups.map((g) => result.caseload!.group_totals[g] ?? 0) : [];
  byId("caseload-chart").innerHTML = barChart(groups, totals);
  const mix = result.case_mix_pct;
  byId("casemix-chart").innerHTML = mix
    ? barChart(groups, groups.map((g) => mix[g] ?? 0), 720, 240, "#6acc64")
    : "";
  const utable = byId("utilities-table");
  utable.innerHTML = "";
  if (result.utilities) {
    const table = el("table");
    table.append(el("tr", {},
      el("th", {}, "group"), el("th", {}, "output"), el("th", {}, "utility")));
    for (const g of groups) {
      table.append(el("tr", {},
        el("td", {}, g),
        el("td", {}, fmt(result.caseload?.group_totals[g] ?? null)),
        el("td", {}, fmt(result.utilities[g] ?? null))));
    }
    utable.append(table);
  }
}

function renderHistory(state: StoreState, store: Store): void {
  const host = byId("history-table");
  host.innerHTML = "";
  if (!state.history.length) return;
  const table = el("table");
  table.append(el("tr", {},
    el("th", {}, "#"), el("th", {}, "method"), el("th", {}, "N"),
    el("th", {}, "sum u"), el("th", {}, "min u"), el("th", {}, "zeroed"),
    el("th", {}, "compare")));
  for (const entry of state.history) {
    const pick = el("input", { type: "checkbox" });
    pick.checked = state.compare?.includes(entry.index) ?? false;
    pick.addEventListener("change", () => toggleCompare(store, entry.index));
    table.append(el("tr", {},
      el("td", {}, String(entry.index)),
      el("td", {}, entry.summary.method),
      el("td", {}, fmt(entry.summary.total_output)),
      el("td", {}, fmt(entry.summary.sum_utility)),
      el("td", {}, fmt(entry.summary.min_utility)),
      el("td", {}, entry.summary.zeroed ? "yes" : ""),
      el("td", {}, pick)));
  }
  host.append(table);

  const cmp = byId("compare-table");
  cmp.innerHTML = "";
  if (state.compare) {
    const [ia, ib] = state.compare;
    const a = state.history.find((e) => e.index === ia);
    const b = state.history.find((e) => e.index === ib);
    if (a && b) {
      const table2 = el("table");
      table2.append(el("tr", {},
        el("th", {}, "metric"), el("th", {}, `run ${ia}`),
        el("th", {}, `run ${ib}`), el("th", {}, "diff")));
      for (const row of compareEntries(a, b)) {
        table2.append(el("tr", {},
          el("td", {}, row.metric), el("td", {}, fmt(row.a)),
          el("td", {}, fmt(row.b)), el("td", {}, fmtSigned(row.diff))));
      }
      cmp.append(el("h4", {}, `Run ${ia} vs run ${ib}`), table2);
    }
  }
}

function toggleCompare(store: Store, index: number): void {
  const current = store.state.compare ?? [];
  let next = current.filter((i) => i !== index);
  if (next.length === current.length) next = [...current, index].slice(-2);
  store.patch({ compare: next.length === 2 ? [next[0]!, next[1]!] : null });
}

// -- sweep panel ------------------------------------------------------------------

function buildSweepControls(store: Store): void {
  const host = byId("sweep-controls");
  const template = el("input", { id: "sweep-template", value: "UF3" });
  const param = el("input", { id: "sweep-param", value: "aspiration" });
  const from = el("input", { type: "number", value: "10", step: "any" });
  const to = el("input", { type: "number", value: "90", step: "any" });
  const step = el("input", { type: "number", value: "10", step: "any" });
  const run = el("button", {}, "Run sweep");
  run.addEventListener("click", () => void store.runSweep({
    template: template.value,
    param: param.value,
    from: Number(from.value),
    to: Number(to.value),
    step: Number(step.value),
    objectives: ["mmu", "msu"],
  }));
  host.append(
    el("label", {}, "template ", template), el("label", {}, "parameter ", param),
    el("label", {}, "from % ", from), el("label", {}, "to % ", to),
    el("label", {}, "step ", step), run);
}

function renderSweep(state: StoreState): void {
  const charts = byId("sweep-charts");
  const range = byId("sweep-range");
  charts.innerHTML = "";
  range.innerHTML = "";
  const report = state.sweep;
  if (!report) return;
  const metrics: ["N" | "sum_u" | "min_u", string][] = [
    ["N", "total treated"], ["sum_u", "sum of utilities"], ["min_u", "minimum utility"]];
  for (const [key, label] of metrics) {
    const series: Series[] = [];
    for (const objective of ["mmu", "msu"]) {
      const points = report.rows
        .filter((r) => r.objective === objective && r.status === "optimal"
                && r[key] !== null)
        .map((r) => [Array.isArray(r.value) ? r.value[0]! : r.value, r[key]!] as [number, number]);
      if (points.length) {
        series.push({ label: objective.toUpperCase(),
                      color: OBJECTIVE_COLORS[objective]!, points });
      }
    }
    charts.append(el("figure", {}, el("figcaption", {}, label),
      fromHtml(lineChart(series, 420, 220, report.param))));
  }
  const groups = Object.keys(report.bounds);
  range.innerHTML = rangeChart(groups, report.case_mix_diff);
}

function fromHtml(markup: string): HTMLElement {
  const div = el("div");
  div.innerHTML = markup;
  return div;
}

// -- pareto panel -------------------------------------------------------------------

function buildParetoControls(store: Store): void {
  const host = byId("pareto-controls");
  const run = el("button", {}, "Audit latest solve");
  run.addEventListener("click", () => void store.runParetoCheck("latest"));
  host.append(run);
}

function renderPareto(state: StoreState): void {
  const host = byId("pareto-result");
  const chart = byId("pareto-chart");
  host.innerHTML = "";
  chart.innerHTML = "";
  const audit = state.pareto;
  if (!audit) return;
  const verdict = audit.is_pareto
    ? "Pareto-optimal: no group can gain without another losing."
    : `Dominated: ${fmt(audit.diff)} more patients are attainable ` +
      `(${pct(audit.diff_pct)}) without reducing any group.`;
  host.append(
    el("p", { class: audit.is_pareto ? "ok" : "warn" }, verdict),
    el("p", { class: "muted" },
      `current total ${exact(audit.base_total)}, repaired total ` +
      `${exact(audit.corrected_total)}${audit.zeroed_base ? " (zeroed base)" : ""}`));
  const base = state.lastResult?.caseload?.group_totals ?? {};
  const groups = state.instance?.groups.map((g) => g.id) ?? Object.keys(base);
  chart.innerHTML = barChart(
    groups, groups.map((g) => base[g] ?? 0), 720, 240, "#4878d0",
    groups.map((g) => audit.corrected.group_totals[g] ?? 0));
}
