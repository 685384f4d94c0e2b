// Single-screen companion for the service: setup forms, start/stop run
// control, live cost/space charts with baseline reference lines, a sortable
// schema table and a what-if grouping editor. The UI computes nothing
// itself; every displayed number comes from an API response.

import { ApiClient, ApiError, StreamFactory } from "./api.js";
import { renderChart } from "./chart.js";
import type { EpisodeEvent, SchemaRow, SortKey } from "./types.js";

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  attrs: Record<string, string> = {},
  text?: string,
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  for (const [key, value] of Object.entries(attrs)) node.setAttribute(key, value);
  if (text !== undefined) node.textContent = text;
  return node;
}

function svgChart(className: string): SVGSVGElement {
  const node = document.createElementNS("http://www.w3.org/2000/svg", "svg");
  node.setAttribute("class", className);
  return node;
}

export function parseGroupsText(text: string): number[][] {
  const groups: number[][] = [];
  for (const chunk of text.split("|")) {
    const cleaned = chunk.trim().replace(/^\{/, "").replace(/\}$/, "");
    if (!cleaned) throw new Error(`empty group in ${JSON.stringify(text)}`);
    const ids = cleaned.split(",").map((part) => {
      const token = part.trim();
      if (!/^\d+$/.test(token)) {
        throw new Error(`bad attribute id ${JSON.stringify(token)}`);
      }
      return Number(token);
    });
    groups.push(ids);
  }
  return groups;
}

export class App {
  events: EpisodeEvent[] = [];
  schemaSort: SortKey = "time";
  schemaRows: SchemaRow[] = [];
  lastStreamSince = 0;

  readonly costChart: SVGSVGElement;
  readonly spaceChart: SVGSVGElement;
  readonly schemaBody: HTMLTableSectionElement;
  readonly notices: HTMLElement;
  readonly statusLine: HTMLElement;
  readonly whatifResult: HTMLElement;
  readonly whatifInput: HTMLInputElement;
  readonly catalogView: HTMLElement;
  readonly manifestInput: HTMLTextAreaElement;
  readonly constraintsInput: HTMLTextAreaElement;
  readonly workloadInput: HTMLTextAreaElement;
  readonly paramsInput: HTMLTextAreaElement;

  private closeStream: (() => void) | null = null;

  constructor(
    readonly root: HTMLElement,
    private api: ApiClient,
    private openStream: StreamFactory,
  ) {
    this.notices = el("div", { class: "notices" });
    this.statusLine = el("div", { class: "status-line" }, "no run yet");
    this.costChart = svgChart("chart chart-cost");
    this.spaceChart = svgChart("chart chart-space");
    this.schemaBody = el("tbody");
    this.whatifResult = el("div", { class: "whatif-result" });
    this.whatifInput = el("input", { class: "whatif-groups", placeholder: "0,3|1|2" });
    this.catalogView = el("pre", { class: "catalog-view" }, "");
    this.manifestInput = el("textarea", { class: "in-manifest", rows: "6" });
    this.constraintsInput = el("textarea", { class: "in-constraints", rows: "4" });
    this.workloadInput = el("textarea", { class: "in-workload", rows: "6" });
    this.paramsInput = el("textarea", { class: "in-params", rows: "4" });
    this.paramsInput.value = JSON.stringify(
      { alpha: 0.1, gamma: 0.9, greedy: 0.9, episodes: 20, seed: 0 }, null, 1);
    this.build();
  }

  // ----- layout ------------------------------------------------------------

  private build(): void {
    this.root.appendChild(this.notices);

    const setup = el("section", { class: "panel panel-setup" });
    setup.appendChild(el("h2", {}, "Setup"));
    setup.appendChild(this.field("Dataset manifest", this.manifestInput,
      "btn-dataset", "Load dataset", () => this.loadDataset()));
    setup.appendChild(this.catalogView);
    setup.appendChild(this.field("Constraints (id = id per line)", this.constraintsInput,
      "btn-constraints", "Apply constraints", () => this.loadConstraints()));
    setup.appendChild(this.field("Workload (JSON)", this.workloadInput,
      "btn-workload", "Load workload", () => this.loadWorkload()));
    setup.appendChild(this.field("Parameters (JSON, baselines optional)", this.paramsInput,
      "btn-params", "Set parameters", () => this.loadParams()));
    this.root.appendChild(setup);

    const control = el("section", { class: "panel panel-control" });
    control.appendChild(el("h2", {}, "Run"));
    control.appendChild(this.button("btn-start", "Start", () => this.start()));
    control.appendChild(this.button("btn-stop", "Stop", () => this.stop()));
    control.appendChild(this.statusLine);
    this.root.appendChild(control);

    const charts = el("section", { class: "panel panel-charts" });
    const costBox = el("figure", { class: "chart-box" });
    costBox.appendChild(el("figcaption", {}, "Workload cost per episode"));
    costBox.appendChild(this.costChart);
    const spaceBox = el("figure", { class: "chart-box" });
    spaceBox.appendChild(el("figcaption", {}, "Storage per episode"));
    spaceBox.appendChild(this.spaceChart);
    charts.appendChild(costBox);
    charts.appendChild(spaceBox);
    this.root.appendChild(charts);

    const schemas = el("section", { class: "panel panel-schemas" });
    schemas.appendChild(el("h2", {}, "Schemas seen"));
    const table = el("table", { class: "schema-table" });
    const head = el("thead");
    const headRow = el("tr");
    headRow.appendChild(el("th", { class: "col-signature" }, "schema"));
    const timeHeader = el("th", { class: "col-time sortable" }, "time");
    timeHeader.addEventListener("click", () => void this.sortSchemas("time"));
    const spaceHeader = el("th", { class: "col-space sortable" }, "space");
    spaceHeader.addEventListener("click", () => void this.sortSchemas("space"));
    headRow.appendChild(timeHeader);
    headRow.appendChild(spaceHeader);
    head.appendChild(headRow);
    table.appendChild(head);
    table.appendChild(this.schemaBody);
    schemas.appendChild(table);
    this.root.appendChild(schemas);

    const whatif = el("section", { class: "panel panel-whatif" });
    whatif.appendChild(el("h2", {}, "What-if"));
    whatif.appendChild(this.whatifInput);
    whatif.appendChild(this.button("btn-whatif", "Execute", () => this.executeWhatif()));
    whatif.appendChild(this.whatifResult);
    this.root.appendChild(whatif);
  }

  private field(
    label: string,
    input: HTMLTextAreaElement,
    buttonClass: string,
    buttonText: string,
    action: () => Promise<void>,
  ): HTMLElement {
    const wrap = el("div", { class: "field" });
    wrap.appendChild(el("label", {}, label));
    wrap.appendChild(input);
    wrap.appendChild(this.button(buttonClass, buttonText, action));
    return wrap;
  }

  private button(className: string, text: string, action: () => Promise<void>): HTMLButtonElement {
    const node = el("button", { class: className }, text);
    node.addEventListener("click", () => void this.guard(action));
    return node;
  }

  // ----- error surface -----------------------------------------------------

  private async guard(action: () => Promise<void>): Promise<void> {
    try {
      await action();
    } catch (error) {
      const message = error instanceof ApiError
        ? `${error.status}: ${error.message}`
        : String(error instanceof Error ? error.message : error);
      this.notify(message);
    }
  }

  notify(message: string): void {
    const item = el("div", { class: "notice" }, message);
    const dismiss = el("button", { class: "notice-dismiss" }, "×");
    dismiss.addEventListener("click", () => item.remove());
    item.appendChild(dismiss);
    this.notices.appendChild(item);
  }

  // ----- setup actions -----------------------------------------------------

  async loadDataset(): Promise<void> {
    const doc = await this.api.postDataset(JSON.parse(this.manifestInput.value));
    this.catalogView.textContent = doc.attributes
      .map((a) => `${a.id}  ${a.entity}.${a.name}  (${a.model}, ${a.kind})`)
      .join("\n");
    this.statusLine.textContent = `dataset loaded: ${doc.attributes.length} attributes`;
  }

  async loadConstraints(): Promise<void> {
    const doc = await this.api.postConstraints(this.constraintsInput.value);
    this.statusLine.textContent =
      `constraints applied: ${doc.classes.length} equivalence class(es)`;
  }

  async loadWorkload(): Promise<void> {
    const doc = await this.api.postWorkload(JSON.parse(this.workloadInput.value));
    this.statusLine.textContent = `workload loaded: ${doc.queries.length} query(ies)`;
  }

  async loadParams(): Promise<void> {
    await this.api.postParams(JSON.parse(this.paramsInput.value));
    this.statusLine.textContent = "parameters set";
  }

  // ----- run control and live series ---------------------------------------

  async start(): Promise<void> {
    const started = await this.api.start();
    this.events = [];
    this.renderCharts();
    this.statusLine.textContent = `running ${started.run} (${started.episodes} episodes)`;
    this.subscribe(0);
  }

  async stop(): Promise<void> {
    await this.api.stop();
    this.statusLine.textContent = "stop requested";
  }

  private subscribe(since: number): void {
    this.closeStream?.();
    this.lastStreamSince = since;
    this.closeStream = this.openStream(
      since,
      (event) => this.onEvent(event),
      () => void this.onStreamEnd(),
    );
  }

  onEvent(event: EpisodeEvent): void {
    this.events.push(event);
    this.renderCharts();
    this.statusLine.textContent =
      `episode ${event.episode}: cost ${event.final_cost}, best ${event.best_cost}`;
  }

  private async onStreamEnd(): Promise<void> {
    this.closeStream = null;
    const status = await this.api.status();
    if (status.phase === "RUNNING") {
      // dropped connection: resume after the events already received
      this.subscribe(this.events.length);
      return;
    }
    this.statusLine.textContent =
      `${status.phase.toLowerCase()}: ${status.episode_done} episode(s)` +
      (status.best ? `, best cost ${status.best.cost}` : "");
    await this.sortSchemas(this.schemaSort);
  }

  private renderCharts(): void {
    const baselineTime = this.events.length
      ? this.events[this.events.length - 1].baseline_time : null;
    const baselineSpace = this.events.length
      ? this.events[this.events.length - 1].baseline_space : null;
    renderChart(this.costChart, this.events.map((e) => e.final_cost),
      { baseline: baselineTime, color: "#36c" });
    renderChart(this.spaceChart, this.events.map((e) => e.final_storage),
      { baseline: baselineSpace, color: "#2a7" });
  }

  // ----- schema table --------------------------------------------------------

  async sortSchemas(sort: SortKey): Promise<void> {
    this.schemaSort = sort;
    this.schemaRows = await this.api.schemas(sort);
    while (this.schemaBody.firstChild) this.schemaBody.removeChild(this.schemaBody.firstChild);
    for (const row of this.schemaRows) {
      const tr = el("tr", { class: "schema-row" });
      const sig = el("td", { class: "cell-signature" }, row.signature);
      tr.appendChild(sig);
      tr.appendChild(el("td", { class: "cell-time" }, String(row.cost)));
      tr.appendChild(el("td", { class: "cell-space" }, String(row.storage)));
      tr.addEventListener("dblclick", () => {
        this.whatifInput.value = row.signature;
      });
      this.schemaBody.appendChild(tr);
    }
  }

  // ----- what-if editor -------------------------------------------------------

  async executeWhatif(): Promise<void> {
    const groups = parseGroupsText(this.whatifInput.value);
    const outcome = await this.api.whatif(groups);
    if (outcome.realizable) {
      this.whatifResult.textContent =
        `cost ${outcome.cost}, storage ${outcome.storage} (${outcome.signature})`;
    } else {
      const [a, b] = outcome.violation ?? [NaN, NaN];
      this.whatifResult.textContent =
        `not realizable: attributes ${a} and ${b} cannot be joined`;
    }
  }

  dispose(): void {
    this.closeStream?.();
    this.closeStream = null;
  }
}

export function createApp(
  root: HTMLElement,
  api: ApiClient,
  openStream: StreamFactory,
): App {
  return new App(root, api, openStream);
}
