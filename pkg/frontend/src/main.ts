// App wiring: panels, event handlers, and refresh-from-server after every
// mutation. Reloading the page reproduces the same view from server state.

import { ApiClient, ApiRequestError } from "./api.js";
import {
  checkEdgeForm,
  checkMatrixValue,
  checkNodeForm,
  checkSimulationForm,
  templateOptions,
} from "./forms.js";
import { drawScene, hitTest } from "./graph.js";
import { isMonotone, pollProgress } from "./polling.js";
import {
  applySymmetricEdit,
  legendModel,
  matrixGridModel,
  resultsModel,
  sceneModel,
  type MatrixGrid,
  type Scene,
} from "./render.js";
import type { MatrixKind, NodeType, TemplateDoc, TopologyDoc } from "./types.js";

const api = new ApiClient("");

interface AppState {
  topology: TopologyDoc | null;
  templates: TemplateDoc[];
  scene: Scene | null;
  selected: string | null;
  matrixKind: MatrixKind;
  grid: MatrixGrid | null;
}

const state: AppState = {
  topology: null,
  templates: [],
  scene: null,
  selected: null,
  matrixKind: "cc_latency",
  grid: null,
};

const $ = <T extends HTMLElement>(id: string): T => {
  const el = document.getElementById(id);
  if (!el) throw new Error(`missing element #${id}`);
  return el as T;
};

function flash(message: string, isError = true): void {
  const bar = $("status");
  bar.textContent = message;
  bar.className = isError ? "status error" : "status ok";
  if (message) setTimeout(() => { bar.textContent = ""; bar.className = "status"; }, 6000);
}

function fieldError(form: HTMLElement, field: string, message: string): void {
  const slot = form.querySelector(`[data-error-for="${field}"]`);
  if (slot) slot.textContent = message;
}

function clearFieldErrors(form: HTMLElement): void {
  form.querySelectorAll("[data-error-for]").forEach((el) => { el.textContent = ""; });
}

function reportApiError(form: HTMLElement | null, err: unknown): void {
  if (err instanceof ApiRequestError) {
    if (err.status === 409) {
      flash(`Conflict: ${err.message}. Reload the page to pick up the latest state.`);
      return;
    }
    if (form && err.path) {
      fieldError(form, err.path, `${err.code}: ${err.message}`);
      return;
    }
    flash(`${err.code}: ${err.message}`);
    return;
  }
  flash(String(err));
}

// -- refresh ----------------------------------------------------------------

async function refresh(): Promise<void> {
  state.topology = await api.getTopology();
  state.templates = (await api.getTemplates()).templates;
  const legend = await api.getLegend();
  renderLegend(legend.types);
  await renderGraph();
  renderSelectors();
  renderTemplateList();
  await renderMatrix();
}

function renderLegend(types: string[]): void {
  const host = $("legend");
  host.innerHTML = "";
  for (const entry of legendModel(types)) {
    const item = document.createElement("div");
    item.className = "legend-entry";
    const swatch = document.createElement("span");
    swatch.className = `swatch ${entry.shape}`;
    swatch.style.backgroundColor = entry.color;
    const label = document.createElement("span");
    label.textContent = entry.type;
    item.append(swatch, label);
    host.append(item);
  }
}

async function renderGraph(): Promise<void> {
  const canvas = $("graph") as unknown as HTMLCanvasElement;
  if (!state.topology || state.topology.nodes.length === 0) {
    state.scene = { nodes: [], edges: [], empty: true };
    drawScene(canvas, state.scene, null);
    return;
  }
  const layout = await api.layout(0);
  state.scene = sceneModel(state.topology, layout.positions,
                           canvas.width, canvas.height);
  drawScene(canvas, state.scene, state.selected);
}

function option(value: string, label?: string): HTMLOptionElement {
  const el = document.createElement("option");
  el.value = value;
  el.textContent = label ?? value;
  return el;
}

function fillTemplateDropdown(select: HTMLSelectElement, nodeType: NodeType): void {
  select.innerHTML = "";
  for (const t of templateOptions(state.templates, nodeType)) {
    select.append(option(t.id));
  }
}

function renderSelectors(): void {
  const routers = state.topology?.nodes.map((n) => n.name) ?? [];
  for (const id of ["edge-a", "edge-b"]) {
    const select = $(id) as unknown as HTMLSelectElement;
    const current = select.value;
    select.innerHTML = "";
    routers.forEach((name) => select.append(option(name)));
    if (routers.includes(current)) select.value = current;
  }
  fillTemplateDropdown($("node-template") as unknown as HTMLSelectElement,
                       ($("node-type") as unknown as HTMLSelectElement).value as NodeType);
  renderEditPanel();
}

function renderEditPanel(): void {
  const panel = $("edit-panel");
  const node = state.topology?.nodes.find((n) => n.name === state.selected);
  panel.style.display = node ? "block" : "none";
  if (!node) return;
  $("edit-name").textContent = node.name;
  const typeSelect = $("edit-type") as unknown as HTMLSelectElement;
  typeSelect.value = node.type;
  typeSelect.disabled = node.type === "BSMNode";
  const tmplSelect = $("edit-template") as unknown as HTMLSelectElement;
  fillTemplateDropdown(tmplSelect, typeSelect.value as NodeType);
  tmplSelect.value = node.template;
}

function renderTemplateList(): void {
  const host = $("template-list");
  host.innerHTML = "";
  for (const t of state.templates) {
    const row = document.createElement("div");
    row.className = "template-row";
    const label = document.createElement("code");
    label.textContent = `${t.id} (${t.type})`;
    const del = document.createElement("button");
    del.textContent = "delete";
    del.addEventListener("click", async () => {
      try {
        await api.deleteTemplate(t.id);
        await refresh();
      } catch (err) {
        reportApiError(null, err);
      }
    });
    row.append(label, del);
    host.append(row);
  }
}

// -- matrices -----------------------------------------------------------------

async function renderMatrix(): Promise<void> {
  const response = await api.getMatrix(state.matrixKind);
  state.grid = matrixGridModel(state.matrixKind, response);
  drawMatrix();
}

function drawMatrix(): void {
  const host = $("matrix");
  host.innerHTML = "";
  const grid = state.grid;
  if (!grid || grid.names.length === 0) {
    host.textContent = "No nodes yet.";
    return;
  }
  const table = document.createElement("table");
  const head = document.createElement("tr");
  head.append(document.createElement("th"));
  grid.names.forEach((n) => {
    const th = document.createElement("th");
    th.textContent = n;
    head.append(th);
  });
  table.append(head);
  for (const row of grid.rows) {
    const tr = document.createElement("tr");
    const th = document.createElement("th");
    th.textContent = row[0]?.i ?? "";
    tr.append(th);
    for (const cell of row) {
      const td = document.createElement("td");
      const input = document.createElement("input");
      input.value = String(cell.value);
      input.disabled = !cell.editable;
      input.addEventListener("change", () => onMatrixEdit(cell.i, cell.j, input));
      td.append(input);
      tr.append(td);
    }
    table.append(tr);
  }
  host.append(table);
}

async function onMatrixEdit(i: string, j: string,
                            input: HTMLInputElement): Promise<void> {
  const verdict = checkMatrixValue(state.matrixKind, input.value);
  if (!verdict.ok) {
    input.classList.add("invalid");
    input.title = verdict.error ?? "invalid";
    return; // rejected client side, no request sent
  }
  input.classList.remove("invalid");
  input.title = "";
  try {
    await api.putMatrixEntry(state.matrixKind, i, j, verdict.value!);
    if (state.grid) {
      state.grid = applySymmetricEdit(state.grid, i, j, verdict.value!);
      drawMatrix(); // the mirror cell updates in the same view
    }
  } catch (err) {
    reportApiError(null, err);
    await renderMatrix();
  }
}

// -- simulation panel -------------------------------------------------------------

async function onLaunch(): Promise<void> {
  const form = $("sim-form");
  clearFieldErrors(form);
  const read = (id: string) => ($(id) as unknown as HTMLInputElement).value;
  const input = {
    name: read("sim-name"),
    duration_s: read("sim-duration"),
    seed: read("sim-seed"),
    request_rate_hz: read("sim-rate"),
    memories_per_request: read("sim-memories"),
    target_fidelity: read("sim-fidelity"),
    swap_success_prob: read("sim-swap"),
  };
  const errors = checkSimulationForm(input);
  if (Object.keys(errors).length > 0) {
    Object.entries(errors).forEach(([field, msg]) => fieldError(form, field, msg));
    return;
  }
  const bar = $("sim-progress") as unknown as HTMLProgressElement;
  const status = $("sim-status");
  try {
    const { name } = await api.startSimulation({
      name: input.name,
      duration_s: Number(input.duration_s),
      seed: Number(input.seed),
      request_rate_hz: Number(input.request_rate_hz),
      memories_per_request: Number(input.memories_per_request),
      target_fidelity: Number(input.target_fidelity),
      swap_success_prob: Number(input.swap_success_prob),
    });
    status.textContent = "running...";
    const outcome = await pollProgress(api, name, 500, (sample) => {
      bar.value = Math.max(bar.value, sample.progress); // never steps back
    });
    if (!isMonotone(outcome.observations)) {
      flash("progress trace decreased; server contract violated");
    }
    if (outcome.final.status === "Failed") {
      status.textContent = `failed: ${outcome.final.error}`;
      return;
    }
    bar.value = 1;
    status.textContent = "done";
    const results = await api.getResults(name);
    const host = $("results");
    host.innerHTML = "";
    const table = document.createElement("table");
    const head = document.createElement("tr");
    ["node", "avg wait (ps)", "reservations", "pairs/s"].forEach((h) => {
      const th = document.createElement("th");
      th.textContent = h;
      head.append(th);
    });
    table.append(head);
    for (const row of resultsModel(results)) {
      const tr = document.createElement("tr");
      [row.name, row.avgWaitPs.toFixed(0), String(row.reservations),
       row.throughput.toFixed(4)].forEach((v) => {
        const td = document.createElement("td");
        td.textContent = v;
        tr.append(td);
      });
      table.append(tr);
    }
    host.append(table);
    const download = $("results-download") as unknown as HTMLAnchorElement;
    download.href = URL.createObjectURL(
      new Blob([JSON.stringify(results, null, 2)], { type: "application/json" }));
    download.download = `${name}-results.json`;
    download.style.display = "inline";
  } catch (err) {
    if (err instanceof ApiRequestError && err.code === "RunExists") {
      fieldError(form, "name", "run name taken; rename or remove the old run");
      return;
    }
    reportApiError(form, err);
  }
}

// -- event wiring --------------------------------------------------------------------

function wire(): void {
  ($("node-type") as unknown as HTMLSelectElement).addEventListener("change", (ev) => {
    // changing the type immediately refilters the template options
    fillTemplateDropdown($("node-template") as unknown as HTMLSelectElement,
                         (ev.target as HTMLSelectElement).value as NodeType);
  });

  $("node-add").addEventListener("click", async () => {
    const form = $("node-form");
    clearFieldErrors(form);
    const name = ($("node-name") as unknown as HTMLInputElement).value;
    const type = ($("node-type") as unknown as HTMLSelectElement).value as NodeType;
    const template = ($("node-template") as unknown as HTMLSelectElement).value;
    const errors = checkNodeForm({ name, type, template }, state.templates);
    if (Object.keys(errors).length > 0) {
      Object.entries(errors).forEach(([f, m]) => fieldError(form, f, m));
      return;
    }
    try {
      await api.addNode(name, type, template);
      ($("node-name") as unknown as HTMLInputElement).value = "";
      await refresh();
    } catch (err) {
      reportApiError(form, err);
    }
  });

  $("edge-add").addEventListener("click", async () => {
    const form = $("edge-form");
    clearFieldErrors(form);
    const a = ($("edge-a") as unknown as HTMLSelectElement).value;
    const b = ($("edge-b") as unknown as HTMLSelectElement).value;
    const distance = ($("edge-distance") as unknown as HTMLInputElement).value;
    const attenuation = ($("edge-attenuation") as unknown as HTMLInputElement).value;
    const errors = checkEdgeForm(a, b, distance, attenuation);
    if (Object.keys(errors).length > 0) {
      Object.entries(errors).forEach(([f, m]) => fieldError(form, f, m));
      return;
    }
    try {
      await api.addEdge(a, b, Number(distance), Number(attenuation));
      await refresh();
    } catch (err) {
      reportApiError(form, err);
    }
  });

  ($("edit-type") as unknown as HTMLSelectElement).addEventListener("change", (ev) => {
    fillTemplateDropdown($("edit-template") as unknown as HTMLSelectElement,
                         (ev.target as HTMLSelectElement).value as NodeType);
  });

  $("edit-apply").addEventListener("click", async () => {
    if (!state.selected) return;
    const form = $("edit-panel");
    clearFieldErrors(form);
    try {
      await api.patchNode(state.selected, {
        type: ($("edit-type") as unknown as HTMLSelectElement).value as NodeType,
        template: ($("edit-template") as unknown as HTMLSelectElement).value,
      });
      await refresh();
    } catch (err) {
      reportApiError(form, err);
    }
  });

  $("edit-delete").addEventListener("click", async () => {
    if (!state.selected) return;
    try {
      await api.deleteElement(state.selected);
      state.selected = null;
      await refresh();
    } catch (err) {
      reportApiError(null, err);
    }
  });

  const canvas = $("graph") as unknown as HTMLCanvasElement;
  canvas.addEventListener("click", (ev) => {
    if (!state.scene) return;
    const rect = canvas.getBoundingClientRect();
    const node = hitTest(state.scene, ev.clientX - rect.left, ev.clientY - rect.top);
    state.selected = node?.name ?? null;
    drawScene(canvas, state.scene, state.selected);
    renderEditPanel();
  });

  $("matrix-kind").addEventListener("change", async (ev) => {
    state.matrixKind = (ev.target as HTMLSelectElement).value as MatrixKind;
    await renderMatrix();
  });

  $("sim-launch").addEventListener("click", onLaunch);
}

wire();
refresh().catch((err) => flash(String(err)));
