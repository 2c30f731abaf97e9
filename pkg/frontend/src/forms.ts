// Pure form logic: template filtering per node type and client-side input
// gating. The server remains the authority; these checks only stop requests
// that could never succeed.

import type { MatrixKind, NodeType, TemplateDoc } from "./types.js";

// node type -> template type its dropdown may offer
export const NODE_TEMPLATE_COMPAT: Record<NodeType, string> = {
  QuantumRouter: "QuantumRouter",
  BSMNode: "BSM",
};

export function templateOptions(templates: TemplateDoc[],
                                nodeType: NodeType): TemplateDoc[] {
  const wanted = NODE_TEMPLATE_COMPAT[nodeType];
  return templates.filter((t) => t.type === wanted);
}

export interface ValueCheck {
  ok: boolean;
  value?: number;
  error?: string;
}

export function checkMatrixValue(kind: MatrixKind, raw: string): ValueCheck {
  const value = Number(raw);
  if (raw.trim() === "" || Number.isNaN(value) || !Number.isFinite(value)) {
    return { ok: false, error: "enter a number" };
  }
  if (value < 0) {
    return { ok: false, error: "must be non-negative" };
  }
  if (kind === "qc_tdm" && !Number.isInteger(value)) {
    return { ok: false, error: "TDM frames must be integers" };
  }
  return { ok: true, value };
}

export interface NodeFormInput {
  name: string;
  type: NodeType;
  template: string;
}

export function checkNodeForm(input: NodeFormInput,
                              templates: TemplateDoc[]): Record<string, string> {
  const errors: Record<string, string> = {};
  if (!/^[A-Za-z0-9_][A-Za-z0-9_.\-]*$/.test(input.name)) {
    errors.name = "letters, digits, and . _ - only";
  }
  const options = templateOptions(templates, input.type);
  if (!options.some((t) => t.id === input.template)) {
    errors.template = "pick a template matching the node type";
  }
  return errors;
}

export function checkEdgeForm(a: string, b: string, distance: string,
                              attenuation: string): Record<string, string> {
  const errors: Record<string, string> = {};
  if (!a) errors.a = "pick the first endpoint";
  if (!b) errors.b = "pick the second endpoint";
  if (a && b && a === b) errors.b = "endpoints must differ";
  const d = Number(distance);
  if (Number.isNaN(d) || d < 0) errors.distance = "distance must be >= 0 meters";
  const att = Number(attenuation);
  if (Number.isNaN(att) || att < 0) errors.attenuation = "attenuation must be >= 0 dB/km";
  return errors;
}

export interface SimulationFormInput {
  name: string;
  duration_s: string;
  seed: string;
  request_rate_hz: string;
  memories_per_request: string;
  target_fidelity: string;
  swap_success_prob: string;
}

export function checkSimulationForm(input: SimulationFormInput): Record<string, string> {
  const errors: Record<string, string> = {};
  if (!/^[A-Za-z0-9._\-]+$/.test(input.name)) {
    errors.name = "run name must be filesystem-safe";
  }
  if (!(Number(input.duration_s) > 0)) errors.duration_s = "duration must be > 0 s";
  if (!Number.isInteger(Number(input.seed))) errors.seed = "seed must be an integer";
  if (!(Number(input.request_rate_hz) >= 0)) {
    errors.request_rate_hz = "rate must be >= 0";
  }
  if (!(Number.isInteger(Number(input.memories_per_request))
        && Number(input.memories_per_request) >= 1)) {
    errors.memories_per_request = "memories must be a positive integer";
  }
  for (const key of ["target_fidelity", "swap_success_prob"] as const) {
    const v = Number(input[key]);
    if (Number.isNaN(v) || v < 0 || v > 1) errors[key] = "must be within [0, 1]";
  }
  return errors;
}
