// Wire types mirroring the backend's JSON document schemas.

export type NodeType = "QuantumRouter" | "BSMNode";

export interface NodeDoc {
  name: string;
  type: NodeType;
  template: string;
}

export interface EdgeDoc {
  a: string;
  b: string;
  distance_m: number;
  attenuation_db_km: number;
}

export interface TopologyDoc {
  format: number;
  name: string;
  nodes: NodeDoc[];
  edges: EdgeDoc[];
  cc_latency_ps: number[][];
  qc_tdm: number[][];
}

export interface TemplateDoc {
  id: string;
  type: string;
  params: Record<string, unknown>;
}

export interface TemplatesFile {
  format: number;
  templates: TemplateDoc[];
}

export interface LegendResponse {
  types: string[];
}

export type MatrixKind = "cc_latency" | "qc_tdm";

export interface MatrixResponse {
  names: string[];
  matrix: number[][];
}

export interface LayoutResponse {
  positions: Record<string, [number, number]>;
  iterations_used: number;
  converged: boolean;
}

export type RunStatus = "Running" | "Done" | "Failed";

export interface ProgressResponse {
  name: string;
  status: RunStatus;
  progress: number;
  error: string | null;
}

export interface ResultsNode {
  name: string;
  avg_wait_time_ps: number;
  reservations: number;
  throughput_pairs_per_s: number;
}

export interface ResultsDoc {
  format: number;
  name: string;
  duration_s: number;
  nodes: ResultsNode[];
  totals: Record<string, number>;
}

export interface SimulationRequest {
  name: string;
  duration_s: number;
  seed: number;
  request_rate_hz: number;
  memories_per_request: number;
  target_fidelity: number;
  swap_success_prob: number;
}

export interface ApiErrorBody {
  error: string;
  message: string;
  path: string | null;
}
