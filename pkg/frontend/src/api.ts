// Typed client for the workbench HTTP API. Every mutation goes through here;
// the UI keeps no authoritative state of its own.

import type {
  LayoutResponse,
  LegendResponse,
  MatrixKind,
  MatrixResponse,
  NodeType,
  ProgressResponse,
  ResultsDoc,
  SimulationRequest,
  TemplatesFile,
  TopologyDoc,
} from "./types.js";

export class ApiRequestError extends Error {
  readonly status: number;
  readonly code: string;
  readonly path: string | null;

  constructor(status: number, code: string, message: string, path: string | null) {
    super(message);
    this.status = status;
    this.code = code;
    this.path = path;
  }
}

export class ApiClient {
  constructor(private readonly base: string = "") {}

  private async request<T>(method: string, path: string, body?: unknown,
                           rawBody?: string): Promise<T> {
    const init: RequestInit = { method, headers: {} };
    if (rawBody !== undefined) {
      init.body = rawBody;
      (init.headers as Record<string, string>)["Content-Type"] = "application/json";
    } else if (body !== undefined) {
      init.body = JSON.stringify(body);
      (init.headers as Record<string, string>)["Content-Type"] = "application/json";
    }
    const response = await fetch(this.base + path, init);
    const text = await response.text();
    if (!response.ok) {
      let code = `HTTP${response.status}`;
      let message = text;
      let errorPath: string | null = null;
      try {
        const parsed = JSON.parse(text);
        code = parsed.error ?? code;
        message = parsed.message ?? message;
        errorPath = parsed.path ?? null;
      } catch {
        // non-JSON error body: keep the raw text
      }
      throw new ApiRequestError(response.status, code, message, errorPath);
    }
    return (text ? JSON.parse(text) : undefined) as T;
  }

  getTopology(): Promise<TopologyDoc> {
    return this.request("GET", "/api/topology");
  }

  addNode(name: string, type: NodeType, template: string): Promise<unknown> {
    return this.request("POST", "/api/nodes", { name, type, template });
  }

  addEdge(a: string, b: string, distance_m: number,
          attenuation_db_km: number): Promise<unknown> {
    return this.request("POST", "/api/edges", { a, b, distance_m, attenuation_db_km });
  }

  patchNode(name: string,
            patch: { type?: NodeType; template?: string }): Promise<unknown> {
    return this.request("PATCH", `/api/nodes/${encodeURIComponent(name)}`, patch);
  }

  deleteElement(id: string): Promise<unknown> {
    return this.request("DELETE", `/api/elements/${encodeURIComponent(id)}`);
  }

  getLegend(): Promise<LegendResponse> {
    return this.request("GET", "/api/legend");
  }

  getMatrix(kind: MatrixKind): Promise<MatrixResponse> {
    return this.request("GET", `/api/matrices/${kind}`);
  }

  putMatrixEntry(kind: MatrixKind, i: string, j: string,
                 value: number): Promise<unknown> {
    return this.request("PUT", `/api/matrices/${kind}`, { i, j, value });
  }

  getTemplates(): Promise<TemplatesFile> {
    return this.request("GET", "/api/templates");
  }

  putTemplate(id: string, type: string,
              params: Record<string, unknown>): Promise<unknown> {
    return this.request("PUT", `/api/templates/${encodeURIComponent(id)}`,
                        { type, params });
  }

  deleteTemplate(id: string): Promise<unknown> {
    return this.request("DELETE", `/api/templates/${encodeURIComponent(id)}`);
  }

  layout(seed = 0): Promise<LayoutResponse> {
    return this.request("POST", "/api/layout", { seed });
  }

  startSimulation(cfg: SimulationRequest): Promise<{ name: string }> {
    return this.request("POST", "/api/simulations", cfg);
  }

  getProgress(name: string): Promise<ProgressResponse> {
    return this.request("GET", `/api/simulations/${encodeURIComponent(name)}/progress`);
  }

  getResults(name: string): Promise<ResultsDoc> {
    return this.request("GET", `/api/simulations/${encodeURIComponent(name)}/results`);
  }

  exportDocument(kind: "topology" | "templates" | "simulation"): Promise<unknown> {
    return this.request("GET", `/api/export/${kind}`);
  }

  importDocument(kind: "topology" | "templates" | "simulation",
                 text: string): Promise<unknown> {
    return this.request("POST", `/api/import/${kind}`, undefined, text);
  }
}
