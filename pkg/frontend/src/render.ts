// Pure render models. The DOM layer draws exactly what these return, so the
// view is a function of server responses and nothing else.

import type {
  MatrixKind,
  MatrixResponse,
  NodeType,
  ResultsDoc,
  TopologyDoc,
} from "./types.js";

export const NODE_COLORS: Record<NodeType, string> = {
  QuantumRouter: "#2d7dd2",
  BSMNode: "#f0a030",
};

export const NODE_SHAPES: Record<NodeType, "circle" | "diamond"> = {
  QuantumRouter: "circle",
  BSMNode: "diamond",
};

export interface LegendEntry {
  type: NodeType;
  color: string;
  shape: "circle" | "diamond";
}

/** Legend entries for exactly the node types present, stable order. */
export function legendModel(types: string[]): LegendEntry[] {
  const order: NodeType[] = ["QuantumRouter", "BSMNode"];
  return order
    .filter((t) => types.includes(t))
    .map((t) => ({ type: t, color: NODE_COLORS[t], shape: NODE_SHAPES[t] }));
}

export interface SceneNode {
  name: string;
  type: NodeType;
  x: number;
  y: number;
  color: string;
  shape: "circle" | "diamond";
}

export interface SceneEdge {
  id: string;
  x1: number;
  y1: number;
  x2: number;
  y2: number;
}

export interface Scene {
  nodes: SceneNode[];
  edges: SceneEdge[];
  empty: boolean;
}

/** Fit server-computed positions into a width x height viewport with margins. */
export function sceneModel(topology: TopologyDoc,
                           positions: Record<string, [number, number]>,
                           width: number, height: number): Scene {
  if (topology.nodes.length === 0) {
    return { nodes: [], edges: [], empty: true };
  }
  const xs = topology.nodes.map((n) => positions[n.name]?.[0] ?? 0);
  const ys = topology.nodes.map((n) => positions[n.name]?.[1] ?? 0);
  const minX = Math.min(...xs), maxX = Math.max(...xs);
  const minY = Math.min(...ys), maxY = Math.max(...ys);
  const margin = 40;
  const spanX = Math.max(maxX - minX, 1e-9);
  const spanY = Math.max(maxY - minY, 1e-9);
  const scale = Math.min((width - 2 * margin) / spanX,
                         (height - 2 * margin) / spanY);
  const place = (name: string): [number, number] => {
    const [px, py] = positions[name] ?? [0, 0];
    return [margin + (px - minX) * scale + (width - 2 * margin - spanX * scale) / 2,
            margin + (py - minY) * scale + (height - 2 * margin - spanY * scale) / 2];
  };
  const nodes = topology.nodes.map((n) => {
    const [x, y] = place(n.name);
    return { name: n.name, type: n.type, x, y,
             color: NODE_COLORS[n.type], shape: NODE_SHAPES[n.type] };
  });
  const located = new Map(nodes.map((n) => [n.name, n]));
  const edges = topology.edges.map((e) => {
    const a = located.get(e.a)!;
    const b = located.get(e.b)!;
    return { id: `${e.a}--${e.b}`, x1: a.x, y1: a.y, x2: b.x, y2: b.y };
  });
  return { nodes, edges, empty: false };
}

export interface MatrixCell {
  i: string;
  j: string;
  value: number;
  editable: boolean;
}

export interface MatrixGrid {
  kind: MatrixKind;
  names: string[];
  rows: MatrixCell[][];
}

/** Editable symmetric grid; the latency diagonal is read-only. */
export function matrixGridModel(kind: MatrixKind,
                                response: MatrixResponse): MatrixGrid {
  const rows = response.names.map((iName, i) =>
    response.names.map((jName, j) => ({
      i: iName,
      j: jName,
      value: response.matrix[i]?.[j] ?? 0,
      editable: !(kind === "cc_latency" && i === j),
    })),
  );
  return { kind, names: response.names, rows };
}

/**
 * The grid update a single cell edit implies: the cell and its mirror change
 * together, in the same view, without waiting for a server round trip.
 */
export function applySymmetricEdit(grid: MatrixGrid, i: string, j: string,
                                   value: number): MatrixGrid {
  const rows = grid.rows.map((row) =>
    row.map((cell) =>
      (cell.i === i && cell.j === j) || (cell.i === j && cell.j === i)
        ? { ...cell, value }
        : cell,
    ),
  );
  return { ...grid, rows };
}

export interface ResultsRow {
  name: string;
  avgWaitPs: number;
  reservations: number;
  throughput: number;
}

export function resultsModel(doc: ResultsDoc): ResultsRow[] {
  return doc.nodes.map((n) => ({
    name: n.name,
    avgWaitPs: n.avg_wait_time_ps,
    reservations: n.reservations,
    throughput: n.throughput_pairs_per_s,
  }));
}
