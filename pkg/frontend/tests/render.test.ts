import { describe, expect, it } from "vitest";

import { isMonotone } from "../src/polling.js";
import {
  applySymmetricEdit,
  legendModel,
  matrixGridModel,
  resultsModel,
  sceneModel,
} from "../src/render.js";
import type { ResultsDoc, TopologyDoc } from "../src/types.js";

const PAIR: TopologyDoc = {
  format: 1,
  name: "pair",
  nodes: [
    { name: "r1", type: "QuantumRouter", template: "default_router" },
    { name: "r2", type: "QuantumRouter", template: "default_router" },
    { name: "bsm.r1.r2", type: "BSMNode", template: "default_bsm" },
  ],
  edges: [
    { a: "r1", b: "bsm.r1.r2", distance_m: 1000, attenuation_db_km: 0.2 },
    { a: "bsm.r1.r2", b: "r2", distance_m: 1000, attenuation_db_km: 0.2 },
  ],
  cc_latency_ps: [[0, 0, 0], [0, 0, 0], [0, 0, 0]],
  qc_tdm: [[0, 0, 0], [0, 0, 0], [0, 0, 0]],
};

describe("legendModel", () => {
  it("lists only present types, routers first", () => {
    expect(legendModel(["QuantumRouter"]).map((e) => e.type))
      .toEqual(["QuantumRouter"]);
    expect(legendModel(["BSMNode", "QuantumRouter"]).map((e) => e.type))
      .toEqual(["QuantumRouter", "BSMNode"]);
    expect(legendModel([])).toEqual([]);
  });

  it("assigns distinct colors and shapes to routers and BSM nodes", () => {
    const entries = legendModel(["QuantumRouter", "BSMNode"]);
    expect(new Set(entries.map((e) => e.color)).size).toBe(2);
    expect(entries.find((e) => e.type === "BSMNode")?.shape).toBe("diamond");
  });
});

describe("sceneModel", () => {
  const positions = { r1: [-100, 0], "bsm.r1.r2": [0, 0], r2: [100, 0] } as
    Record<string, [number, number]>;

  it("fits positions into the viewport", () => {
    const scene = sceneModel(PAIR, positions, 800, 600);
    expect(scene.empty).toBe(false);
    expect(scene.nodes).toHaveLength(3);
    for (const node of scene.nodes) {
      expect(node.x).toBeGreaterThanOrEqual(0);
      expect(node.x).toBeLessThanOrEqual(800);
      expect(node.y).toBeGreaterThanOrEqual(0);
      expect(node.y).toBeLessThanOrEqual(600);
    }
    expect(scene.edges).toHaveLength(2);
  });

  it("marks BSM nodes visually distinct from routers", () => {
    const scene = sceneModel(PAIR, positions, 800, 600);
    const bsm = scene.nodes.find((n) => n.type === "BSMNode")!;
    const router = scene.nodes.find((n) => n.type === "QuantumRouter")!;
    expect(bsm.shape).not.toBe(router.shape);
    expect(bsm.color).not.toBe(router.color);
  });

  it("flags an empty topology for the empty-state hint", () => {
    const empty = { ...PAIR, nodes: [], edges: [], cc_latency_ps: [], qc_tdm: [] };
    expect(sceneModel(empty, {}, 800, 600).empty).toBe(true);
  });
});

describe("matrix grid", () => {
  const response = { names: ["a", "b"], matrix: [[0, 5], [5, 0]] };

  it("locks the latency diagonal and frees the rest", () => {
    const grid = matrixGridModel("cc_latency", response);
    expect(grid.rows[0]![0]!.editable).toBe(false);
    expect(grid.rows[0]![1]!.editable).toBe(true);
    const tdm = matrixGridModel("qc_tdm", response);
    expect(tdm.rows[0]![0]!.editable).toBe(true);
  });

  it("mirrors an edit onto the symmetric cell in the same view", () => {
    const grid = matrixGridModel("cc_latency", response);
    const updated = applySymmetricEdit(grid, "a", "b", 9000);
    expect(updated.rows[0]![1]!.value).toBe(9000);
    expect(updated.rows[1]![0]!.value).toBe(9000);
    expect(updated.rows[0]![0]!.value).toBe(0);
  });
});

describe("results and progress", () => {
  it("builds result rows from the results document", () => {
    const doc: ResultsDoc = {
      format: 1, name: "run", duration_s: 10,
      nodes: [{ name: "r1", avg_wait_time_ps: 12.5, reservations: 3,
                throughput_pairs_per_s: 0.4 }],
      totals: {},
    };
    expect(resultsModel(doc)).toEqual([
      { name: "r1", avgWaitPs: 12.5, reservations: 3, throughput: 0.4 }]);
  });

  it("detects monotone and non-monotone progress traces", () => {
    expect(isMonotone([0, 0.2, 0.2, 1])).toBe(true);
    expect(isMonotone([0, 0.5, 0.4])).toBe(false);
    expect(isMonotone([])).toBe(true);
  });
});
