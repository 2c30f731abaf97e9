// Canvas drawing of the scene model; selection hit-testing included.

import type { Scene, SceneNode } from "./render.js";

const NODE_RADIUS = 10;

export function drawScene(canvas: HTMLCanvasElement, scene: Scene,
                          selected: string | null): void {
  const ctx = canvas.getContext("2d");
  if (!ctx) return;
  ctx.clearRect(0, 0, canvas.width, canvas.height);

  if (scene.empty) {
    ctx.fillStyle = "#8a8f98";
    ctx.font = "15px system-ui, sans-serif";
    ctx.textAlign = "center";
    ctx.fillText("Empty network. Add a node to get started.",
                 canvas.width / 2, canvas.height / 2);
    return;
  }

  ctx.strokeStyle = "#9aa3ad";
  ctx.lineWidth = 1.5;
  for (const edge of scene.edges) {
    ctx.beginPath();
    ctx.moveTo(edge.x1, edge.y1);
    ctx.lineTo(edge.x2, edge.y2);
    ctx.stroke();
  }

  for (const node of scene.nodes) {
    ctx.beginPath();
    if (node.shape === "diamond") {
      ctx.moveTo(node.x, node.y - NODE_RADIUS);
      ctx.lineTo(node.x + NODE_RADIUS, node.y);
      ctx.lineTo(node.x, node.y + NODE_RADIUS);
      ctx.lineTo(node.x - NODE_RADIUS, node.y);
      ctx.closePath();
    } else {
      ctx.arc(node.x, node.y, NODE_RADIUS, 0, Math.PI * 2);
    }
    ctx.fillStyle = node.color;
    ctx.fill();
    if (node.name === selected) {
      ctx.strokeStyle = "#e3455a";
      ctx.lineWidth = 3;
      ctx.stroke();
    }
    ctx.fillStyle = "#30343a";
    ctx.font = "12px system-ui, sans-serif";
    ctx.textAlign = "center";
    ctx.fillText(node.name, node.x, node.y + NODE_RADIUS + 14);
  }
}

export function hitTest(scene: Scene, x: number, y: number): SceneNode | null {
  for (const node of scene.nodes) {
    const dx = x - node.x;
    const dy = y - node.y;
    if (dx * dx + dy * dy <= (NODE_RADIUS + 4) ** 2) {
      return node;
    }
  }
  return null;
}
