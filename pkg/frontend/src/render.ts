/** Canvas painter for a Scene; the only DOM-coupled drawing code. */

import { Scene } from "./scene.js";

const NODE_RADIUS = 14;
const SQUARE = 6;

export function drawScene(canvas: HTMLCanvasElement, scene: Scene): void {
  const ctx = canvas.getContext("2d");
  if (!ctx) return;
  ctx.clearRect(0, 0, canvas.width, canvas.height);

  ctx.strokeStyle = "#888";
  ctx.lineWidth = 1;
  for (const edge of scene.edges) {
    ctx.beginPath();
    ctx.moveTo(edge.from.x, edge.from.y);
    ctx.lineTo(edge.to.x, edge.to.y);
    ctx.stroke();
  }

  for (const node of scene.nodes) {
    ctx.beginPath();
    ctx.fillStyle = node.fill;
    ctx.strokeStyle = node.selected ? "#000" : "#555";
    ctx.lineWidth = node.selected ? 3 : 1;
    ctx.arc(node.x, node.y, NODE_RADIUS, 0, 2 * Math.PI);
    ctx.fill();
    ctx.stroke();

    // one colored square per membership, along the top edge
    node.squares.forEach((square, i) => {
      ctx.fillStyle = square.color;
      ctx.fillRect(
        node.x - NODE_RADIUS + i * (SQUARE + 2),
        node.y - NODE_RADIUS - SQUARE - 2,
        SQUARE,
        SQUARE,
      );
      ctx.strokeStyle = "#333";
      ctx.lineWidth = 0.5;
      ctx.strokeRect(
        node.x - NODE_RADIUS + i * (SQUARE + 2),
        node.y - NODE_RADIUS - SQUARE - 2,
        SQUARE,
        SQUARE,
      );
    });

    ctx.fillStyle = "#111";
    ctx.font = "10px monospace";
    ctx.textAlign = "center";
    ctx.fillText(`${node.id}:${node.type}`, node.x, node.y + NODE_RADIUS + 10);
  }
}

export function hitTest(scene: Scene, x: number, y: number): number | null {
  for (const node of scene.nodes) {
    const dx = node.x - x;
    const dy = node.y - y;
    if (dx * dx + dy * dy <= NODE_RADIUS * NODE_RADIUS) return node.id;
  }
  return null;
}
