import type { LineageDoc, LineageNodeDoc } from "./types.js";

export interface PlacedNode {
  node: LineageNodeDoc;
  x: number;
  y: number;
}

export interface LineageLayout {
  width: number;
  height: number;
  placed: Map<string, PlacedNode>;
}

const COLUMN = 96;
const ROW = 88;
const MARGIN = 48;

/**
 * Layered layout: one row per generation, children spread along the row.
 * y depends on the generation alone, so the layer audit below is visual too.
 */
export function layoutLineage(doc: LineageDoc): LineageLayout {
  const byGeneration = new Map<number, LineageNodeDoc[]>();
  for (const node of doc.nodes) {
    const row = byGeneration.get(node.generation) ?? [];
    row.push(node);
    byGeneration.set(node.generation, row);
  }
  let widest = 1;
  let deepest = 0;
  const placed = new Map<string, PlacedNode>();
  for (const [generation, row] of byGeneration) {
    row.sort((a, b) => a.child - b.child);
    widest = Math.max(widest, row.length);
    deepest = Math.max(deepest, generation);
    row.forEach((node, i) => {
      placed.set(node.gripper_id, {
        node,
        x: MARGIN + i * COLUMN,
        y: MARGIN + generation * ROW,
      });
    });
  }
  return {
    width: 2 * MARGIN + (widest - 1) * COLUMN,
    height: 2 * MARGIN + deepest * ROW,
    placed,
  };
}

/** Every edge must connect a node to one in the immediately next generation. */
export function edgesAreLayered(doc: LineageDoc): boolean {
  const generationOf = new Map<string, number>();
  for (const node of doc.nodes) generationOf.set(node.gripper_id, node.generation);
  return doc.edges.every(([parentId, childId]) => {
    const p = generationOf.get(parentId);
    const c = generationOf.get(childId);
    return p !== undefined && c !== undefined && p + 1 === c;
  });
}

/** Walk parent edges transitively from `id`; the result excludes `id` itself. */
export function ancestorsOf(doc: LineageDoc, id: string): Set<string> {
  const parentsOf = new Map<string, string[]>();
  for (const [parentId, childId] of doc.edges) {
    const list = parentsOf.get(childId) ?? [];
    list.push(parentId);
    parentsOf.set(childId, list);
  }
  const seen = new Set<string>();
  const queue = [...(parentsOf.get(id) ?? [])];
  while (queue.length > 0) {
    const next = queue.pop();
    if (next === undefined || seen.has(next)) continue;
    seen.add(next);
    queue.push(...(parentsOf.get(next) ?? []));
  }
  return seen;
}

/** Deterministic hue per parent id so all edges out of one parent match. */
export function parentColor(parentId: string): string {
  let hash = 0;
  for (let i = 0; i < parentId.length; i++) {
    hash = (hash * 31 + parentId.charCodeAt(i)) >>> 0;
  }
  return `hsl(${hash % 360}, 65%, 45%)`;
}

const SVG_NS = "http://www.w3.org/2000/svg";

function nodeLabel(node: LineageNodeDoc): string {
  if (node.unprintable) return "rejected";
  if (node.fitness === null) return "pending";
  return `${node.fitness.toFixed(3)} N`;
}

export function renderLineage(container: HTMLElement, doc: LineageDoc): void {
  container.textContent = "";
  const layout = layoutLineage(doc);
  const svg = document.createElementNS(SVG_NS, "svg");
  svg.setAttribute(
    "viewBox",
    `0 0 ${Math.max(layout.width, 200)} ${Math.max(layout.height, 120)}`,
  );
  svg.setAttribute("class", "lineage-graph");
  svg.setAttribute("data-testid", "lineage-graph");

  for (const [parentId, childId] of doc.edges) {
    const from = layout.placed.get(parentId);
    const to = layout.placed.get(childId);
    if (!from || !to) continue;
    const edge = document.createElementNS(SVG_NS, "line");
    edge.setAttribute("x1", String(from.x));
    edge.setAttribute("y1", String(from.y));
    edge.setAttribute("x2", String(to.x));
    edge.setAttribute("y2", String(to.y));
    edge.setAttribute("stroke", parentColor(parentId));
    edge.setAttribute("class", "lineage-edge");
    edge.setAttribute("data-parent", parentId);
    edge.setAttribute("data-child", childId);
    svg.appendChild(edge);
  }

  for (const { node, x, y } of layout.placed.values()) {
    const group = document.createElementNS(SVG_NS, "g");
    group.setAttribute("class", "lineage-node");
    group.setAttribute("data-testid", "lineage-node");
    group.setAttribute("data-id", node.gripper_id);

    const dot = document.createElementNS(SVG_NS, "circle");
    dot.setAttribute("cx", String(x));
    dot.setAttribute("cy", String(y));
    dot.setAttribute("r", "10");
    dot.setAttribute(
      "class",
      node.unprintable ? "node-dot unprintable" : "node-dot",
    );
    group.appendChild(dot);

    const label = document.createElementNS(SVG_NS, "text");
    label.setAttribute("x", String(x));
    label.setAttribute("y", String(y + 24));
    label.setAttribute("text-anchor", "middle");
    label.setAttribute("class", "node-label");
    label.textContent = nodeLabel(node);
    group.appendChild(label);

    group.addEventListener("click", () => {
      const highlight = ancestorsOf(doc, node.gripper_id);
      highlight.add(node.gripper_id);
      svg.querySelectorAll(".lineage-node").forEach((el) => {
        const id = el.getAttribute("data-id") ?? "";
        el.classList.toggle("highlighted", highlight.has(id));
        el.classList.toggle("dimmed", !highlight.has(id));
      });
      svg.querySelectorAll(".lineage-edge").forEach((el) => {
        const child = el.getAttribute("data-child") ?? "";
        const parent = el.getAttribute("data-parent") ?? "";
        const onPath = highlight.has(child) && highlight.has(parent);
        el.classList.toggle("highlighted", onPath);
        el.classList.toggle("dimmed", !onPath);
      });
    });

    svg.appendChild(group);
  }

  container.appendChild(svg);
}
