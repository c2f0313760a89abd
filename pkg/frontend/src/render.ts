/** SVG rendering of a plan tree (no DOM dependency: emits a string). */

import { Layout, PlanTree, TreeNode, label, layoutTree } from "./tree.js";

// Matches the planner's Graphviz export palette.
export const KIND_FILL: Record<string, string> = {
  actuation: "#cccccc", // gray80
  sensing: "#ffff00", // yellow
  commDet: "#add8e6", // lightblue
  commNondet: "#add8e6",
  leaf: "#98fb98", // palegreen
};

export interface RenderOptions {
  nodeWidth?: number;
  nodeHeight?: number;
  hGap?: number;
  vGap?: number;
  /** ids on the active execution path (thicker border) */
  visited?: Set<number>;
  /** id of the node currently awaiting an answer (highlighted) */
  current?: number | null;
}

const DEFAULTS = { nodeWidth: 148, nodeHeight: 34, hGap: 14, vGap: 42 };

function esc(s: string): string {
  return s.replace(/&/g, "&amp;").replace(/</g, "&lt;").replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

function dangerous(tree: PlanTree, n: TreeNode): boolean {
  return n.args.some((a) => tree.safety.dangerousParts.includes(a));
}

export function renderTree(tree: PlanTree, opts: RenderOptions = {},
                           layout?: Layout): string {
  const o = { ...DEFAULTS, ...opts };
  const lay = layout ?? layoutTree(tree);
  const cellW = o.nodeWidth + o.hGap;
  const cellH = o.nodeHeight + o.vGap;
  const width = lay.width * cellW + o.hGap;
  const height = lay.height * cellH + o.vGap;
  const cx = (x: number) => o.hGap + x * cellW + o.nodeWidth / 2;
  const cy = (y: number) => o.vGap + y * cellH + o.nodeHeight / 2;

  const edges: string[] = [];
  const boxes: string[] = [];
  for (const { node, x, y } of lay.byId.values()) {
    const px = cx(x);
    const py = cy(y);
    for (const c of node.children) {
      const child = lay.byId.get(c.id)!;
      const qx = cx(child.x);
      const qy = cy(child.y);
      edges.push(
        `<line x1="${px}" y1="${py + o.nodeHeight / 2}" x2="${qx}" ` +
        `y2="${qy - o.nodeHeight / 2}" class="edge"/>`);
      if (c.outcome !== null && node.children.length > 1) {
        const mx = (px + qx) / 2;
        const my = (py + qy) / 2;
        edges.push(
          `<text x="${mx}" y="${my}" class="outcome">` +
          `${esc(c.outcome)}</text>`);
      }
    }
    const fill = KIND_FILL[node.kind] ?? "#ffffff";
    const classes = ["node"];
    if (opts.visited?.has(node.id)) classes.push("visited");
    if (opts.current === node.id) classes.push("current");
    if (dangerous(tree, node)) classes.push("dangerous");
    boxes.push(
      `<g class="${classes.join(" ")}" data-node="${node.id}">` +
      `<rect x="${px - o.nodeWidth / 2}" y="${py - o.nodeHeight / 2}" ` +
      `width="${o.nodeWidth}" height="${o.nodeHeight}" rx="6" ` +
      `fill="${fill}"/>` +
      `<text x="${px}" y="${py + 4}" class="label">` +
      `${esc(label(node))}</text></g>`);
  }

  return `<svg xmlns="http://www.w3.org/2000/svg" width="${width}" ` +
    `height="${height}" viewBox="0 0 ${width} ${height}">` +
    `<style>` +
    `.edge{stroke:#888;stroke-width:1.2}` +
    `.outcome{font:11px sans-serif;fill:#555;text-anchor:middle}` +
    `.label{font:11px sans-serif;text-anchor:middle}` +
    `.node rect{stroke:#666;stroke-width:1}` +
    `.node.visited rect{stroke:#1a7f37;stroke-width:2.5}` +
    `.node.current rect{stroke:#bf3989;stroke-width:3}` +
    `.node.dangerous rect{stroke-dasharray:4 2;stroke:#c50f1f}` +
    `</style>` +
    edges.join("") + boxes.join("") + `</svg>`;
}
