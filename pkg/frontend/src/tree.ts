/** Plan-tree JSON (version 1) parsing and a tidy top-down layout. */

export interface TreeChild {
  outcome: string | null;
  id: number;
}

export interface TreeNode {
  id: number;
  kind: string; // actuation | sensing | commDet | commNondet | leaf
  action: string;
  args: string[];
  children: TreeChild[];
}

export interface Safety {
  dangerousParts: string[];
  unsafeRegions: string[];
}

export interface PlanTree {
  root: number;
  nodes: Map<number, TreeNode>;
  safety: Safety;
}

export class TreeError extends Error {}

const NODE_KINDS = new Set(
  ["actuation", "sensing", "commDet", "commNondet", "leaf"]);

export function parseTree(text: string): PlanTree {
  let doc: unknown;
  try {
    doc = JSON.parse(text);
  } catch {
    throw new TreeError("malformed plan-tree JSON");
  }
  const d = doc as Record<string, unknown>;
  if (typeof d !== "object" || d === null || d.version !== 1) {
    throw new TreeError("not a version-1 plan-tree document");
  }
  if (typeof d.root !== "number" || !Array.isArray(d.nodes) ||
      d.nodes.length === 0) {
    throw new TreeError("plan tree has no root node");
  }
  const nodes = new Map<number, TreeNode>();
  for (const raw of d.nodes) {
    const n = raw as Record<string, unknown>;
    if (typeof n.id !== "number" || typeof n.kind !== "string" ||
        typeof n.action !== "string" || !Array.isArray(n.args) ||
        !Array.isArray(n.children)) {
      throw new TreeError(`malformed node ${JSON.stringify(raw)}`);
    }
    if (!NODE_KINDS.has(n.kind)) {
      throw new TreeError(`unknown node kind ${n.kind}`);
    }
    nodes.set(n.id, {
      id: n.id,
      kind: n.kind,
      action: n.action,
      args: n.args as string[],
      children: (n.children as Array<Record<string, unknown>>).map((c) => ({
        outcome: (c.outcome ?? null) as string | null,
        id: c.id as number,
      })),
    });
  }
  if (!nodes.has(d.root)) throw new TreeError("root id not among nodes");
  for (const n of nodes.values()) {
    for (const c of n.children) {
      if (!nodes.has(c.id)) {
        throw new TreeError(`node ${n.id} points at missing child ${c.id}`);
      }
    }
  }
  const s = (d.safety ?? {}) as Record<string, unknown>;
  return {
    root: d.root,
    nodes,
    safety: {
      dangerousParts: (s.dangerousParts as string[]) ?? [],
      unsafeRegions: (s.unsafeRegions as string[]) ?? [],
    },
  };
}

export function label(n: TreeNode): string {
  if (n.kind === "leaf") return "goal";
  return n.args.length ? `${n.action}(${n.args.join(", ")})` : n.action;
}

export interface Placed {
  node: TreeNode;
  x: number; // column, leaves evenly spaced, parents centered
  y: number; // depth
}

export interface Layout {
  byId: Map<number, Placed>;
  width: number; // columns
  height: number; // depth levels
}

/**
 * Tidy layout: each leaf takes the next free column, every internal node
 * sits centered above its children, depth maps to rows. Iterative
 * post-order so trees with thousands of nodes do not hit stack limits.
 */
export function layoutTree(tree: PlanTree): Layout {
  const byId = new Map<number, Placed>();
  let nextLeafX = 0;
  let maxDepth = 0;

  // stack of [node id, depth, expanded?]
  const stack: Array<[number, number, boolean]> = [[tree.root, 0, false]];
  while (stack.length > 0) {
    const top = stack[stack.length - 1]!;
    const [id, depth, expanded] = top;
    const node = tree.nodes.get(id)!;
    maxDepth = Math.max(maxDepth, depth);
    if (!expanded) {
      top[2] = true;
      for (let i = node.children.length - 1; i >= 0; i--) {
        stack.push([node.children[i]!.id, depth + 1, false]);
      }
      continue;
    }
    stack.pop();
    let x: number;
    if (node.children.length === 0) {
      x = nextLeafX++;
    } else {
      const xs = node.children.map((c) => byId.get(c.id)!.x);
      x = (Math.min(...xs) + Math.max(...xs)) / 2;
    }
    byId.set(id, { node, x, y: depth });
  }
  return { byId, width: Math.max(nextLeafX, 1), height: maxDepth + 1 };
}

/** Node ids along the root path ending at `id` (inclusive). */
export function pathTo(tree: PlanTree, id: number): number[] {
  const parent = new Map<number, number>();
  for (const n of tree.nodes.values()) {
    for (const c of n.children) parent.set(c.id, n.id);
  }
  const path = [id];
  let cur = id;
  while (parent.has(cur)) {
    cur = parent.get(cur)!;
    path.push(cur);
  }
  return path.reverse();
}
