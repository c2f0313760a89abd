"""Conditional plan trees: structure, metrics, replay validation, serialization.

A plan tree is a labeled directed tree.  Actuation and deterministic
communication nodes have exactly one child; sensing and nondeterministic
communication nodes (decision nodes) have one outcome-labeled child per
consistent outcome; leaves mark goal states.  Node ids are dense integers in
deterministic expansion order so identical trees serialize byte-identically.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Optional

from .adl import DECISION_KINDS
from .grounding import GroundProblem

LEAF_KIND = "leaf"
NODE_KINDS = ("actuation", "sensing", "commDet", "commNondet", LEAF_KIND)


class TreeError(Exception):
    pass


@dataclass(frozen=True)
class TreeNode:
    id: int
    kind: str
    action: str  # action schema name; "goal" for leaves
    args: tuple[str, ...]
    children: tuple[tuple[Optional[str], int], ...]  # (outcome label, child id)


@dataclass
class PlanTree:
    nodes: dict[int, TreeNode]
    root: int
    safety: dict = field(default_factory=dict)  # static facts for UIs

    def __eq__(self, other):
        return (isinstance(other, PlanTree) and self.nodes == other.nodes
                and self.root == other.root and self.safety == other.safety)

    def node(self, nid: int) -> TreeNode:
        return self.nodes[nid]

    def leaves(self) -> list[TreeNode]:
        return [n for n in self.nodes.values() if n.kind == LEAF_KIND]

    def paths(self):
        """Yield every root-to-leaf path as a list of TreeNodes (leaf last)."""
        stack = [[self.root]]
        while stack:
            path = stack.pop()
            node = self.nodes[path[-1]]
            if not node.children:
                yield [self.nodes[i] for i in path]
                continue
            for _, child in reversed(node.children):
                stack.append(path + [child])

    def check_structure(self) -> list[str]:
        problems = []
        seen = set()
        stack = [self.root]
        while stack:
            nid = stack.pop()
            if nid in seen:
                problems.append(f"node {nid} reached twice (not a tree)")
                continue
            seen.add(nid)
            n = self.nodes.get(nid)
            if n is None:
                problems.append(f"dangling child id {nid}")
                continue
            if n.kind in ("actuation", "commDet") and len(n.children) != 1:
                problems.append(f"node {nid} ({n.action}) must have exactly "
                                f"1 child, has {len(n.children)}")
            if n.kind in DECISION_KINDS:
                labels = [lbl for lbl, _ in n.children]
                if len(n.children) < 2:
                    problems.append(f"decision node {nid} ({n.action}) has "
                                    f"{len(n.children)} children")
                if len(set(labels)) != len(labels):
                    problems.append(f"decision node {nid} has duplicate "
                                    "outcome labels")
            if n.kind == LEAF_KIND and n.children:
                problems.append(f"leaf {nid} has children")
            stack.extend(child for _, child in n.children)
        if seen != set(self.nodes):
            problems.append("unreachable nodes present")
        return problems


@dataclass(frozen=True)
class Metrics:
    L: int   # leaves
    D: int   # action count on the longest branch
    A: int   # actuation actions on that branch
    S: int   # sensing actions on that branch
    C: int   # communication actions on that branch
    K: int   # askHelp nodes in the tree
    O: int   # offerHelp nodes
    Cc: int  # confirmAttach nodes
    Rq: int  # request* nodes
    DN: int  # decision nodes
    BF: int  # max decision-node branching factor
    N: int   # total nodes

    def as_dict(self) -> dict:
        return {"L": self.L, "D": self.D, "A": self.A, "S": self.S,
                "C": self.C, "K": self.K, "O": self.O, "Cc": self.Cc,
                "Rq": self.Rq, "DN": self.DN, "BF": self.BF, "N": self.N}


CSV_HEADER = "inst,U,P,R,L,D,A,S,C,K,O,Cc,Rq,DN,BF,N,plan_s,checks_s"


def metrics(t: PlanTree) -> Metrics:
    best: Optional[tuple[int, int, int]] = None  # (A, S, C) of D-realizing
    best_d = -1
    leaves = 0
    for path in t.paths():
        leaves += 1
        a = sum(1 for n in path if n.kind == "actuation")
        s = sum(1 for n in path if n.kind == "sensing")
        c = sum(1 for n in path if n.kind in ("commDet", "commNondet"))
        d = a + s + c
        if d > best_d:
            best_d = d
            best = (a, s, c)
    a, s, c = best if best else (0, 0, 0)
    k = o = cc = rq = dn = 0
    bf = 0
    for n in t.nodes.values():
        if n.action == "askHelp":
            k += 1
        elif n.action == "offerHelp":
            o += 1
        elif n.action == "confirmAttach":
            cc += 1
        elif n.action.startswith("request"):
            rq += 1
        if n.kind in DECISION_KINDS:
            dn += 1
            bf = max(bf, len(n.children))
    return Metrics(L=leaves, D=max(best_d, 0), A=a, S=s, C=c, K=k, O=o,
                   Cc=cc, Rq=rq, DN=dn, BF=bf, N=len(t.nodes))


@dataclass(frozen=True)
class Violation:
    kind: str  # "structure" | "precondition" | "outcome-mismatch" | "goal"
    node_id: int
    message: str


def replay_validate(t: PlanTree, p: GroundProblem) -> list[Violation]:
    """Replay every root-to-leaf path; an empty list means the tree is valid."""
    violations = [Violation("structure", t.root, m) for m in t.check_structure()]
    if violations:
        return violations
    lookup = {(a.name, a.args): a for a in p.actions}

    def walk(nid: int, state) -> None:
        node = t.nodes[nid]
        if node.kind == LEAF_KIND:
            if not p.goal_holds(state):
                violations.append(Violation("goal", nid,
                                            "leaf state does not satisfy goal"))
            return
        action = lookup.get((node.action, node.args))
        if action is None:
            violations.append(Violation("structure", nid,
                                        f"unknown ground action {node.action}"
                                        f"{node.args!r}"))
            return
        if not all(p.holds(pre, state) for pre in action.preconditions):
            violations.append(Violation(
                "precondition", nid,
                f"{action.label()} not applicable at step {state.step}"))
            return
        if node.kind in DECISION_KINDS:
            outcomes = p.consistent_outcomes(state, action)
            labels = tuple(o.label for o in outcomes)
            child_labels = tuple(lbl for lbl, _ in node.children)
            if labels != child_labels:
                violations.append(Violation(
                    "outcome-mismatch", nid,
                    f"{action.label()}: tree edges {child_labels!r} != "
                    f"consistent outcomes {labels!r}"))
                return
            for i, (_, child) in enumerate(node.children):
                walk(child, p.successor(state, action, i))
        else:
            walk(node.children[0][1], p.successor(state, action))

    walk(t.root, p.init)
    return violations


# ---------------------------------------------------------------------------
# Serialization

def to_json(t: PlanTree, timings: Optional[dict] = None) -> str:
    """Serialize to the plan-tree JSON schema (version 1), byte-stable.

    Timings are volatile across runs and therefore only included when
    explicitly passed.
    """
    m = metrics(t)
    doc = {
        "version": 1,
        "root": t.root,
        "nodes": [
            {
                "id": n.id,
                "kind": n.kind,
                "action": n.action,
                "args": list(n.args),
                "children": [
                    {"outcome": lbl, "id": cid} for lbl, cid in n.children
                ],
            }
            for n in sorted(t.nodes.values(), key=lambda n: n.id)
        ],
        "metrics": m.as_dict(),
    }
    if t.safety:
        doc["safety"] = t.safety
    if timings is not None:
        doc["timings"] = timings
    return json.dumps(doc, sort_keys=True, separators=(",", ":")) + "\n"


def from_json(text: str) -> PlanTree:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as e:
        raise TreeError(f"malformed plan-tree JSON: {e.msg}")
    if not isinstance(doc, dict) or doc.get("version") != 1:
        raise TreeError("not a version-1 plan-tree document")
    if "root" not in doc or not doc.get("nodes"):
        raise TreeError("plan tree has no root node")
    nodes = {}
    for nd in doc["nodes"]:
        node = TreeNode(
            id=int(nd["id"]),
            kind=nd["kind"],
            action=nd["action"],
            args=tuple(nd["args"]),
            children=tuple((c["outcome"], int(c["id"]))
                           for c in nd["children"]),
        )
        if node.kind not in NODE_KINDS:
            raise TreeError(f"unknown node kind {node.kind!r}")
        nodes[node.id] = node
    root = int(doc["root"])
    if root not in nodes:
        raise TreeError("root id not among nodes")
    return PlanTree(nodes, root, doc.get("safety", {}))


_DOT_COLORS = {
    "actuation": "gray80",
    "sensing": "yellow",
    "commDet": "lightblue",
    "commNondet": "lightblue",
    LEAF_KIND: "palegreen",
}


def to_dot(t: PlanTree) -> str:
    lines = ["digraph plan {", "  node [style=filled];"]
    for n in sorted(t.nodes.values(), key=lambda n: n.id):
        label = f"{n.action}({', '.join(n.args)})" if n.args else n.action
        color = _DOT_COLORS[n.kind]
        lines.append(f'  n{n.id} [label="{label}", fillcolor={color}];')
    for n in sorted(t.nodes.values(), key=lambda n: n.id):
        for lbl, child in n.children:
            if lbl is None:
                lines.append(f"  n{n.id} -> n{child};")
            else:
                lines.append(f'  n{n.id} -> n{child} [label="{lbl}"];')
    lines.append("}")
    return "\n".join(lines) + "\n"
