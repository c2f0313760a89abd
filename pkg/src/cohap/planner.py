"""Hybrid conditional planning.

plan_branch finds one goal-reaching action sequence from a fixed prefix:
minimal horizon first, then lexicographically minimal weak-constraint cost
(higher levels first), then first in depth-first order under the grounder's
total action/outcome order.  Nondeterministic outcomes are search-chosen;
expand_tree then covers every alternative outcome of every decision node by
re-planning with the extended prefix, yielding a full conditional plan tree.

The branch search is a best-first search whose priority key is exactly the
lexicographic objective (admissible goal-count heuristic on the horizon
component), so the first goal state popped realizes the optimum.
"""

from __future__ import annotations

import heapq
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Optional

from . import adl
from .adl import parse_domain, validate
from .feasibility import Workspace, workspace_oracle
from .grounding import (BeliefState, GOccurs, GroundAction, GroundProblem,
                        ground)
from .instance import parse_instance
from .plantree import Metrics, PlanTree, TreeNode, metrics

Step = tuple[GroundAction, Optional[int]]  # (action, consistent-outcome index)


class Unsolvable(Exception):
    def __init__(self, prefix: tuple[Step, ...], max_horizon: int,
                 message: str = "no goal-reaching extension"):
        self.prefix = prefix
        self.max_horizon = max_horizon
        desc = " ; ".join(_step_label(s) for s in prefix) or "<empty>"
        super().__init__(f"{message} within horizon {max_horizon} "
                         f"from prefix [{desc}]")


def _step_label(step: Step) -> str:
    a, o = step
    if o is None:
        return a.label()
    return f"{a.label()}={o}"


@dataclass(frozen=True)
class Branch:
    steps: tuple[Step, ...]
    terminal: BeliefState
    cost: dict  # whole-branch weak cost, level -> weight
    horizon: int
    suffix_cost: dict = field(default_factory=dict)  # cost of the last-planned suffix

    def __post_init__(self):
        assert self.horizon == len(self.steps)


@dataclass
class PlannerConfig:
    max_horizon: int = 30
    atom_budget: int = 2_000_000
    worker_count: int = 1
    verbosity_weights: Optional[dict[str, int]] = None  # kind -> weight override
    safety_strict: bool = True

    def __post_init__(self):
        if self.max_horizon < 0:
            raise ValueError("max_horizon must be >= 0")


def empty_branch(p: GroundProblem) -> Branch:
    return Branch((), p.init, {}, 0)


def _add_cost(a: dict, b: dict) -> dict:
    out = dict(a)
    for k, v in b.items():
        out[k] = out.get(k, 0) + v
    return out


def replay(p: GroundProblem, steps: tuple[Step, ...]) -> Branch:
    """Replay a step sequence from the initial state (cost accumulated)."""
    s = p.init
    cost: dict = {}
    for a, o in steps:
        if not all(p.holds(pre, s) for pre in a.preconditions):
            raise ValueError(f"prefix step {a.label()} not applicable")
        cost = _add_cost(cost, p.step_cost(s, a))
        s = p.successor(s, a, o)
    return Branch(tuple(steps), s, cost, len(steps))


def _max_goal_gain(p: GroundProblem) -> int:
    goal = set(p.goal)
    best = 0
    for a in p.actions:
        if a.outcomes:
            for o in a.outcomes:
                best = max(best, len(goal & set(o.literals)))
        else:
            best = max(best, len(goal & set(a.effects)))
    return best


def plan_branch(p: GroundProblem, fixed_prefix: Branch,
                cfg: PlannerConfig) -> Branch:
    """Optimal goal-reaching extension of the prefix, or raise Unsolvable."""
    budget = cfg.max_horizon - fixed_prefix.horizon
    if budget < 0:
        raise Unsolvable(fixed_prefix.steps, cfg.max_horizon,
                         "prefix exceeds max horizon")
    goal = p.goal
    max_gain = _max_goal_gain(p)

    def h(values) -> int:
        unsat = sum(1 for i, v in goal if values[i] is not v)
        if unsat == 0:
            return 0
        if max_gain == 0:
            return budget + 1  # unreachable
        return -(-unsat // max_gain)  # ceil division

    start = fixed_prefix.terminal
    zero_cost = p.cost_key({})
    start_h = h(start.values)
    if start_h > budget:
        raise Unsolvable(fixed_prefix.steps, cfg.max_horizon)

    # payload: (state, g, cost dict, path link); path link = (parent, step)
    open_heap = [((start_h, zero_cost, ()), (start, 0, {}, None))]
    best_key: dict[tuple, tuple] = {start.values: (start_h, zero_cost, ())}

    while open_heap:
        key, (state, g, cost, link) = heapq.heappop(open_heap)
        if best_key.get(state.values, key) < key:
            continue
        if p.goal_holds(state):
            steps: list[Step] = []
            node = link
            while node is not None:
                node, step = node
                steps.append(step)
            steps.reverse()
            suffix = tuple(steps)
            return Branch(fixed_prefix.steps + suffix, state,
                          _add_cost(fixed_prefix.cost, cost),
                          fixed_prefix.horizon + len(suffix),
                          suffix_cost=cost)
        if g >= budget:
            continue
        f1, ckey, seq = key
        for ai, a in enumerate(p.applicable(state)):
            step_cost = p.step_cost(state, a)
            ncost = _add_cost(cost, step_cost)
            nckey = p.cost_key(ncost)
            if a.kind in adl.DECISION_KINDS:
                branches = [(oi, p.successor(state, a, oi))
                            for oi in range(
                                len(p.consistent_outcomes(state, a)))]
            else:
                branches = [(None, p.successor(state, a))]
            for oi, succ in branches:
                nh = h(succ.values)
                ng = g + 1
                if ng + nh > budget:
                    continue
                nseq = seq + ((ai, -1 if oi is None else oi),)
                nkey = (ng + nh, nckey, nseq)
                prev = best_key.get(succ.values)
                if prev is not None and prev <= nkey:
                    continue
                best_key[succ.values] = nkey
                step: Step = (a, oi)
                heapq.heappush(open_heap, (nkey, (succ, ng, ncost,
                                                  (link, step))))
    raise Unsolvable(fixed_prefix.steps, cfg.max_horizon)


# ---------------------------------------------------------------------------
# Tree expansion

def expand_tree(p: GroundProblem, cfg: PlannerConfig,
                safety: Optional[dict] = None) -> PlanTree:
    root_branch = plan_branch(p, empty_branch(p), cfg)
    nodes: dict[int, TreeNode] = {}
    counter = [0]
    pool = (ThreadPoolExecutor(max_workers=cfg.worker_count)
            if cfg.worker_count > 1 else None)

    def new_id() -> int:
        nid = counter[0]
        counter[0] += 1
        return nid

    def build(branch: Branch, i: int, state: BeliefState) -> int:
        nid = new_id()
        if i == len(branch.steps):
            nodes[nid] = TreeNode(nid, "leaf", "goal", (), ())
            return nid
        a, oi = branch.steps[i]
        if a.kind in adl.DECISION_KINDS:
            outcomes = p.consistent_outcomes(state, a)
            prefix_cost = replay_cost_cache(branch, i)
            futures = {}
            if pool is not None:
                for k in range(len(outcomes)):
                    if k == oi:
                        continue
                    alt_prefix = Branch(branch.steps[:i] + ((a, k),),
                                        p.successor(state, a, k),
                                        prefix_cost, i + 1)
                    futures[k] = pool.submit(plan_branch, p, alt_prefix, cfg)
            children = []
            for k, o in enumerate(outcomes):
                succ = p.successor(state, a, k)
                if k == oi:
                    child = build(branch, i + 1, succ)
                else:
                    if pool is not None:
                        alt = futures[k].result()
                    else:
                        alt_prefix = Branch(branch.steps[:i] + ((a, k),),
                                            succ, prefix_cost, i + 1)
                        alt = plan_branch(p, alt_prefix, cfg)
                    child = build(alt, i + 1, succ)
                children.append((o.label, child))
            nodes[nid] = TreeNode(nid, a.kind, a.name, a.args,
                                  tuple(children))
        else:
            succ = p.successor(state, a)
            child = build(branch, i + 1, succ)
            nodes[nid] = TreeNode(nid, a.kind, a.name, a.args,
                                  ((None, child),))
        return nid

    def replay_cost_cache(branch: Branch, upto: int) -> dict:
        # cost of branch.steps[:upto+1] with the alternative outcome swapped
        # in; outcome choice does not change the step cost, so replaying the
        # original steps is exact.
        s = p.init
        cost: dict = {}
        for a, o in branch.steps[:upto + 1]:
            cost = _add_cost(cost, p.step_cost(s, a))
            s = p.successor(s, a, o)
        return cost

    try:
        root = build(root_branch, 0, p.init)
    finally:
        if pool is not None:
            pool.shutdown(wait=False, cancel_futures=True)
    assert root == 0
    return PlanTree(nodes, root, safety or {})


def apply_verbosity(p: GroundProblem, overrides: dict[str, int]) -> None:
    """Override weights of weak constraints penalizing sensing/communication."""
    kinds = {a.name: a.kind for a in p.actions}
    new = []
    for w in p.weaks:
        weight = w.weight
        for item in w.body:
            if isinstance(item, GOccurs):
                kind = item.name if item.kind_match else kinds.get(item.name)
                if kind in adl.COMM_KINDS:
                    kind = "communication"
                if kind in overrides:
                    weight = overrides[kind]
        new.append(replace(w, weight=weight))
    p.weaks = tuple(new)


# ---------------------------------------------------------------------------
# End-to-end pipeline

@dataclass
class SolveResult:
    tree: PlanTree
    metrics: Metrics
    timings: dict  # {"plan_s": float, "checks_s": float}
    problem: GroundProblem


class DomainError(Exception):
    pass


def solve(dom_text: str, inst_text: str, workspace: Workspace,
          cfg: Optional[PlannerConfig] = None) -> SolveResult:
    cfg = cfg or PlannerConfig()
    t0 = time.perf_counter()
    dom = parse_domain(dom_text)
    errors = [d for d in validate(dom) if d.severity == "error"]
    if errors:
        raise DomainError("; ".join(d.message for d in errors))
    inst = parse_instance(inst_text, dom)
    inst = _autofill_unsafe_regions(dom, inst, workspace)
    fx = workspace_oracle(workspace)
    problem = ground(dom, inst, fx, atom_budget=cfg.atom_budget)
    if cfg.verbosity_weights:
        apply_verbosity(problem, cfg.verbosity_weights)
    safety = {
        "dangerousParts": sorted(r[0] for r in
                                 inst.statics.get("dangerous", ())),
        "unsafeRegions": sorted(r[0] for r in
                                inst.statics.get("unsafeRegion", ())),
    }
    tree = expand_tree(problem, cfg, safety)
    total = time.perf_counter() - t0
    checks_s = fx.check_stats()["seconds"]
    timings = {"plan_s": total - checks_s, "checks_s": checks_s}
    return SolveResult(tree, metrics(tree), timings, problem)


def _autofill_unsafe_regions(dom, inst, workspace: Workspace):
    """Populate the unsafeRegion static from workspace flags when omitted."""
    if "unsafeRegion" not in dom.static_map():
        return inst
    if inst.statics.get("unsafeRegion"):
        return inst
    rows = tuple((name,) for name in workspace.unsafe_regions()
                 if any(c == name for c, _ in inst.constants))
    statics = dict(inst.statics)
    statics["unsafeRegion"] = rows
    return replace(inst, statics=statics)
