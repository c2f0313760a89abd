"""Acceptance criteria.

Each test function covers one pinned criterion:

  (a) oracle equivalence on micro-instances, tolerance 0
  (b) structural validity of every produced tree
  (c) safety invariants (dangerous parts, askHelp reachability gate)
  (d) difficulty trends across the U/P/R sweeps
  (e) feasibility-check time strictly below planning time
  (f) byte-identical determinism across runs and worker counts
"""

import time

import pytest

from cohap import adl
from cohap.assembly import (AXES, bench_sweep, bench_workspace,
                            default_instance, domain_text, generate_instance,
                            sweep_params)
from cohap.feasibility import Manipulator, Region, Workspace
from cohap.instance import instance_to_json
from cohap.planner import PlannerConfig, solve
from cohap.plantree import replay_validate, to_json

from conftest import hand_instance, make_problem, micro_instances
from oracles import oracle_best

MICRO_HORIZON = 8


def _cost_key(p, cost):
    return p.cost_key(cost)


def _add(p, a, b):
    out = dict(a)
    for k, v in b.items():
        out[k] = out.get(k, 0) + v
    return out


def _min_below(p, tree, nid, state):
    """Best (horizon, cost) over all root-to-leaf paths below a node."""
    node = tree.nodes[nid]
    if node.kind == "leaf":
        return (0, {})
    action = next(a for a in p.actions
                  if (a.name, a.args) == (node.action, node.args))
    sc = p.step_cost(state, action)
    best = None
    for k, (_, child) in enumerate(node.children):
        o = k if node.kind in adl.DECISION_KINDS else None
        succ = p.successor(state, action, o)
        sub = _min_below(p, tree, child, succ)
        cand = (1 + sub[0], _add(p, sc, sub[1]))
        if best is None or (cand[0], _cost_key(p, cand[1])) < \
                (best[0], _cost_key(p, best[1])):
            best = cand
    return best


def _decision_children(p, tree, nid=None, state=None, depth=0):
    """Yield (child id, state after outcome, depth) for decision children."""
    nid = tree.root if nid is None else nid
    state = p.init if state is None else state
    node = tree.nodes[nid]
    if node.kind == "leaf":
        return
    action = next(a for a in p.actions
                  if (a.name, a.args) == (node.action, node.args))
    for k, (_, child) in enumerate(node.children):
        o = k if node.kind in adl.DECISION_KINDS else None
        succ = p.successor(state, action, o)
        if node.kind in adl.DECISION_KINDS:
            yield child, succ, depth + 1
        yield from _decision_children(p, tree, child, succ, depth + 1)


def test_criterion_a_oracle_equivalence():
    """(a) On >= 10 micro-instances the planner matches a brute-force
    AND/OR oracle exactly: the determinized optimum at the root and below
    every decision-node outcome (tolerance 0, < 60 s total)."""
    cases = micro_instances()
    assert len(cases) >= 10
    started = time.perf_counter()
    for name, inst in sorted(cases.items()):
        res = solve(domain_text(), instance_to_json(inst), bench_workspace(),
                    PlannerConfig(max_horizon=MICRO_HORIZON))
        tree, p = res.tree, res.problem
        memo = {}
        best = oracle_best(p, p.init, MICRO_HORIZON, memo)
        assert best is not None, name
        got = _min_below(p, tree, tree.root, p.init)
        assert (got[0], _cost_key(p, got[1])) == \
            (best[0], _cost_key(p, best[1])), name
        for child, state, depth in _decision_children(p, tree):
            sub_best = oracle_best(p, state, MICRO_HORIZON - depth, memo)
            assert sub_best is not None, (name, child)
            sub_got = _min_below(p, tree, child, state)
            assert (sub_got[0], _cost_key(p, sub_got[1])) == \
                (sub_best[0], _cost_key(p, sub_best[1])), (name, child)
    assert time.perf_counter() - started < 60


@pytest.fixture(scope="module")
def corpus():
    insts = {"default": default_instance()}
    insts.update({f"{axis}{k}": generate_instance(sweep_params(axis, k))
                  for axis in AXES for k in (2, 3)})
    insts.update(micro_instances())
    return {name: (inst, solve(domain_text(), instance_to_json(inst),
                               bench_workspace()))
            for name, inst in insts.items()}


def test_criterion_b_structural_suite(corpus):
    """(b) Every produced tree is structurally valid and replays cleanly:
    decision nodes branch per consistent outcome, deterministic nodes have
    exactly one child, all branches reach the goal -- zero violations."""
    for name, (_, res) in corpus.items():
        tree, p = res.tree, res.problem
        assert tree.check_structure() == [], name
        for n in tree.nodes.values():
            if n.kind in adl.DECISION_KINDS:
                assert len(n.children) >= 2
            elif n.kind in ("actuation", "commDet"):
                assert len(n.children) == 1
        assert replay_validate(tree, p) == [], name


SAFE_COMM = ("askHelp", "confirmAttach", "requestToAttach", "requestToUnhold")


def test_criterion_c_safety_dangerous_parts(corpus):
    """(c) No communication node ever directs the human at a dangerous part;
    offerHelp (the warning itself) is the only exchange naming one."""
    checked = 0
    for name, (inst, res) in corpus.items():
        dangerous = {r[0] for r in inst.statics.get("dangerous", ())}
        if not dangerous:
            continue
        checked += 1
        for n in res.tree.nodes.values():
            if n.action in SAFE_COMM:
                assert not (set(n.args) & dangerous), (name, n)
    assert checked >= 3


def _gate_workspace():
    # left reaches onlyLeft and both reach middle; nobody reaches farSide
    return Workspace(
        cell_size=1.0, width=20, height=8, obstacles=frozenset(),
        manipulators=(Manipulator("left", (2, 2), 3.0),
                      Manipulator("right", (9, 2), 3.0)),
        regions=(Region("robotOnly", (1, 1, 3, 4)),
                 Region("shared", (8, 1, 10, 4)),
                 Region("humanOnly", (16, 1, 18, 4)),
                 Region("hazard", (16, 5, 18, 7), unsafe=True)))


@pytest.mark.parametrize("region,expect_ask", [
    ("robotOnly", False),   # one manipulator still reaches: no askHelp
    ("humanOnly", True),    # both fail: askHelp allowed
    ("hazard", False),      # both fail but the region is unsafe
])
def test_criterion_c_askhelp_gate(region, expect_ask):
    """(c) askHelp fires exactly when every manipulator fails reachability
    and the part is not in an unsafe region."""
    inst = hand_instance(
        init=[f"loc(leg1, {region})", "loc(top1, shared)", "free(left)",
              "free(right)", "-humanHolding", "-humanHoldingPart(leg1)",
              "-humanHoldingPart(top1)"])
    p = make_problem(inst, workspace=_gate_workspace())
    asks = [a for a in p.applicable(p.init) if a.name == "askHelp"]
    assert bool(asks) == expect_ask
    fails = [m for m in ("left", "right")
             if p.failure_holds(("reachabilityFail", (m, "leg1")), p.init)]
    if region == "robotOnly":
        assert fails == ["right"]  # the gate needs both, one is not enough
    else:
        assert fails == ["left", "right"]


SWEEP_RANGE = range(2, 7)


@pytest.fixture(scope="module")
def sweeps():
    out = {}
    for axis in AXES:
        started = time.perf_counter()
        out[axis] = bench_sweep(axis, SWEEP_RANGE)
        assert time.perf_counter() - started < 900, f"{axis} sweep too slow"
    return out


def test_criterion_d_trends(sweeps):
    """(d) Difficulty axes reproduce the expected monotone trends."""
    for axis in AXES:
        rows = sweeps[axis]
        assert [r["inst"] for r in rows] == [f"{axis}{k}"
                                             for k in SWEEP_RANGE]
        sizes = [r["N"] for r in rows]
        times = [r["plan_s"] for r in rows]
        assert sizes == sorted(sizes), f"{axis}: N not nondecreasing"
        assert times == sorted(times), f"{axis}: plan time not nondecreasing"
    assert [r["O"] for r in sweeps["U"]] == \
        sorted(r["O"] for r in sweeps["U"])
    assert sweeps["U"][0]["O"] >= 1
    assert [r["Rq"] for r in sweeps["P"]] == \
        sorted(r["Rq"] for r in sweeps["P"])
    assert sweeps["P"][0]["Rq"] >= 1

    def comm(row):
        return row["K"] + row["O"] + row["Cc"] + row["Rq"]

    for i, k in enumerate(SWEEP_RANGE):
        assert comm(sweeps["R"][i]) < comm(sweeps["U"][i]), f"k={k}"
        assert comm(sweeps["R"][i]) < comm(sweeps["P"][i]), f"k={k}"


def test_criterion_e_checks_cheaper_than_planning(sweeps):
    """(e) Geometric feasibility checking stays strictly cheaper than
    planning on every sweep instance."""
    for axis in AXES:
        for row in sweeps[axis]:
            assert row["checks_s"] < row["plan_s"], row["inst"]


def test_criterion_f_determinism():
    """(f) Repeated solves emit byte-identical tree JSON, serially and
    with 8 workers."""
    for inst in (default_instance(), generate_instance(sweep_params("P", 3))):
        text = instance_to_json(inst)
        outputs = set()
        for cfg in (PlannerConfig(), PlannerConfig(),
                    PlannerConfig(worker_count=8)):
            res = solve(domain_text(), text, bench_workspace(), cfg)
            outputs.add(to_json(res.tree).encode())
        assert len(outputs) == 1
