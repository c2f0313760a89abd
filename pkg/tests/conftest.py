import json

import pytest

from cohap.adl import parse_domain
from cohap.assembly import (AssemblyInstanceParams, bench_workspace,
                            default_instance, domain_text, generate_instance)
from cohap.feasibility import workspace_oracle
from cohap.grounding import ground
from cohap.instance import instance_to_json, parse_instance
from cohap.planner import PlannerConfig, solve


@pytest.fixture(scope="session")
def dom_text():
    return domain_text()


@pytest.fixture(scope="session")
def dom(dom_text):
    return parse_domain(dom_text)


@pytest.fixture(scope="session")
def bench():
    return bench_workspace()


@pytest.fixture(scope="session")
def default_inst_text():
    return instance_to_json(default_instance())


@pytest.fixture(scope="session")
def default_result(dom_text, default_inst_text, bench):
    return solve(dom_text, default_inst_text, bench)


def make_problem(inst, dom=None, workspace=None):
    """Ground an instance against the shipped domain and bench workspace."""
    dom = dom or parse_domain(domain_text())
    workspace = workspace or bench_workspace()
    from cohap.planner import _autofill_unsafe_regions
    inst = _autofill_unsafe_regions(dom, inst, workspace)
    return ground(dom, inst, workspace_oracle(workspace))


def micro_instances():
    """Small instances (<= 3 parts, horizon <= 8) for oracle equivalence."""
    cases = {}
    gen = [
        # name, legs, feet, U, P, R
        ("shared1", 1, 0, 0, 0, 0),
        ("robot1", 1, 0, 0, 0, 1),
        ("robot2", 2, 0, 0, 0, 2),
        ("human1", 1, 0, 0, 1, 0),
        ("danger1", 1, 1, 1, 0, 0),
        ("danger1robot", 1, 1, 1, 0, 1),
        ("footsafe", 1, 1, 0, 0, 0),
        ("mixhr", 2, 0, 0, 1, 1),
        ("humanfoot", 1, 1, 0, 1, 0),
    ]
    for name, legs, feet, u, p, r in gen:
        cases[name] = generate_instance(AssemblyInstanceParams(
            n_legs=legs, n_feet=feet, unsafe_parts=u, human_only=p,
            robot_only=r, seed=1))
    cases["knownheld"] = hand_instance(
        init=["loc(leg1, humanOnly)", "loc(top1, shared)", "free(left)",
              "free(right)", "humanHolding", "humanHoldingPart(leg1)",
              "-humanHoldingPart(top1)"])
    cases["hazard"] = hand_instance(
        init=["loc(leg1, hazard)", "loc(top1, shared)", "free(left)",
              "free(right)", "-humanHolding", "-humanHoldingPart(leg1)",
              "-humanHoldingPart(top1)"])
    return cases


def hand_instance(init, goal=None):
    """One leg + one top with custom initial literals."""
    dom = parse_domain(domain_text())
    doc = {
        "constants": {
            "leg1": "part", "top1": "part", "left": "manip",
            "right": "manip", "robotOnly": "region", "shared": "region",
            "humanOnly": "region", "hazard": "region", "c1": "conn",
        },
        "statics": {
            "class": [["leg", "leg1"], ["top", "top1"]],
            "attachable": [["leg", "top"]],
            "joint": [["leg1", "top1", "c1"]],
            "compatible": [["leg1", "top1"]],
            "dangerous": [],
            "unsafeRegion": [["hazard"]],
            "humanReach": [["shared"], ["humanOnly"]],
        },
        "init": init,
        "goal": goal or ["attached(leg1, top1, c1)"],
        "workspace": "bench.json",
    }
    return parse_instance(json.dumps(doc), dom)
