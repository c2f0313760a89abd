"""Shipped assembly domain, instance generator, and benchmark sweeps.

Instances are parametrized furniture-assembly problems: legs attach to a
tabletop and feet screw into legs.  Three difficulty axes:

  unsafe_parts  (U)  feet that are dangerous to hand over (shared region),
  human_only    (P)  parts placed where only the human can work,
  robot_only    (R)  parts placed where only the robot can work.

Generation is deterministic per seed: the same parameters always produce the
byte-identical instance document.
"""

from __future__ import annotations

import json
import random
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from importlib import resources

from .adl import DomainSpec, Not, StaticTest, parse_domain, pretty_print
from .feasibility import Workspace, load_workspace
from .instance import InstanceSpec, parse_instance
from .plantree import CSV_HEADER


def domain_text(safety_strict: bool = True) -> str:
    """The shipped ADL-H assembly domain.

    With safety_strict=False the hard safety preconditions on communication
    actions (never direct the human at a dangerous part) are replaced by
    heavily weighted weak constraints, so a plan may trade safety against
    plan size if nothing else works.
    """
    text = resources.files("cohap.data").joinpath("assembly.adlh").read_text()
    if safety_strict:
        return text
    return _relax_safety(text)


_SAFETY_GUARDED = ("confirmAttach", "askHelp", "requestToUnhold",
                   "requestToAttach")


def _relax_safety(text: str) -> str:
    dom = parse_domain(text)

    def is_danger_guard(item) -> bool:
        return (isinstance(item, Not) and isinstance(item.item, StaticTest)
                and item.item.name == "dangerous")

    actions = []
    for a in dom.actions:
        if a.name in _SAFETY_GUARDED:
            pres = tuple(p for p in a.preconditions
                         if not any(is_danger_guard(i) for i in p))
            a = replace(a, preconditions=pres)
        actions.append(a)
    dom = replace(dom, actions=tuple(actions))
    out = pretty_print(dom)
    out += ("\nweak [p: part, q: part]"
            " occurs(confirmAttach(p, q)), dangerous(p) [100@3].\n")
    out += ("weak [p: part, q: part, c: conn]"
            " occurs(askHelp(p, q, c)), dangerous(p) [100@3].\n")
    out += "weak [p: part] occurs(requestToUnhold(p)), dangerous(p) [100@3].\n"
    out += ("weak [p: part, q: part, c: conn]"
            " occurs(requestToAttach(p, q, c)), dangerous(p) [100@3].\n")
    return out


def bench_workspace() -> Workspace:
    """The canonical benchmark workspace (20x10 grid, two manipulators)."""
    text = resources.files("cohap.data").joinpath("bench.json").read_text()
    return load_workspace(text)


# ---------------------------------------------------------------------------
# Instance generation

@dataclass(frozen=True)
class AssemblyInstanceParams:
    n_legs: int = 2
    n_feet: int = 1
    foot_shapes: tuple[str, ...] = ("square", "triangle", "circle")
    unsafe_parts: int = 1  # U: dangerous feet, staged in the shared region
    human_only: int = 1    # P: safe parts placed in the human-only region
    robot_only: int = 1    # R: safe parts placed in the robot-only region
    seed: int = 0

    def validate(self) -> None:
        if self.n_legs < 1:
            raise ValueError("need at least one leg")
        if self.n_feet < 0 or self.unsafe_parts < 0 \
                or self.human_only < 0 or self.robot_only < 0:
            raise ValueError("counts must be nonnegative")
        if self.n_feet and not self.foot_shapes:
            raise ValueError("feet need at least one shape")
        if self.unsafe_parts > self.n_feet:
            raise ValueError(
                f"more dangerous parts ({self.unsafe_parts}) than feet "
                f"({self.n_feet})")
        movable = self.n_legs + self.n_feet - self.unsafe_parts
        if self.human_only + self.robot_only > movable:
            raise ValueError(
                f"cannot place {self.human_only} human-only plus "
                f"{self.robot_only} robot-only parts among {movable} "
                "safe parts")


def generate_instance(params: AssemblyInstanceParams) -> InstanceSpec:
    """Deterministically generate an assembly instance for the bench workspace."""
    params.validate()
    rng = random.Random(params.seed)
    shapes = params.foot_shapes

    legs = [f"leg{i + 1}" for i in range(params.n_legs)]
    feet = [f"foot{i + 1}" for i in range(params.n_feet)]
    top = "top1"
    parts = legs + feet + [top]

    constants = {p: "part" for p in parts}
    constants.update({"left": "manip", "right": "manip"})
    constants.update({r: "region"
                      for r in ("robotOnly", "shared", "humanOnly", "hazard")})

    # joints: every leg bolts to the top; foot j screws into leg (j mod L),
    # shapes assigned so each foot matches its leg's hole
    joints = []  # (part, target, conn)
    conns = {}
    for i, leg in enumerate(legs):
        c = f"c{len(joints) + 1}"
        joints.append((leg, top, c))
        conns[c] = "conn"
    foot_shape = {}
    for j, foot in enumerate(feet):
        leg = legs[j % params.n_legs]
        c = f"c{len(joints) + 1}"
        joints.append((foot, leg, c))
        conns[c] = "conn"
        foot_shape[foot] = shapes[j % len(shapes)]
    constants.update(conns)

    dangerous = feet[:params.unsafe_parts]
    safe_movable = [p for p in legs + feet if p not in dangerous]
    human_only = rng.sample(safe_movable, params.human_only)
    remaining = [p for p in safe_movable if p not in human_only]
    robot_only = rng.sample(remaining, params.robot_only)

    def place(p: str) -> str:
        if p in human_only:
            return "humanOnly"
        if p in robot_only:
            return "robotOnly"
        return "shared"

    statics = {
        "class": ([["leg", leg] for leg in legs]
                  + [["foot", f] for f in feet] + [["top", top]]),
        "attachable": [["leg", "top"], ["foot", "leg"]],
        "joint": [[p, q, c] for p, q, c in joints],
        "compatible": [[p, q] for p, q, _ in joints],
        "dangerous": [[p] for p in dangerous],
        "unsafeRegion": [["hazard"]],
        "humanReach": [["shared"], ["humanOnly"]],
    }
    if foot_shape:
        statics["class"] += [[foot_shape[f], f] for f in feet]

    init = [f"loc({p}, {place(p)})" for p in parts]
    init += ["free(left)", "free(right)"]
    if human_only:
        # the human is busy with one of the parts staged on their side;
        # which one is initially unknown
        init.append("humanHolding")
        candidates = set(human_only)
        init += [f"-humanHoldingPart({p})" for p in parts
                 if p not in candidates]
    else:
        init.append("-humanHolding")
        init += [f"-humanHoldingPart({p})" for p in parts]

    goal = [f"attached({p}, {q}, {c})" for p, q, c in joints]

    doc = {
        "constants": constants,
        "statics": statics,
        "init": init,
        "goal": goal,
        "workspace": "bench.json",
    }
    text = json.dumps(doc, indent=2) + "\n"
    return parse_instance(text, parse_domain(domain_text()))


def generate_instance_json(params: AssemblyInstanceParams) -> str:
    from .instance import instance_to_json
    return instance_to_json(generate_instance(params))


def default_instance() -> InstanceSpec:
    """Small showcase instance: one robot-side leg, one human-side leg, one
    dangerous foot in the shared region, one tabletop."""
    return generate_instance(AssemblyInstanceParams(
        n_legs=2, n_feet=1, unsafe_parts=1, human_only=1, robot_only=1,
        seed=7))


# ---------------------------------------------------------------------------
# Benchmark sweeps

AXES = ("U", "P", "R")


def sweep_params(axis: str, k: int, seed: int = 0) -> AssemblyInstanceParams:
    """Instance parameters for one point of a difficulty sweep."""
    if axis == "U":
        return AssemblyInstanceParams(n_legs=1, n_feet=k, unsafe_parts=k,
                                      human_only=0, robot_only=1, seed=seed)
    if axis == "P":
        return AssemblyInstanceParams(n_legs=k, n_feet=0, unsafe_parts=0,
                                      human_only=k, robot_only=0, seed=seed)
    if axis == "R":
        return AssemblyInstanceParams(n_legs=k, n_feet=0, unsafe_parts=0,
                                      human_only=0, robot_only=k, seed=seed)
    raise ValueError(f"unknown sweep axis {axis!r} (expected one of {AXES})")


def _axis_counts(params: AssemblyInstanceParams) -> tuple[int, int, int]:
    return (params.unsafe_parts, params.human_only, params.robot_only)


def bench_one(axis: str, k: int, seed: int = 0, max_horizon: int = 30,
              jobs: int = 1) -> dict:
    """Solve one sweep instance and return its CSV row as a dict."""
    from .planner import PlannerConfig, Unsolvable, solve

    params = sweep_params(axis, k, seed)
    inst = generate_instance(params)
    u, p, r = _axis_counts(params)
    row = {"inst": f"{axis}{k}", "U": u, "P": p, "R": r}
    cfg = PlannerConfig(max_horizon=max_horizon, worker_count=jobs)
    t0 = time.perf_counter()
    try:
        result = solve(domain_text(), _inst_json(inst), bench_workspace(), cfg)
    except Unsolvable:
        # flagged, not dropped: metric columns carry the sentinel -1
        elapsed = time.perf_counter() - t0
        for col in CSV_HEADER.split(",")[4:-2]:
            row[col] = -1
        row["plan_s"] = round(elapsed, 6)
        row["checks_s"] = 0.0
        return row
    row.update(result.metrics.as_dict())
    row["plan_s"] = round(result.timings["plan_s"], 6)
    row["checks_s"] = round(result.timings["checks_s"], 6)
    return row


def _inst_json(inst: InstanceSpec) -> str:
    from .instance import instance_to_json
    return instance_to_json(inst)


def _bench_task(args):
    return bench_one(*args)


def bench_sweep(axis: str, ks, seed: int = 0, max_horizon: int = 30,
                jobs: int = 1) -> list[dict]:
    """Run a difficulty sweep; rows come back in sweep order."""
    tasks = [(axis, k, seed, max_horizon, 1) for k in ks]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(_bench_task, tasks))
    return [_bench_task(t) for t in tasks]


def rows_to_csv(rows: list[dict]) -> str:
    cols = CSV_HEADER.split(",")
    lines = [CSV_HEADER]
    for row in rows:
        lines.append(",".join(str(row[c]) for c in cols))
    return "\n".join(lines) + "\n"
