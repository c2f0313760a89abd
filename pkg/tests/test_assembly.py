import pytest

from cohap.adl import parse_domain, validate
from cohap.assembly import (AXES, AssemblyInstanceParams, bench_one,
                            bench_sweep, bench_workspace, default_instance,
                            domain_text, generate_instance,
                            generate_instance_json, rows_to_csv, sweep_params)
from cohap.instance import instance_to_json
from cohap.planner import PlannerConfig, solve
from cohap.plantree import CSV_HEADER, replay_validate

from conftest import make_problem


def test_shipped_domain_is_clean():
    dom = parse_domain(domain_text())
    assert validate(dom) == []


def test_generator_deterministic():
    params = AssemblyInstanceParams(n_legs=3, n_feet=2, unsafe_parts=1,
                                    human_only=2, robot_only=1, seed=42)
    assert generate_instance_json(params) == generate_instance_json(params)


def test_generator_seed_changes_placement():
    texts = {generate_instance_json(AssemblyInstanceParams(
        n_legs=4, n_feet=0, unsafe_parts=0, human_only=2, robot_only=1,
        seed=s)) for s in range(8)}
    assert len(texts) > 1


def test_generator_invariants():
    params = AssemblyInstanceParams(n_legs=3, n_feet=3, unsafe_parts=2,
                                    human_only=1, robot_only=1, seed=9)
    inst = generate_instance(params)
    statics = {k: set(map(tuple, v)) for k, v in inst.statics.items()}
    parts = [c for c, s in inst.constants if s == "part"]
    assert len(parts) == 7  # 3 legs + 3 feet + 1 top
    # each part except the top has exactly one joint
    joined = [p for p, _, _ in statics["joint"]]
    assert sorted(joined) == sorted(p for p in parts if p != "top1")
    # every foot's joint target is a leg (shape matched a leg hole)
    legs = {p for cls, p in statics["class"] if cls == "leg"}
    for p, q, _ in statics["joint"]:
        if p.startswith("foot"):
            assert q in legs
    # dangerous parts are staged in the shared region
    locs = {a[0]: a[1] for (name, a), v in inst.init
            if name == "loc" and v}
    for (d,) in statics["dangerous"]:
        assert locs[d] == "shared"
    # compatible mirrors the joint relation
    assert statics["compatible"] == {(p, q) for p, q, _ in statics["joint"]}


def test_generator_rejects_bad_params():
    with pytest.raises(ValueError):
        generate_instance(AssemblyInstanceParams(n_feet=1, unsafe_parts=2))
    with pytest.raises(ValueError):
        generate_instance(AssemblyInstanceParams(
            n_legs=1, n_feet=0, unsafe_parts=0, human_only=1, robot_only=1))
    with pytest.raises(ValueError):
        generate_instance(AssemblyInstanceParams(n_legs=0))


def test_human_candidates_exclude_dangerous_and_robot_parts():
    inst = generate_instance(AssemblyInstanceParams(
        n_legs=2, n_feet=1, unsafe_parts=1, human_only=1, robot_only=1,
        seed=3))
    known_false = {a[0] for (name, a), v in inst.init
                   if name == "humanHoldingPart" and v is False}
    dangerous = {r[0] for r in inst.statics["dangerous"]}
    assert dangerous <= known_false


def test_default_instance_requires_communication(default_result):
    m = default_result.metrics
    assert m.K >= 1      # the plan tree asks for help somewhere
    assert m.O >= 1      # and offers help with the dangerous foot
    assert m.DN >= 3     # enough decisions for an interactive session
    assert replay_validate(default_result.tree, default_result.problem) == []


def test_sweep_params_axes():
    u = sweep_params("U", 4)
    assert (u.unsafe_parts, u.human_only, u.robot_only) == (4, 0, 1)
    p = sweep_params("P", 4)
    assert (p.unsafe_parts, p.human_only, p.robot_only) == (0, 4, 0)
    r = sweep_params("R", 4)
    assert (r.unsafe_parts, r.human_only, r.robot_only) == (0, 0, 4)
    with pytest.raises(ValueError):
        sweep_params("X", 2)
    # all sweep instances stay within the part budget
    for axis in AXES:
        for k in range(2, 7):
            inst = generate_instance(sweep_params(axis, k))
            parts = [c for c, s in inst.constants if s == "part"]
            assert len(parts) <= 8


def test_bench_one_row_shape():
    row = bench_one("R", 2)
    assert list(row) == CSV_HEADER.split(",")
    assert row["inst"] == "R2"
    assert row["N"] > 0 and row["plan_s"] >= 0


def test_bench_sweep_csv():
    rows = bench_sweep("U", range(2, 4))
    csv = rows_to_csv(rows)
    lines = csv.strip().split("\n")
    assert lines[0] == CSV_HEADER
    assert len(lines) == 3
    assert lines[1].startswith("U2,2,0,1,")


def test_bench_sweep_parallel_matches_serial():
    serial = bench_sweep("R", range(2, 4))
    parallel = bench_sweep("R", range(2, 4), jobs=2)
    strip = lambda r: {k: v for k, v in r.items()
                       if k not in ("plan_s", "checks_s")}
    assert [strip(r) for r in serial] == [strip(r) for r in parallel]


def test_sweep_instances_solve_and_validate():
    for axis in AXES:
        inst = generate_instance(sweep_params(axis, 2))
        res = solve(domain_text(), instance_to_json(inst), bench_workspace())
        assert replay_validate(res.tree, res.problem) == []


def test_relaxed_safety_domain_parses():
    text = domain_text(safety_strict=False)
    dom = parse_domain(text)
    ask = dom.action_map()["askHelp"]
    from cohap.adl import Not, StaticTest
    flat = [i for cond in ask.preconditions for i in cond]
    assert Not(StaticTest("dangerous", ("p",))) not in flat
    assert any(w.level == 3 for w in dom.weaks)
