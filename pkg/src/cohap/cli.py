"""Command-line interface.

Subcommands: plan, stats, validate, export-dot, exec, gen, bench, check.
Exit codes: 0 success, 1 planning/validation failure, 2 usage error.
Set COHAP_LOG=debug|info|warning to enable diagnostics on stderr.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path

from . import assembly
from .adl import ParseError, parse_domain, validate
from .executor import (ExecutionError, InteractiveOutcomeProvider,
                       RandomOutcomeProvider, ScriptedOutcomeProvider, run,
                       serve_session)
from .feasibility import FeasibilityError, Workspace, load_workspace
from .grounding import GroundingError, ground
from .instance import instance_to_json, parse_instance
from .planner import DomainError, PlannerConfig, Unsolvable, solve
from .plantree import from_json, metrics, replay_validate, to_dot, to_json

log = logging.getLogger("cohap")

USAGE_ERROR = 2
FAILURE = 1


def _setup_logging() -> None:
    level = os.environ.get("COHAP_LOG", "").upper()
    if level:
        logging.basicConfig(level=getattr(logging, level, logging.INFO),
                            format="%(levelname)s %(name)s: %(message)s")


def _read(path: str) -> str:
    return Path(path).read_text()


def _write_out(text: str, out: str | None) -> None:
    if out is None or out == "-":
        sys.stdout.write(text)
    else:
        Path(out).write_text(text)


def _load_domain(args) -> str:
    if getattr(args, "domain", None):
        return _read(args.domain)
    return assembly.domain_text(
        safety_strict=not getattr(args, "relaxed_safety", False))


def _load_workspace(args, inst_path: str | None, inst) -> Workspace:
    if getattr(args, "workspace", None):
        return load_workspace(_read(args.workspace))
    ref = inst.workspace
    if ref:
        if inst_path:
            candidate = Path(inst_path).parent / ref
            if candidate.exists():
                return load_workspace(candidate.read_text())
        if ref == "bench.json":
            return assembly.bench_workspace()
        if Path(ref).exists():
            return load_workspace(_read(ref))
        raise FeasibilityError(f"workspace file {ref!r} not found")
    return assembly.bench_workspace()


def _planner_config(args) -> PlannerConfig:
    return PlannerConfig(
        max_horizon=getattr(args, "max_horizon", 30),
        worker_count=getattr(args, "jobs", 1),
        safety_strict=not getattr(args, "relaxed_safety", False))


def _solve(args):
    dom_text = _load_domain(args)
    inst_text = _read(args.instance)
    dom = parse_domain(dom_text)
    inst = parse_instance(inst_text, dom)
    workspace = _load_workspace(args, args.instance, inst)
    return solve(dom_text, inst_text, workspace, _planner_config(args))


# ---------------------------------------------------------------------------
# Subcommands

def cmd_plan(args) -> int:
    result = _solve(args)
    timings = result.timings if args.timings else None
    _write_out(to_json(result.tree, timings=timings), args.out)
    log.info("planned: %s", result.metrics.as_dict())
    return 0


def cmd_stats(args) -> int:
    tree = from_json(_read(args.tree))
    doc = {"metrics": metrics(tree).as_dict()}
    if tree.safety:
        doc["safety"] = tree.safety
    _write_out(json.dumps(doc, indent=2, sort_keys=True) + "\n", args.out)
    return 0


def cmd_validate(args) -> int:
    dom_text = _load_domain(args)
    dom = parse_domain(dom_text)
    diags = validate(dom)
    for d in diags:
        print(f"{d.severity}: {d.message} (line {d.pos.line})",
              file=sys.stderr)
    if any(d.severity == "error" for d in diags):
        return FAILURE
    if not args.instance:
        return 0
    inst_text = _read(args.instance)
    inst = parse_instance(inst_text, dom)
    workspace = _load_workspace(args, args.instance, inst)
    from .feasibility import workspace_oracle
    from .planner import _autofill_unsafe_regions
    inst = _autofill_unsafe_regions(dom, inst, workspace)
    problem = ground(dom, inst, workspace_oracle(workspace))
    if not args.tree:
        print(f"ok: {problem.stats['atoms']} atoms, "
              f"{problem.stats['actions']} ground actions")
        return 0
    tree = from_json(_read(args.tree))
    violations = replay_validate(tree, problem)
    for v in violations:
        print(f"{v.kind} at node {v.node_id}: {v.message}", file=sys.stderr)
    if violations:
        return FAILURE
    print(f"ok: {len(tree.nodes)} nodes, all branches replay to the goal")
    return 0


def cmd_export_dot(args) -> int:
    tree = from_json(_read(args.tree))
    _write_out(to_dot(tree), args.out)
    return 0


def cmd_exec(args) -> int:
    result = _solve(args)
    tree, problem = result.tree, result.problem
    if args.serve:
        def ready(host, port):
            print(f"listening on {host}:{port}", flush=True)
        log_ = serve_session(tree, problem, host=args.host, port=args.port,
                             timeout=args.timeout, ready=ready)
    else:
        if args.mode == "scripted":
            if not args.script:
                raise ExecutionError("--mode scripted requires --script")
            provider = ScriptedOutcomeProvider(args.script.split(","))
        elif args.mode == "random":
            provider = RandomOutcomeProvider(args.seed)
        else:
            provider = InteractiveOutcomeProvider()
        log_ = run(tree, problem, provider)
    _write_out(json.dumps(log_.as_dict(), indent=2, sort_keys=True) + "\n",
               args.out)
    return 0 if log_.reached_goal else FAILURE


def cmd_gen(args) -> int:
    if args.axis:
        params = assembly.sweep_params(args.axis, args.size, args.seed)
    else:
        params = assembly.AssemblyInstanceParams(
            n_legs=args.legs, n_feet=args.feet, unsafe_parts=args.unsafe,
            human_only=args.human, robot_only=args.robot, seed=args.seed)
    inst = assembly.generate_instance(params)
    _write_out(instance_to_json(inst), args.out)
    return 0


def cmd_bench(args) -> int:
    ks = range(args.min, args.max + 1)
    axes = [args.axis] if args.axis else list(assembly.AXES)
    rows = []
    for axis in axes:
        rows.extend(assembly.bench_sweep(axis, ks, seed=args.seed,
                                         max_horizon=args.max_horizon,
                                         jobs=args.jobs))
    _write_out(assembly.rows_to_csv(rows), args.out)
    return 0


def cmd_check(args) -> int:
    dom_text = _load_domain(args)
    try:
        dom = parse_domain(dom_text)
    except ParseError as e:
        print(f"parse error: {e}", file=sys.stderr)
        return FAILURE
    diags = validate(dom)
    for d in diags:
        print(f"{d.severity}: {d.message} (line {d.pos.line})")
    errors = sum(1 for d in diags if d.severity == "error")
    print(f"{len(dom.actions)} actions, {len(dom.fluents)} fluents, "
          f"{len(diags)} diagnostic(s), {errors} error(s)")
    return FAILURE if errors else 0


# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cohap",
        description="Offline hybrid conditional planner for collaborative "
                    "assembly")
    sub = parser.add_subparsers(dest="command", required=True)

    def common_planning(p, needs_instance=True):
        p.add_argument("--domain", help="ADL-H domain file "
                       "(default: shipped assembly domain)")
        if needs_instance:
            p.add_argument("--instance", required=True,
                           help="instance JSON file")
        p.add_argument("--workspace", help="workspace JSON file")
        p.add_argument("--max-horizon", type=int, default=30)
        p.add_argument("--jobs", type=int, default=1,
                       help="parallel branch workers")
        p.add_argument("--relaxed-safety", action="store_true",
                       help="trade hard safety gates for weak constraints")

    p = sub.add_parser("plan", help="plan a conditional tree")
    common_planning(p)
    p.add_argument("--timings", action="store_true",
                   help="include timings in the tree JSON (non-reproducible)")
    p.add_argument("--out", help="output file (default stdout)")
    p.set_defaults(fn=cmd_plan)

    p = sub.add_parser("stats", help="print metrics of a plan-tree JSON")
    p.add_argument("--tree", required=True)
    p.add_argument("--out")
    p.set_defaults(fn=cmd_stats)

    p = sub.add_parser("validate",
                       help="validate a domain, instance, and/or plan tree")
    p.add_argument("--domain")
    p.add_argument("--instance")
    p.add_argument("--workspace")
    p.add_argument("--tree")
    p.set_defaults(fn=cmd_validate)

    p = sub.add_parser("export-dot", help="render a plan tree to Graphviz")
    p.add_argument("--tree", required=True)
    p.add_argument("--out")
    p.set_defaults(fn=cmd_export_dot)

    p = sub.add_parser("exec", help="plan and execute one session")
    common_planning(p)
    p.add_argument("--mode", choices=("scripted", "random", "interactive"),
                   default="interactive")
    p.add_argument("--script", help="comma-separated outcome labels")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--serve", action="store_true",
                   help="serve the session over local TCP instead")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=0)
    p.add_argument("--timeout", type=float, default=120.0)
    p.add_argument("--out", help="execution log output (default stdout)")
    p.set_defaults(fn=cmd_exec)

    p = sub.add_parser("gen", help="generate an assembly instance")
    p.add_argument("--axis", choices=assembly.AXES,
                   help="generate a sweep instance instead of custom counts")
    p.add_argument("--size", type=int, default=2, help="sweep difficulty k")
    p.add_argument("--legs", type=int, default=2)
    p.add_argument("--feet", type=int, default=1)
    p.add_argument("--unsafe", type=int, default=1)
    p.add_argument("--human", type=int, default=1)
    p.add_argument("--robot", type=int, default=1)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out")
    p.set_defaults(fn=cmd_gen)

    p = sub.add_parser("bench", help="run difficulty sweeps, emit CSV")
    p.add_argument("--axis", choices=assembly.AXES,
                   help="single axis (default: all three)")
    p.add_argument("--min", type=int, default=2)
    p.add_argument("--max", type=int, default=6)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--max-horizon", type=int, default=30)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--out")
    p.set_defaults(fn=cmd_bench)

    p = sub.add_parser("check", help="parse and lint a domain file")
    p.add_argument("--domain")
    p.set_defaults(fn=cmd_check)

    return parser


def main(argv=None) -> int:
    _setup_logging()
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except (ParseError, DomainError, GroundingError, FeasibilityError,
            Unsolvable, ExecutionError, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        return FAILURE
    except OSError as e:
        print(f"error: {e}", file=sys.stderr)
        return FAILURE


if __name__ == "__main__":
    sys.exit(main())
