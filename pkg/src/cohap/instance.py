"""Problem instances: object universe, static facts, initial belief, goal.

Instances are JSON documents:

    {
      "constants": {"leg1": "part", "left": "manip", ...},
      "statics":   {"joint": [["leg1","top1","c1"], ...], "dangerous": [["f1"]]},
      "init":      ["loc(leg1, robotOnly)", "-humanHolding"],
      "goal":      ["attached(leg1, top1, c1)"],
      "workspace": "bench.json"
    }

Init literals: a positive literal asserts True, a '-'-prefixed literal asserts
False.  Unmentioned partial fluents start Unknown; unmentioned full fluents
start False.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Optional

from .adl import DomainSpec, ParseError

GroundAtom = tuple[str, tuple[str, ...]]
GroundLit = tuple[GroundAtom, bool]


@dataclass(frozen=True)
class InstanceSpec:
    constants: tuple[tuple[str, str], ...]  # (constant, sort), declaration order
    statics: dict[str, tuple[tuple[str, ...], ...]]
    init: tuple[GroundLit, ...]
    goal: tuple[GroundLit, ...]
    workspace: Optional[str] = None

    def sort_members(self, dom: DomainSpec) -> dict[str, tuple[str, ...]]:
        """Full universe: domain-declared members plus instance constants."""
        out: dict[str, list[str]] = {s.name: list(s.members) for s in dom.sorts}
        for const, sort in self.constants:
            if const not in out[sort]:
                out[sort].append(const)
        return {k: tuple(v) for k, v in out.items()}


def parse_atom(text: str) -> tuple[str, tuple[str, ...], bool]:
    """Parse 'name(a, b)' or '-name' into (name, args, positive)."""
    s = text.strip()
    positive = True
    if s.startswith("-"):
        positive = False
        s = s[1:].strip()
    if "(" in s:
        if not s.endswith(")"):
            raise ParseError(f"malformed atom {text!r}")
        name, rest = s.split("(", 1)
        inner = rest[:-1].strip()
        args = tuple(a.strip() for a in inner.split(",")) if inner else ()
    else:
        name, args = s, ()
    name = name.strip()
    if not name.isidentifier():
        raise ParseError(f"malformed atom {text!r}")
    for a in args:
        if not a.isidentifier():
            raise ParseError(f"malformed term {a!r} in atom {text!r}")
    return name, args, positive


def parse_instance(text: str, dom: DomainSpec) -> InstanceSpec:
    """Parse and type-check an instance JSON document against a domain."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as e:
        raise ParseError(f"invalid instance JSON: {e.msg}", e.lineno, e.colno)
    if not isinstance(doc, dict):
        raise ParseError("instance JSON must be an object")

    sort_names = {s.name for s in dom.sorts}
    constants: list[tuple[str, str]] = []
    seen: dict[str, str] = {}
    for const, sort in (doc.get("constants") or {}).items():
        if sort not in sort_names:
            raise ParseError(f"constant {const!r} has unknown sort {sort!r}")
        if const in seen:
            raise ParseError(f"constant {const!r} declared twice")
        seen[const] = sort
        constants.append((const, sort))

    inst_partial = InstanceSpec(tuple(constants), {}, (), (), None)
    members = inst_partial.sort_members(dom)
    const_sort: dict[str, str] = {}
    for sort, ms in members.items():
        for m in ms:
            const_sort[m] = sort

    static_map = dom.static_map()
    statics: dict[str, tuple[tuple[str, ...], ...]] = {}
    for name, tuples in (doc.get("statics") or {}).items():
        decl = static_map.get(name)
        if decl is None:
            raise ParseError(f"unknown static relation {name!r}")
        rows: list[tuple[str, ...]] = []
        for row in tuples:
            row = tuple(row)
            if len(row) != decl.arity:
                raise ParseError(f"static {name!r} expects arity {decl.arity},"
                                 f" got {row!r}")
            # static tuple terms are free tokens: relations may mention labels
            # (e.g. class names) that are not sorted constants
            for term in row:
                if not str(term).isidentifier():
                    raise ParseError(f"static {name!r} has malformed term "
                                     f"{term!r}")
            rows.append(tuple(str(t) for t in row))
        statics[name] = tuple(rows)

    fluent_map = dom.fluent_map()

    def check_ground(name: str, args: tuple[str, ...], where: str) -> GroundAtom:
        schema = fluent_map.get(name)
        if schema is None:
            raise ParseError(f"{where} references undeclared fluent {name!r}")
        if len(args) != schema.arity:
            raise ParseError(f"{where}: fluent {name!r} expects arity "
                             f"{schema.arity}, got {len(args)}")
        for a, sort in zip(args, schema.arg_sorts):
            if const_sort.get(a) != sort:
                raise ParseError(f"{where}: term {a!r} is not a constant of "
                                 f"sort {sort!r}")
        return (name, args)

    init: list[GroundLit] = []
    values: dict[GroundAtom, bool] = {}
    for lit in doc.get("init") or []:
        name, args, positive = parse_atom(lit)
        atom = check_ground(name, args, "init")
        if atom in values and values[atom] != positive:
            raise ParseError(f"contradictory initial literals for "
                             f"{name}{args!r}")
        if atom not in values:
            values[atom] = positive
            init.append((atom, positive))

    goal: list[GroundLit] = []
    for lit in doc.get("goal") or []:
        name, args, positive = parse_atom(lit)
        atom = check_ground(name, args, "goal")
        goal.append((atom, positive))

    workspace = doc.get("workspace")
    return InstanceSpec(tuple(constants), statics, tuple(init), tuple(goal),
                        workspace)


def instance_to_json(inst: InstanceSpec) -> str:
    """Serialize an instance back to its JSON document form (byte-stable)."""
    def lit(atom: GroundAtom, positive: bool) -> str:
        name, args = atom
        s = f"{name}({', '.join(args)})" if args else name
        return s if positive else f"-{s}"

    doc = {
        "constants": {c: s for c, s in inst.constants},
        "statics": {k: [list(r) for r in v] for k, v in inst.statics.items()},
        "init": [lit(a, p) for a, p in inst.init],
        "goal": [lit(a, p) for a, p in inst.goal],
    }
    if inst.workspace is not None:
        doc["workspace"] = inst.workspace
    return json.dumps(doc, indent=2) + "\n"
