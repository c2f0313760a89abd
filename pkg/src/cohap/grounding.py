"""Grounding and belief-state transition semantics.

Grounding instantiates action schemas, constraints, weak constraints and
failure rules over the object universe.  External predicates always receive
ground arguments here, so every external test is evaluated once during
grounding (through the FeasibilityOracle, which caches and counts the calls)
and folded into the ground conditions.  Ground actions whose static
precondition parts are false can never apply in any state and are dropped;
both the exhaustive and the retained action counts are reported.

Belief values are three-valued: True, False, or None for Unknown.
"""

from __future__ import annotations

import itertools
import time
from dataclasses import dataclass, field, replace
from typing import Optional, Union

from . import adl
from .adl import (ActionSchema, CondItem, Condition, CountTest, DomainSpec,
                  ExternalTest, FailureTest, FluentLit, Not, Occurs,
                  StaticTest, TermCmp)
from .feasibility import FeasibilityOracle
from .instance import GroundAtom, InstanceSpec

Tri = Optional[bool]


class GroundingError(Exception):
    pass


class ConstraintViolation(Exception):
    """A successor state violates a hard state constraint (domain bug)."""

    def __init__(self, constraint: str, action: str):
        self.constraint = constraint
        self.action = action
        super().__init__(f"state constraint violated after {action}: "
                         f"{constraint}")


# ---------------------------------------------------------------------------
# Ground condition representation (externals/statics already folded)

@dataclass(frozen=True)
class GLit:
    idx: int
    negated: bool = False


@dataclass(frozen=True)
class GFail:
    key: GroundAtom  # (failure name, ground args)


@dataclass(frozen=True)
class GNot:
    item: "GItem"


@dataclass(frozen=True)
class GBool:
    value: bool


@dataclass(frozen=True)
class GCount:
    entries: tuple[Union[int, GroundAtom], ...]  # atom index or failure key
    failure_entries: bool
    cmp: str
    bound: int


@dataclass(frozen=True)
class GOccurs:
    name: str  # action name, or a kind keyword with empty args
    args: tuple[str, ...] = ()
    kind_match: bool = False


GItem = Union[GLit, GFail, GNot, GBool, GCount, GOccurs]
GCond = tuple[GItem, ...]


@dataclass(frozen=True)
class GroundOutcome:
    label: str
    literals: tuple[tuple[int, bool], ...]


@dataclass(frozen=True)
class GroundAction:
    name: str
    args: tuple[str, ...]
    kind: str
    preconditions: tuple[GCond, ...]
    effects: tuple[tuple[int, bool], ...] = ()
    outcomes: tuple[GroundOutcome, ...] = ()

    def label(self) -> str:
        return f"{self.name}({', '.join(self.args)})" if self.args \
            else f"{self.name}()"


@dataclass(frozen=True)
class GroundWeak:
    body: GCond
    weight: int
    level: int
    text: str


@dataclass(frozen=True)
class BeliefState:
    values: tuple[Tri, ...]
    step: int = 0


@dataclass
class GroundProblem:
    atoms: tuple[GroundAtom, ...]
    atom_index: dict[GroundAtom, int]
    partial: tuple[bool, ...]  # per atom: declared partial?
    actions: tuple[GroundAction, ...]
    constraints: tuple[tuple[GCond, str], ...]
    weaks: tuple[GroundWeak, ...]
    failure_rules: dict[GroundAtom, tuple[GCond, ...]]
    levels: tuple[int, ...]  # levels present, highest first
    init: BeliefState
    goal: tuple[tuple[int, bool], ...]
    members: dict[str, tuple[str, ...]]
    statics: dict[str, frozenset[tuple[str, ...]]]
    stats: dict = field(default_factory=dict)

    # -- evaluation

    def holds_item(self, item: GItem, s: BeliefState,
                   action: Optional[GroundAction] = None) -> bool:
        if isinstance(item, GLit):
            v = s.values[item.idx]
            return v is False if item.negated else v is True
        if isinstance(item, GBool):
            return item.value
        if isinstance(item, GNot):
            return not self.holds_item(item.item, s, action)
        if isinstance(item, GFail):
            return self.failure_holds(item.key, s)
        if isinstance(item, GCount):
            if item.failure_entries:
                n = sum(1 for e in item.entries if self.failure_holds(e, s))
            else:
                n = sum(1 for e in item.entries if s.values[e] is True)
            if item.cmp == "<=":
                return n <= item.bound
            if item.cmp == ">=":
                return n >= item.bound
            return n == item.bound
        if isinstance(item, GOccurs):
            if action is None:
                return False
            if item.kind_match:
                if item.name == "communication":
                    return action.kind in adl.COMM_KINDS
                return action.kind == item.name
            return action.name == item.name and action.args == item.args
        raise TypeError(f"unknown ground item {item!r}")

    def holds(self, cond: GCond, s: BeliefState,
              action: Optional[GroundAction] = None) -> bool:
        return all(self.holds_item(i, s, action) for i in cond)

    def failure_holds(self, key: GroundAtom, s: BeliefState) -> bool:
        bodies = self.failure_rules.get(key, ())
        return any(self.holds(b, s) for b in bodies)

    def goal_holds(self, s: BeliefState) -> bool:
        return all((s.values[i] is True) if v else (s.values[i] is False)
                   for i, v in self.goal)

    # -- transitions

    def consistent_outcomes(self, s: BeliefState,
                            a: GroundAction) -> tuple[GroundOutcome, ...]:
        out = []
        for o in a.outcomes:
            # an outcome is ruled out when it contradicts current knowledge;
            # literals on full fluents are effect components, not observations
            if not any(self.partial[i] and s.values[i] is (not v)
                       for i, v in o.literals):
                out.append(o)
        return tuple(out)

    def applicable(self, s: BeliefState) -> list[GroundAction]:
        out = []
        for a in self.actions:
            if all(self.holds(p, s) for p in a.preconditions):
                if a.kind in adl.DECISION_KINDS:
                    if len(self.consistent_outcomes(s, a)) < 2:
                        continue
                out.append(a)
        return out

    def successor(self, s: BeliefState, a: GroundAction,
                  outcome: Optional[int] = None) -> BeliefState:
        if a.kind in adl.DECISION_KINDS:
            if outcome is None:
                raise ValueError(f"{a.label()} needs an outcome index")
            literals = self.consistent_outcomes(s, a)[outcome].literals
        else:
            if outcome is not None:
                raise ValueError(f"{a.label()} is deterministic")
            literals = a.effects
        values = list(s.values)
        for i, v in literals:
            values[i] = v
        nxt = BeliefState(tuple(values), s.step + 1)
        for body, text in self.constraints:
            if self.holds(body, nxt):
                raise ConstraintViolation(text, a.label())
        return nxt

    def step_cost(self, s: BeliefState, a: GroundAction) -> dict[int, int]:
        """Weak-constraint cost of taking action a in state s (per level)."""
        cost: dict[int, int] = {}
        for w in self.weaks:
            if self.holds(w.body, s, a):
                cost[w.level] = cost.get(w.level, 0) + w.weight
        return cost

    def cost_key(self, cost: dict[int, int]) -> tuple[int, ...]:
        """Lexicographic comparison key: highest level first."""
        return tuple(cost.get(lv, 0) for lv in self.levels)

    def atom_label(self, idx: int) -> str:
        name, args = self.atoms[idx]
        return f"{name}({', '.join(args)})" if args else name


# ---------------------------------------------------------------------------
# Grounding

def ground(dom: DomainSpec, inst: InstanceSpec, fx: FeasibilityOracle,
           atom_budget: int = 2_000_000) -> GroundProblem:
    for ext in dom.externals:
        if not fx.registered(ext.name):
            raise GroundingError(f"external {ext.name!r} has no registered "
                                 "implementation")
    stats0 = fx.check_stats()
    t0 = time.perf_counter()

    members = inst.sort_members(dom)
    statics = {name: frozenset(rows) for name, rows in inst.statics.items()}
    for st in dom.statics:
        statics.setdefault(st.name, frozenset())

    # ground fluent atoms, in fluent declaration order then member order
    atoms: list[GroundAtom] = []
    partial: list[bool] = []
    for f in dom.fluents:
        domains = [members.get(s, ()) for s in f.arg_sorts]
        for combo in itertools.product(*domains):
            atoms.append((f.name, combo))
            partial.append(f.partial)
            if len(atoms) > atom_budget:
                raise GroundingError(
                    f"grounding exceeds atom budget ({atom_budget}); "
                    f"at least {len(atoms)} ground atoms")
    atom_index = {a: i for i, a in enumerate(atoms)}

    g = _Grounder(dom, inst, fx, members, statics, atom_index)

    failure_rules: dict[GroundAtom, list[GCond]] = {}
    for rule in dom.failures:
        for sub in g.substitutions(rule.params):
            body = g.ground_condition(rule.body, sub)
            if body is None:
                continue  # statically false body can never derive the atom
            key = (rule.name, tuple(sub[v] for v, _ in rule.params))
            failure_rules.setdefault(key, []).append(body)
    g.failure_rules = {k: tuple(v) for k, v in failure_rules.items()}

    exhaustive = 0
    actions: list[GroundAction] = []
    for si, schema in enumerate(dom.actions):
        ground_here: list[GroundAction] = []
        for sub in g.substitutions(schema.params):
            exhaustive += 1
            ga = g.ground_action(schema, sub)
            if ga is not None:
                ground_here.append(ga)
        ground_here.sort(key=lambda a: a.args)
        actions.extend(ground_here)

    constraints: list[tuple[GCond, str]] = []
    for c in dom.constraints:
        for sub in g.substitutions(c.variables):
            body = g.ground_condition(c.body, sub)
            if body is None:
                continue
            text = adl._fmt_cond(c.body) + (f"  [{sub}]" if sub else "")
            constraints.append((body, text))

    weaks: list[GroundWeak] = []
    for w in dom.weaks:
        for sub in g.substitutions(w.variables):
            body = g.ground_condition(w.body, sub)
            if body is None:
                continue
            text = f"{adl._fmt_cond(w.body)} [{w.weight}@{w.level}]"
            weaks.append(GroundWeak(body, w.weight, w.level, text))

    levels = tuple(sorted({w.level for w in weaks}, reverse=True))

    fluent_map = dom.fluent_map()
    values: list[Tri] = [None if p else False for p in partial]
    for (name, args), positive in inst.init:
        values[atom_index[(name, args)]] = positive
    init = BeliefState(tuple(values), 0)

    goal = tuple((atom_index[a], v) for a, v in inst.goal)

    stats1 = fx.check_stats()
    stats = {
        "atoms": len(atoms),
        "actions": len(actions),
        "actions_exhaustive": exhaustive,
        "external_calls": stats1["calls"] - stats0["calls"],
        "seconds": time.perf_counter() - t0,
    }
    return GroundProblem(tuple(atoms), atom_index, tuple(partial),
                         tuple(actions), tuple(constraints), tuple(weaks),
                         g.failure_rules, levels, init, goal, members,
                         statics, stats)


class _Grounder:
    def __init__(self, dom, inst, fx, members, statics, atom_index):
        self.dom = dom
        self.fx = fx
        self.members = members
        self.statics = statics
        self.atom_index = atom_index
        self.const_sorts: dict[str, str] = {}
        for sort, ms in members.items():
            for m in ms:
                self.const_sorts[m] = sort
        self.failure_rules: dict[GroundAtom, tuple[GCond, ...]] = {}
        self.action_map = dom.action_map()

    def substitutions(self, params):
        domains = [self.members.get(s, ()) for _, s in params]
        names = [v for v, _ in params]
        for combo in itertools.product(*domains):
            yield dict(zip(names, combo))

    def term(self, t: str, sub: dict[str, str]) -> str:
        if t in sub:
            return sub[t]
        if t in self.const_sorts:
            return t
        raise GroundingError(f"unbound term {t!r} during grounding")

    def atom_idx(self, name: str, args: tuple[str, ...],
                 sub: dict[str, str]) -> int:
        key = (name, tuple(self.term(a, sub) for a in args))
        idx = self.atom_index.get(key)
        if idx is None:
            raise GroundingError(f"ill-sorted ground atom {key!r}")
        return idx

    def ground_condition(self, cond: Condition,
                         sub: dict[str, str]) -> Optional[GCond]:
        """Ground and statically simplify; None means statically false."""
        out: list[GItem] = []
        for item in cond:
            gi = self.ground_item(item, sub)
            if isinstance(gi, GBool):
                if not gi.value:
                    return None
                continue  # statically true conjunct drops out
            out.append(gi)
        return tuple(out)

    def ground_item(self, item: CondItem, sub: dict[str, str]) -> GItem:
        if isinstance(item, FluentLit):
            return GLit(self.atom_idx(item.name, item.args, sub), item.negated)
        if isinstance(item, StaticTest):
            args = tuple(self.term(a, sub) for a in item.args)
            return GBool(args in self.statics.get(item.name, frozenset()))
        if isinstance(item, ExternalTest):
            args = tuple(self.term(a, sub) for a in item.args)
            return GBool(self.fx.eval(item.name, args))
        if isinstance(item, FailureTest):
            key = (item.name, tuple(self.term(a, sub) for a in item.args))
            return GFail(key)
        if isinstance(item, TermCmp):
            lhs = self.term(item.lhs, sub)
            rhs = self.term(item.rhs, sub)
            eq = lhs == rhs
            return GBool(eq if item.op == "=" else not eq)
        if isinstance(item, Not):
            inner = self.ground_item(item.item, sub)
            if isinstance(inner, GBool):
                return GBool(not inner.value)
            return GNot(inner)
        if isinstance(item, Occurs):
            if item.name in ("actuation", "sensing", "communication"):
                return GOccurs(item.name, (), True)
            args = tuple(self.term(a, sub) for a in item.args)
            return GOccurs(item.name, args, False)
        if isinstance(item, CountTest):
            return self.ground_count(item, sub)
        raise TypeError(f"unknown condition item {item!r}")

    def ground_count(self, item: CountTest, sub: dict[str, str]) -> GItem:
        entries: list = []
        is_failure = isinstance(item.template, FailureTest)
        names = [v for v, _ in item.bindings]
        domains = [self.members.get(s, ()) for _, s in item.bindings]
        for combo in itertools.product(*domains):
            inner = dict(sub)
            inner.update(zip(names, combo))
            keep = True
            for f in item.filters:
                gf = self.ground_item(f, inner)
                if isinstance(gf, GBool):
                    if not gf.value:
                        keep = False
                        break
                else:
                    raise GroundingError(
                        "count guard filters must be statically evaluable "
                        f"(got {f!r})")
            if not keep:
                continue
            if is_failure:
                entries.append((item.template.name,
                                tuple(self.term(a, inner)
                                      for a in item.template.args)))
            else:
                entries.append(self.atom_idx(item.template.name,
                                             item.template.args, inner))
        gc = GCount(tuple(entries), is_failure, item.cmp, item.bound)
        if not entries:
            # constant count of zero
            n = 0
            value = (n <= item.bound if item.cmp == "<="
                     else n >= item.bound if item.cmp == ">="
                     else n == item.bound)
            return GBool(value)
        return gc

    def ground_action(self, schema: ActionSchema,
                      sub: dict[str, str]) -> Optional[GroundAction]:
        pres: list[GCond] = []
        for p in schema.preconditions:
            gp = self.ground_condition(p, sub)
            if gp is None:
                return None  # statically inapplicable
            if gp:
                pres.append(gp)
        args = tuple(sub[v] for v, _ in schema.params)
        if schema.kind in ("actuation", "commDet"):
            effects = tuple((self.atom_idx(e.name, e.args, sub), not e.negated)
                            for e in schema.effects)
            return GroundAction(schema.name, args, schema.kind, tuple(pres),
                                effects=effects)
        oset = schema.outcomes
        outcomes: list[GroundOutcome] = []
        if isinstance(oset, adl.EnumeratedOutcomes):
            for label, lits in oset.outcomes:
                literals = tuple((self.atom_idx(l.name, l.args, sub),
                                  not l.negated) for l in lits)
                outcomes.append(GroundOutcome(label, literals))
        elif isinstance(oset, adl.RangedOutcome):
            choices = self.members.get(oset.sort, ())
            group = []
            for choice in choices:
                inner = dict(sub)
                inner[oset.var] = choice
                group.append(self.atom_idx(oset.template.name,
                                           oset.template.args, inner))
            for choice, idx in zip(choices, group):
                literals = tuple((j, j == idx) for j in group)
                outcomes.append(GroundOutcome(choice, literals))
        return GroundAction(schema.name, args, schema.kind, tuple(pres),
                            outcomes=tuple(outcomes))
