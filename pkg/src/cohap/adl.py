"""ADL-H: a small action description language for contingent assembly planning.

A domain file declares sorts, fluents, static relations, external predicates,
failure (derived) atoms, actions of four kinds (actuation, sensing,
deterministic and nondeterministic communication), hard state constraints and
weak (soft) constraints.  The concrete grammar is documented in GRAMMAR.md at
the repository root.  Parsing produces an immutable AST; equality on AST nodes
ignores source positions.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Iterator, Optional, Sequence, Union

ACTION_KINDS = ("actuation", "sensing", "commDet", "commNondet")
COMM_KINDS = ("commDet", "commNondet")
DECISION_KINDS = ("sensing", "commNondet")


class ParseError(Exception):
    """Raised on any lexical, syntactic or name-resolution failure."""

    def __init__(self, message: str, line: int = 0, col: int = 0,
                 expected: Optional[set] = None):
        self.message = message
        self.line = line
        self.col = col
        self.expected = expected or set()
        where = f"{line}:{col}: " if line else ""
        super().__init__(f"{where}{message}")


@dataclass(frozen=True)
class Pos:
    line: int = 0
    col: int = 0


# ---------------------------------------------------------------------------
# AST: declarations

@dataclass(frozen=True)
class SortDecl:
    name: str
    members: tuple[str, ...] = ()
    pos: Pos = field(default=Pos(), compare=False)


@dataclass(frozen=True)
class FluentSchema:
    name: str
    arg_sorts: tuple[str, ...]
    partial: bool = False  # partial fluents may be Unknown; full ones never are
    pos: Pos = field(default=Pos(), compare=False)

    @property
    def arity(self) -> int:
        return len(self.arg_sorts)


@dataclass(frozen=True)
class StaticDecl:
    name: str
    arity: int
    pos: Pos = field(default=Pos(), compare=False)


@dataclass(frozen=True)
class ExternalDecl:
    name: str
    arity: int
    pos: Pos = field(default=Pos(), compare=False)


# ---------------------------------------------------------------------------
# AST: conditions.  A condition is a conjunction (tuple) of items.

@dataclass(frozen=True)
class FluentLit:
    """Fluent atom, optionally negated ("-f" means known false)."""
    name: str
    args: tuple[str, ...]
    negated: bool = False
    pos: Pos = field(default=Pos(), compare=False)


@dataclass(frozen=True)
class StaticTest:
    name: str
    args: tuple[str, ...]
    pos: Pos = field(default=Pos(), compare=False)


@dataclass(frozen=True)
class FailureTest:
    """Reference to a failure (derived) atom defined by failure rules."""
    name: str
    args: tuple[str, ...]
    pos: Pos = field(default=Pos(), compare=False)


@dataclass(frozen=True)
class ExternalTest:
    name: str
    args: tuple[str, ...]
    pos: Pos = field(default=Pos(), compare=False)


@dataclass(frozen=True)
class Not:
    item: "CondItem"
    pos: Pos = field(default=Pos(), compare=False)


@dataclass(frozen=True)
class TermCmp:
    lhs: str
    rhs: str
    op: str  # "=" or "!="
    pos: Pos = field(default=Pos(), compare=False)


@dataclass(frozen=True)
class CountTest:
    """{ template : V in sort, ..., filters } <cmp> <bound>

    Counts ground instances of the template (a fluent or failure atom) that
    are known true, where the bound variables range over their sorts and
    every filter holds.  cmp is one of <=, =, >=.
    """
    template: Union[FluentLit, FailureTest]
    bindings: tuple[tuple[str, str], ...]  # (var, sort)
    filters: tuple["CondItem", ...]
    cmp: str
    bound: int
    pos: Pos = field(default=Pos(), compare=False)


@dataclass(frozen=True)
class Occurs:
    """Weak-constraint-only atom: the step's action matches name(args).

    With name set to one of 'actuation', 'sensing', 'communication' and no
    args, matches any action of that kind.
    """
    name: str
    args: tuple[str, ...] = ()
    pos: Pos = field(default=Pos(), compare=False)


CondItem = Union[FluentLit, StaticTest, FailureTest, ExternalTest, Not,
                 TermCmp, CountTest, Occurs]
Condition = tuple[CondItem, ...]


# ---------------------------------------------------------------------------
# AST: actions, constraints, rules

@dataclass(frozen=True)
class EnumeratedOutcomes:
    outcomes: tuple[tuple[str, tuple[FluentLit, ...]], ...]  # (label, literals)


@dataclass(frozen=True)
class RangedOutcome:
    """Exactly-one outcome: template literal with one free variable over a sort."""
    template: FluentLit
    var: str
    sort: str


OutcomeSet = Union[EnumeratedOutcomes, RangedOutcome]


@dataclass(frozen=True)
class ActionSchema:
    name: str
    kind: str  # one of ACTION_KINDS
    params: tuple[tuple[str, str], ...]  # (var, sort)
    preconditions: tuple[Condition, ...]
    effects: tuple[FluentLit, ...] = ()
    outcomes: Optional[OutcomeSet] = None
    pos: Pos = field(default=Pos(), compare=False)


@dataclass(frozen=True)
class HardConstraint:
    """State constraint: no reachable state may satisfy the body."""
    variables: tuple[tuple[str, str], ...]
    body: Condition
    pos: Pos = field(default=Pos(), compare=False)


@dataclass(frozen=True)
class WeakConstraint:
    variables: tuple[tuple[str, str], ...]
    body: Condition
    weight: int
    level: int  # higher level is optimized first
    pos: Pos = field(default=Pos(), compare=False)


@dataclass(frozen=True)
class FailureRule:
    name: str
    params: tuple[tuple[str, str], ...]
    body: Condition
    pos: Pos = field(default=Pos(), compare=False)


@dataclass(frozen=True)
class DomainSpec:
    sorts: tuple[SortDecl, ...] = ()
    fluents: tuple[FluentSchema, ...] = ()
    statics: tuple[StaticDecl, ...] = ()
    externals: tuple[ExternalDecl, ...] = ()
    actions: tuple[ActionSchema, ...] = ()
    constraints: tuple[HardConstraint, ...] = ()
    weaks: tuple[WeakConstraint, ...] = ()
    failures: tuple[FailureRule, ...] = ()

    def sort_map(self) -> dict[str, SortDecl]:
        return {s.name: s for s in self.sorts}

    def fluent_map(self) -> dict[str, FluentSchema]:
        return {f.name: f for f in self.fluents}

    def static_map(self) -> dict[str, StaticDecl]:
        return {s.name: s for s in self.statics}

    def external_map(self) -> dict[str, ExternalDecl]:
        return {e.name: e for e in self.externals}

    def failure_heads(self) -> dict[str, tuple[str, ...]]:
        """Failure atom name -> parameter sorts (from the first defining rule)."""
        heads: dict[str, tuple[str, ...]] = {}
        for r in self.failures:
            heads.setdefault(r.name, tuple(s for _, s in r.params))
        return heads

    def action_map(self) -> dict[str, ActionSchema]:
        return {a.name: a for a in self.actions}


@dataclass(frozen=True)
class Diagnostic:
    severity: str  # "error" | "warning"
    message: str
    pos: Pos = field(default=Pos(), compare=False)


# ---------------------------------------------------------------------------
# Lexer

_TOKEN_RE = re.compile(r"""
    (?P<ws>\s+)
  | (?P<comment>%[^\n]*)
  | (?P<int>\d+)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_']*)
  | (?P<op><=|>=|!=|[{}()\[\],:;.@&=/-])
""", re.VERBOSE)

KEYWORDS = {"sort", "fluent", "partial", "static", "external", "actuation",
            "sensing", "communication", "pre", "effect", "outcome", "one",
            "over", "constraint", "weak", "failure", "when", "not", "in",
            "occurs"}


@dataclass(frozen=True)
class Token:
    kind: str  # "int" | "ident" | "op" | "eof"
    text: str
    line: int
    col: int


def tokenize(text: str) -> list[Token]:
    tokens: list[Token] = []
    line, col = 1, 1
    i = 0
    while i < len(text):
        m = _TOKEN_RE.match(text, i)
        if m is None:
            raise ParseError(f"unexpected character {text[i]!r}", line, col)
        kind = m.lastgroup
        tok = m.group()
        if kind not in ("ws", "comment"):
            tokens.append(Token(kind, tok, line, col))
        newlines = tok.count("\n")
        if newlines:
            line += newlines
            col = len(tok) - tok.rfind("\n")
        else:
            col += len(tok)
        i = m.end()
    tokens.append(Token("eof", "", line, col))
    return tokens


# ---------------------------------------------------------------------------
# Parser

class _Parser:
    def __init__(self, text: str):
        self.tokens = tokenize(text)
        self.i = 0
        # declaration tables filled incrementally so references resolve
        self.sorts: list[SortDecl] = []
        self.fluents: list[FluentSchema] = []
        self.statics: list[StaticDecl] = []
        self.externals: list[ExternalDecl] = []
        self.actions: list[ActionSchema] = []
        self.constraints: list[HardConstraint] = []
        self.weaks: list[WeakConstraint] = []
        self.failures: list[FailureRule] = []

    # -- token helpers

    def peek(self) -> Token:
        return self.tokens[self.i]

    def next(self) -> Token:
        t = self.tokens[self.i]
        self.i += 1
        return t

    def expect(self, text: str) -> Token:
        t = self.peek()
        if t.text != text:
            raise ParseError(f"expected {text!r}, found {t.text!r}",
                             t.line, t.col, expected={text})
        return self.next()

    def expect_ident(self) -> Token:
        t = self.peek()
        if t.kind != "ident":
            raise ParseError(f"expected identifier, found {t.text!r}",
                             t.line, t.col, expected={"identifier"})
        return self.next()

    def expect_int(self) -> int:
        t = self.peek()
        if t.kind != "int":
            raise ParseError(f"expected integer, found {t.text!r}",
                             t.line, t.col, expected={"integer"})
        self.next()
        return int(t.text)

    def pos(self) -> Pos:
        t = self.peek()
        return Pos(t.line, t.col)

    # -- lookups

    def sort_names(self) -> set[str]:
        return {s.name for s in self.sorts}

    def fluent(self, name: str) -> Optional[FluentSchema]:
        for f in self.fluents:
            if f.name == name:
                return f
        return None

    def static(self, name: str) -> Optional[StaticDecl]:
        for s in self.statics:
            if s.name == name:
                return s
        return None

    def external(self, name: str) -> Optional[ExternalDecl]:
        for e in self.externals:
            if e.name == name:
                return e
        return None

    def failure_rule(self, name: str) -> Optional[FailureRule]:
        for r in self.failures:
            if r.name == name:
                return r
        return None

    def check_duplicate(self, name: str, pos: Pos) -> None:
        if (name in self.sort_names() or self.fluent(name) or self.static(name)
                or self.external(name) or self.failure_rule(name)
                or any(a.name == name for a in self.actions)):
            raise ParseError(f"duplicate declaration of {name!r}",
                             pos.line, pos.col)

    # -- grammar

    def parse_domain(self) -> DomainSpec:
        while self.peek().kind != "eof":
            t = self.peek()
            if t.text == "sort":
                self.parse_sort()
            elif t.text == "fluent":
                self.parse_fluent()
            elif t.text == "static":
                self.parse_static()
            elif t.text == "external":
                self.parse_external()
            elif t.text in ("actuation", "sensing", "communication"):
                self.parse_action()
            elif t.text == "constraint":
                self.parse_constraint()
            elif t.text == "weak":
                self.parse_weak()
            elif t.text == "failure":
                self.parse_failure()
            else:
                raise ParseError(f"expected a declaration, found {t.text!r}",
                                 t.line, t.col,
                                 expected={"sort", "fluent", "static",
                                           "external", "actuation", "sensing",
                                           "communication", "constraint",
                                           "weak", "failure"})
        return DomainSpec(tuple(self.sorts), tuple(self.fluents),
                          tuple(self.statics), tuple(self.externals),
                          tuple(self.actions), tuple(self.constraints),
                          tuple(self.weaks), tuple(self.failures))

    def parse_sort(self) -> None:
        pos = self.pos()
        self.expect("sort")
        name = self.expect_ident().text
        self.check_duplicate(name, pos)
        members: list[str] = []
        if self.peek().text == "{":
            self.next()
            while self.peek().text != "}":
                m = self.expect_ident().text
                if m in members:
                    raise ParseError(f"duplicate member {m!r} in sort {name!r}",
                                     pos.line, pos.col)
                members.append(m)
                if self.peek().text == ",":
                    self.next()
            self.expect("}")
            if self.peek().text == ";":  # trailing semicolon is optional
                self.next()
        else:
            self.expect(";")
        self.sorts.append(SortDecl(name, tuple(members), pos))

    def parse_fluent(self) -> None:
        pos = self.pos()
        self.expect("fluent")
        name = self.expect_ident().text
        self.check_duplicate(name, pos)
        arg_sorts: list[str] = []
        self.expect("(")
        while self.peek().text != ")":
            s = self.expect_ident()
            if s.text not in self.sort_names():
                raise ParseError(f"unknown sort {s.text!r}", s.line, s.col)
            arg_sorts.append(s.text)
            if self.peek().text == ",":
                self.next()
        self.expect(")")
        partial = False
        if self.peek().text == "partial":
            self.next()
            partial = True
        self.expect(";")
        self.fluents.append(FluentSchema(name, tuple(arg_sorts), partial, pos))

    def parse_static(self) -> None:
        pos = self.pos()
        self.expect("static")
        name = self.expect_ident().text
        self.check_duplicate(name, pos)
        self.expect_slash()
        arity = self.expect_int()
        self.expect(";")
        self.statics.append(StaticDecl(name, arity, pos))

    def expect_slash(self) -> None:
        # '/' is not in the operator set; statics/externals use name/arity,
        # tokenized as ident '/'? keep it simple: accept '/' as raw char.
        t = self.peek()
        if t.text == "/":
            self.next()
            return
        raise ParseError(f"expected '/', found {t.text!r}", t.line, t.col,
                         expected={"/"})

    def parse_external(self) -> None:
        pos = self.pos()
        self.expect("external")
        name = self.expect_ident().text
        self.check_duplicate(name, pos)
        self.expect_slash()
        arity = self.expect_int()
        self.expect(";")
        self.externals.append(ExternalDecl(name, arity, pos))

    def parse_typed_params(self) -> tuple[tuple[str, str], ...]:
        params: list[tuple[str, str]] = []
        self.expect("(")
        while self.peek().text != ")":
            v = self.expect_ident().text
            self.expect(":")
            s = self.expect_ident()
            if s.text not in self.sort_names():
                raise ParseError(f"unknown sort {s.text!r}", s.line, s.col)
            if any(v == p for p, _ in params):
                raise ParseError(f"duplicate parameter {v!r}", s.line, s.col)
            params.append((v, s.text))
            if self.peek().text == ",":
                self.next()
        self.expect(")")
        return tuple(params)

    def parse_action(self) -> None:
        pos = self.pos()
        decl = self.next().text  # actuation | sensing | communication
        name = self.expect_ident().text
        self.check_duplicate(name, pos)
        params = self.parse_typed_params()
        bound = {v for v, _ in params}
        pres: list[Condition] = []
        effects: list[FluentLit] = []
        outcomes: list[tuple[str, tuple[FluentLit, ...]]] = []
        ranged: Optional[RangedOutcome] = None
        while True:
            t = self.peek()
            if t.text == "pre":
                self.next()
                pres.append(self.parse_condition(bound, allow_occurs=False))
                self.expect(";")
            elif t.text == "effect":
                self.next()
                effects.append(self.parse_fluent_literal(bound))
                self.expect(";")
            elif t.text == "outcome":
                self.next()
                if self.peek().text == "one":
                    self.next()
                    opos = self.pos()
                    # template literal with one fresh variable over a sort
                    lit = self.parse_fluent_literal(bound | {"*"},
                                                    defer_binding=True)
                    self.expect("over")
                    s = self.expect_ident()
                    if s.text not in self.sort_names():
                        raise ParseError(f"unknown sort {s.text!r}",
                                         s.line, s.col)
                    consts = {m for s in self.sorts for m in s.members}
                    free = [a for a in lit.args
                            if a not in bound and a not in consts]
                    if len(free) != 1:
                        raise ParseError(
                            "ranged outcome template must have exactly one "
                            "free variable", opos.line, opos.col)
                    if ranged or outcomes:
                        raise ParseError("only one outcome set per action",
                                         opos.line, opos.col)
                    ranged = RangedOutcome(lit, free[0], s.text)
                else:
                    label = self.expect_ident().text
                    self.expect(":")
                    lits = [self.parse_fluent_literal(bound)]
                    while self.peek().text == ",":
                        self.next()
                        lits.append(self.parse_fluent_literal(bound))
                    if ranged:
                        raise ParseError("only one outcome set per action",
                                         t.line, t.col)
                    if any(lbl == label for lbl, _ in outcomes):
                        raise ParseError(f"duplicate outcome label {label!r}",
                                         t.line, t.col)
                    outcomes.append((label, tuple(lits)))
                self.expect(";")
            else:
                break
        oset: Optional[OutcomeSet]
        if ranged:
            oset = ranged
        elif outcomes:
            oset = EnumeratedOutcomes(tuple(outcomes))
        else:
            oset = None
        if decl == "actuation":
            kind = "actuation"
        elif decl == "sensing":
            kind = "sensing"
        else:
            kind = "commNondet" if oset else "commDet"
        if kind in ("actuation", "commDet"):
            if oset is not None:
                raise ParseError(f"{decl} action {name!r} cannot have outcomes",
                                 pos.line, pos.col)
            if not effects:
                raise ParseError(f"{decl} action {name!r} needs >=1 effect",
                                 pos.line, pos.col)
        else:
            if effects:
                raise ParseError(f"{decl} action {name!r} cannot have direct "
                                 "effects", pos.line, pos.col)
            if oset is None:
                raise ParseError(f"sensing action {name!r} needs an outcome "
                                 "set", pos.line, pos.col)
        self.actions.append(ActionSchema(name, kind, params, tuple(pres),
                                         tuple(effects), oset, pos))

    def parse_bracket_vars(self) -> tuple[tuple[str, str], ...]:
        if self.peek().text != "[":
            return ()
        self.next()
        out: list[tuple[str, str]] = []
        while self.peek().text != "]":
            v = self.expect_ident().text
            self.expect(":")
            s = self.expect_ident()
            if s.text not in self.sort_names():
                raise ParseError(f"unknown sort {s.text!r}", s.line, s.col)
            out.append((v, s.text))
            if self.peek().text == ",":
                self.next()
        self.expect("]")
        return tuple(out)

    def parse_constraint(self) -> None:
        pos = self.pos()
        self.expect("constraint")
        variables = self.parse_bracket_vars()
        bound = {v for v, _ in variables}
        body = self.parse_condition(bound, allow_occurs=False)
        self.expect(".")
        self.constraints.append(HardConstraint(variables, body, pos))

    def parse_weak(self) -> None:
        pos = self.pos()
        self.expect("weak")
        variables = self.parse_bracket_vars()
        bound = {v for v, _ in variables}
        body = self.parse_condition(bound, allow_occurs=True)
        self.expect("[")
        weight = self.expect_int()
        self.expect("@")
        level = self.expect_int()
        self.expect("]")
        self.expect(".")
        if weight < 1 or level < 1:
            raise ParseError("weak constraint weight and level must be >= 1",
                             pos.line, pos.col)
        self.weaks.append(WeakConstraint(variables, body, weight, level, pos))

    def parse_failure(self) -> None:
        pos = self.pos()
        self.expect("failure")
        name = self.expect_ident().text
        if not self.failure_rule(name):
            self.check_duplicate(name, pos)
        params = self.parse_typed_params()
        prev = self.failure_rule(name)
        if prev is not None and tuple(s for _, s in prev.params) != \
                tuple(s for _, s in params):
            raise ParseError(f"failure atom {name!r} redeclared with "
                             "different parameter sorts", pos.line, pos.col)
        self.expect("when")
        bound = {v for v, _ in params}
        body = self.parse_condition(bound, allow_occurs=False)
        self.expect(".")
        self.failures.append(FailureRule(name, params, body, pos))

    # -- conditions

    def parse_condition(self, bound: set[str], allow_occurs: bool) -> Condition:
        items = [self.parse_cond_item(bound, allow_occurs)]
        while self.peek().text == ",":
            self.next()
            items.append(self.parse_cond_item(bound, allow_occurs))
        return tuple(items)

    def parse_cond_item(self, bound: set[str], allow_occurs: bool) -> CondItem:
        t = self.peek()
        if t.text == "not":
            self.next()
            return Not(self.parse_cond_item(bound, allow_occurs),
                       Pos(t.line, t.col))
        if t.text == "{":
            return self.parse_count_test(bound)
        if t.text == "&":
            self.next()
            return self.parse_external_test(bound, Pos(t.line, t.col))
        if t.text == "occurs":
            if not allow_occurs:
                raise ParseError("occurs(...) is only allowed in weak "
                                 "constraints", t.line, t.col)
            return self.parse_occurs(bound)
        if t.text == "-":
            self.next()
            return self.parse_atom_item(bound, negated=True,
                                        pos=Pos(t.line, t.col))
        if t.kind == "ident":
            # could be an atom or a term comparison
            nxt = self.tokens[self.i + 1]
            if nxt.text in ("=", "!="):
                lhs = self.next().text
                op = self.next().text
                rhs = self.expect_ident().text
                self.check_term(lhs, bound, t)
                self.check_term(rhs, bound, t)
                return TermCmp(lhs, rhs, op, Pos(t.line, t.col))
            return self.parse_atom_item(bound, negated=False,
                                        pos=Pos(t.line, t.col))
        raise ParseError(f"expected a condition, found {t.text!r}",
                         t.line, t.col)

    def parse_occurs(self, bound: set[str]) -> Occurs:
        pos = self.pos()
        self.expect("occurs")
        self.expect("(")
        t = self.expect_ident()
        name = t.text
        args: list[str] = []
        if name in ("actuation", "sensing", "communication"):
            self.expect(")")
            return Occurs(name, (), pos)
        schema = next((a for a in self.actions if a.name == name), None)
        if schema is None:
            raise ParseError(f"occurs references unknown action {name!r}",
                             t.line, t.col)
        if self.peek().text == "(":
            self.next()
            while self.peek().text != ")":
                args.append(self.expect_ident().text)
                if self.peek().text == ",":
                    self.next()
            self.expect(")")
        if len(args) != len(schema.params):
            raise ParseError(f"occurs({name}) arity mismatch: expected "
                             f"{len(schema.params)}, got {len(args)}",
                             t.line, t.col)
        for a in args:
            self.check_term(a, bound, t)
        self.expect(")")
        return Occurs(name, tuple(args), pos)

    def parse_term_list(self) -> list[str]:
        args: list[str] = []
        if self.peek().text == "(":
            self.next()
            while self.peek().text != ")":
                args.append(self.expect_ident().text)
                if self.peek().text == ",":
                    self.next()
            self.expect(")")
        return args

    def check_term(self, term: str, bound: set[str], tok: Token) -> None:
        if term in bound:
            return
        for s in self.sorts:
            if term in s.members:
                return
        raise ParseError(f"unbound term {term!r}", tok.line, tok.col)

    def parse_atom_item(self, bound: set[str], negated: bool,
                        pos: Pos) -> CondItem:
        t = self.expect_ident()
        name = t.text
        args = tuple(self.parse_term_list())
        for a in args:
            self.check_term(a, bound, t)
        fl = self.fluent(name)
        if fl is not None:
            if len(args) != fl.arity:
                raise ParseError(f"fluent {name!r} arity mismatch: expected "
                                 f"{fl.arity}, got {len(args)}", t.line, t.col)
            return FluentLit(name, args, negated, pos)
        st = self.static(name)
        if st is not None:
            if negated:
                raise ParseError("use 'not' (not '-') on static relations",
                                 t.line, t.col)
            if len(args) != st.arity:
                raise ParseError(f"static {name!r} arity mismatch: expected "
                                 f"{st.arity}, got {len(args)}", t.line, t.col)
            return StaticTest(name, args, pos)
        fr = self.failure_rule(name)
        if fr is not None:
            if negated:
                raise ParseError("use 'not' (not '-') on failure atoms",
                                 t.line, t.col)
            if len(args) != len(fr.params):
                raise ParseError(f"failure atom {name!r} arity mismatch",
                                 t.line, t.col)
            return FailureTest(name, args, pos)
        raise ParseError(f"unknown fluent/static/failure atom {name!r}",
                         t.line, t.col)

    def parse_external_test(self, bound: set[str], pos: Pos) -> ExternalTest:
        t = self.expect_ident()
        name = t.text
        ext = self.external(name)
        if ext is None:
            raise ParseError(f"unknown external {name!r}", t.line, t.col)
        args = tuple(self.parse_term_list())
        if len(args) != ext.arity:
            raise ParseError(f"external {name!r} arity mismatch: expected "
                             f"{ext.arity}, got {len(args)}", t.line, t.col)
        for a in args:
            self.check_term(a, bound, t)
        return ExternalTest(name, args, pos)

    def parse_count_test(self, bound: set[str]) -> CountTest:
        pos = self.pos()
        self.expect("{")
        t = self.expect_ident()
        name = t.text
        args = tuple(self.parse_term_list())
        template: Union[FluentLit, FailureTest]
        fl = self.fluent(name)
        if fl is not None:
            if len(args) != fl.arity:
                raise ParseError(f"fluent {name!r} arity mismatch", t.line,
                                 t.col)
            template = FluentLit(name, args, False, Pos(t.line, t.col))
        elif self.failure_rule(name) is not None:
            if len(args) != len(self.failure_rule(name).params):
                raise ParseError(f"failure atom {name!r} arity mismatch",
                                 t.line, t.col)
            template = FailureTest(name, args, Pos(t.line, t.col))
        else:
            raise ParseError(f"count template must be a fluent or failure "
                             f"atom, got {name!r}", t.line, t.col)
        self.expect(":")
        bindings: list[tuple[str, str]] = []
        filters: list[CondItem] = []
        inner = set(bound)
        while True:
            tt = self.peek()
            if tt.kind == "ident" and self.tokens[self.i + 1].text == "in":
                v = self.next().text
                self.next()  # in
                s = self.expect_ident()
                if s.text not in self.sort_names():
                    raise ParseError(f"unknown sort {s.text!r}", s.line, s.col)
                bindings.append((v, s.text))
                inner.add(v)
            else:
                item = self.parse_cond_item(inner, allow_occurs=False)
                if isinstance(item, (FluentLit, CountTest)) or (
                        isinstance(item, Not)
                        and isinstance(item.item, (FluentLit, CountTest))):
                    # fluent filters would make counting state-dependent in a
                    # second way; keep guards to statics/externals/failures
                    if not isinstance(item, TermCmp):
                        fp = item.pos
                        raise ParseError(
                            "count guard filters must be statics, externals, "
                            "failure atoms or term comparisons",
                            fp.line, fp.col)
                filters.append(item)
            if self.peek().text == ",":
                self.next()
                continue
            break
        self.expect("}")
        op = self.peek()
        if op.text not in ("<=", "=", ">="):
            raise ParseError(f"expected <=, = or >=, found {op.text!r}",
                             op.line, op.col, expected={"<=", "=", ">="})
        self.next()
        bound_int = self.expect_int()
        # every template variable must be bound by params or guards
        for a in template.args:
            if a not in inner and not any(a in s.members for s in self.sorts):
                raise ParseError(f"count template variable {a!r} is not bound "
                                 "by a guard", pos.line, pos.col)
        return CountTest(template, tuple(bindings), tuple(filters),
                         op.text, bound_int, pos)

    def parse_fluent_literal(self, bound: set[str],
                             defer_binding: bool = False) -> FluentLit:
        negated = False
        t = self.peek()
        if t.text == "-":
            self.next()
            negated = True
        tk = self.expect_ident()
        name = tk.text
        args = tuple(self.parse_term_list())
        fl = self.fluent(name)
        if fl is None:
            raise ParseError(f"unknown fluent {name!r}", tk.line, tk.col)
        if len(args) != fl.arity:
            raise ParseError(f"fluent {name!r} arity mismatch: expected "
                             f"{fl.arity}, got {len(args)}", tk.line, tk.col)
        if not defer_binding:
            for a in args:
                self.check_term(a, bound, tk)
        return FluentLit(name, args, negated, Pos(t.line, t.col))


def parse_domain(text: str) -> DomainSpec:
    """Parse ADL-H domain text into a DomainSpec AST.

    Raises ParseError (with line/column) on any lexical, syntactic or
    name-resolution problem.  An empty string is a valid, vacuous domain.
    """
    return _Parser(text).parse_domain()


# ---------------------------------------------------------------------------
# Validation

def validate(dom: DomainSpec) -> list[Diagnostic]:
    """Structural diagnostics beyond what the parser enforces.

    Errors and warnings are returned as data; an empty list means the domain
    is clean.
    """
    diags: list[Diagnostic] = []
    used_sorts: set[str] = set()
    for f in dom.fluents:
        used_sorts.update(f.arg_sorts)
    for a in dom.actions:
        used_sorts.update(s for _, s in a.params)
        if isinstance(a.outcomes, RangedOutcome):
            used_sorts.add(a.outcomes.sort)
    for c in dom.constraints:
        used_sorts.update(s for _, s in c.variables)
    for w in dom.weaks:
        used_sorts.update(s for _, s in w.variables)
    for r in dom.failures:
        used_sorts.update(s for _, s in r.params)
    for s in dom.sorts:
        if s.name not in used_sorts:
            diags.append(Diagnostic("warning", f"unused sort {s.name!r}",
                                    s.pos))

    sort_map = dom.sort_map()
    fluent_map = dom.fluent_map()
    for a in dom.actions:
        if a.kind in DECISION_KINDS:
            n = _max_outcomes(a.outcomes, sort_map)
            if n < 2:
                diags.append(Diagnostic(
                    "warning",
                    f"degenerate decision node: action {a.name!r} can have "
                    f"at most {n} outcome(s) given sort sizes", a.pos))
        for eff in a.effects:
            if eff.name not in fluent_map:
                diags.append(Diagnostic(
                    "error", f"action {a.name!r} has an effect on undeclared "
                    f"fluent {eff.name!r}", a.pos))

    for w in dom.weaks:
        declared = {v for v, _ in w.variables}
        bound = set(declared)
        for item in w.body:
            bound |= _binding_vars(item, dom)
        free = _condition_vars(w.body) - bound - _all_constants(dom)
        for v in sorted(free):
            diags.append(Diagnostic(
                "error", f"weak constraint has unbound variable {v!r}", w.pos))
    return diags


def _max_outcomes(oset: Optional[OutcomeSet], sorts: dict[str, SortDecl]) -> int:
    if isinstance(oset, RangedOutcome):
        # memberless sorts are populated by the instance; assume nondegenerate
        s = sorts.get(oset.sort)
        if s is None or not s.members:
            return 2
        return len(s.members)
    if isinstance(oset, EnumeratedOutcomes):
        return len(oset.outcomes)
    return 0


def _binding_vars(item: CondItem, dom: DomainSpec) -> set[str]:
    if isinstance(item, Occurs) and item.name not in ("actuation", "sensing",
                                                      "communication"):
        return set(item.args)
    if isinstance(item, CountTest):
        return set()  # count bindings are local to the count test
    return set()


def _condition_vars(cond: Condition) -> set[str]:
    out: set[str] = set()
    for item in cond:
        out |= _item_vars(item)
    return out


def _item_vars(item: CondItem) -> set[str]:
    if isinstance(item, (FluentLit, StaticTest, FailureTest, ExternalTest)):
        return set(item.args)
    if isinstance(item, Occurs):
        return set(item.args)
    if isinstance(item, Not):
        return _item_vars(item.item)
    if isinstance(item, TermCmp):
        return {item.lhs, item.rhs}
    if isinstance(item, CountTest):
        local = {v for v, _ in item.bindings}
        out = set(item.template.args) - local
        for f in item.filters:
            out |= _item_vars(f) - local
        return out
    return set()


def _all_constants(dom: DomainSpec) -> set[str]:
    out: set[str] = set()
    for s in dom.sorts:
        out.update(s.members)
    return out


# ---------------------------------------------------------------------------
# Pretty printer.  parse_domain(pretty_print(ast)) == ast.

def pretty_print(dom: DomainSpec) -> str:
    out: list[str] = []
    for s in dom.sorts:
        if s.members:
            out.append(f"sort {s.name} {{ {', '.join(s.members)} }}")
        else:
            out.append(f"sort {s.name};")
    for f in dom.fluents:
        partial = " partial" if f.partial else ""
        out.append(f"fluent {f.name}({', '.join(f.arg_sorts)}){partial};")
    for st in dom.statics:
        out.append(f"static {st.name}/{st.arity};")
    for e in dom.externals:
        out.append(f"external {e.name}/{e.arity};")
    for r in dom.failures:
        out.append(f"failure {r.name}({_fmt_params(r.params)}) when "
                   f"{_fmt_cond(r.body)}.")
    for a in dom.actions:
        decl = {"actuation": "actuation", "sensing": "sensing",
                "commDet": "communication",
                "commNondet": "communication"}[a.kind]
        lines = [f"{decl} {a.name}({_fmt_params(a.params)})"]
        for p in a.preconditions:
            lines.append(f"  pre {_fmt_cond(p)};")
        for eff in a.effects:
            lines.append(f"  effect {_fmt_lit(eff)};")
        if isinstance(a.outcomes, EnumeratedOutcomes):
            for label, lits in a.outcomes.outcomes:
                lines.append(f"  outcome {label}: "
                             f"{', '.join(_fmt_lit(l) for l in lits)};")
        elif isinstance(a.outcomes, RangedOutcome):
            lines.append(f"  outcome one {_fmt_lit(a.outcomes.template)} "
                         f"over {a.outcomes.sort};")
        out.append("\n".join(lines))
    for c in dom.constraints:
        vs = f"[{_fmt_params(c.variables)}] " if c.variables else ""
        out.append(f"constraint {vs}{_fmt_cond(c.body)}.")
    for w in dom.weaks:
        vs = f"[{_fmt_params(w.variables)}] " if w.variables else ""
        out.append(f"weak {vs}{_fmt_cond(w.body)} [{w.weight}@{w.level}].")
    return "\n".join(out) + ("\n" if out else "")


def _fmt_params(params: Sequence[tuple[str, str]]) -> str:
    return ", ".join(f"{v}: {s}" for v, s in params)


def _fmt_args(args: Sequence[str]) -> str:
    return f"({', '.join(args)})" if args else "()"


def _fmt_lit(lit: FluentLit) -> str:
    neg = "-" if lit.negated else ""
    return f"{neg}{lit.name}{_fmt_args(lit.args)}"


def _fmt_cond(cond: Condition) -> str:
    return ", ".join(_fmt_item(i) for i in cond)


def _fmt_item(item: CondItem) -> str:
    if isinstance(item, FluentLit):
        return _fmt_lit(item)
    if isinstance(item, (StaticTest, FailureTest)):
        return f"{item.name}{_fmt_args(item.args)}"
    if isinstance(item, ExternalTest):
        return f"&{item.name}{_fmt_args(item.args)}"
    if isinstance(item, Not):
        return f"not {_fmt_item(item.item)}"
    if isinstance(item, TermCmp):
        return f"{item.lhs} {item.op} {item.rhs}"
    if isinstance(item, Occurs):
        if item.name in ("actuation", "sensing", "communication"):
            return f"occurs({item.name})"
        return f"occurs({item.name}{_fmt_args(item.args)})"
    if isinstance(item, CountTest):
        guard = [f"{v} in {s}" for v, s in item.bindings]
        guard += [_fmt_item(f) for f in item.filters]
        tpl = _fmt_item(item.template) if isinstance(item.template,
                                                     FailureTest) \
            else _fmt_lit(item.template)
        return f"{{ {tpl} : {', '.join(guard)} }} {item.cmp} {item.bound}"
    raise TypeError(f"unknown condition item {item!r}")
