"""Parser, printer and grounder for the multi-agent planning language.

The language is a small s-expression dialect over multi-valued state
variables.  A task is one domain file, one problem file per agent and an
optional ``:shared-data`` file per agent that grants other agents visibility of
some of its variables.

Visibility model: agent ``i`` owns every ground variable it can build from the
objects in its own problem file (plus domain constants), and sees the values of
that variable among its own objects.  Shared-data entries add variables and
values to other agents' views.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping

from .errors import ParseError, SemanticError
from .sexpr import SList, Symbol, parse_one, parse_sexprs
from .task import Effect, Fluent, GroundAction, MapTask

ROOT_TYPE = "object"


# --- ASTs ---------------------------------------------------------------------


@dataclass(frozen=True)
class TypedName:
    name: str
    type: str = ROOT_TYPE


@dataclass(frozen=True)
class VariableSchema:
    name: str
    params: tuple[TypedName, ...]
    value_type: str


@dataclass(frozen=True)
class Condition:
    """``(= (var args) value)`` or, with ``positive`` false, ``(!= (var args) value)``."""

    var: str
    args: tuple[str, ...]
    value: str
    positive: bool = True


@dataclass(frozen=True)
class EffectAst:
    var: str
    args: tuple[str, ...]
    value: str
    assign: bool = True


@dataclass(frozen=True)
class ActionSchema:
    name: str
    params: tuple[TypedName, ...]
    pre: tuple[Condition, ...]
    distinct: tuple[tuple[str, str], ...]
    eff: tuple[EffectAst, ...]


@dataclass(frozen=True)
class DomainAst:
    name: str
    types: tuple[TypedName, ...]  # (type, parent type)
    constants: tuple[TypedName, ...]
    variables: tuple[VariableSchema, ...]
    actions: tuple[ActionSchema, ...]
    requirements: tuple[str, ...] = ()

    def parent_map(self) -> dict[str, str]:
        out = {t.name: t.type for t in self.types}
        for parent in set(out.values()):
            if parent != ROOT_TYPE:
                out.setdefault(parent, ROOT_TYPE)
        return out

    def is_subtype(self, t: str, ancestor: str) -> bool:
        parents = self.parent_map()
        seen = set()
        while t not in seen:
            if t == ancestor:
                return True
            seen.add(t)
            if t == ROOT_TYPE:
                return False
            t = parents.get(t, ROOT_TYPE)
        return False

    def variable(self, name: str) -> VariableSchema:
        for v in self.variables:
            if v.name == name:
                return v
        raise SemanticError("undeclared variable", name)


@dataclass(frozen=True)
class ProblemAst:
    name: str
    objects: tuple[TypedName, ...]
    init: tuple[Condition, ...]
    goals: tuple[Condition, ...]
    domain: str | None = None


@dataclass(frozen=True)
class SharedEntry:
    owner: str
    var: str
    args: tuple[str, ...]  # objects or ?wildcards
    grants: tuple[tuple[str, tuple[str, ...]], ...]  # (agent, visible values)

    @property
    def pattern(self) -> str:
        return f"{self.var}({','.join(self.args)})" if self.args else self.var


@dataclass(frozen=True)
class SharedDataDecl:
    entries: tuple[SharedEntry, ...] = ()

    def grants(self) -> dict[tuple[str, str], frozenset]:
        """``(variable pattern, agent) -> visible values``."""
        out: dict[tuple[str, str], set] = {}
        for e in self.entries:
            for agent, values in e.grants:
                out.setdefault((e.pattern, agent), set()).update(values)
        return {k: frozenset(v) for k, v in out.items()}

    def merged(self, other: "SharedDataDecl") -> "SharedDataDecl":
        return SharedDataDecl(self.entries + other.entries)


# --- parsing --------------------------------------------------------------------


def _pos(node) -> tuple[int, int]:
    return getattr(node, "line", 0), getattr(node, "col", 0)


def _fail(message: str, node) -> ParseError:
    return ParseError(message, *_pos(node))


def _expect_list(node, what: str) -> SList:
    if not isinstance(node, list):
        raise _fail(f"expected {what}", node)
    return node


def _expect_symbol(node, what: str) -> str:
    if isinstance(node, list):
        raise _fail(f"expected {what}, found a list", node)
    return str(node)


def _typed_list(items: Iterable, where) -> tuple[TypedName, ...]:
    out: list[TypedName] = []
    pending: list[str] = []
    items = list(items)
    i = 0
    while i < len(items):
        tok = _expect_symbol(items[i], "a name")
        if tok == "-":
            if i + 1 >= len(items) or not pending:
                raise _fail("dangling '-' in typed list", items[i])
            t = _expect_symbol(items[i + 1], "a type name")
            out.extend(TypedName(p, t) for p in pending)
            pending = []
            i += 2
            continue
        pending.append(tok)
        i += 1
    out.extend(TypedName(p) for p in pending)
    return tuple(out)


def _term(node, what="a variable term") -> tuple[str, tuple[str, ...]]:
    lst = _expect_list(node, what)
    if not lst:
        raise _fail(f"empty {what}", node)
    name = _expect_symbol(lst[0], "a variable name")
    return name, tuple(_expect_symbol(x, "an argument") for x in lst[1:])


def _conjuncts(node) -> list:
    lst = _expect_list(node, "a formula")
    if lst and not isinstance(lst[0], list) and lst[0] == "and":
        return list(lst[1:])
    if not lst:
        return []
    return [lst]


def _condition(node, allow_distinct: bool):
    lst = _expect_list(node, "a condition")
    if len(lst) != 3:
        raise _fail("condition must be (= (var args) value) or (!= ...)", node)
    op = _expect_symbol(lst[0], "'=' or '!='")
    if op not in ("=", "!="):
        raise _fail(f"unknown condition operator {op!r}", lst[0])
    if isinstance(lst[1], list):
        var, args = _term(lst[1])
        value = _expect_symbol(lst[2], "a value")
        return Condition(var, args, value, op == "=")
    if allow_distinct and op == "!=":
        return (_expect_symbol(lst[1], "a parameter"), _expect_symbol(lst[2], "a parameter"))
    raise _fail("expected a variable term", lst[1])


def _effect(node) -> EffectAst:
    lst = _expect_list(node, "an effect")
    if len(lst) != 3:
        raise _fail("effect must be (assign (var args) value) or (unassign ...)", node)
    op = _expect_symbol(lst[0], "'assign' or 'unassign'")
    if op not in ("assign", "unassign"):
        raise _fail(f"unknown effect {op!r}", lst[0])
    var, args = _term(lst[1])
    return EffectAst(var, args, _expect_symbol(lst[2], "a value"), op == "assign")


def _header(expr, kind: str) -> tuple[str, list]:
    lst = _expect_list(expr, f"(define ({kind} ...) ...)")
    if len(lst) < 2 or lst[0] != "define":
        raise _fail("expected (define ...)", expr)
    head = _expect_list(lst[1], f"({kind} <name>)")
    if len(head) != 2 or head[0] != kind:
        raise _fail(f"expected ({kind} <name>)", head)
    return _expect_symbol(head[1], "a name"), list(lst[2:])


def _section(node) -> tuple[str, list]:
    lst = _expect_list(node, "a section")
    if not lst or isinstance(lst[0], list) or not str(lst[0]).startswith(":"):
        raise _fail("expected a (:section ...)", node)
    return str(lst[0]), list(lst[1:])


def _action(items: list, where) -> ActionSchema:
    if not items:
        raise _fail("action needs a name", where)
    name = _expect_symbol(items[0], "an action name")
    fields: dict[str, object] = {}
    i = 1
    while i < len(items):
        key = _expect_symbol(items[i], "an action keyword")
        if key not in (":parameters", ":precondition", ":effect"):
            raise _fail(f"unknown action keyword {key!r}", items[i])
        if i + 1 >= len(items):
            raise _fail(f"{key} needs a value", items[i])
        fields[key] = items[i + 1]
        i += 2
    params = _typed_list(_expect_list(fields.get(":parameters", SList()), "a parameter list"), where)
    pre: list[Condition] = []
    distinct: list[tuple[str, str]] = []
    if ":precondition" in fields:
        for c in _conjuncts(fields[":precondition"]):
            parsed = _condition(c, allow_distinct=True)
            (pre if isinstance(parsed, Condition) else distinct).append(parsed)
    eff = tuple(_effect(e) for e in _conjuncts(fields[":effect"])) if ":effect" in fields else ()
    declared = {p.name for p in params}
    used = [a for c in pre for a in (*c.args, c.value)] + [a for d in distinct for a in d]
    used += [a for e in eff for a in (*e.args, e.value)]
    for a in used:
        if a.startswith("?") and a not in declared:
            raise SemanticError(f"undeclared parameter in action {name}", a)
    return ActionSchema(name, params, tuple(pre), tuple(distinct), eff)


def parse_domain(text: str) -> DomainAst:
    name, body = _header(parse_one(text), "domain")
    types: tuple[TypedName, ...] = ()
    constants: tuple[TypedName, ...] = ()
    variables: list[VariableSchema] = []
    actions: list[ActionSchema] = []
    requirements: tuple[str, ...] = ()
    for node in body:
        key, items = _section(node)
        if key == ":requirements":
            requirements = tuple(_expect_symbol(x, "a requirement") for x in items)
        elif key == ":types":
            types = _typed_list(items, node)
        elif key == ":constants":
            constants = _typed_list(items, node)
        elif key == ":variables":
            for v in items:
                lst = _expect_list(v, "a variable declaration")
                toks = [_expect_symbol(x, "a name") for x in lst]
                if len(toks) < 3 or toks[-2] != "-":
                    raise _fail("variable declaration must end in '- <valuetype>'", v)
                variables.append(VariableSchema(toks[0], _typed_list(lst[1:-2], v), toks[-1]))
        elif key == ":action":
            actions.append(_action(items, node))
        else:
            raise _fail(f"unknown domain section {key!r}", node)
    dom = DomainAst(name, types, constants, tuple(variables), tuple(actions), requirements)
    _check_domain(dom)
    return dom


def _check_domain(dom: DomainAst) -> None:
    known = set(dom.parent_map()) | {ROOT_TYPE}
    for t in dom.types:
        if t.type not in known:
            raise SemanticError("undeclared type", t.type)
    for c in dom.constants:
        if c.type not in known:
            raise SemanticError("undeclared type", c.type)
    names = {v.name for v in dom.variables}
    for v in dom.variables:
        for p in v.params:
            if p.type not in known:
                raise SemanticError("undeclared type", p.type)
        if v.value_type not in known:
            raise SemanticError("undeclared value type", v.value_type)
    constants = {c.name for c in dom.constants}
    for a in dom.actions:
        for p in a.params:
            if p.type not in known:
                raise SemanticError("undeclared type", p.type)
        for term in (*a.pre, *a.eff):
            if term.var not in names:
                raise SemanticError(f"undeclared variable in action {a.name}", term.var)
            if len(term.args) != len(dom.variable(term.var).params):
                raise SemanticError(f"wrong arity in action {a.name}", term.var)
            for x in (*term.args, term.value):
                if not x.startswith("?") and x not in constants:
                    raise SemanticError(f"undeclared constant in action {a.name}", x)


def parse_problem(text: str, domain: DomainAst | None = None) -> ProblemAst:
    name, body = _header(parse_one(text), "problem")
    objects: tuple[TypedName, ...] = ()
    init: list[Condition] = []
    goals: list[Condition] = []
    dname = None
    for node in body:
        key, items = _section(node)
        if key == ":domain":
            dname = _expect_symbol(items[0], "a domain name") if items else None
        elif key == ":objects":
            objects = _typed_list(items, node)
        elif key == ":init":
            for c in items:
                cond = _condition(c, allow_distinct=False)
                if not cond.positive:
                    raise _fail("initial state lists only (= (var args) value) assignments", c)
                init.append(cond)
        elif key == ":goal":
            if len(items) != 1:
                raise _fail(":goal takes one formula", node)
            goals.extend(_condition(c, allow_distinct=False) for c in _conjuncts(items[0]))
        else:
            raise _fail(f"unknown problem section {key!r}", node)
    prob = ProblemAst(name, objects, tuple(init), tuple(goals), dname)
    if domain is not None:
        _check_problem(prob, domain)
    return prob


def _check_problem(prob: ProblemAst, dom: DomainAst) -> None:
    known_types = set(dom.parent_map()) | {ROOT_TYPE}
    for o in prob.objects:
        if o.type not in known_types:
            raise SemanticError("undeclared type", o.type)
    declared = {o.name for o in prob.objects} | {c.name for c in dom.constants}
    seen: dict[tuple, str] = {}
    for c in (*prob.init, *prob.goals):
        schema = dom.variable(c.var)
        if len(schema.params) != len(c.args):
            raise SemanticError("wrong arity", c.var)
        for x in (*c.args, c.value):
            if x not in declared:
                raise SemanticError("undeclared object", x)
    for c in prob.init:
        key = (c.var, c.args)
        if seen.setdefault(key, c.value) != c.value:
            raise SemanticError("variable initialised twice", _var_name(c.var, c.args))


def parse_shared_data(text: str, owner: str) -> SharedDataDecl:
    exprs = parse_sexprs(text)
    if not exprs:
        return SharedDataDecl()
    if len(exprs) != 1:
        raise ParseError("expected a single (:shared-data ...) form", 1, 1)
    key, items = _section(exprs[0])
    if key != ":shared-data":
        raise _fail(f"unknown section {key!r}", exprs[0])
    entries = []
    for node in items:
        lst = _expect_list(node, "a shared-data entry")
        if not lst:
            raise _fail("empty shared-data entry", node)
        var, args = _term(lst[0])
        grants = []
        rest = list(lst[1:])
        if len(rest) % 2:
            raise _fail("expected ':with (<agent> :values (...))' pairs", node)
        for kw, spec in zip(rest[::2], rest[1::2]):
            if _expect_symbol(kw, "':with'") != ":with":
                raise _fail("expected ':with'", kw)
            spec = _expect_list(spec, "(<agent> :values (...))")
            if len(spec) != 3 or spec[1] != ":values":
                raise _fail("expected (<agent> :values (<obj>*))", spec)
            agent = _expect_symbol(spec[0], "an agent name")
            values = tuple(_expect_symbol(v, "an object") for v in _expect_list(spec[2], "a value list"))
            grants.append((agent, values))
        entries.append(SharedEntry(owner, var, args, tuple(grants)))
    return SharedDataDecl(tuple(entries))


def parse_task(
    domain_text: str,
    problem_texts: Mapping[str, str],
    shared_texts: Mapping[str, str] | None = None,
) -> tuple[DomainAst, dict[str, ProblemAst], SharedDataDecl]:
    """Parse a whole task; problem/shared-data texts are keyed by agent name."""
    domain = parse_domain(domain_text)
    problems = {agent.lower(): parse_problem(t, domain) for agent, t in problem_texts.items()}
    shared = SharedDataDecl()
    for agent, t in (shared_texts or {}).items():
        agent = agent.lower()
        if agent not in problems:
            raise SemanticError("shared-data for unknown agent", agent)
        shared = shared.merged(parse_shared_data(t, agent))
    for e in shared.entries:
        for agent, _ in e.grants:
            if agent not in problems:
                raise SemanticError("shared-data names an unknown agent", agent)
    return domain, problems, shared


# --- printing --------------------------------------------------------------------


def _fmt_typed(items: Iterable[TypedName]) -> str:
    return " ".join(f"{t.name} - {t.type}" for t in items)


def _fmt_term(var: str, args: tuple[str, ...]) -> str:
    return f"({' '.join((var, *args))})"


def _fmt_cond(c: Condition) -> str:
    return f"({'=' if c.positive else '!='} {_fmt_term(c.var, c.args)} {c.value})"


def print_domain(dom: DomainAst) -> str:
    lines = [f"(define (domain {dom.name})"]
    if dom.requirements:
        lines.append(f"  (:requirements {' '.join(dom.requirements)})")
    if dom.types:
        lines.append(f"  (:types {_fmt_typed(dom.types)})")
    if dom.constants:
        lines.append(f"  (:constants {_fmt_typed(dom.constants)})")
    if dom.variables:
        lines.append("  (:variables")
        for v in dom.variables:
            params = f" {_fmt_typed(v.params)}" if v.params else ""
            lines.append(f"    ({v.name}{params} - {v.value_type})")
        lines.append("  )")
    for a in dom.actions:
        lines.append(f"  (:action {a.name}")
        lines.append(f"    :parameters ({_fmt_typed(a.params)})")
        conds = [_fmt_cond(c) for c in a.pre] + [f"(!= {x} {y})" for x, y in a.distinct]
        lines.append(f"    :precondition (and {' '.join(conds)})")
        effs = [
            f"({'assign' if e.assign else 'unassign'} {_fmt_term(e.var, e.args)} {e.value})" for e in a.eff
        ]
        lines.append(f"    :effect (and {' '.join(effs)}))")
    lines.append(")")
    return "\n".join(lines) + "\n"


def print_problem(prob: ProblemAst) -> str:
    lines = [f"(define (problem {prob.name})"]
    if prob.domain:
        lines.append(f"  (:domain {prob.domain})")
    lines.append(f"  (:objects {_fmt_typed(prob.objects)})")
    lines.append("  (:init")
    lines.extend(f"    {_fmt_cond(c)}" for c in prob.init)
    lines.append("  )")
    lines.append(f"  (:goal (and {' '.join(_fmt_cond(c) for c in prob.goals)}))")
    lines.append(")")
    return "\n".join(lines) + "\n"


def print_shared_data(decl: SharedDataDecl, owner: str | None = None) -> str:
    lines = ["(:shared-data"]
    for e in decl.entries:
        if owner is not None and e.owner != owner:
            continue
        grants = " ".join(f":with ({a} :values ({' '.join(vs)}))" for a, vs in e.grants)
        lines.append(f"  ({_fmt_term(e.var, e.args)} {grants})")
    lines.append(")")
    return "\n".join(lines) + "\n"


# --- grounding -------------------------------------------------------------------


def _var_name(var: str, args: Iterable[str]) -> str:
    args = tuple(args)
    return f"{var}({','.join(args)})" if args else var


def _objects(dom: DomainAst, prob: ProblemAst) -> dict[str, str]:
    out = {c.name: c.type for c in dom.constants}
    out.update({o.name: o.type for o in prob.objects})
    return out


def _of_type(dom: DomainAst, objects: Mapping[str, str], t: str) -> list[str]:
    return sorted(o for o, ot in objects.items() if dom.is_subtype(ot, t))


def own_views(dom: DomainAst, prob: ProblemAst) -> dict[str, set[str]]:
    """Ground variables an agent owns and the values it sees for each."""
    objs = _objects(dom, prob)
    views: dict[str, set[str]] = {}
    for schema in dom.variables:
        values = set(_of_type(dom, objs, schema.value_type))
        pools = [_of_type(dom, objs, p.type) for p in schema.params]
        for combo in itertools.product(*pools):
            views[_var_name(schema.name, combo)] = set(values)
    return views


def agent_views(
    dom: DomainAst, problems: Mapping[str, ProblemAst], shared: SharedDataDecl
) -> dict[str, dict[str, frozenset]]:
    """``V_i`` and ``D_{v_i}`` for every agent, shared-data grants included."""
    own = {a: own_views(dom, p) for a, p in problems.items()}
    full: dict[str, set[str]] = {}
    for views in own.values():
        for v, ds in views.items():
            full.setdefault(v, set()).update(ds)
    result = {a: {v: set(ds) for v, ds in views.items()} for a, views in own.items()}
    for e in shared.entries:
        if e.owner not in own:
            raise SemanticError("shared-data for unknown agent", e.owner)
        matches = [v for v in own[e.owner] if _matches(v, e.var, e.args)]
        if not matches:
            raise SemanticError(f"{e.owner} shares a variable it does not own", e.pattern)
        for agent, values in e.grants:
            if agent not in result:
                raise SemanticError("shared-data names an unknown agent", agent)
            for v in matches:
                outside = [x for x in values if x not in full[v]]
                if outside:
                    raise SemanticError(f"value outside the domain of {v}", outside[0])
                result[agent].setdefault(v, set()).update(values)
    return {a: {v: frozenset(ds) for v, ds in views.items()} for a, views in result.items()}


def _matches(ground: str, var: str, pattern: tuple[str, ...]) -> bool:
    name, _, rest = ground.partition("(")
    if name != var:
        return False
    args = tuple(rest.rstrip(")").split(",")) if rest else ()
    return len(args) == len(pattern) and all(p.startswith("?") or p == a for p, a in zip(pattern, args))


def ground(
    dom: DomainAst,
    problems: Mapping[str, ProblemAst],
    shared: SharedDataDecl,
    agent: str,
    views: Mapping[str, Mapping[str, frozenset]] | None = None,
) -> tuple[tuple[GroundAction, ...], dict[str, frozenset]]:
    """Ground every action schema over ``agent``'s objects.

    Keeps only ground actions whose variables are all in the agent's variable set
    and whose values are all in its view of each domain.  Returns the actions in
    canonical (name, args) order together with the agent's variable/domain table.
    """
    views = views if views is not None else agent_views(dom, problems, shared)
    mine = views[agent]
    objs = _objects(dom, problems[agent])
    out: dict[tuple, GroundAction] = {}
    for schema in dom.actions:
        pools = [_of_type(dom, objs, p.type) for p in schema.params]
        names = [p.name for p in schema.params]
        for combo in itertools.product(*pools):
            sub = dict(zip(names, combo))
            if any(sub.get(x, x) == sub.get(y, y) for x, y in schema.distinct):
                continue
            pre = tuple(
                sorted(
                    {
                        Fluent(_var_name(c.var, (sub.get(a, a) for a in c.args)), sub.get(c.value, c.value), c.positive)
                        for c in schema.pre
                    }
                )
            )
            eff = tuple(
                sorted(
                    {
                        Effect(_var_name(e.var, (sub.get(a, a) for a in e.args)), sub.get(e.value, e.value), e.assign)
                        for e in schema.eff
                    }
                )
            )
            if not all(f.var in mine and f.value in mine[f.var] for f in (*pre, *eff)):
                continue
            if _inconsistent(eff):
                continue
            out[(schema.name, combo)] = GroundAction(schema.name, combo, pre, eff, frozenset({agent}))
    return tuple(out[k] for k in sorted(out)), dict(mine)


def _inconsistent(eff: tuple[Effect, ...]) -> bool:
    assigned: dict[str, str] = {}
    for e in eff:
        if e.assign and assigned.setdefault(e.var, e.value) != e.value:
            return True
    touched = {(e.var, e.value) for e in eff if e.assign}
    return any((e.var, e.value) in touched for e in eff if not e.assign)


def build_task(
    dom: DomainAst, problems: Mapping[str, ProblemAst], shared: SharedDataDecl, name: str | None = None
) -> MapTask:
    views = agent_views(dom, problems, shared)
    actions = {}
    init = {}
    goals = {}
    for agent in sorted(problems):
        actions[agent], _ = ground(dom, problems, shared, agent, views)
        prob = problems[agent]
        init[agent] = {_var_name(c.var, c.args): c.value for c in prob.init}
        gs = []
        for c in prob.goals:
            var = _var_name(c.var, c.args)
            if var not in views[agent]:
                raise SemanticError(f"goal of {agent} mentions a variable it cannot see", var)
            gs.append(Fluent(var, c.value, c.positive))
        goals[agent] = gs
    ordered = {a: views[a] for a in sorted(problems)}
    return MapTask.build(name or dom.name, ordered, actions, init, goals)


# --- files ------------------------------------------------------------------------

PROBLEM_SUFFIX = ".problem.pddl"
SHARED_SUFFIX = ".shared.pddl"


@dataclass
class TaskFiles:
    """A task directory: ``domain.pddl``, ``<agent>.problem.pddl``, ``<agent>.shared.pddl``."""

    root: Path
    domain: str
    problems: dict[str, str] = field(default_factory=dict)
    shared: dict[str, str] = field(default_factory=dict)

    @classmethod
    def read(cls, root: str | Path) -> "TaskFiles":
        root = Path(root)
        dom = root / "domain.pddl"
        if not dom.is_file():
            raise SemanticError("task directory has no domain.pddl", str(root))
        files = cls(root, dom.read_text(encoding="utf-8"))
        for p in sorted(root.glob(f"*{PROBLEM_SUFFIX}")):
            files.problems[p.name[: -len(PROBLEM_SUFFIX)]] = p.read_text(encoding="utf-8")
        for p in sorted(root.glob(f"*{SHARED_SUFFIX}")):
            files.shared[p.name[: -len(SHARED_SUFFIX)]] = p.read_text(encoding="utf-8")
        if not files.problems:
            raise SemanticError("task directory has no agent problem files", str(root))
        return files

    def write(self, root: str | Path | None = None) -> Path:
        root = Path(root or self.root)
        root.mkdir(parents=True, exist_ok=True)
        (root / "domain.pddl").write_text(self.domain, encoding="utf-8")
        for agent, text in self.problems.items():
            (root / f"{agent}{PROBLEM_SUFFIX}").write_text(text, encoding="utf-8")
        for agent, text in self.shared.items():
            (root / f"{agent}{SHARED_SUFFIX}").write_text(text, encoding="utf-8")
        return root

    def parse(self):
        return parse_task(self.domain, self.problems, self.shared)

    def task(self) -> MapTask:
        dom, problems, shared = self.parse()
        return build_task(dom, problems, shared, name=self.root.name)


def load_task(root: str | Path) -> MapTask:
    return TaskFiles.read(root).task()
