"""Task generators: domain templates, random tasks and micro-tasks.

Template generators return :class:`TaskFiles` (the same files the CLI reads);
the random generators build :class:`MapTask` objects directly.
"""

from __future__ import annotations

import random
from pathlib import Path

from .frontend import TaskFiles
from .task import Effect, Fluent, GroundAction, MapTask, Truth, apply, evaluate

# --- satellite ------------------------------------------------------------------------

SATELLITE_DOMAIN = """\
; observation satellites, one agent per satellite
(define (domain satellite)
  (:types satellite instrument direction mode status)
  (:constants yes no - status)
  (:variables
    (pointing ?s - satellite - direction)
    (board ?i - instrument - satellite)
    (target ?i - instrument - direction)
    (supports ?i - instrument ?m - mode - status)
    (power ?i - instrument - status)
    (calibrated ?i - instrument - status)
    (image ?d - direction ?m - mode - status))
  (:action turn
    :parameters (?s - satellite ?a ?b - direction)
    :precondition (and (= (pointing ?s) ?a) (!= ?a ?b))
    :effect (and (assign (pointing ?s) ?b)))
  (:action switch-on
    :parameters (?i - instrument ?s - satellite)
    :precondition (and (= (board ?i) ?s) (= (power ?i) no))
    :effect (and (assign (power ?i) yes) (assign (calibrated ?i) no)))
  (:action calibrate
    :parameters (?s - satellite ?i - instrument ?d - direction)
    :precondition (and (= (board ?i) ?s) (= (target ?i) ?d) (= (pointing ?s) ?d) (= (power ?i) yes))
    :effect (and (assign (calibrated ?i) yes)))
  (:action take-image
    :parameters (?s - satellite ?d - direction ?i - instrument ?m - mode)
    :precondition (and (= (board ?i) ?s) (= (calibrated ?i) yes) (= (supports ?i ?m) yes)
                       (= (pointing ?s) ?d))
    :effect (and (assign (image ?d ?m) yes)))
)
"""

_MODES = ("thermal", "spectro", "infrared")


def _satellite_problem(i: int, rng: random.Random, n_dirs: int, n_goals: int) -> str:
    sat, inst, cal = f"sat{i}", f"inst{i}", f"cal{i}"
    dirs = [f"star{i}x{k}" for k in range(n_dirs)]
    modes = list(_MODES[: 1 + rng.randrange(2)])
    init = [
        f"(= (pointing {sat}) {rng.choice(dirs)})",
        f"(= (board {inst}) {sat})",
        f"(= (target {inst}) {cal})",
        f"(= (power {inst}) no)",
        f"(= (calibrated {inst}) no)",
    ]
    init += [f"(= (supports {inst} {m}) yes)" for m in modes]
    init += [f"(= (image {d} {m}) no)" for d in dirs for m in modes]
    goals = [
        f"(= (image {d} {rng.choice(modes)}) yes)" for d in rng.sample(dirs, min(n_goals, len(dirs)))
    ]
    return (
        f"(define (problem satellite-{sat})\n"
        f"  (:objects {sat} - satellite {inst} - instrument {cal} {' '.join(dirs)} - direction\n"
        f"            {' '.join(modes)} - mode)\n"
        f"  (:init {' '.join(init)})\n"
        f"  (:goal (and {' '.join(goals)})))\n"
    )


def satellite_files(n: int, seed: int = 0, n_dirs: int = 2, n_goals: int = 1, name: str | None = None) -> TaskFiles:
    """``n`` satellites, each with its own targets and goals; nothing is shared."""
    rng = random.Random(seed)
    problems = {f"sat{i}": _satellite_problem(i, rng, n_dirs, n_goals) for i in range(n)}
    return TaskFiles(Path(name or f"satellite-{n}"), SATELLITE_DOMAIN, problems, {})


def generate_scaling_suite(template: str, n: int, seed: int = 0) -> TaskFiles:
    """Independent-goal instance with ``n`` agents; each agent must reach its own goal."""
    if not 1 <= n <= 14:
        raise ValueError("n must be between 1 and 14")
    if template != "satellite":
        raise ValueError(f"unknown template {template!r}")
    return satellite_files(n, seed, n_dirs=2, n_goals=1, name=f"scaling-satellite-{n}-s{seed}")


# --- rovers -----------------------------------------------------------------------------

ROVERS_DOMAIN = """\
; planetary rovers sharing a few sample sites
(define (domain rovers)
  (:types rover waypoint status)
  (:constants yes no - status)
  (:variables
    (at ?r - rover - waypoint)
    (path ?r - rover ?a ?b - waypoint - status)
    (sample ?w - waypoint - status)
    (full ?r - rover - status)
    (data ?r - rover ?w - waypoint - status)
    (sent ?w - waypoint - status))
  (:action navigate
    :parameters (?r - rover ?a ?b - waypoint)
    :precondition (and (= (at ?r) ?a) (= (path ?r ?a ?b) yes) (!= ?a ?b))
    :effect (and (assign (at ?r) ?b)))
  (:action take-sample
    :parameters (?r - rover ?w - waypoint)
    :precondition (and (= (at ?r) ?w) (= (sample ?w) yes) (= (full ?r) no))
    :effect (and (assign (sample ?w) no) (assign (full ?r) yes) (assign (data ?r ?w) yes)))
  (:action drop
    :parameters (?r - rover)
    :precondition (and (= (full ?r) yes))
    :effect (and (assign (full ?r) no)))
  (:action send
    :parameters (?r - rover ?w - waypoint)
    :precondition (and (= (data ?r ?w) yes))
    :effect (and (assign (sent ?w) yes)))
)
"""


def rovers_files(n: int = 2, seed: int = 0, n_own: int = 3, n_common: int = 1, name: str | None = None) -> TaskFiles:
    """Rovers with private routes and a few common sample sites.

    Only the last rover can reach the common sites, while the goal of sending
    their data belongs to rover 0, so solving needs cooperation when n > 1.
    """
    rng = random.Random(seed)
    common = [f"c{k}" for k in range(n_common)]
    problems = {}
    for i in range(n):
        r = f"r{i}"
        own = [f"w{i}x{k}" for k in range(n_own)]
        wps = own + common
        init = [f"(= (at {r}) {own[0]})", f"(= (full {r}) no)"]
        edges = [(own[k], own[k + 1]) for k in range(n_own - 1)]
        if i == n - 1:
            edges += [(rng.choice(own), c) for c in common]
        for a, b in edges:
            init += [f"(= (path {r} {a} {b}) yes)", f"(= (path {r} {b} {a}) yes)"]
        init += [f"(= (sample {w}) yes)" for w in wps]
        init += [f"(= (sent {w}) no)" for w in wps]
        init += [f"(= (data {r} {w}) no)" for w in wps]
        goals = [f"(= (sent {rng.choice(own[1:])}) yes)"]
        if i == 0:
            goals += [f"(= (sent {c}) yes)" for c in common]
        problems[r] = (
            f"(define (problem rovers-{r})\n"
            f"  (:objects {r} - rover {' '.join(wps)} - waypoint)\n"
            f"  (:init {' '.join(init)})\n"
            f"  (:goal (and {' '.join(goals)})))\n"
        )
    return TaskFiles(Path(name or f"rovers-{n}"), ROVERS_DOMAIN, problems, {})


# --- logistics ---------------------------------------------------------------------------

LOGISTICS_DOMAIN = """\
; trucks move packages inside their city, the plane between airports
(define (domain logistics)
  (:types place - object loc vehicle - place airport - loc truck plane - vehicle pkg - object)
  (:variables
    (at ?p - pkg - place)
    (pos ?v - vehicle - loc))
  (:action load
    :parameters (?p - pkg ?v - vehicle ?l - loc)
    :precondition (and (= (at ?p) ?l) (= (pos ?v) ?l))
    :effect (and (assign (at ?p) ?v)))
  (:action unload
    :parameters (?p - pkg ?v - vehicle ?l - loc)
    :precondition (and (= (at ?p) ?v) (= (pos ?v) ?l))
    :effect (and (assign (at ?p) ?l)))
  (:action drive
    :parameters (?t - truck ?a ?b - loc)
    :precondition (and (= (pos ?t) ?a) (!= ?a ?b))
    :effect (and (assign (pos ?t) ?b)))
  (:action fly
    :parameters (?x - plane ?a ?b - airport)
    :precondition (and (= (pos ?x) ?a) (!= ?a ?b))
    :effect (and (assign (pos ?x) ?b)))
)
"""


def logistics_files(n_trucks: int = 1, n_pkgs: int = 1, seed: int = 0, name: str | None = None) -> TaskFiles:
    """Packages start in truck cities and must reach the destination airport.

    Each truck serves one city (a depot plus an airport); the plane flies
    between all airports.  Package locations are shared between each truck
    and the plane on the airports they have in common.
    """
    rng = random.Random(seed)
    airports = [f"ap{c}" for c in range(n_trucks)] + ["apz"]
    owner = {f"p{k}": rng.randrange(n_trucks) for k in range(n_pkgs)}
    problems, shared = {}, {}
    for c in range(n_trucks):
        t, depot, ap = f"t{c}", f"depot{c}", f"ap{c}"
        pkgs = [p for p, o in owner.items() if o == c]
        objs = f"{t} - truck {depot} - loc {ap} - airport"
        if pkgs:
            objs = f"{' '.join(pkgs)} - pkg " + objs
        init = [f"(= (pos {t}) {rng.choice([depot, ap])})"] + [f"(= (at {p}) {depot})" for p in pkgs]
        problems[t] = (
            f"(define (problem logistics-{t})\n"
            f"  (:objects {objs})\n"
            f"  (:init {' '.join(init)})\n"
            f"  (:goal (and)))\n"
        )
    pkgs = sorted(owner)
    problems["plane"] = (
        f"(define (problem logistics-plane)\n"
        f"  (:objects {' '.join(pkgs)} - pkg pl - plane {' '.join(airports)} - airport)\n"
        f"  (:init (= (pos pl) {rng.choice(airports)}))\n"
        f"  (:goal (and {' '.join(f'(= (at {p}) apz)' for p in pkgs)})))\n"
    )
    entries = []
    for p in pkgs:
        c = owner[p]
        entries.append(f"  ((at {p}) :with (t{c} :values (ap{c} apz)))")
    shared["plane"] = "(:shared-data\n" + "\n".join(entries) + ")\n"
    return TaskFiles(Path(name or f"logistics-{n_trucks}-{n_pkgs}"), LOGISTICS_DOMAIN, problems, shared)


MICRO_LOGISTICS = {
    "truck.problem.pddl": """\
(define (problem micro-logistics-truck)
  (:objects p - pkg t1 - truck loca - loc apa - airport)
  (:init (= (at p) t1) (= (pos t1) loca))
  (:goal (and)))
""",
    "plane.problem.pddl": """\
(define (problem micro-logistics-plane)
  (:objects p - pkg pl - plane apa apb - airport)
  (:init (= (pos pl) apa))
  (:goal (and (= (at p) pl) (= (pos pl) apb))))
""",
    "plane.shared.pddl": "(:shared-data ((at p) :with (truck :values (apa apb))))\n",
}


def micro_logistics_files() -> TaskFiles:
    """Package already in the truck; truck drives and unloads, plane loads and flies."""
    files = TaskFiles(Path("micro-logistics"), LOGISTICS_DOMAIN)
    for fname, text in MICRO_LOGISTICS.items():
        agent, kind, _ = fname.split(".")
        (files.problems if kind == "problem" else files.shared)[agent] = text
    return files


def corpus_files() -> list[TaskFiles]:
    """The shipped desk-scale corpus, spanning loose, medium and tight coupling."""
    return [
        satellite_files(2, seed=1, n_dirs=3, n_goals=2, name="mini-satellite-2"),
        satellite_files(3, seed=2, n_dirs=3, n_goals=2, name="mini-satellite-3"),
        rovers_files(2, seed=1, n_common=2, name="mini-rovers-2"),
        rovers_files(3, seed=2, n_common=2, name="mini-rovers-3"),
        logistics_files(1, 1, seed=0, name="mini-logistics"),
        logistics_files(2, 2, seed=1, name="logistics-2-2"),
        micro_logistics_files(),
    ]


# --- random tasks built directly ---------------------------------------------------------


def _values(var: int, size: int) -> list[str]:
    return [f"d{var}x{k}" for k in range(size)]


def random_shared_task(seed: int, max_agents: int = 4, max_actions: int = 60) -> MapTask:
    """Every agent sees every variable and value; actions are split among agents."""
    rng = random.Random(seed)
    n_agents = rng.randint(2, max_agents)
    n_vars = rng.randint(3, 7)
    domains = {f"v{j}": _values(j, rng.randint(2, 4)) for j in range(n_vars)}
    names = sorted(domains)
    n_actions = rng.randint(n_agents, max_actions)
    actions = []
    for k in range(n_actions):
        pre = []
        for var in rng.sample(names, rng.randint(0, 2)):
            pre.append(Fluent(var, rng.choice(domains[var]), rng.random() > 0.2))
        eff = []
        for var in rng.sample(names, rng.randint(1, 2)):
            eff.append(Effect(var, rng.choice(domains[var]), rng.random() > 0.15))
        actions.append(GroundAction(f"act{k}", (), tuple(pre), tuple(eff)))
    agents = [f"ag{i}" for i in range(n_agents)]
    per_agent: dict[str, list[GroundAction]] = {a: [] for a in agents}
    for a in actions:
        for ag in rng.sample(agents, rng.choice([1, 1, 1, 2])):
            per_agent[ag].append(a)
    init = {v: rng.choice(ds) for v, ds in domains.items() if rng.random() > 0.2}
    views = {a: {v: ds for v, ds in domains.items()} for a in agents}
    return MapTask.build(f"shared-{seed}", views, per_agent, {agents[0]: init}, {})


def random_task(seed: int, share: float | None = None, n_agents: int | None = None) -> MapTask:
    """Random task with a planted solution.

    Each variable has an owner that sees its whole domain; with probability
    ``share`` it is also visible to other agents, each seeing a random subset
    of its values.  Goals are read off the end of a random walk, so a plan
    always exists.
    """
    rng = random.Random(seed)
    n = n_agents or rng.randint(2, 4)
    share = rng.random() if share is None else share
    agents = [f"ag{i}" for i in range(n)]
    views: dict[str, dict[str, list[str]]] = {a: {} for a in agents}
    owner: dict[str, str] = {}
    j = 0
    for a in agents:
        for _ in range(rng.randint(2, 3)):
            var, vals = f"v{j}", _values(j, rng.randint(2, 3))
            owner[var] = a
            views[a][var] = vals
            for b in agents:
                if b != a and rng.random() < share:
                    views[b][var] = sorted(rng.sample(vals, rng.randint(1, len(vals))))
            j += 1
    per_agent: dict[str, list[GroundAction]] = {}
    for a in agents:
        acts = []
        mine = sorted(views[a])
        for k in range(rng.randint(3, 6)):
            pre = []
            for var in rng.sample(mine, rng.randint(1, min(2, len(mine)))):
                pre.append(Fluent(var, rng.choice(views[a][var]), rng.random() > 0.15))
            eff = [Effect(var, rng.choice(views[a][var])) for var in rng.sample(mine, rng.randint(1, 2))]
            acts.append(GroundAction(f"{a}-op{k}", (), tuple(pre), tuple(eff)))
        per_agent[a] = acts
    init = {a: {} for a in agents}
    for var, a in owner.items():
        init[a][var] = rng.choice(views[a][var])
    task = MapTask.build(f"random-{seed}", views, per_agent, init, {})
    # random walk to plant goals
    state = task.initial_state
    domains = task.domains
    pool = sorted({x for acts in task.actions.values() for x in acts})
    for _ in range(rng.randint(2, 6)):
        ready = [x for x in pool if all(evaluate(p, state) is Truth.TRUE for p in x.pre)]
        if not ready:
            break
        state = apply(state, rng.choice(ready), domains)
    changed = sorted(
        f for f in state if f.positive and f not in task.initial_state
    )
    picked = rng.sample(changed, min(len(changed), rng.randint(1, 2))) if changed else []
    if not picked:
        start = sorted(f for f in task.initial_state if f.positive)
        picked = [rng.choice(start)]
    goals = {a: [] for a in agents}
    for g in picked:
        goals[owner[g.var]].append(g)
    return MapTask.build(task.name, views, per_agent, init, goals)


def micro_task(seed: int, n_actions: int = 3, two_agents: bool | None = None) -> MapTask:
    """At most ``n_actions`` ground actions for the planning agent and one open goal.

    A second goal may be added that already holds initially; callers link it
    from a0 in the base plan so that refinements must protect it.

    With two agents the second one sees some of the variables, with partial
    value views, and holds no actions; it only changes what counts as a threat.
    """
    rng = random.Random(seed)
    two = rng.random() < 0.5 if two_agents is None else two_agents
    names = [f"v{j}" for j in range(rng.randint(1, 3))]
    domains = {v: _values(j, rng.randint(2, 3)) for j, v in enumerate(names)}
    acts = []
    for k in range(rng.randint(1, n_actions)):
        pre = []
        for var in rng.sample(names, rng.randint(0, min(2, len(names)))):
            pre.append(Fluent(var, rng.choice(domains[var]), rng.random() > 0.2))
        eff = []
        for var in rng.sample(names, rng.randint(1, min(2, len(names)))):
            eff.append(Effect(var, rng.choice(domains[var]), rng.random() > 0.15))
        acts.append(GroundAction(f"op{k}", (), tuple(pre), tuple(eff)))
    views = {"a": dict(domains)}
    if two:
        views["b"] = {v: sorted(rng.sample(ds, rng.randint(1, len(ds) - 1))) for v, ds in domains.items() if rng.random() < 0.8}
    init = {v: rng.choice(ds) for v, ds in domains.items() if rng.random() > 0.25}
    var = rng.choice(names)
    goals = [Fluent(var, rng.choice(domains[var]), rng.random() > 0.2)]
    # a second goal that already holds, on a variable the other agent sees
    held = [v for v in init if v != var and two and v in views["b"]]
    if held and rng.random() < 0.7:
        v = rng.choice(held)
        goals.append(Fluent(v, init[v]))
    actions = {"a": acts}
    if two:
        actions["b"] = []
    return MapTask.build(f"micro-{seed}", views, actions, {"a": init}, {"a": goals})
