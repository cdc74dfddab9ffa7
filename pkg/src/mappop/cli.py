"""Command-line entry point.

Exit codes: 0 success, 1 unsolvable or invalid plan, 2 budget or timeout
exhausted, 3 usage or parse error.
"""

from __future__ import annotations

import argparse
import csv
import io
import sys
import time
from dataclasses import dataclass, fields
from importlib import resources
from pathlib import Path

from .bus import audit_privacy
from .coordinator import SolveConfig, Status, solve
from .disrpg import build_dis_rpg
from .errors import MapPopError, SemanticError
from .frontend import TaskFiles, ground
from .generators import corpus_files, generate_scaling_suite
from .planfile import format_plan, read_plan
from .validator import coupling_level, metrics, simulate, validate

OK, FAILED, EXHAUSTED, USAGE = 0, 1, 2, 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(USAGE, f"{self.prog}: error: {message}\n")


@dataclass
class ResultRow:
    problem: str
    agents: int
    coupling: float
    domain_actions: int
    acts: int | None
    ts: int | None
    partics: int | None
    time: float

    def cells(self) -> list[str]:
        def opt(x):
            return "" if x is None else str(x)

        return [
            self.problem,
            str(self.agents),
            f"{self.coupling:.1f}",
            str(self.domain_actions),
            opt(self.acts),
            opt(self.ts),
            opt(self.partics),
            f"{self.time:.3f}",
        ]


def shipped_corpus() -> list[Path]:
    root = resources.files("mappop") / "corpus"
    return sorted(Path(str(p)) for p in root.iterdir() if p.is_dir() and (Path(str(p)) / "domain.pddl").is_file())


def _config(args) -> SolveConfig:
    return SolveConfig(
        k=args.k,
        node_budget=args.node_budget,
        max_iterations=args.iters,
        timeout=args.timeout,
        parallel=args.parallel,
    )


def _load(path: str):
    files = TaskFiles.read(path)
    return files, files.task()


def cmd_parse(args) -> int:
    files = TaskFiles.read(args.task)
    dom, problems, shared = files.parse()
    print(f"ok: domain {dom.name}, {len(dom.actions)} action schemas, agents {' '.join(sorted(problems))}")
    return OK


def cmd_ground(args) -> int:
    files = TaskFiles.read(args.task)
    dom, problems, shared = files.parse()
    for agent in sorted(problems):
        if args.agent and agent != args.agent:
            continue
        actions, _ = ground(dom, problems, shared, agent)
        print(f"; {agent}: {len(actions)} actions")
        for a in actions:
            print(f"{agent} {a.label}")
    return OK


def cmd_rpg(args) -> int:
    _, task = _load(args.task)
    dis = build_dis_rpg(task)
    for agent in task.agents:
        print(f"; {agent}")
        sys.stdout.write(dis[agent].dump())
    return OK


def cmd_solve(args) -> int:
    _, task = _load(args.task)
    result = solve(task, _config(args))
    if args.trace:
        Path(args.trace).write_text(result.bus.export(), encoding="utf-8")
    if result.status is Status.UNSOLVABLE:
        print(f"unsolvable: {result.reason}")
        return FAILED
    if result.status is Status.BUDGET_EXHAUSTED:
        print(f"budget exhausted: {result.reason} after {result.iterations} iterations")
        return EXHAUSTED
    text = format_plan(result.plan, task.name)
    if args.output:
        Path(args.output).write_text(text, encoding="utf-8")
    sys.stdout.write(text)
    m = metrics(result.plan)
    print(f"metrics: acts={m.acts} ts={m.ts} partics={m.partics} iterations={result.iterations}")
    return OK


def cmd_validate(args) -> int:
    _, task = _load(args.task)
    plan = read_plan(Path(args.plan).read_text(encoding="utf-8"), task)
    report = validate(plan, task)
    sys.stdout.write(report.text())
    if not report.valid:
        return FAILED
    sim = simulate(plan, task, seed=args.seed, samples=args.samples)
    if not sim.success:
        print(f"simulation failed: {sim.failure}")
        return FAILED
    print(f"simulation ok over {sim.orders} orders")
    return OK


def run_row(path: Path, config: SolveConfig) -> tuple[ResultRow, object]:
    task = TaskFiles.read(path).task()
    start = time.perf_counter()
    result = solve(task, config)
    wall = time.perf_counter() - start
    m = metrics(result.plan) if result.plan is not None else None
    row = ResultRow(
        task.name,
        len(task.agents),
        coupling_level(task),
        task.n_actions,
        m.acts if m else None,
        m.ts if m else None,
        m.partics if m else None,
        wall,
    )
    return row, result


def format_rows(rows: list[ResultRow]) -> tuple[str, str]:
    header = [f.name for f in fields(ResultRow)]
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for r in rows:
        writer.writerow(r.cells())
    table = [header] + [r.cells() for r in rows]
    widths = [max(len(row[i]) for row in table) for i in range(len(header))]
    text = "\n".join("  ".join(c.ljust(w) for c, w in zip(row, widths)).rstrip() for row in table) + "\n"
    return buf.getvalue(), text


def cmd_bench(args) -> int:
    paths = [Path(p) for p in args.tasks] or shipped_corpus()
    config = _config(args)
    rows = []
    worst = OK
    for p in paths:
        row, result = run_row(p, config)
        rows.append(row)
        if audit_privacy(result.trace, result.bus.task):
            print(f"privacy violation in {row.problem}", file=sys.stderr)
            worst = max(worst, FAILED)
        if result.status is Status.UNSOLVABLE:
            worst = max(worst, FAILED)
        elif result.status is Status.BUDGET_EXHAUSTED:
            worst = max(worst, EXHAUSTED)
    csv_text, table = format_rows(rows)
    if args.csv:
        Path(args.csv).write_text(csv_text, encoding="utf-8")
    sys.stdout.write(table)
    return worst


def cmd_generate(args) -> int:
    out = Path(args.output)
    if args.template == "corpus":
        for files in corpus_files():
            files.write(out / files.root.name)
            print(out / files.root.name)
        return OK
    if args.n is None:
        raise SemanticError("generate needs the number of agents", args.template)
    files = generate_scaling_suite(args.template, args.n, args.seed)
    print(files.write(out))
    return OK


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0, help="seed for sampling and generation")
    common.add_argument("--k", type=int, default=4, help="refinements per agent per call")
    common.add_argument("--node-budget", type=int, default=10_000, help="A* expansions per refine call")
    common.add_argument("--iters", type=int, default=2_000, help="iteration cap of the joint loop")
    common.add_argument("--timeout", type=float, default=None, help="wall-clock limit in seconds")
    common.add_argument("--trace", default=None, help="write the message trace to this file")
    common.add_argument("--parallel", action="store_true", help="run agents' local work in threads")

    parser = _Parser(prog="mappop", description="Cooperative multi-agent partial-order planner.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("parse", parents=[common], help="syntax and semantic check of a task directory")
    p.add_argument("task")
    p.set_defaults(func=cmd_parse)

    p = sub.add_parser("ground", parents=[common], help="dump grounded actions")
    p.add_argument("task")
    p.add_argument("--agent", default=None)
    p.set_defaults(func=cmd_ground)

    p = sub.add_parser("rpg", parents=[common], help="dump every agent's distributed relaxed planning graph")
    p.add_argument("task")
    p.set_defaults(func=cmd_rpg)

    p = sub.add_parser("solve", parents=[common], help="plan and print the plan with metrics")
    p.add_argument("task")
    p.add_argument("-o", "--output", default=None, help="also write the plan to this file")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("validate", parents=[common], help="check a plan file against a task")
    p.add_argument("task")
    p.add_argument("plan")
    p.add_argument("--samples", type=int, default=10, help="linearizations to simulate")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("bench", parents=[common], help="run a set of tasks and print a result table")
    p.add_argument("tasks", nargs="*", help="task directories (default: shipped corpus)")
    p.add_argument("--csv", default=None, help="write the table as CSV")
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("generate", parents=[common], help="write generated task directories")
    p.add_argument("template", choices=["satellite", "corpus"])
    p.add_argument("output")
    p.add_argument("-n", type=int, default=None, help="number of agents")
    p.set_defaults(func=cmd_generate)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    for name in ("k", "node_budget", "iters"):
        if getattr(args, name) <= 0:
            parser.error(f"--{name.replace('_', '-')} must be positive")
    if args.timeout is not None and args.timeout <= 0:
        parser.error("--timeout must be positive")
    try:
        return args.func(args)
    except (MapPopError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return USAGE


if __name__ == "__main__":
    sys.exit(main())
