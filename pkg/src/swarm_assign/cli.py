"""Command-line entry point: ``swarm-assign {gen,solve,bench,simulate}``.

Exit codes: 0 success, 1 usage error, 2 input error, 3 brute-force runs
skipped by the size guard.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from pathlib import Path

from .bench import ALGOS, fmt, run_algo, run_bench, write_bench_csv
from .errors import InstanceParseError, InvalidConfigError, SwarmAssignError
from .graph import parse, random_instance, serialize
from .local import LocalConfig
from .simtrack import SimConfig, run, write_metrics, write_trace
from .streams import stream

EXIT_OK, EXIT_USAGE, EXIT_INPUT, EXIT_SKIPPED = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _int_list(text: str) -> list[int]:
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _float_list(text: str) -> list[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _algo_list(text: str) -> list[str]:
    algos = [v.strip() for v in text.split(",") if v.strip()]
    bad = [a for a in algos if a not in ALGOS]
    if bad:
        raise argparse.ArgumentTypeError(f"unknown algorithms {bad}; choose from {list(ALGOS)}")
    return algos


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="swarm-assign", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    gen = sub.add_parser("gen", help="write a random instance file")
    gen.add_argument("--robots", type=int, required=True)
    gen.add_argument("--targets", type=int, required=True)
    gen.add_argument("--target-degree", type=float, required=True)
    gen.add_argument("--seed", type=int, default=0)
    gen.add_argument("--out", type=Path, required=True)

    solve = sub.add_parser("solve", help="run one algorithm on an instance file")
    solve.add_argument("instance", type=Path)
    solve.add_argument("--algo", choices=ALGOS, required=True)
    solve.add_argument("--h", type=int, default=2)
    solve.add_argument("--epsilon", type=float, default=0.1)
    solve.add_argument("--order", type=_int_list, default=None, help="robot permutation for greedy, e.g. 2,0,1")
    solve.add_argument("--seed", type=int, default=0, help="random baseline / random greedy order seed")
    solve.add_argument("--random-order", action="store_true", help="greedy order drawn from --seed")
    solve.add_argument("--format", choices=("text", "csv"), default="text")

    bench = sub.add_parser("bench", help="random-instance comparison harness")
    bench.add_argument("--robots", type=_int_list, required=True)
    bench.add_argument("--targets", type=_int_list, required=True)
    bench.add_argument("--degrees", type=_float_list, required=True)
    bench.add_argument("--trials", type=int, default=100)
    bench.add_argument("--algos", type=_algo_list, default=["local", "greedy", "random"])
    bench.add_argument("--h", type=int, default=2)
    bench.add_argument("--epsilon", type=float, default=0.1)
    bench.add_argument("--seed", type=int, default=0)
    bench.add_argument("--csv", type=Path, required=True)

    sim = sub.add_parser("simulate", help="multi-step tracking simulation")
    sim.add_argument("--config", type=Path, required=True)
    sim.add_argument("--csv", type=Path, required=True, help="per-step metrics output")
    sim.add_argument("--trace", type=Path, required=True, help="robot/target trajectory output")
    sim.add_argument("--algo", choices=("local", "greedy"), default=None, help="override the config algorithm")
    return parser


def _local_cfg(args) -> LocalConfig:
    try:
        return LocalConfig(args.h, args.epsilon)
    except InvalidConfigError as exc:
        raise UsageError(str(exc)) from None


def cmd_gen(args) -> int:
    try:
        g = random_instance(args.robots, args.targets, args.target_degree, args.seed)
    except InvalidConfigError as exc:
        raise UsageError(str(exc)) from None
    args.out.write_text(serialize(g), encoding="utf-8")
    return EXIT_OK


def solve_report(g, args) -> list[tuple[str, str]]:
    order = args.order
    if args.algo == "greedy" and args.random_order:
        order = [int(r) for r in stream(args.seed, "ordering").permutation(list(g.robots))]
    res = run_algo(g, args.algo, _local_cfg(args), order=order, seed=args.seed)
    if res.skipped:
        return [("algo", args.algo), ("status", "skipped")]

    def opt(v):
        return "" if v is None else fmt(v)

    report = [
        ("algo", args.algo),
        ("objective", fmt(res.objective)),
        ("bottleneck", opt(res.bottleneck)),
        ("wta", opt(res.wta)),
        ("coverage", str(res.coverage)),
        ("rounds", str(res.rounds)),
        ("selection", " ".join(f"{r}:{'-' if p is None else p}" for r, p in sorted(res.selection.items()))),
    ]
    if res.fractional is not None:
        report.append(("fractional", " ".join(f"{p}:{fmt(v)}" for p, v in sorted(res.fractional.items()))))
    return report


def cmd_solve(args) -> int:
    try:
        text = args.instance.read_text(encoding="utf-8")
    except OSError as exc:
        raise InstanceParseError(str(exc), str(args.instance)) from None
    g = parse(text, str(args.instance))
    if args.order is not None and args.algo == "greedy" and sorted(args.order) != list(g.robots):
        raise UsageError(f"--order {args.order} is not a permutation of robots {list(g.robots)}")
    report = solve_report(g, args)
    if args.format == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow([k for k, _ in report])
        w.writerow([v for _, v in report])
        sys.stdout.write(buf.getvalue())
    else:
        for k, v in report:
            sys.stdout.write(f"{k}: {v}\n")
    if dict(report).get("status") == "skipped":
        return EXIT_SKIPPED
    return EXIT_OK


def cmd_bench(args) -> int:
    try:
        rows, skipped = run_bench(
            args.robots, args.targets, args.degrees, args.trials, args.algos, _local_cfg(args), args.seed
        )
    except InvalidConfigError as exc:
        raise UsageError(str(exc)) from None
    with args.csv.open("w", encoding="utf-8", newline="") as fh:
        write_bench_csv(rows, fh)
    return EXIT_SKIPPED if skipped else EXIT_OK


def load_sim_config(path: Path) -> SimConfig:
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise InstanceParseError(str(exc), str(path)) from None
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InstanceParseError(exc.msg, f"{path}:line {exc.lineno} col {exc.colno}") from None
    if not isinstance(doc, dict):
        raise InstanceParseError("config must be a JSON object", str(path))
    return SimConfig.from_dict(doc)


def cmd_simulate(args) -> int:
    try:
        cfg = load_sim_config(args.config)
    except InvalidConfigError as exc:
        raise InstanceParseError(str(exc), str(args.config)) from None
    if args.algo:
        cfg = SimConfig.from_dict({**cfg.to_dict(), "algorithm": args.algo})
    records = run(cfg)
    with args.csv.open("w", encoding="utf-8", newline="") as fh:
        write_metrics(records, cfg.algorithm, fh)
    with args.trace.open("w", encoding="utf-8", newline="") as fh:
        write_trace(records, fh)
    return EXIT_OK


COMMANDS = {"gen": cmd_gen, "solve": cmd_solve, "bench": cmd_bench, "simulate": cmd_simulate}


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"swarm-assign {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (InstanceParseError, SwarmAssignError, ValueError) as exc:
        print(f"swarm-assign {args.command}: input error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
