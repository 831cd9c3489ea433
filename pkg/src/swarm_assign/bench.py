"""Benchmark harness: random instances per parameter setting, every requested
algorithm on each, one CSV row per (trial, algorithm) plus per-setting
summary rows with mean/min/max coverage."""

from __future__ import annotations

import csv
import itertools
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from statistics import fmean
from typing import Sequence, TextIO

from .errors import InvalidConfigError, SizeGuardError
from .graph import TripartiteGraph, coverage_count, objective_bottleneck, objective_wta, random_instance
from .greedy import greedy_assign
from .local import LocalConfig, local_solve, round_solution
from .oracle import brute_force_bottleneck, brute_force_wta, lp_opt, random_baseline
from .streams import stream, stream_seed

ALGOS = ("local", "greedy", "bf-bottleneck", "bf-wta", "lp", "random")
BENCH_HEADER = [
    "kind", "setting_id", "n_robots", "n_targets", "degree", "trial", "algo",
    "coverage", "objective", "rounds", "seed", "coverage_min", "coverage_max",
]
SKIPPED = "skipped"


@dataclass(frozen=True)
class AlgoResult:
    algo: str
    coverage: int | None
    objective: float | None
    rounds: int | None
    selection: dict[int, int | None] | None = None
    fractional: dict[int, float] | None = None
    bottleneck: float | None = None
    wta: float | None = None

    @property
    def skipped(self) -> bool:
        return self.coverage is None


def run_algo(
    g: TripartiteGraph,
    algo: str,
    cfg: LocalConfig = LocalConfig(),
    order: Sequence[int] | None = None,
    seed: int | object = 0,
) -> AlgoResult:
    """Run one algorithm; brute-force algorithms over the size guard come
    back skipped rather than raising."""
    frac = None
    if algo == "local":
        sol = local_solve(g, cfg)
        a = round_solution(g, sol)
        frac, native, rounds = sol.x, sol.w, sol.rounds_used
    elif algo == "greedy":
        a, _, rounds = greedy_assign(g, order)
        native = objective_wta(g, a.x, a.y)
    elif algo in ("bf-bottleneck", "bf-wta"):
        try:
            a, native = (brute_force_bottleneck if algo == "bf-bottleneck" else brute_force_wta)(g)
        except SizeGuardError:
            return AlgoResult(algo, None, None, None)
        rounds = 0
    elif algo == "lp":
        frac, native = lp_opt(g)
        a = round_solution(g, frac)
        rounds = 0
    elif algo == "random":
        a = random_baseline(g, seed)
        native = objective_bottleneck(g, a.x) if g.targets else 0.0
        rounds = 0
    else:
        raise InvalidConfigError(f"unknown algorithm {algo!r}")
    return AlgoResult(
        algo,
        coverage_count(g, a.x),
        native,
        rounds,
        a.selected(g),
        frac,
        objective_bottleneck(g, a.x) if g.targets else None,
        objective_wta(g, a.x, a.y),
    )


@dataclass(frozen=True)
class Setting:
    setting_id: int
    n_robots: int
    n_targets: int
    degree: float


def settings_grid(robots: Sequence[int], targets: Sequence[int], degrees: Sequence[float]) -> list[Setting]:
    grid = []
    for i, (r, t, d) in enumerate(itertools.product(robots, targets, degrees)):
        if d > 2 * r:
            raise InvalidConfigError(f"degree {d} exceeds the {2 * r} primitives of {r} robots")
        grid.append(Setting(i, r, t, d))
    return grid


def instance_seed(seed: int, setting_id: int, trial: int) -> int:
    return int(stream(seed, "instance", setting_id, trial).integers(2**63))


def _cell(args) -> list[list]:
    setting, trial, algos, cfg, seed = args
    iseed = instance_seed(seed, setting.setting_id, trial)
    g = random_instance(setting.n_robots, setting.n_targets, setting.degree, iseed)
    rows = []
    for algo in algos:
        res = run_algo(g, algo, cfg, seed=stream_seed(seed, "baseline", setting.setting_id, trial))
        rows.append([
            "data", setting.setting_id, setting.n_robots, setting.n_targets, fmt(setting.degree), trial, algo,
            SKIPPED if res.skipped else res.coverage,
            SKIPPED if res.skipped else fmt(res.objective),
            SKIPPED if res.skipped else res.rounds,
            iseed, "", "",
        ])
    return rows


def fmt(v: float) -> str:
    return format(float(v), ".9g")


def worker_count() -> int:
    try:
        return max(1, int(os.environ.get("SWARM_ASSIGN_THREADS", "1")))
    except ValueError:
        return 1


def run_bench(
    robots: Sequence[int],
    targets: Sequence[int],
    degrees: Sequence[float],
    trials: int,
    algos: Sequence[str],
    cfg: LocalConfig = LocalConfig(),
    seed: int = 0,
) -> tuple[list[list], bool]:
    """All data and summary rows in deterministic order, and whether any
    brute-force run was skipped by the size guard."""
    for a in algos:
        if a not in ALGOS:
            raise InvalidConfigError(f"unknown algorithm {a!r}")
    if trials < 1:
        raise InvalidConfigError("trials must be >= 1")
    grid = settings_grid(robots, targets, degrees)
    cells = [(s, t, tuple(algos), cfg, seed) for s in grid for t in range(trials)]
    workers = worker_count()
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as ex:
            results = list(ex.map(_cell, cells, chunksize=4))
    else:
        results = [_cell(c) for c in cells]

    rows: list[list] = []
    skipped = False
    for s in grid:
        per_algo: dict[str, list[list]] = {a: [] for a in algos}
        for (cs, _, _, _, _), cell_rows in zip(cells, results):
            if cs.setting_id != s.setting_id:
                continue
            for row in cell_rows:
                rows.append(row)
                per_algo[row[6]].append(row)
        for a in algos:
            data = [r for r in per_algo[a] if r[7] != SKIPPED]
            base = ["summary", s.setting_id, s.n_robots, s.n_targets, fmt(s.degree), "", a]
            if not data:
                skipped = True
                rows.append(base + [SKIPPED, SKIPPED, SKIPPED, "", SKIPPED, SKIPPED])
                continue
            if len(data) < len(per_algo[a]):
                skipped = True
            cov = [r[7] for r in data]
            rows.append(base + [
                fmt(fmean(cov)),
                fmt(fmean(float(r[8]) for r in data)),
                fmt(fmean(r[9] for r in data)),
                "",
                min(cov),
                max(cov),
            ])
    return rows, skipped


def write_bench_csv(rows: list[list], out: TextIO) -> None:
    out.write("# swarm_assign bench v1\n")
    w = csv.writer(out, lineterminator="\n")
    w.writerow(BENCH_HEADER)
    w.writerows(rows)


def read_bench_csv(text: str) -> list[dict[str, str]]:
    lines = text.splitlines()
    if not lines or not lines[0].startswith("# swarm_assign bench v1"):
        raise ValueError("missing bench schema header")
    reader = csv.DictReader(lines[1:])
    if reader.fieldnames != BENCH_HEADER:
        raise ValueError(f"unexpected columns {reader.fieldnames}")
    return list(reader)
