"""Exact baselines: exhaustive enumeration of selections, the LP optimum and
a uniformly random selection."""

from __future__ import annotations

import math

import numpy as np

from .errors import EmptyObjectiveError, SizeGuardError
from .graph import Assignment, TripartiteGraph, best_responsibility
from .lp import solve_maxmin

MAX_SELECTIONS = 10**6
CHUNK = 1 << 16
VALUE_TOL = 1e-12


def selection_count(g: TripartiteGraph) -> int:
    return math.prod(len(ps) for ps in g.primitives_of.values() if ps)


def _guard(g: TripartiteGraph) -> None:
    n = selection_count(g)
    if n > MAX_SELECTIONS:
        raise SizeGuardError(f"{n} selections exceed the enumeration limit {MAX_SELECTIONS}")


def _enumerate(g: TripartiteGraph, reduce):
    """Evaluate ``reduce(cov)`` for every one-primitive-per-robot selection in
    lexicographic order; ``cov`` has shape (chunk, robots, targets)."""
    _guard(g)
    robots = [r for r in g.robots if g.primitives_of[r]]
    if not robots:
        return {}, float(reduce(np.zeros((1, 0, len(g.targets))))[0])
    t_index = {t: j for j, t in enumerate(g.targets)}
    tables = []
    for r in robots:
        prims = g.primitives_of[r]
        table = np.zeros((len(prims), len(g.targets)))
        for i, p in enumerate(prims):
            for t, c in g.edges_of_primitive[p]:
                table[i, t_index[t]] = c
        tables.append(table)
    shape = tuple(len(g.primitives_of[r]) for r in robots)
    total = math.prod(shape)
    values = np.empty(total)
    for start in range(0, total, CHUNK):
        idx = np.unravel_index(np.arange(start, min(total, start + CHUNK)), shape)
        cov = np.stack([tables[k][idx[k]] for k in range(len(robots))], axis=1)
        values[start:start + len(idx[0])] = reduce(cov)
    best = values.max()
    winner = int(np.flatnonzero(values >= best - VALUE_TOL)[0])
    choice = np.unravel_index(winner, shape)
    x = {p.id: 0.0 for p in g.primitives}
    for k, r in enumerate(robots):
        x[g.primitives_of[r][int(choice[k])]] = 1.0
    return x, float(values[winner])


def brute_force_bottleneck(g: TripartiteGraph) -> tuple[Assignment, float]:
    """Lexicographically smallest selection maximizing the worst target coverage."""
    if not g.targets:
        raise EmptyObjectiveError("bottleneck objective is undefined without targets")
    x, w = _enumerate(g, lambda cov: cov.sum(axis=1).min(axis=1))
    return Assignment(x, best_responsibility(g, x)), w


def brute_force_wta(g: TripartiteGraph) -> tuple[Assignment, float]:
    """Selection maximizing ``sum_j max_i quality_ij`` with the induced best y."""
    if not g.targets:
        _guard(g)
        x = {p.id: float(p.id == g.primitives_of[p.robot][0]) for p in g.primitives}
        return Assignment(x, {}), 0.0
    x, v = _enumerate(g, lambda cov: cov.max(axis=1).sum(axis=1))
    return Assignment(x, best_responsibility(g, x)), v


def lp_opt(g: TripartiteGraph) -> tuple[dict[int, float], float]:
    """Exact optimum of the max-min LP relaxation, certified to 1e-9."""
    if not g.targets or not g.edges:
        raise EmptyObjectiveError("LP relaxation needs at least one target and one edge")
    prims = [p.id for p in g.primitives]
    index = {p: i for i, p in enumerate(prims)}
    groups = [tuple(index[p] for p in g.primitives_of[r]) for r in g.robots if g.primitives_of[r]]
    C = np.zeros((len(g.targets), len(prims)))
    for j, t in enumerate(g.targets):
        for p, c in g.edges_of_target[t]:
            C[j, index[p]] = c
    sol = solve_maxmin(groups, [1.0] * len(groups), C)
    if sol.gap > 1e-9:
        raise RuntimeError(f"LP optimum not certified: duality gap {sol.gap}")
    return {p: float(sol.x[index[p]]) for p in prims}, sol.w


def random_baseline(g: TripartiteGraph, seed: int | np.random.SeedSequence) -> Assignment:
    rng = np.random.default_rng(seed)
    x = {p.id: 0.0 for p in g.primitives}
    for r in g.robots:
        prims = g.primitives_of[r]
        if prims:
            x[prims[int(rng.integers(len(prims)))]] = 1.0
    return Assignment(x, best_responsibility(g, x))
