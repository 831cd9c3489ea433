"""Local algorithm for the LP relaxation of the bottleneck assignment.

Each robot looks at its radius-(h+1) neighbourhood in the robot
communication graph, solves the max-min LP exactly on that neighbourhood
(covering rows only for targets whose observers all lie within h hops),
keeps the values of its own primitives and rescales them to sum to one.
Among LP optima the point closest to the uniform split is taken, which makes
the output canonical and symmetric on symmetric instances.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import ApproximationDomainError, InvalidConfigError, SwarmAssignError
from .graph import (
    Assignment,
    PrimitiveNode,
    TripartiteGraph,
    best_responsibility,
    objective_bottleneck,
    robot_adjacency,
)
from .lp import project_onto_face, solve_maxmin
from .model import MotionPrimitive, WorldState, observable, predict_targets

FACE_TOL = 1e-10
TIE_TOL = 1e-9


@dataclass(frozen=True)
class LocalConfig:
    h: int = 2
    epsilon: float = 0.1
    split: bool = False

    def __post_init__(self):
        if isinstance(self.h, bool) or not isinstance(self.h, int) or self.h < 0:
            raise InvalidConfigError(f"h must be a non-negative integer, got {self.h!r}")
        if not self.epsilon > 0:
            raise InvalidConfigError(f"epsilon must be positive, got {self.epsilon}")

    @property
    def rounds(self) -> int:
        # h+1 rounds of neighbourhood gathering plus one ownership exchange
        return self.h + 2


@dataclass
class FractionalSolution:
    x: dict[int, float]
    w: float
    rounds_used: int


@dataclass(frozen=True)
class SplitGraph:
    graph: TripartiteGraph
    bound: dict[int, float]
    origin: dict[int, int]  # virtual robot -> original robot

    def owner(self, primitive: int) -> int:
        return self.origin[self.graph.robot_of[primitive]]


def packing_chunks(prims: Sequence[int], split: bool) -> list[tuple[tuple[int, ...], float]]:
    """Packing rows for one robot: a single row, or consecutive pairs each
    bounded by ``1/ceil(d/2)`` when splitting a robot with more than two."""
    d = len(prims)
    if not split or d <= 2:
        return [(tuple(prims), 1.0)]
    k = math.ceil(d / 2)
    return [(tuple(prims[2 * i: 2 * i + 2]), 1.0 / k) for i in range(k)]


def split_graph(g: TripartiteGraph) -> SplitGraph:
    """Replace every robot with more than two primitives by virtual robots
    holding consecutive pairs. The first pair keeps the original robot id."""
    next_id = max(g.robots, default=-1) + 1
    prims, bound, origin = [], {}, {}
    for r in g.robots:
        for i, (chunk, b) in enumerate(packing_chunks(g.primitives_of[r], split=True)):
            if i == 0:
                vid = r
            else:
                vid, next_id = next_id, next_id + 1
            bound[vid], origin[vid] = b, r
            prims.extend(PrimitiveNode(p, vid) for p in chunk)
    split = TripartiteGraph(tuple(bound), tuple(prims), g.targets, g.edges)
    return SplitGraph(split, bound, origin)


# A view is what a robot knows after gathering: for every robot within reach,
# its hop distance and its primitives with their (target, weight) edges.
RobotRecord = tuple[int, tuple[tuple[int, tuple[tuple[int, float], ...]], ...]]
View = Mapping[int, RobotRecord]


def robot_record(g: TripartiteGraph, r: int) -> tuple[tuple[int, tuple[tuple[int, float], ...]], ...]:
    return tuple((p, g.edges_of_primitive[p]) for p in g.primitives_of[r])


def hop_distances(adj: Mapping[int, Iterable[int]], source: int, radius: int) -> dict[int, int]:
    dist = {source: 0}
    queue = deque([source])
    while queue:
        a = queue.popleft()
        if dist[a] == radius:
            continue
        for b in sorted(adj[a]):
            if b not in dist:
                dist[b] = dist[a] + 1
                queue.append(b)
    return dist


def view_from_graph(g: TripartiteGraph, adj: Mapping[int, Iterable[int]], r: int, radius: int) -> dict[int, RobotRecord]:
    return {q: (d, robot_record(g, q)) for q, d in hop_distances(adj, r, radius).items()}


def _uniform(prims: Sequence[int]) -> dict[int, float]:
    return {p: 1.0 / len(prims) for p in prims}


def _normalize(values: Mapping[int, float], prims: Sequence[int]) -> dict[int, float]:
    s = sum(values[p] for p in prims)
    if s <= 1e-12:
        return _uniform(prims)
    return {p: values[p] / s for p in prims}


def solve_view(center: int, view: View, cfg: LocalConfig, cache: dict | None = None) -> dict[int, float]:
    """Normalized fractional values of ``center``'s primitives from its view."""
    own = [p for p, _ in view[center][1]]
    if not own:
        return {}
    h = cfg.h

    if h == 0:
        members = {center: view[center]}
        rows: dict[int, dict[int, float]] = {}
        for p, es in view[center][1]:
            for t, c in es:
                rows.setdefault(t, {})[p] = c
    else:
        members = dict(view)
        observers: dict[int, set[int]] = {}
        for q, (_, record) in view.items():
            for p, es in record:
                for t, _ in es:
                    observers.setdefault(t, set()).add(q)
        interior = {t for t, obs in observers.items() if all(view[q][0] <= h for q in obs)}
        rows = {}
        for q, (_, record) in view.items():
            for p, es in record:
                for t, c in es:
                    if t in interior:
                        rows.setdefault(t, {})[p] = c

    involved = {q for q, (_, rec) in members.items() for p, es in rec if any(t in rows for t, _ in es)}
    if center not in involved:
        return _uniform(own)

    robots = sorted(involved)
    prim_list = [p for q in robots for p, _ in members[q][1]]
    index = {p: i for i, p in enumerate(prim_list)}
    groups, bounds = [], []
    for q in robots:
        for chunk, b in packing_chunks([p for p, _ in members[q][1]], cfg.split):
            groups.append(tuple(index[p] for p in chunk))
            bounds.append(b)
    # covering rows in local indices, sorted by content; duplicates are redundant
    canon = tuple(sorted({tuple(sorted((index[p], c) for p, c in row.items())) for row in rows.values()}))
    x0 = _demand_prior(members, index, groups, bounds)
    key = (tuple(groups), tuple(bounds), canon, x0.tobytes())
    if cache is not None and key in cache:
        x = cache[key]
    else:
        x = _solve_local_lp(groups, bounds, canon, len(index), cfg.epsilon, x0)
        if cache is not None:
            cache[key] = x
    return _normalize({p: float(x[index[p]]) for p in own}, own)


def _demand_prior(members, index, groups, bounds) -> np.ndarray:
    """Starting point for the projection: inside each packing row, mass in
    proportion to the share of each seen target's demand a primitive serves."""
    degree: dict[int, int] = {}
    for _, rec in members.values():
        for _, es in rec:
            for t, _ in es:
                degree[t] = degree.get(t, 0) + 1
    score = np.zeros(len(index))
    for _, rec in members.values():
        for p, es in rec:
            if p in index:
                score[index[p]] = sum(c / degree[t] for t, c in es)
    x0 = np.zeros(len(index))
    for g, b in zip(groups, bounds):
        g = list(g)
        s = score[g].sum()
        x0[g] = b * score[g] / s if s > 0 else b / len(g)
    return x0


def _solve_local_lp(groups, bounds, rows, n, epsilon, x0) -> np.ndarray:
    C = np.zeros((len(rows), n))
    for i, row in enumerate(rows):
        for j, c in row:
            C[i, j] = c
    sol = solve_maxmin(groups, bounds, C)
    if sol.gap > epsilon * max(sol.w, 1e-12) + 1e-12:
        raise SwarmAssignError(f"local LP duality gap {sol.gap} exceeds epsilon*w")
    face = project_onto_face(groups, bounds, C, sol.w - FACE_TOL * max(1.0, sol.w), x0)
    return sol.x if face is None else face


def local_solve(
    g: TripartiteGraph,
    cfg: LocalConfig = LocalConfig(),
    extra_adjacency: Mapping[int, Iterable[int]] | None = None,
) -> FractionalSolution:
    """Run the local algorithm for every robot of ``g``.

    ``extra_adjacency`` adds communication links beyond shared targets, such
    as geometric radio range in a simulated world.
    """
    adj = robot_adjacency(g, extra_adjacency)
    cache: dict = {}
    x: dict[int, float] = {}
    for r in g.robots:
        view = view_from_graph(g, adj, r, cfg.h + 1)
        x.update(solve_view(r, view, cfg, cache))
    w = objective_bottleneck(g, x) if g.targets else 0.0
    return FractionalSolution(x, w, cfg.rounds)


def round_solution(g: TripartiteGraph, frac: FractionalSolution | Mapping[int, float]) -> Assignment:
    """Per robot, select the primitive with the largest fractional value.

    Values within ``TIE_TOL`` of the maximum tie and go to the lowest id.
    """
    values = frac.x if isinstance(frac, FractionalSolution) else frac
    x: dict[int, float] = {}
    for r, prims in g.primitives_of.items():
        if not prims:
            continue
        top = max(values.get(p, 0.0) for p in prims)
        chosen = min(p for p in prims if values.get(p, 0.0) >= top - TIE_TOL)
        x.update({p: float(p == chosen) for p in prims})
    return Assignment(x, best_responsibility(g, x))


def approximation_bound(delta_R: int, delta_T: int, h: int, epsilon: float) -> float:
    if delta_R < 2 or delta_T < 2:
        raise ApproximationDomainError(
            "the ratio needs delta_R >= 2 and delta_T >= 2; with a degree of 1 "
            "there exist local algorithms that give the optimal solution"
        )
    if h < 1:
        raise ApproximationDomainError(f"h must be >= 1, got {h}")
    if not epsilon > 0:
        raise ApproximationDomainError(f"epsilon must be positive, got {epsilon}")
    return delta_R * (1 + epsilon) * (1 + 1 / h) * (1 - 1 / delta_T)


def realize_targets(world: WorldState, primitives: Sequence[MotionPrimitive], dt: float = 0.0) -> dict[int, int]:
    """Owner of each observable target: the lowest-id robot that can see it."""
    owners: dict[int, int] = {}
    for t in predict_targets(world.targets, dt):
        obs = [p.robot_id for p in primitives if observable(p, t, world.sensing)]
        if obs:
            owners[t.id] = min(obs)
    return owners


def target_owners(g: TripartiteGraph) -> dict[int, int]:
    return {t: min(obs) for t, obs in g.observers.items() if obs}
