"""Tripartite robot/primitive/target graph, assignment objectives, the JSON
instance format and the random-instance generator used by the benchmarks."""

from __future__ import annotations

import json
import math
from collections import defaultdict
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import (
    EmptyObjectiveError,
    InfeasibleAssignmentError,
    InstanceParseError,
    InvalidConfigError,
)
from .model import MotionPrimitive, WorldState, predict_targets, weight

FEAS_TOL = 1e-9


@dataclass(frozen=True, order=True)
class PrimitiveNode:
    id: int
    robot: int


@dataclass(frozen=True, order=True)
class SensingEdge:
    primitive: int
    target: int
    weight: float = 1.0


@dataclass(frozen=True)
class TripartiteGraph:
    """Robots, their primitives, targets and weighted primitive-target edges.

    All collections are stored sorted so that structurally equal graphs
    compare equal and serialize identically.
    """

    robots: tuple[int, ...] = ()
    primitives: tuple[PrimitiveNode, ...] = ()
    targets: tuple[int, ...] = ()
    edges: tuple[SensingEdge, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "robots", tuple(sorted(self.robots)))
        object.__setattr__(self, "primitives", tuple(sorted(self.primitives)))
        object.__setattr__(self, "targets", tuple(sorted(self.targets)))
        object.__setattr__(self, "edges", tuple(sorted(self.edges)))
        self._validate()

    def _validate(self) -> None:
        if len(set(self.robots)) != len(self.robots):
            raise InvalidConfigError("duplicate robot id")
        if len(set(self.targets)) != len(self.targets):
            raise InvalidConfigError("duplicate target id")
        robots = set(self.robots)
        seen = set()
        for p in self.primitives:
            if p.id in seen:
                raise InvalidConfigError(f"duplicate primitive id {p.id}")
            seen.add(p.id)
            if p.robot not in robots:
                raise InvalidConfigError(f"primitive {p.id} references unknown robot {p.robot}")
        targets = set(self.targets)
        pairs = set()
        for e in self.edges:
            if e.primitive not in seen:
                raise InvalidConfigError(f"edge references unknown primitive {e.primitive}")
            if e.target not in targets:
                raise InvalidConfigError(f"edge references unknown target {e.target}")
            if not (math.isfinite(e.weight) and e.weight >= 0):
                raise InvalidConfigError(f"edge ({e.primitive},{e.target}) has invalid weight {e.weight}")
            if (e.primitive, e.target) in pairs:
                raise InvalidConfigError(f"duplicate edge ({e.primitive},{e.target})")
            pairs.add((e.primitive, e.target))

    @cached_property
    def robot_of(self) -> dict[int, int]:
        return {p.id: p.robot for p in self.primitives}

    @cached_property
    def primitives_of(self) -> dict[int, tuple[int, ...]]:
        out: dict[int, list[int]] = {r: [] for r in self.robots}
        for p in self.primitives:
            out[p.robot].append(p.id)
        return {r: tuple(ps) for r, ps in out.items()}

    @cached_property
    def edges_of_primitive(self) -> dict[int, tuple[tuple[int, float], ...]]:
        out: dict[int, list[tuple[int, float]]] = {p.id: [] for p in self.primitives}
        for e in self.edges:
            out[e.primitive].append((e.target, e.weight))
        return {p: tuple(v) for p, v in out.items()}

    @cached_property
    def edges_of_target(self) -> dict[int, tuple[tuple[int, float], ...]]:
        out: dict[int, list[tuple[int, float]]] = {t: [] for t in self.targets}
        for e in self.edges:
            out[e.target].append((e.primitive, e.weight))
        return {t: tuple(v) for t, v in out.items()}

    @cached_property
    def observers(self) -> dict[int, frozenset[int]]:
        """Robots with at least one primitive edge to each target."""
        return {
            t: frozenset(self.robot_of[p] for p, _ in es)
            for t, es in self.edges_of_target.items()
        }

    @cached_property
    def weight_of(self) -> dict[tuple[int, int], float]:
        return {(e.primitive, e.target): e.weight for e in self.edges}


@dataclass
class Assignment:
    """Primitive selection ``x`` and robot-target responsibility ``y``.

    ``y`` only stores pairs set to 1.
    """

    x: dict[int, float]
    y: dict[tuple[int, int], int] = field(default_factory=dict)

    def selected(self, g: TripartiteGraph) -> dict[int, int | None]:
        """Robot id to its selected primitive (``x == 1``), or None."""
        out: dict[int, int | None] = {}
        for r, prims in g.primitives_of.items():
            chosen = [p for p in prims if self.x.get(p, 0.0) >= 0.5]
            out[r] = chosen[0] if chosen else None
        return out


@dataclass(frozen=True)
class DegreeStats:
    delta_R: int
    delta_T: int


def check_feasible(g: TripartiteGraph, a: Assignment) -> None:
    """Raise unless both the per-robot packing and per-target responsibility
    constraints hold."""
    for p, v in a.x.items():
        if p not in g.robot_of:
            raise InfeasibleAssignmentError(f"x references unknown primitive {p}")
        if v < -FEAS_TOL or v > 1 + FEAS_TOL:
            raise InfeasibleAssignmentError(f"x[{p}] = {v} outside [0,1]")
    for r, prims in g.primitives_of.items():
        s = sum(a.x.get(p, 0.0) for p in prims)
        if s > 1 + FEAS_TOL:
            raise InfeasibleAssignmentError(f"robot {r} selects total {s} > 1")
    per_target: dict[int, int] = defaultdict(int)
    for (r, t), v in a.y.items():
        if v not in (0, 1):
            raise InfeasibleAssignmentError(f"y[{r},{t}] = {v} is not binary")
        per_target[t] += v
    for t, s in per_target.items():
        if s > 1:
            raise InfeasibleAssignmentError(f"target {t} assigned to {s} robots")


def build_graph(
    world: WorldState,
    primitives: Sequence[MotionPrimitive],
    scheme: str = "unit",
    dt: float = 0.0,
) -> TripartiteGraph:
    """Sensing edges between primitives and targets predicted ``dt`` ahead."""
    predicted = predict_targets(world.targets, dt)
    edges = []
    for p in primitives:
        for t in predicted:
            c = weight(p, t, world.sensing, scheme)
            if c > 0:
                edges.append(SensingEdge(p.id, t.id, c))
    return TripartiteGraph(
        robots=tuple(r.id for r in world.robots),
        primitives=tuple(PrimitiveNode(p.id, p.robot_id) for p in primitives),
        targets=tuple(t.id for t in world.targets),
        edges=tuple(edges),
    )


def _components(n_prims: int, n_targets: int, edges: Iterable[tuple[int, int]]) -> list[list[int]]:
    # node ids: robot r -> primitives 2r, 2r+1 (same component); target j -> n_prims + j
    parent = list(range(n_prims + n_targets))

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    def union(a, b):
        ra, rb = find(a), find(b)
        if ra != rb:
            parent[max(ra, rb)] = min(ra, rb)

    for p in range(0, n_prims, 2):
        union(p, p + 1)
    for p, t in edges:
        union(p, n_prims + t)
    groups: dict[int, list[int]] = defaultdict(list)
    for node in range(n_prims + n_targets):
        groups[find(node)].append(node)
    return sorted(groups.values(), key=lambda g: g[0])


def random_instance(
    n_robots: int,
    n_targets: int,
    target_degree: float,
    seed: int | np.random.SeedSequence,
) -> TripartiteGraph:
    """Random two-primitives-per-robot instance with unit weights.

    Every primitive gets one random target, every target one random primitive,
    disconnected pieces are joined to the piece holding primitive 0, and
    further random edges are added until the mean target degree is reached.
    """
    if n_robots < 1 or n_targets < 1:
        raise InvalidConfigError("need at least one robot and one target")
    if target_degree < 1:
        raise InvalidConfigError(f"target degree must be >= 1, got {target_degree}")
    n_prims = 2 * n_robots
    if target_degree > n_prims:
        raise InvalidConfigError(
            f"target degree {target_degree} exceeds the number of primitives {n_prims}"
        )
    rng = np.random.default_rng(seed)
    edges: set[tuple[int, int]] = set()
    order: list[tuple[int, int]] = []

    def add(p: int, t: int) -> None:
        edges.add((p, t))
        order.append((p, t))

    for p in range(n_prims):
        add(p, int(rng.integers(n_targets)))
    for t in range(n_targets):
        free = [p for p in range(n_prims) if (p, t) not in edges]
        if free:
            add(free[int(rng.integers(len(free)))], t)

    comps = _components(n_prims, n_targets, edges)
    main = next(c for c in comps if 0 in c)
    main_targets = [node - n_prims for node in main if node >= n_prims]
    for comp in comps:
        if comp is main:
            continue
        rep = min(node for node in comp if node < n_prims)
        add(rep, main_targets[int(rng.integers(len(main_targets)))])

    needed = math.ceil(target_degree * n_targets - 1e-9)
    while len(edges) < needed:
        p, t = int(rng.integers(n_prims)), int(rng.integers(n_targets))
        if (p, t) not in edges:
            add(p, t)

    return TripartiteGraph(
        robots=tuple(range(n_robots)),
        primitives=tuple(PrimitiveNode(p, p // 2) for p in range(n_prims)),
        targets=tuple(range(n_targets)),
        edges=tuple(SensingEdge(p, t, 1.0) for p, t in edges),
    )


def fig3_like() -> TripartiteGraph:
    """Three robots, six primitives, three unit-weight targets.

    Robot 0 sees only target 1, which robots 1 and 2 already cover, so its two
    primitives are interchangeable; robots 1 and 2 mirror each other.
    """
    return TripartiteGraph(
        robots=(0, 1, 2),
        primitives=tuple(PrimitiveNode(p, p // 2) for p in range(6)),
        targets=(0, 1, 2),
        edges=(
            SensingEdge(0, 1), SensingEdge(1, 1),
            SensingEdge(2, 0), SensingEdge(2, 1), SensingEdge(3, 1),
            SensingEdge(4, 1), SensingEdge(5, 1), SensingEdge(5, 2),
        ),
    )


def degrees(g: TripartiteGraph) -> DegreeStats:
    delta_r = max((len(ps) for ps in g.primitives_of.values()), default=0)
    delta_t = max((len(es) for es in g.edges_of_target.values()), default=0)
    return DegreeStats(delta_r, delta_t)


def target_coverage(g: TripartiteGraph, x: Mapping[int, float]) -> dict[int, float]:
    cov = {t: 0.0 for t in g.targets}
    for e in g.edges:
        v = x.get(e.primitive, 0.0)
        if v:
            cov[e.target] += e.weight * v
    return cov


def objective_bottleneck(g: TripartiteGraph, x: Mapping[int, float]) -> float:
    """Worst per-target coverage ``min_j sum c x``."""
    if not g.targets:
        raise EmptyObjectiveError("bottleneck objective is undefined without targets")
    return min(target_coverage(g, x).values())


def robot_target_quality(g: TripartiteGraph, x: Mapping[int, float]) -> dict[tuple[int, int], float]:
    """``sum_m c x`` for every (robot, target) pair that has an edge."""
    q: dict[tuple[int, int], float] = defaultdict(float)
    for e in g.edges:
        v = x.get(e.primitive, 0.0)
        if v:
            q[(g.robot_of[e.primitive], e.target)] += e.weight * v
    return dict(q)


def objective_wta(g: TripartiteGraph, x: Mapping[int, float], y: Mapping[tuple[int, int], int]) -> float:
    q = robot_target_quality(g, x)
    return sum(q.get(rt, 0.0) * v for rt, v in sorted(y.items()))


def coverage_count(g: TripartiteGraph, x: Mapping[int, float]) -> int:
    covered = {e.target for e in g.edges if e.weight > 0 and x.get(e.primitive, 0.0) >= 0.5}
    return len(covered)


def best_responsibility(g: TripartiteGraph, x: Mapping[int, float]) -> dict[tuple[int, int], int]:
    """Give each target to the robot with the highest positive quality on it
    (lowest robot id on ties)."""
    q = robot_target_quality(g, x)
    best: dict[int, tuple[float, int]] = {}
    for (r, t), v in sorted(q.items()):
        if v > 0 and (t not in best or v > best[t][0]):
            best[t] = (v, r)
    return {(r, t): 1 for t, (_, r) in best.items()}


def robot_adjacency(
    g: TripartiteGraph,
    extra: Mapping[int, Iterable[int]] | None = None,
) -> dict[int, frozenset[int]]:
    """Robots are adjacent when their primitives share a target, plus any
    ``extra`` (e.g. geometric communication) links."""
    adj: dict[int, set[int]] = {r: set() for r in g.robots}
    for obs in g.observers.values():
        for a in obs:
            adj[a].update(obs)
    if extra:
        for a, nbrs in extra.items():
            if a not in adj:
                continue
            for b in nbrs:
                if b in adj and b != a:
                    adj[a].add(b)
                    adj[b].add(a)
    for a in adj:
        adj[a].discard(a)
    return {a: frozenset(v) for a, v in adj.items()}


def components(
    g: TripartiteGraph,
    extra: Mapping[int, Iterable[int]] | None = None,
) -> list[tuple[int, ...]]:
    """Connected robot groups of the communication graph, sorted by min id."""
    adj = robot_adjacency(g, extra)
    seen: set[int] = set()
    out = []
    for r in g.robots:
        if r in seen:
            continue
        stack, comp = [r], []
        seen.add(r)
        while stack:
            a = stack.pop()
            comp.append(a)
            for b in adj[a]:
                if b not in seen:
                    seen.add(b)
                    stack.append(b)
        out.append(tuple(sorted(comp)))
    return out


def subgraph(g: TripartiteGraph, robots: Iterable[int]) -> TripartiteGraph:
    """Induced graph on ``robots``, their primitives, and the targets they see."""
    keep = set(robots)
    prims = tuple(p for p in g.primitives if p.robot in keep)
    pids = {p.id for p in prims}
    edges = tuple(e for e in g.edges if e.primitive in pids)
    return TripartiteGraph(
        robots=tuple(r for r in g.robots if r in keep),
        primitives=prims,
        targets=tuple(sorted({e.target for e in edges})),
        edges=edges,
    )


def serialize(g: TripartiteGraph) -> str:
    doc = {
        "robots": [{"id": r} for r in g.robots],
        "primitives": [{"id": p.id, "robot": p.robot} for p in g.primitives],
        "targets": [{"id": t} for t in g.targets],
        "edges": [{"primitive": e.primitive, "target": e.target, "weight": float(e.weight)} for e in g.edges],
    }
    return json.dumps(doc, indent=1) + "\n"


def _int_field(rec, key: str, where: str) -> int:
    if not isinstance(rec, dict) or key not in rec:
        raise InstanceParseError(f"missing field {key!r}", where)
    v = rec[key]
    if isinstance(v, bool) or not isinstance(v, int) or v < 0:
        raise InstanceParseError(f"{key!r} must be a non-negative integer, got {v!r}", where)
    return v


def parse(text: str, source: str | None = None) -> TripartiteGraph:
    prefix = f"{source}:" if source else ""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InstanceParseError(exc.msg, f"{prefix}line {exc.lineno} col {exc.colno}") from None
    if not isinstance(doc, dict):
        raise InstanceParseError("top level must be an object", source)
    for key in ("robots", "primitives", "targets", "edges"):
        if not isinstance(doc.get(key, []), list):
            raise InstanceParseError(f"{key!r} must be a list", source)

    robots, targets = [], []
    for i, rec in enumerate(doc.get("robots", [])):
        robots.append(_int_field(rec, "id", f"{prefix}robots[{i}]"))
    for i, rec in enumerate(doc.get("targets", [])):
        targets.append(_int_field(rec, "id", f"{prefix}targets[{i}]"))
    for kind, ids in (("robot", robots), ("target", targets)):
        if len(set(ids)) != len(ids):
            raise InstanceParseError(f"duplicate {kind} id", source)

    robot_set, target_set = set(robots), set(targets)
    prims, prim_ids = [], set()
    for i, rec in enumerate(doc.get("primitives", [])):
        where = f"{prefix}primitives[{i}]"
        pid = _int_field(rec, "id", where)
        rid = _int_field(rec, "robot", where)
        if pid in prim_ids:
            raise InstanceParseError(f"duplicate primitive id {pid}", where)
        if rid not in robot_set:
            raise InstanceParseError(f"unknown robot id {rid}", where)
        prim_ids.add(pid)
        prims.append(PrimitiveNode(pid, rid))

    edges, pairs = [], set()
    for i, rec in enumerate(doc.get("edges", [])):
        where = f"{prefix}edges[{i}]"
        pid = _int_field(rec, "primitive", where)
        tid = _int_field(rec, "target", where)
        if pid not in prim_ids:
            raise InstanceParseError(f"unknown primitive id {pid}", where)
        if tid not in target_set:
            raise InstanceParseError(f"unknown target id {tid}", where)
        w = rec.get("weight", 1.0)
        if isinstance(w, bool) or not isinstance(w, (int, float)) or not math.isfinite(w) or w < 0:
            raise InstanceParseError(f"weight must be a finite non-negative number, got {w!r}", where)
        if (pid, tid) in pairs:
            raise InstanceParseError(f"duplicate edge ({pid},{tid})", where)
        pairs.add((pid, tid))
        edges.append(SensingEdge(pid, tid, float(w)))

    return TripartiteGraph(tuple(robots), tuple(prims), tuple(targets), tuple(edges))
