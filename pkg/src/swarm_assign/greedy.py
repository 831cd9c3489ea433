"""Sequential greedy assignment for the winner-takes-all objective."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence

from .errors import InvalidConfigError
from .graph import Assignment, TripartiteGraph, best_responsibility


@dataclass
class QualityState:
    w_t: dict[int, float]
    order: tuple[int, ...]


def check_order(g: TripartiteGraph, order: Sequence[int]) -> tuple[int, ...]:
    order = tuple(order)
    if sorted(order) != list(g.robots):
        raise InvalidConfigError(f"order {list(order)} is not a permutation of robots {list(g.robots)}")
    return order


def best_primitive(g: TripartiteGraph, robot: int, w_t: Mapping[int, float]) -> int:
    """Primitive maximizing ``sum_j max(w(t_j), c_j)``; lowest id on ties."""
    best, best_val = None, None
    for p in g.primitives_of[robot]:
        # sum_j max(w, c) minus the constant sum_j w; compared as gains so
        # float rounding of the constant cannot fake a tie
        val = sum(max(w_t.get(t, 0.0), c) - w_t.get(t, 0.0) for t, c in g.edges_of_primitive[p])
        if best_val is None or val > best_val:
            best, best_val = p, val
    return best


def greedy_assign(
    g: TripartiteGraph,
    order: Sequence[int] | None = None,
) -> tuple[Assignment, QualityState, int]:
    """Robots pick in ``order`` (ascending id by default); returns the
    assignment, the final per-target quality and the number of rounds."""
    order = check_order(g, g.robots if order is None else order)
    w_t = {t: 0.0 for t in g.targets}
    x: dict[int, float] = {p.id: 0.0 for p in g.primitives}
    for r in order:
        if not g.primitives_of[r]:
            continue
        p = best_primitive(g, r, w_t)
        x[p] = 1.0
        for t, c in g.edges_of_primitive[p]:
            w_t[t] = max(w_t[t], c)
    return Assignment(x, best_responsibility(g, x)), QualityState(w_t, order), len(order)


def tracking_quality(g: TripartiteGraph, x: Mapping[int, float]) -> float:
    """``sum_j max{c_j | selected primitive sees t_j}``."""
    best: dict[int, float] = {}
    for e in g.edges:
        if x.get(e.primitive, 0.0) >= 0.5:
            best[e.target] = max(best.get(e.target, 0.0), e.weight)
    return sum(best[t] for t in sorted(best))
