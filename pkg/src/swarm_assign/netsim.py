"""Synchronous message-passing engine over the robot communication graph.

Every round has a send phase and a receive phase. Messages sent in round r
are visible to their recipients in the receive phase of round r, so a node's
state after round r reflects everything its neighbours sent up to round r.
A node that halts in round r has used r rounds; one that halts during
``init`` has used none.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Any, Iterable, Mapping

from .errors import DivergenceError, ProtocolViolationError
from .graph import Assignment, TripartiteGraph, best_responsibility, objective_bottleneck, robot_adjacency
from .greedy import QualityState, check_order
from .local import FractionalSolution, LocalConfig, robot_record, solve_view


@dataclass(frozen=True)
class Message:
    src: int
    dst: int
    round: int
    payload: Any


@dataclass
class ComponentLog:
    rounds: int = 0
    messages: int = 0
    bytes: int = 0


@dataclass
class RoundLog:
    rounds: int = 0
    messages: int = 0
    bytes: int = 0
    per_component: dict[int, ComponentLog] = field(default_factory=dict)


class Protocol:
    """Per-node behaviour; subclasses override the three hooks."""

    round_bound: int = 1000

    def init(self, node: int, inp: Any, neighbors: frozenset[int]) -> tuple[Any, bool]:
        """Initial state and whether the node halts before round 1."""
        return inp, False

    def send(self, node: int, state: Any, rnd: int) -> dict[int, Any]:
        return {}

    def receive(self, node: int, state: Any, inbox: list[Message], rnd: int) -> tuple[Any, bool]:
        return state, True

    def output(self, node: int, state: Any) -> Any:
        return state


def payload_size(payload: Any) -> int:
    return len(json.dumps(payload, separators=(",", ":"), default=str).encode())


def _components(adj: Mapping[int, Iterable[int]]) -> dict[int, int]:
    label: dict[int, int] = {}
    for s in sorted(adj):
        if s in label:
            continue
        label[s] = s
        stack = [s]
        while stack:
            a = stack.pop()
            for b in adj[a]:
                if b not in label:
                    label[b] = s
                    stack.append(b)
    return label


def run_protocol(
    adjacency: Mapping[int, Iterable[int]],
    node_inputs: Mapping[int, Any],
    protocol: Protocol,
) -> tuple[dict[int, Any], RoundLog]:
    """Execute ``protocol`` in lock step until every node halts."""
    adj = {a: frozenset(b) for a, b in adjacency.items()}
    nodes = sorted(adj)
    comp = _components(adj)
    log = RoundLog(per_component={c: ComponentLog() for c in sorted(set(comp.values()))})

    states: dict[int, Any] = {}
    active: set[int] = set()
    for a in nodes:
        states[a], halted = protocol.init(a, node_inputs.get(a), adj[a])
        if not halted:
            active.add(a)

    rnd = 0
    while active:
        rnd += 1
        if rnd > protocol.round_bound:
            raise DivergenceError(f"protocol exceeded its round bound {protocol.round_bound}")
        inboxes: dict[int, list[Message]] = {a: [] for a in active}
        for a in sorted(active):
            for dst, payload in sorted(protocol.send(a, states[a], rnd).items()):
                if dst not in adj[a]:
                    raise ProtocolViolationError(f"node {a} sent to non-neighbour {dst} in round {rnd}")
                size = payload_size(payload)
                log.messages += 1
                log.bytes += size
                c = log.per_component[comp[a]]
                c.messages += 1
                c.bytes += size
                if dst in inboxes:
                    inboxes[dst].append(Message(a, dst, rnd, payload))
        halting = []
        for a in sorted(active):
            states[a], halted = protocol.receive(a, states[a], inboxes[a], rnd)
            if halted:
                halting.append(a)
        for a in halting:
            active.discard(a)
            log.rounds = max(log.rounds, rnd)
            c = log.per_component[comp[a]]
            c.rounds = max(c.rounds, rnd)

    return {a: protocol.output(a, states[a]) for a in nodes}, log


@dataclass
class BallView:
    """What a node knows after k rounds of flooding."""

    dist: dict[int, int]
    inputs: dict[int, Any]
    edges: frozenset[tuple[int, int]]


class GatherProtocol(Protocol):
    """Flood (input, neighbour list) records for ``k`` rounds; each round
    forwards only the records learned in the previous one."""

    def __init__(self, k: int):
        self.k = k
        self.round_bound = max(k, 0)

    def init(self, node, inp, neighbors):
        state = {
            "known": {node: (0, inp, tuple(sorted(neighbors)))},
            "fresh": [node],
        }
        return state, self.k == 0

    def send(self, node, state, rnd):
        batch = [(q, state["known"][q][1], state["known"][q][2]) for q in state["fresh"]]
        return {b: batch for b in state["known"][node][2]}

    def receive(self, node, state, inbox, rnd):
        fresh = []
        for msg in inbox:
            for q, inp, nbrs in msg.payload:
                if q not in state["known"]:
                    state["known"][q] = (rnd, inp, tuple(nbrs))
                    fresh.append(q)
        state["fresh"] = sorted(fresh)
        return state, rnd >= self.k

    def output(self, node, state):
        known = state["known"]
        edges = frozenset(
            (min(a, b), max(a, b)) for a, (_, _, nbrs) in known.items() for b in nbrs if b in known
        )
        return BallView({q: d for q, (d, _, _) in known.items()}, {q: i for q, (_, i, _) in known.items()}, edges)


def gather_ball(adjacency: Mapping[int, Iterable[int]], node_inputs: Mapping[int, Any], k: int) -> tuple[dict[int, BallView], RoundLog]:
    if k < 0:
        raise ValueError("radius must be >= 0")
    return run_protocol(adjacency, node_inputs, GatherProtocol(k))


class LocalProtocol(GatherProtocol):
    """Gather the radius-(h+1) ball, exchange target claims for one round,
    then solve locally. Halts in round h+2."""

    def __init__(self, cfg: LocalConfig):
        super().__init__(cfg.h + 1)
        self.cfg = cfg
        self.round_bound = cfg.rounds
        self.cache: dict = {}

    def init(self, node, inp, neighbors):
        state, _ = super().init(node, inp, neighbors)
        return state, False

    def send(self, node, state, rnd):
        if rnd <= self.k:
            return super().send(node, state, rnd)
        seen = sorted({t for _, es in state["known"][node][1] for t, _ in es})
        return {b: seen for b in state["known"][node][2]}

    def receive(self, node, state, inbox, rnd):
        if rnd <= self.k:
            state, _ = super().receive(node, state, inbox, rnd)
            return state, False
        own_targets = {t for _, es in state["known"][node][1] for t, _ in es}
        claimed = {t for msg in inbox if msg.src < node for t in msg.payload}
        state["owned"] = sorted(own_targets - claimed)
        view = {q: (d, inp) for q, (d, inp, _) in state["known"].items()}
        state["x"] = solve_view(node, view, self.cfg, self.cache)
        return state, True

    def output(self, node, state):
        return {"x": state["x"], "owned": state["owned"]}


def run_local_protocol(
    g: TripartiteGraph,
    cfg: LocalConfig = LocalConfig(),
    extra_adjacency: Mapping[int, Iterable[int]] | None = None,
) -> tuple[FractionalSolution, dict[int, int], RoundLog]:
    """Local algorithm as message passing; returns the fractional solution,
    target owners and the round log."""
    adj = robot_adjacency(g, extra_adjacency)
    inputs = {r: robot_record(g, r) for r in g.robots}
    outputs, log = run_protocol(adj, inputs, LocalProtocol(cfg))
    x: dict[int, float] = {}
    owners: dict[int, int] = {}
    for r in g.robots:
        x.update(outputs[r]["x"])
        owners.update({t: r for t in outputs[r]["owned"]})
    w = objective_bottleneck(g, x) if g.targets else 0.0
    return FractionalSolution(x, w, log.rounds), owners, log


class GreedyProtocol(Protocol):
    """The robot at position i of the order picks in round i+1 and tells its
    neighbours the qualities it now provides."""

    def __init__(self, order: tuple[int, ...]):
        self.position = {r: i for i, r in enumerate(order)}
        self.round_bound = len(order)

    def init(self, node, inp, neighbors):
        return {"record": inp, "nbrs": tuple(sorted(neighbors)), "w": {}, "choice": None}, False

    def send(self, node, state, rnd):
        if self.position[node] + 1 != rnd or not state["record"]:
            return {}
        best, best_gain = None, None
        for p, es in state["record"]:
            gain = sum(max(state["w"].get(t, 0.0), c) - state["w"].get(t, 0.0) for t, c in es)
            if best_gain is None or gain > best_gain:
                best, best_gain = p, gain
        state["choice"] = best
        update = [(t, c) for p, es in state["record"] if p == best for t, c in es]
        for t, c in update:
            state["w"][t] = max(state["w"].get(t, 0.0), c)
        return {b: update for b in state["nbrs"]}

    def receive(self, node, state, inbox, rnd):
        for msg in inbox:
            for t, c in msg.payload:
                state["w"][t] = max(state["w"].get(t, 0.0), c)
        return state, rnd == self.position[node] + 1

    def output(self, node, state):
        return state["choice"]


def run_greedy_protocol(
    g: TripartiteGraph,
    order=None,
    extra_adjacency: Mapping[int, Iterable[int]] | None = None,
) -> tuple[Assignment, QualityState, RoundLog]:
    order = check_order(g, g.robots if order is None else order)
    adj = robot_adjacency(g, extra_adjacency)
    inputs = {r: robot_record(g, r) for r in g.robots}
    outputs, log = run_protocol(adj, inputs, GreedyProtocol(order))
    x = {p.id: 0.0 for p in g.primitives}
    for r in g.robots:
        if outputs[r] is not None:
            x[outputs[r]] = 1.0
    w_t = {t: 0.0 for t in g.targets}
    for e in g.edges:
        if x[e.primitive] == 1.0:
            w_t[e.target] = max(w_t[e.target], e.weight)
    return Assignment(x, best_responsibility(g, x)), QualityState(w_t, order), log
