import itertools

import numpy as np
import pytest

from swarm_assign.graph import PrimitiveNode, SensingEdge, TripartiteGraph


def two_robot_example() -> TripartiteGraph:
    """Robot 0: p0 -> {t0, t1}, p1 -> {t0}; robot 1: p2 -> {t1}, p3 -> {t2}."""
    return TripartiteGraph(
        robots=(0, 1),
        primitives=(PrimitiveNode(0, 0), PrimitiveNode(1, 0), PrimitiveNode(2, 1), PrimitiveNode(3, 1)),
        targets=(0, 1, 2),
        edges=(SensingEdge(0, 0), SensingEdge(0, 1), SensingEdge(1, 0), SensingEdge(2, 1), SensingEdge(3, 2)),
    )


def general_instance(seed, n_robots=None, max_prims=3, n_targets=None, density=0.35, weighted=False):
    """Random instance with 1..max_prims primitives per robot and optional
    non-unit weights; used where the two-primitive generator is too narrow."""
    rng = np.random.default_rng(seed)
    R = int(rng.integers(1, 9)) if n_robots is None else n_robots
    T = int(rng.integers(1, 10)) if n_targets is None else n_targets
    prims, pid = [], 0
    for r in range(R):
        for _ in range(int(rng.integers(1, max_prims + 1))):
            prims.append(PrimitiveNode(pid, r))
            pid += 1
    edges = []
    for p in prims:
        for t in range(T):
            if rng.random() < density:
                w = float(rng.choice([0.25, 0.5, 1.0, 2.0])) if weighted else 1.0
                edges.append(SensingEdge(p.id, t, w))
    return TripartiteGraph(tuple(range(R)), tuple(prims), tuple(range(T)), tuple(edges))


def selections(g):
    """Every one-primitive-per-robot selection as an x dict."""
    robots = [r for r in g.robots if g.primitives_of[r]]
    for combo in itertools.product(*(g.primitives_of[r] for r in robots)):
        x = {p.id: 0.0 for p in g.primitives}
        for p in combo:
            x[p] = 1.0
        yield x


def naive_wta_value(g, x):
    """sum over targets of the best single robot's quality, by direct loops."""
    total = 0.0
    for t in g.targets:
        best = 0.0
        for r in g.robots:
            q = sum(c * x.get(p, 0.0) for p, c in g.edges_of_target[t] if g.robot_of[p] == r)
            best = max(best, q)
        total += best
    return total


def naive_bottleneck(g, x):
    return min(sum(c * x.get(p, 0.0) for p, c in g.edges_of_target[t]) for t in g.targets)


@pytest.fixture
def two_robot():
    return two_robot_example()


def chain_instance(seed, n_robots=10, prims=2, extra=0.3):
    """Robots on a line; robot r only sees targets r and r+1, so the
    communication graph is a path and balls stay small."""
    rng = np.random.default_rng(seed)
    prim_nodes, edges = [], set()
    for r in range(n_robots):
        for k in range(prims):
            pid = len(prim_nodes)
            prim_nodes.append(PrimitiveNode(pid, r))
            edges.add((pid, r + (k % 2)))
            for t in (r, r + 1):
                if rng.random() < extra:
                    edges.add((pid, t))
    return TripartiteGraph(
        tuple(range(n_robots)), tuple(prim_nodes), tuple(range(n_robots + 1)),
        tuple(SensingEdge(p, t) for p, t in sorted(edges)),
    )


def disjoint_union(*graphs):
    """Relabel ids so the pieces do not overlap and return one graph."""
    robots, prims, targets, edges = [], [], [], []
    ro = po = to = 0
    for g in graphs:
        robots += [r + ro for r in g.robots]
        prims += [PrimitiveNode(p.id + po, p.robot + ro) for p in g.primitives]
        targets += [t + to for t in g.targets]
        edges += [SensingEdge(e.primitive + po, e.target + to, e.weight) for e in g.edges]
        ro += len(g.robots)
        po += len(g.primitives)
        to += len(g.targets)
    return TripartiteGraph(tuple(robots), tuple(prims), tuple(targets), tuple(edges))


def monotone_corpus():
    """Fixed instance corpus for the horizon-monotonicity check."""
    from swarm_assign.graph import fig3_like, random_instance

    return (
        [fig3_like(), two_robot_example()]
        + [random_instance(5, 10, 2, s) for s in range(20)]
        + [random_instance(8, 12, 3, s) for s in range(20)]
    )


def far_surgery(g, probe, h, rng, n_ops=4):
    """Random edits touching only robots more than h+1 hops from ``probe``
    and targets seen by no robot within h+1 hops. Returns the edited graph,
    or None when nothing is far enough away."""
    from swarm_assign.graph import robot_adjacency
    from swarm_assign.local import hop_distances

    dist = hop_distances(robot_adjacency(g), probe, len(g.robots) + 1)
    far = sorted(r for r in g.robots if dist.get(r, 10**9) >= h + 2)
    if not far:
        return None
    safe = [t for t in g.targets if all(dist.get(r, 10**9) >= h + 2 for r in g.observers[t])]
    far_prims = [p for r in far for p in g.primitives_of[r]]
    robots, prims, targets = list(g.robots), list(g.primitives), list(g.targets)
    edges = {(e.primitive, e.target): e.weight for e in g.edges}
    for _ in range(n_ops):
        op = int(rng.integers(5))
        if op == 0 and safe:
            key = (far_prims[int(rng.integers(len(far_prims)))], safe[int(rng.integers(len(safe)))])
            edges[key] = float(rng.choice([0.5, 1.0, 2.0]))
        elif op == 1:
            cands = [k for k in edges if k[0] in far_prims and k[1] in safe]
            if cands:
                del edges[cands[int(rng.integers(len(cands)))]]
        elif op == 2:
            t = max(targets) + 1 if targets else 0
            targets.append(t)
            safe.append(t)
            edges[(far_prims[int(rng.integers(len(far_prims)))], t)] = 1.0
        elif op == 3:
            r = max(robots) + 1
            robots.append(r)
            pid = max(p.id for p in prims) + 1
            prims.append(PrimitiveNode(pid, r))
            if safe:
                edges[(pid, safe[int(rng.integers(len(safe)))])] = 1.0
        else:
            cands = [k for k in edges if k[0] in far_prims and k[1] in safe]
            if cands:
                k = cands[int(rng.integers(len(cands)))]
                edges[k] = float(rng.choice([0.25, 1.5]))
    return TripartiteGraph(
        tuple(robots), tuple(prims), tuple(targets),
        tuple(SensingEdge(p, t, w) for (p, t), w in sorted(edges.items())),
    )


ACCEPTANCE_LINES: list[str] = []


def record_criterion(number, title, passed, detail=""):
    line = f"[{'PASS' if passed else 'FAIL'}] criterion {number:>2}: {title}"
    if detail:
        line += f" -- {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split("criterion")[1].split(":")[0])):
            terminalreporter.write_line(line)
