"""Multi-step 2D tracking simulation: robots re-plan every step by building
the assignment graph over their motion primitives, running the configured
distributed algorithm and teleporting to the chosen endpoint."""

from __future__ import annotations

import csv
import math
from dataclasses import asdict, dataclass, field, replace
from typing import Any, Mapping, TextIO

from .errors import InvalidConfigError
from .graph import build_graph, coverage_count
from .local import LocalConfig, realize_targets, round_solution
from .model import (
    CommModel,
    PrimitiveConfig,
    RobotState,
    SensingModel,
    TargetState,
    WorldState,
    comm_neighbors,
    generate_primitives,
    WEIGHT_SCHEMES,
)
from .netsim import run_greedy_protocol, run_local_protocol
from .streams import stream

MOTION_MODELS = ("static", "random-walk", "waypoint")
ALGORITHMS = ("local", "greedy")
TRACE_HEADER = ["k", "id", "kind", "x", "y", "selected_primitive", "tracked_count", "rounds"]
METRICS_HEADER = ["k", "algorithm", "tracked_count", "rounds", "messages", "bytes"]


@dataclass(frozen=True)
class SimConfig:
    n_robots: int = 5
    n_targets: int = 30
    arena: tuple[float, float, float, float] = (0.0, 0.0, 15.0, 15.0)
    steps: int = 40
    dt: float = 1.0
    rs: float = 3.0
    rc: float = 10.0
    primitives: PrimitiveConfig = PrimitiveConfig()
    target_motion: str = "random-walk"
    target_speed: float = 0.5
    mobile_fraction: float = 0.5
    algorithm: str = "local"
    h: int = 2
    epsilon: float = 0.1
    order: tuple[int, ...] | None = None
    order_seed: int | None = None
    weight_scheme: str = "unit"
    seed: int = 0

    def __post_init__(self):
        errors = self.problems()
        if errors:
            raise InvalidConfigError("; ".join(errors))

    def problems(self) -> list[str]:
        errs = []
        if self.n_robots < 1:
            errs.append("n_robots: must be >= 1")
        if self.n_targets < 0:
            errs.append("n_targets: must be >= 0")
        x0, y0, x1, y1 = self.arena
        if not (x1 > x0 and y1 > y0):
            errs.append("arena: must be (xmin, ymin, xmax, ymax) with positive extent")
        if self.steps < 1:
            errs.append("steps: must be >= 1")
        if not self.dt > 0:
            errs.append("dt: must be > 0")
        if not self.rs > 0:
            errs.append("rs: must be > 0")
        if not self.rc > 2 * self.rs:
            errs.append("rc: must exceed 2*rs")
        if self.target_motion not in MOTION_MODELS:
            errs.append(f"target_motion: must be one of {MOTION_MODELS}")
        if self.target_speed < 0:
            errs.append("target_speed: must be >= 0")
        if not 0 <= self.mobile_fraction <= 1:
            errs.append("mobile_fraction: must be in [0, 1]")
        if self.algorithm not in ALGORITHMS:
            errs.append(f"algorithm: must be one of {ALGORITHMS}")
        if self.h < 0:
            errs.append("h: must be >= 0")
        if not self.epsilon > 0:
            errs.append("epsilon: must be > 0")
        if self.order is not None and sorted(self.order) != list(range(self.n_robots)):
            errs.append("order: must be a permutation of robot ids")
        if self.weight_scheme not in WEIGHT_SCHEMES:
            errs.append(f"weight_scheme: must be one of {WEIGHT_SCHEMES}")
        return errs

    @classmethod
    def from_dict(cls, d: Mapping[str, Any]) -> SimConfig:
        """Build from parsed JSON, reporting every offending field at once."""
        known = {f for f in cls.__dataclass_fields__}
        errs = [f"{k}: unknown field" for k in d if k not in known]
        kwargs: dict[str, Any] = {}
        for k, v in d.items():
            if k not in known:
                continue
            if k == "primitives":
                try:
                    pc = dict(v)
                    if "cone_half_angle_deg" in pc:
                        pc["cone_half_angle"] = math.radians(pc.pop("cone_half_angle_deg"))
                    kwargs[k] = PrimitiveConfig(**pc)
                except (TypeError, ValueError) as exc:
                    errs.append(f"primitives: {exc}")
            elif k in ("arena", "order") and v is not None:
                kwargs[k] = tuple(v)
            else:
                kwargs[k] = v
        try:
            cfg = cls(**kwargs)
        except InvalidConfigError as exc:
            errs.append(str(exc))
        except TypeError as exc:
            errs.append(f"wrong value type: {exc}")
        if errs:
            raise InvalidConfigError("; ".join(errs))
        return cfg

    def to_dict(self) -> dict[str, Any]:
        d = asdict(self)
        d["arena"] = list(self.arena)
        d["order"] = list(self.order) if self.order is not None else None
        return d


@dataclass(frozen=True)
class SimWorld:
    """World state plus per-target motion bookkeeping."""

    world: WorldState
    mobile: frozenset[int] = frozenset()
    goals: Mapping[int, tuple[float, float]] = field(default_factory=dict)


@dataclass
class StepRecord:
    k: int
    robots: tuple[RobotState, ...]
    targets: tuple[TargetState, ...]
    selected: dict[int, int]
    tracked_count: int
    rounds: int
    messages: int = 0
    bytes: int = 0
    owners: dict[int, int] = field(default_factory=dict)


def _reflect(v: float, lo: float, hi: float) -> float:
    span = hi - lo
    u = (v - lo) % (2 * span)
    return lo + (u if u <= span else 2 * span - u)


def _next_velocity(cfg: SimConfig, sw: SimWorld, t: TargetState, k: int) -> tuple[tuple[float, float], tuple | None]:
    """Velocity a target will use during step ``k``; it already includes any
    wall bounce so constant-velocity prediction is exact."""
    if t.id not in sw.mobile or cfg.target_motion == "static":
        return (0.0, 0.0), None
    x0, y0, x1, y1 = cfg.arena
    goal = None
    if cfg.target_motion == "random-walk":
        rng = stream(cfg.seed, "target-motion", k, t.id)
        heading = rng.uniform(-math.pi, math.pi)
        speed = rng.uniform(0.0, cfg.target_speed)
        nx = t.position[0] + speed * math.cos(heading) * cfg.dt
        ny = t.position[1] + speed * math.sin(heading) * cfg.dt
    else:
        goal = sw.goals.get(t.id)
        if goal is None or math.dist(goal, t.position) < 1e-9:
            rng = stream(cfg.seed, "target-motion", k, t.id)
            goal = (float(rng.uniform(x0, x1)), float(rng.uniform(y0, y1)))
        d = math.dist(goal, t.position)
        step = min(cfg.target_speed * cfg.dt, d)
        nx = t.position[0] + (goal[0] - t.position[0]) * (step / d if d else 0.0)
        ny = t.position[1] + (goal[1] - t.position[1]) * (step / d if d else 0.0)
        if step == d:
            nx, ny = goal
    nx, ny = _reflect(nx, x0, x1), _reflect(ny, y0, y1)
    return ((nx - t.position[0]) / cfg.dt, (ny - t.position[1]) / cfg.dt), goal


def _with_velocities(cfg: SimConfig, sw: SimWorld, k: int) -> SimWorld:
    targets, goals = [], dict(sw.goals)
    for t in sw.world.targets:
        v, goal = _next_velocity(cfg, sw, t, k)
        targets.append(replace(t, velocity=v))
        if goal is not None:
            goals[t.id] = goal
    return SimWorld(replace(sw.world, targets=tuple(targets)), sw.mobile, goals)


def initial_world(cfg: SimConfig) -> SimWorld:
    rng = stream(cfg.seed, "layout")
    x0, y0, x1, y1 = cfg.arena
    targets = tuple(
        TargetState(j, (float(rng.uniform(x0, x1)), float(rng.uniform(y0, y1))))
        for j in range(cfg.n_targets)
    )
    mobile = frozenset(j for j in range(cfg.n_targets) if rng.random() < cfg.mobile_fraction)
    robots = tuple(
        RobotState(i, (float(rng.uniform(x0, x1)), float(rng.uniform(y0, y1))), float(rng.uniform(-math.pi, math.pi)))
        for i in range(cfg.n_robots)
    )
    world = WorldState(robots, targets, SensingModel(cfg.rs), CommModel(cfg.rc), 0)
    return _with_velocities(cfg, SimWorld(world, mobile, {}), 0)


def _order(cfg: SimConfig, robots, k: int):
    if cfg.order is not None and len(cfg.order) == len(robots):
        return cfg.order
    ids = [r.id for r in robots]
    if cfg.order_seed is not None:
        return tuple(int(i) for i in stream(cfg.order_seed, "ordering", k).permutation(ids))
    return tuple(ids)


def step(sw: SimWorld, cfg: SimConfig) -> tuple[SimWorld, StepRecord]:
    world = sw.world
    k = world.time_index
    prims, next_id = [], 0
    for r in world.robots:
        ps = generate_primitives(r, cfg.primitives, stream(cfg.seed, "primitives", k, r.id), first_id=next_id)
        prims.extend(ps)
        next_id += len(ps)
    g = build_graph(world, prims, cfg.weight_scheme, cfg.dt)
    owners = realize_targets(world, prims, cfg.dt)
    comm = comm_neighbors(world)
    if cfg.algorithm == "local":
        frac, _, log = run_local_protocol(g, LocalConfig(cfg.h, cfg.epsilon), comm)
        x = round_solution(g, frac).x
    else:
        a, _, log = run_greedy_protocol(g, _order(cfg, world.robots, k), comm)
        x = a.x

    by_id = {p.id: p for p in prims}
    selected = {r.id: next(p for p in g.primitives_of[r.id] if x[p] == 1.0) for r in world.robots}
    robots = tuple(
        replace(r, position=by_id[selected[r.id]].endpoint, heading=by_id[selected[r.id]].heading)
        for r in world.robots
    )
    targets = tuple(
        replace(t, position=(t.position[0] + t.velocity[0] * cfg.dt, t.position[1] + t.velocity[1] * cfg.dt))
        for t in world.targets
    )
    record = StepRecord(k, robots, targets, selected, coverage_count(g, x), log.rounds, log.messages, log.bytes, owners)
    moved = SimWorld(replace(world, robots=robots, targets=targets, time_index=k + 1), sw.mobile, sw.goals)
    return _with_velocities(cfg, moved, k + 1), record


def run(cfg: SimConfig) -> list[StepRecord]:
    sw = initial_world(cfg)
    records = []
    for _ in range(cfg.steps):
        sw, rec = step(sw, cfg)
        records.append(rec)
    return records


def _fmt(v: float) -> str:
    return format(v, ".9g")


def write_trace(records: list[StepRecord], out: TextIO) -> None:
    out.write("# swarm_assign trace v1\n")
    w = csv.writer(out, lineterminator="\n")
    w.writerow(TRACE_HEADER)
    for rec in records:
        for r in rec.robots:
            w.writerow([rec.k, r.id, "robot", _fmt(r.position[0]), _fmt(r.position[1]),
                        rec.selected[r.id], rec.tracked_count, rec.rounds])
        for t in rec.targets:
            w.writerow([rec.k, t.id, "target", _fmt(t.position[0]), _fmt(t.position[1]),
                        "", rec.tracked_count, rec.rounds])


def write_metrics(records: list[StepRecord], algorithm: str, out: TextIO) -> None:
    out.write("# swarm_assign sim-metrics v1\n")
    w = csv.writer(out, lineterminator="\n")
    w.writerow(METRICS_HEADER)
    for rec in records:
        w.writerow([rec.k, algorithm, rec.tracked_count, rec.rounds, rec.messages, rec.bytes])
