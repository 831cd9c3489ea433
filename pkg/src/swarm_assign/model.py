"""Geometric world model: robots, targets, motion primitives, sensing and
communication predicates, and sensing-edge weights."""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Iterable, Sequence

import numpy as np

from .errors import InvalidConfigError

Point = tuple[float, float]

WEIGHT_SCHEMES = ("unit", "inverse-distance")


@dataclass(frozen=True)
class RobotState:
    id: int
    position: Point
    heading: float = 0.0


@dataclass(frozen=True)
class TargetState:
    id: int
    position: Point
    velocity: Point = (0.0, 0.0)


@dataclass(frozen=True)
class MotionPrimitive:
    id: int
    robot_id: int
    endpoint: Point
    heading: float = 0.0


@dataclass(frozen=True)
class SensingModel:
    rs: float

    def __post_init__(self):
        if not self.rs > 0:
            raise InvalidConfigError(f"sensing radius must be positive, got {self.rs}")


@dataclass(frozen=True)
class CommModel:
    rc: float


@dataclass(frozen=True)
class PrimitiveConfig:
    """How candidate endpoints are sampled around a robot each step."""

    count: int = 2
    max_step: float = 1.0
    cone_half_angle: float = math.radians(30.0)

    def __post_init__(self):
        if self.count < 1:
            raise InvalidConfigError(f"primitive count must be >= 1, got {self.count}")
        if self.max_step < 0:
            raise InvalidConfigError(f"max_step must be >= 0, got {self.max_step}")
        if self.cone_half_angle < 0:
            raise InvalidConfigError("cone_half_angle must be >= 0")


@dataclass(frozen=True)
class WorldState:
    robots: tuple[RobotState, ...]
    targets: tuple[TargetState, ...]
    sensing: SensingModel
    comm: CommModel
    time_index: int = 0

    def __post_init__(self):
        object.__setattr__(self, "robots", tuple(self.robots))
        object.__setattr__(self, "targets", tuple(self.targets))
        if not self.comm.rc > 2 * self.sensing.rs:
            raise InvalidConfigError(
                f"communication radius {self.comm.rc} must exceed twice the "
                f"sensing radius {self.sensing.rs}"
            )
        if self.time_index < 0:
            raise InvalidConfigError("time_index must be >= 0")
        _check_contiguous([r.id for r in self.robots], "robot")
        _check_contiguous([t.id for t in self.targets], "target")

    def add_robot(self, position: Point, heading: float = 0.0) -> WorldState:
        robot = RobotState(len(self.robots), tuple(position), heading)
        return replace(self, robots=self.robots + (robot,))

    def add_target(self, position: Point, velocity: Point = (0.0, 0.0)) -> WorldState:
        target = TargetState(len(self.targets), tuple(position), tuple(velocity))
        return replace(self, targets=self.targets + (target,))


def _check_contiguous(ids: Sequence[int], kind: str) -> None:
    if sorted(ids) != list(range(len(ids))):
        raise InvalidConfigError(f"{kind} ids must be unique and contiguous from 0: {list(ids)}")


def distance(a: Point, b: Point) -> float:
    return math.hypot(a[0] - b[0], a[1] - b[1])


def generate_primitives(
    robot: RobotState,
    cfg: PrimitiveConfig,
    seed: int | np.random.SeedSequence | np.random.Generator,
    first_id: int = 0,
) -> list[MotionPrimitive]:
    """Stay-in-place primitive followed by ``cfg.count - 1`` sampled endpoints.

    Each sampled endpoint lies at a uniform distance in ``[0, max_step]`` and a
    uniform relative heading in ``[-cone, +cone]`` from the robot's heading.
    """
    if cfg.count < 1:
        raise InvalidConfigError(f"primitive count must be >= 1, got {cfg.count}")
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    prims = [MotionPrimitive(first_id, robot.id, tuple(robot.position), robot.heading)]
    for k in range(1, cfg.count):
        dist = float(rng.uniform(0.0, cfg.max_step))
        rel = float(rng.uniform(-cfg.cone_half_angle, cfg.cone_half_angle))
        heading = robot.heading + rel
        end = (
            robot.position[0] + dist * math.cos(heading),
            robot.position[1] + dist * math.sin(heading),
        )
        prims.append(MotionPrimitive(first_id + k, robot.id, end, heading))
    return prims


def observable(p: MotionPrimitive, t: TargetState, s: SensingModel) -> bool:
    # closed ball: boundary counts as in range
    return distance(p.endpoint, t.position) <= s.rs


def predict_targets(targets: Iterable[TargetState], dt: float) -> list[TargetState]:
    if dt < 0:
        raise InvalidConfigError(f"dt must be >= 0, got {dt}")
    return [
        replace(
            t,
            position=(t.position[0] + t.velocity[0] * dt, t.position[1] + t.velocity[1] * dt),
        )
        for t in targets
    ]


def comm_neighbors(world: WorldState) -> dict[int, frozenset[int]]:
    """Symmetric, irreflexive adjacency of robots within ``rc`` of each other."""
    robots = world.robots
    adj: dict[int, set[int]] = {r.id: set() for r in robots}
    for i, a in enumerate(robots):
        for b in robots[i + 1:]:
            if distance(a.position, b.position) <= world.comm.rc:
                adj[a.id].add(b.id)
                adj[b.id].add(a.id)
    return {k: frozenset(v) for k, v in adj.items()}


def weight(p: MotionPrimitive, t: TargetState, s: SensingModel, scheme: str = "unit") -> float:
    """Tracking quality of ``t`` from ``p``; higher is better, zero when unobservable."""
    if scheme not in WEIGHT_SCHEMES:
        raise InvalidConfigError(f"unknown weight scheme {scheme!r}")
    d = distance(p.endpoint, t.position)
    if d > s.rs:
        return 0.0
    if scheme == "unit":
        return 1.0
    return max(0.0, 1.0 - d / s.rs)
