"""Gridworld scenario compiler: terrain rasters to failure-prone instances.

A scenario is a rectangular raster of terrain characters plus a terrain table
giving, per terrain and actuator: availability, step reward, reliability and
the precision of the nominal and malfunction kernels. Each cell is a state;
each available actuator contributes four movement controls (up, down, left,
right). A control's intended neighbor receives the precision mass and the
remaining mass splits evenly over the other legal neighbors; moves whose
intended cell is off-grid or impassable are simply not admissible.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, replace
from importlib import resources
from pathlib import Path

import numpy as np

from .core import Famdp, FamdpError, GridMeta, TransitionKernel, ValueFunction

SCENARIO_SCHEMA = "famdp-scenario/1"

# dx, dy per direction; state index is y * width + x (row-major).
DIRECTIONS = ((0, -1), (0, 1), (-1, 0), (1, 0))
DIRECTION_NAMES = ("up", "down", "left", "right")


class GridSpecError(FamdpError):
    """Scenario is structurally unusable (bad raster, isolated cell, ...)."""


@dataclass(frozen=True)
class ActuatorTerrain:
    """How one actuator behaves on one terrain."""

    reward: float
    reliability: float
    precision: float
    malfunction_precision: float


@dataclass(frozen=True)
class Terrain:
    name: str
    actuators: dict[str, ActuatorTerrain]

    @property
    def passable(self) -> bool:
        return len(self.actuators) > 0


@dataclass(frozen=True)
class GridSpec:
    width: int
    height: int
    cells: tuple[str, ...]
    terrains: dict[str, Terrain]
    actuators: tuple[str, ...]
    goal: tuple[int, int]
    goal_reward: float
    discount: float
    start: tuple[int, int] | None = None
    name: str | None = None

    def terrain_at(self, x: int, y: int) -> Terrain:
        return self.terrains[self.cells[y * self.width + x]]

    def state_of(self, x: int, y: int) -> int:
        return y * self.width + x


def load_scenario(source: str | Path) -> GridSpec:
    """Load a scenario file; bare names resolve against the packaged set."""
    path = Path(source)
    if path.exists():
        data = json.loads(path.read_text())
    else:
        res = resources.files("famdp.scenarios").joinpath(f"{source}.json")
        if not res.is_file():
            raise FileNotFoundError(f"no scenario file or packaged scenario named {source!r}")
        data = json.loads(res.read_text())
    return scenario_from_dict(data)


def scenario_from_dict(data: dict) -> GridSpec:
    if data.get("schema") != SCENARIO_SCHEMA:
        raise GridSpecError(
            f"expected scenario schema {SCENARIO_SCHEMA!r}, found {data.get('schema')!r}")
    rows = data["rows"]
    width, height = int(data["width"]), int(data["height"])
    if len(rows) != height or any(len(r) != width for r in rows):
        raise GridSpecError("raster does not match declared width/height")
    actuators = tuple(data["actuators"])
    terrains: dict[str, Terrain] = {}
    for ch, td in data["terrains"].items():
        table = {}
        for act, row in td.get("actuators", {}).items():
            if act not in actuators:
                raise GridSpecError(f"terrain {ch!r} references unknown actuator {act!r}")
            table[act] = ActuatorTerrain(
                float(row["reward"]), float(row["reliability"]),
                float(row["precision"]), float(row["malfunction_precision"]))
        terrains[ch] = Terrain(td.get("name", ch), table)
    return GridSpec(
        width=width, height=height,
        cells=tuple("".join(rows)),
        terrains=terrains,
        actuators=actuators,
        goal=(int(data["goal"][0]), int(data["goal"][1])),
        goal_reward=float(data["goal_reward"]),
        discount=float(data["discount"]),
        start=tuple(data["start"]) if data.get("start") is not None else None,
        name=data.get("name"),
    )


def scenario_to_dict(spec: GridSpec) -> dict:
    rows = ["".join(spec.cells[y * spec.width:(y + 1) * spec.width]) for y in range(spec.height)]
    return {
        "schema": SCENARIO_SCHEMA,
        "name": spec.name,
        "width": spec.width,
        "height": spec.height,
        "rows": rows,
        "actuators": list(spec.actuators),
        "terrains": {
            ch: {
                "name": t.name,
                "actuators": {
                    act: {
                        "reward": at.reward,
                        "reliability": at.reliability,
                        "precision": at.precision,
                        "malfunction_precision": at.malfunction_precision,
                    } for act, at in t.actuators.items()
                },
            } for ch, t in sorted(spec.terrains.items())
        },
        "goal": list(spec.goal),
        "goal_reward": spec.goal_reward,
        "discount": spec.discount,
        "start": list(spec.start) if spec.start else None,
    }


def _validate_spec(spec: GridSpec) -> None:
    if spec.width < 1 or spec.height < 1:
        raise GridSpecError("grid dimensions must be positive")
    gx, gy = spec.goal
    if not (0 <= gx < spec.width and 0 <= gy < spec.height):
        raise GridSpecError(f"goal {spec.goal} outside the grid")
    for ch in spec.cells:
        if ch not in spec.terrains:
            raise GridSpecError(f"cell terrain {ch!r} missing from the terrain table")
    if not spec.terrain_at(gx, gy).passable:
        raise GridSpecError("goal cell must permit at least one actuator")
    if spec.goal_reward <= 0:
        raise GridSpecError("goal reward must be positive")


def _legal_neighbors(spec: GridSpec, x: int, y: int) -> list[tuple[int, int, int]]:
    """(direction, nx, ny) for in-grid passable neighbors."""
    out = []
    for d, (dx, dy) in enumerate(DIRECTIONS):
        nx, ny = x + dx, y + dy
        if 0 <= nx < spec.width and 0 <= ny < spec.height and spec.terrain_at(nx, ny).passable:
            out.append((d, nx, ny))
    return out


def _split_row(target: int, others: list[int], precision: float) -> dict[int, float]:
    if not others:
        return {target: 1.0}
    row = {s: (1.0 - precision) / len(others) for s in others}
    row[target] = row.get(target, 0.0) + precision
    return {s: p for s, p in row.items() if p > 0.0}


def build_gridworld(spec: GridSpec) -> Famdp:
    """Compile a scenario into a validated-shape instance.

    The goal state absorbs: every control self-loops with probability 1,
    full reliability and the goal reward. Rewards of non-admissible pairs are
    filled with the instance's worst admissible reward so that "stranded"
    values never exceed anything achievable; their reliabilities are 0.
    """
    _validate_spec(spec)
    num_states = spec.width * spec.height
    m = len(spec.actuators)
    num_controls = 4 * m
    goal = spec.state_of(*spec.goal)

    reward = np.zeros((num_states, num_controls))
    reliability = np.zeros((num_states, num_controls))
    admissible: list[list[int]] = [[] for _ in range(num_states)]
    t_rows: dict[tuple[int, int], dict[int, float]] = {}
    f_rows: dict[tuple[int, int], dict[int, float]] = {}
    filled = np.zeros((num_states, num_controls), dtype=bool)

    for y in range(spec.height):
        for x in range(spec.width):
            s = spec.state_of(x, y)
            terrain = spec.terrain_at(x, y)
            if s == goal:
                for u in range(num_controls):
                    admissible[s].append(u)
                    reward[s, u] = spec.goal_reward
                    reliability[s, u] = 1.0
                    filled[s, u] = True
                    t_rows[(s, u)] = {s: 1.0}
                    f_rows[(s, u)] = {s: 1.0}
                continue
            if not terrain.passable:
                continue
            neighbors = _legal_neighbors(spec, x, y)
            if not neighbors:
                raise GridSpecError(
                    f"cell ({x}, {y}) permits actuators but has no reachable neighbor")
            cells = [spec.state_of(nx, ny) for _, nx, ny in neighbors]
            by_dir = {d: spec.state_of(nx, ny) for d, nx, ny in neighbors}
            for a, act_name in enumerate(spec.actuators):
                at = terrain.actuators.get(act_name)
                if at is None:
                    continue
                for d in range(4):
                    if d not in by_dir:
                        continue
                    u = a * 4 + d
                    target = by_dir[d]
                    others = [c for c in cells if c != target]
                    admissible[s].append(u)
                    reward[s, u] = at.reward
                    reliability[s, u] = at.reliability
                    filled[s, u] = True
                    t_rows[(s, u)] = _split_row(target, others, at.precision)
                    f_rows[(s, u)] = _split_row(target, others, at.malfunction_precision)

    fill = reward[filled].min() if filled.any() else 0.0
    reward[~filled] = fill

    return Famdp(
        num_states=num_states,
        num_actuators=m,
        control_sets=tuple(tuple(range(a * 4, a * 4 + 4)) for a in range(m)),
        nominal=TransitionKernel.from_dict(t_rows, num_states, num_controls),
        malfunction=TransitionKernel.from_dict(f_rows, num_states, num_controls),
        reward=reward,
        reliability=reliability,
        discount=spec.discount,
        admissible=tuple(tuple(sorted(a)) for a in admissible),
        grid=GridMeta(spec.width, spec.height, spec.goal, spec.start, spec.name),
    )


def duplicate_actuators(spec: GridSpec, target_m: int) -> GridSpec:
    """Scale the actuator count by replicating each base actuator verbatim.

    A replica behaves exactly like its original on every terrain; replicas are
    appended as whole groups, so 2 base actuators scaled to 6 give the order
    ``a, b, a@2, b@2, a@3, b@3``.
    """
    base = len(spec.actuators)
    if target_m < base or target_m % base != 0:
        raise ValueError(f"target actuator count {target_m} is not a positive "
                         f"multiple of the base count {base}")
    copies = target_m // base
    if copies == 1:
        return replace(spec)
    names = list(spec.actuators)
    for c in range(2, copies + 1):
        names.extend(f"{name}@{c}" for name in spec.actuators)
    terrains = {}
    for ch, t in spec.terrains.items():
        table = dict(t.actuators)
        for c in range(2, copies + 1):
            for name in spec.actuators:
                if name in t.actuators:
                    table[f"{name}@{c}"] = t.actuators[name]
        terrains[ch] = Terrain(t.name, table)
    return replace(spec, actuators=tuple(names), terrains=terrains)


def initial_values(spec: GridSpec, famdp: Famdp) -> ValueFunction:
    """Pessimistic start: worst step reward forever, goal at its fixed point."""
    if spec.discount >= 1:
        raise ValueError("pessimistic initialization needs discount < 1")
    v = np.full(famdp.num_states, famdp.global_min_reward() / (1.0 - spec.discount))
    v[spec.state_of(*spec.goal)] = spec.goal_reward / (1.0 - spec.discount)
    return v
