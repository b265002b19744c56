"""Problem representation for MDPs whose controls ride on failure-prone actuators.

A problem instance couples a nominal transition kernel ``T`` with a malfunction
kernel ``F``: executing control ``u`` in state ``s`` follows ``T`` with
probability ``rho(s, u)`` and otherwise follows ``F`` while permanently
disabling the actuator that generates ``u``. Controls are partitioned among
``m`` actuators; the set of still-operative actuators is tracked as a bitmask.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Iterator, Mapping, Sequence

import numpy as np

# A value function is a plain float64 vector indexed by state.
ValueFunction = np.ndarray

PROB_TOL = 1e-9


class FamdpError(Exception):
    """Base class for toolkit errors."""


class CapacityError(FamdpError):
    """Instance exceeds a configured size cap (e.g. meta-state count)."""


class ConfigurationError(FamdpError):
    """Parameter combination the requested solver cannot support."""


class PolicyContractError(FamdpError):
    """A policy lookup failed on a reachable (state, actuator-set) pair."""


@dataclass(frozen=True)
class ActuatorSet:
    """Subset of operative actuators, stored as a bitmask over ``width`` bits."""

    mask: int
    width: int

    def __post_init__(self) -> None:
        if self.width < 1:
            raise ValueError("actuator set width must be positive")
        if not 0 <= self.mask < (1 << self.width):
            raise ValueError(f"mask {self.mask:#x} out of range for width {self.width}")

    @classmethod
    def full(cls, width: int) -> "ActuatorSet":
        return cls((1 << width) - 1, width)

    @classmethod
    def empty(cls, width: int) -> "ActuatorSet":
        return cls(0, width)

    @classmethod
    def of(cls, actuators: Iterable[int], width: int) -> "ActuatorSet":
        mask = 0
        for k in actuators:
            if not 0 <= k < width:
                raise ValueError(f"actuator index {k} out of range")
            mask |= 1 << k
        return cls(mask, width)

    def contains(self, actuator: int) -> bool:
        return bool((self.mask >> actuator) & 1)

    def remove(self, actuator: int) -> "ActuatorSet":
        if not self.contains(actuator):
            raise ValueError(f"actuator {actuator} not in set")
        return ActuatorSet(self.mask & ~(1 << actuator), self.width)

    def issubset(self, other: "ActuatorSet") -> bool:
        return (self.mask & ~other.mask) == 0

    @property
    def cardinality(self) -> int:
        return int(self.mask).bit_count()

    def members(self) -> tuple[int, ...]:
        return tuple(k for k in range(self.width) if self.contains(k))

    def __iter__(self) -> Iterator[int]:
        return iter(self.members())

    def __len__(self) -> int:
        return self.cardinality


def mask_members(mask: int, width: int) -> tuple[int, ...]:
    """Actuator indices present in a raw bitmask."""
    return tuple(k for k in range(width) if (mask >> k) & 1)


class TransitionKernel:
    """Sparse per-(state, control) successor distributions.

    Rows are stored only where they are defined; each row keeps successor
    indices (int64) and probabilities (float64) as parallel arrays.
    """

    def __init__(self, num_states: int, num_controls: int,
                 rows: Mapping[tuple[int, int], tuple[np.ndarray, np.ndarray]]):
        self.num_states = num_states
        self.num_controls = num_controls
        self._rows = dict(rows)

    @classmethod
    def from_records(cls, records: Iterable[Sequence], num_states: int,
                     num_controls: int) -> "TransitionKernel":
        """Build from flat ``[state, control, successor, probability]`` records."""
        acc: dict[tuple[int, int], list[tuple[int, float]]] = {}
        for state, control, successor, prob in records:
            acc.setdefault((int(state), int(control)), []).append((int(successor), float(prob)))
        rows = {}
        for key, pairs in acc.items():
            pairs.sort()
            idx = np.array([s for s, _ in pairs], dtype=np.int64)
            p = np.array([q for _, q in pairs], dtype=np.float64)
            rows[key] = (idx, p)
        return cls(num_states, num_controls, rows)

    @classmethod
    def from_dict(cls, rows: Mapping[tuple[int, int], Mapping[int, float]],
                  num_states: int, num_controls: int) -> "TransitionKernel":
        records = [(s, u, sp, p) for (s, u), row in rows.items() for sp, p in row.items()]
        return cls.from_records(records, num_states, num_controls)

    def row(self, state: int, control: int) -> tuple[np.ndarray, np.ndarray] | None:
        return self._rows.get((state, control))

    def items(self):
        return self._rows.items()

    def to_records(self) -> list[list]:
        out = []
        for (s, u) in sorted(self._rows):
            idx, p = self._rows[(s, u)]
            for sp, q in zip(idx.tolist(), p.tolist()):
                out.append([s, u, sp, q])
        return out

    def __len__(self) -> int:
        return len(self._rows)


@dataclass(frozen=True)
class GridMeta:
    """Optional 2D-grid provenance carried by instances built from scenarios.

    Lets grid-aware tooling (Manhattan ordering, simulation start state) work
    on serialized instances without the original scenario file.
    """

    width: int
    height: int
    goal: tuple[int, int]
    start: tuple[int, int] | None = None
    name: str | None = None

    @property
    def goal_state(self) -> int:
        return self.goal[1] * self.width + self.goal[0]

    @property
    def start_state(self) -> int | None:
        if self.start is None:
            return None
        return self.start[1] * self.width + self.start[0]


@dataclass(frozen=True)
class Famdp:
    """Immutable problem instance.

    ``reward`` and ``reliability`` are dense ``(num_states, num_controls)``
    arrays; ``admissible`` optionally restricts the controls usable in each
    state (``None`` means every control is usable everywhere). Kernel rows
    must exist for every admissible (state, control) pair.
    """

    num_states: int
    num_actuators: int
    control_sets: tuple[tuple[int, ...], ...]
    nominal: TransitionKernel
    malfunction: TransitionKernel
    reward: np.ndarray
    reliability: np.ndarray
    discount: float
    admissible: tuple[tuple[int, ...], ...] | None = None
    grid: GridMeta | None = None

    # derived lookups, filled in __post_init__
    actuator_of: np.ndarray = field(init=False, repr=False)
    admissible_mask: np.ndarray = field(init=False, repr=False)

    def __post_init__(self) -> None:
        reward = np.ascontiguousarray(np.asarray(self.reward, dtype=np.float64))
        reliability = np.ascontiguousarray(np.asarray(self.reliability, dtype=np.float64))
        for name, arr in (("reward", reward), ("reliability", reliability)):
            if arr.shape != (self.num_states, self.num_controls):
                raise ValueError(f"{name} must have shape (num_states, num_controls), got {arr.shape}")
        actuator_of = np.full(self.num_controls, -1, dtype=np.int64)
        for k, controls in enumerate(self.control_sets):
            for u in controls:
                if not 0 <= u < self.num_controls:
                    raise ValueError(f"control {u} out of range")
                actuator_of[u] = k
        adm = np.zeros((self.num_states, self.num_controls), dtype=bool)
        if self.admissible is None:
            adm[:] = True
        else:
            if len(self.admissible) != self.num_states:
                raise ValueError("admissible must list one control set per state")
            for s, controls in enumerate(self.admissible):
                for u in controls:
                    adm[s, u] = True
        reward.flags.writeable = False
        reliability.flags.writeable = False
        adm.flags.writeable = False
        actuator_of.flags.writeable = False
        object.__setattr__(self, "reward", reward)
        object.__setattr__(self, "reliability", reliability)
        object.__setattr__(self, "actuator_of", actuator_of)
        object.__setattr__(self, "admissible_mask", adm)

    @property
    def num_controls(self) -> int:
        return sum(len(c) for c in self.control_sets)

    def admissible_at(self, state: int) -> tuple[int, ...]:
        """Controls the state's terrain/context permits, ignoring failures."""
        return tuple(np.flatnonzero(self.admissible_mask[state]).tolist())

    def min_reward_per_state(self) -> np.ndarray:
        """Per-state minimum of the reward row, the 'stranded' per-step reward."""
        return self.reward.min(axis=1)

    def global_min_reward(self) -> float:
        return float(self.reward.min())


@dataclass(frozen=True)
class ReliabilityProfile:
    """Per-actuator reliability extremes plus the global maximum."""

    rho_max_k: tuple[float, ...]
    rho_min_k: tuple[float, ...]
    rho_max: float


class Policy:
    """Deterministic control choice per (state, operative actuator set).

    Pairs with no admissible operative control carry no entry; the simulator
    treats such pairs as stranded.
    """

    def __init__(self, width: int, table: Mapping[tuple[int, int], int] | None = None):
        self.width = width
        self._table: dict[tuple[int, int], int] = dict(table or {})

    def set(self, state: int, mask: int, control: int) -> None:
        self._table[(state, mask)] = control

    def control(self, state: int, operative: "ActuatorSet | int") -> int | None:
        mask = operative.mask if isinstance(operative, ActuatorSet) else int(operative)
        return self._table.get((state, mask))

    def items(self):
        return self._table.items()

    def to_records(self) -> list[list[int]]:
        return [[s, m, u] for (s, m), u in sorted(self._table.items(), key=lambda kv: (kv[0][1], kv[0][0]))]

    @classmethod
    def from_records(cls, width: int, records: Iterable[Sequence[int]]) -> "Policy":
        return cls(width, {(int(s), int(m)): int(u) for s, m, u in records})

    def __len__(self) -> int:
        return len(self._table)

    def __eq__(self, other) -> bool:
        return isinstance(other, Policy) and self.width == other.width and self._table == other._table


@dataclass(frozen=True)
class Violation:
    """One validation finding, with (state, control) coordinates when local."""

    code: str
    message: str
    state: int | None = None
    control: int | None = None

    def __str__(self) -> str:
        where = ""
        if self.state is not None:
            where = f" at state={self.state}" + (f", control={self.control}" if self.control is not None else "")
        return f"[{self.code}]{where}: {self.message}"


def _check_row(kind: str, famdp: Famdp, kernel: TransitionKernel, s: int, u: int,
               out: list[Violation]) -> None:
    row = kernel.row(s, u)
    if row is None:
        out.append(Violation(f"{kind}-missing-row", f"no {kind} row for admissible pair", s, u))
        return
    idx, p = row
    if np.any(p <= 0):
        out.append(Violation(f"{kind}-nonpositive-prob", "probabilities must be positive", s, u))
    if np.any(idx < 0) or np.any(idx >= famdp.num_states):
        out.append(Violation(f"{kind}-bad-successor", "successor index out of range", s, u))
    total = float(p.sum())
    if abs(total - 1.0) > PROB_TOL:
        out.append(Violation(f"{kind}-row-sum", f"row sums to {total!r}, expected 1", s, u))


def validate(famdp: Famdp) -> list[Violation]:
    """Check every model invariant; returns all violations (empty means valid)."""
    out: list[Violation] = []
    if famdp.num_states < 1:
        out.append(Violation("num-states", "num_states must be positive"))
    if famdp.num_actuators < 1:
        out.append(Violation("num-actuators", "num_actuators must be positive"))
    if len(famdp.control_sets) != famdp.num_actuators:
        out.append(Violation("control-sets", "control_sets must have one entry per actuator"))

    seen: dict[int, int] = {}
    for k, controls in enumerate(famdp.control_sets):
        if len(controls) == 0:
            out.append(Violation("empty-control-set", f"actuator {k} generates no controls"))
        for u in controls:
            if u in seen:
                out.append(Violation("overlapping-control-sets",
                                     f"control {u} in actuators {seen[u]} and {k}", control=u))
            seen[u] = k
    expected = set(range(famdp.num_controls))
    if set(seen) != expected:
        out.append(Violation("control-cover", "control sets must cover a dense 0..U-1 index range"))

    if np.any(famdp.reliability < 0) or np.any(famdp.reliability > 1):
        bad = np.argwhere((famdp.reliability < 0) | (famdp.reliability > 1))[0]
        out.append(Violation("reliability-range", "reliability outside [0, 1]",
                             int(bad[0]), int(bad[1])))
    if not 0 <= famdp.discount <= 1:
        out.append(Violation("discount-range", f"discount {famdp.discount} outside [0, 1]"))

    for s in range(famdp.num_states):
        for u in np.flatnonzero(famdp.admissible_mask[s]):
            _check_row("nominal", famdp, famdp.nominal, s, int(u), out)
            _check_row("malfunction", famdp, famdp.malfunction, s, int(u), out)

    # stored rows outside the admissible set still need sane entries
    for kind, kernel in (("nominal", famdp.nominal), ("malfunction", famdp.malfunction)):
        for (s, u), (idx, p) in kernel.items():
            if not (0 <= s < famdp.num_states and 0 <= u < famdp.num_controls):
                out.append(Violation(f"{kind}-bad-row-key", "row key out of range", s, u))
            elif not famdp.admissible_mask[s, u]:
                if np.any(p <= 0):
                    out.append(Violation(f"{kind}-nonpositive-prob",
                                         "probabilities must be positive", s, u))
                if np.any(idx < 0) or np.any(idx >= famdp.num_states):
                    out.append(Violation(f"{kind}-bad-successor",
                                         "successor index out of range", s, u))

    profile = reliability_profile(famdp)
    if famdp.discount >= 1 and profile.rho_max >= 1:
        out.append(Violation("discount-reliability",
                             "need discount < 1 or max reliability < 1 for finite values"))
    return out


def ensure_valid(famdp: Famdp) -> Famdp:
    """Raise ``ValueError`` carrying the full report if the instance is invalid."""
    report = validate(famdp)
    if report:
        raise ValueError("invalid instance:\n" + "\n".join(str(v) for v in report))
    return famdp


def reliability_profile(famdp: Famdp) -> ReliabilityProfile:
    """Per-actuator max/min reliability over admissible (state, control) pairs.

    An actuator admissible nowhere gets (0, 0): its controls can never run,
    which matches the single-shot limit.
    """
    rho_max_k: list[float] = []
    rho_min_k: list[float] = []
    for controls in famdp.control_sets:
        cols = list(controls)
        adm = famdp.admissible_mask[:, cols]
        vals = famdp.reliability[:, cols][adm]
        if vals.size == 0:
            rho_max_k.append(0.0)
            rho_min_k.append(0.0)
        else:
            rho_max_k.append(float(vals.max()))
            rho_min_k.append(float(vals.min()))
    return ReliabilityProfile(tuple(rho_max_k), tuple(rho_min_k), max(rho_max_k))


def admissible_controls(famdp: Famdp, state: int, operative: ActuatorSet | int) -> tuple[int, ...]:
    """Controls usable in ``state`` given the operative actuators (may be empty)."""
    mask = operative.mask if isinstance(operative, ActuatorSet) else int(operative)
    out = []
    for u in np.flatnonzero(famdp.admissible_mask[state]):
        if (mask >> int(famdp.actuator_of[u])) & 1:
            out.append(int(u))
    return tuple(out)


def default_initial_values(famdp: Famdp, effective_discount: float | None = None) -> ValueFunction:
    """Pessimistic start: worst per-step reward forever, goal held at its fixed point.

    The non-goal level is ``min R / (1 - discount)``; instances carrying grid
    metadata additionally pin the goal state to ``R_goal / (1 - discount)``.
    """
    gamma = famdp.discount if effective_discount is None else effective_discount
    if gamma >= 1:
        raise ConfigurationError("pessimistic initialization needs an effective discount < 1")
    v = np.full(famdp.num_states, famdp.global_min_reward() / (1.0 - gamma), dtype=np.float64)
    if famdp.grid is not None:
        g = famdp.grid.goal_state
        v[g] = famdp.reward[g].max() / (1.0 - gamma)
    return v
