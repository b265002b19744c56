"""Policy execution with stochastic transitions and permanent actuator loss.

Rollouts estimate the expected discounted return by Monte Carlo. Trajectories
end early when they hit a fully absorbing self-loop (the remaining reward
stream is closed-form) or when no operative admissible control remains; a
stranded trajectory keeps accruing the state's minimum reward per step up to
the horizon, matching the no-actuator value convention.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .core import (ActuatorSet, ConfigurationError, Famdp,
                   PolicyContractError, admissible_controls)
from .mono import build_backup_template, certified_threshold
from .orderings import identity_ordering, manhattan_ordering

TERM_HORIZON = "horizon"
TERM_ABSORBED = "absorbed"
TERM_STRANDED = "stranded"


@dataclass(frozen=True)
class TrajectoryStep:
    state: int
    mask: int
    control: int
    reward: float
    failed: bool


@dataclass
class Trajectory:
    start_state: int
    start_mask: int
    horizon: int
    steps: list[TrajectoryStep]
    termination: str
    final_state: int
    final_mask: int
    # per-step reward accrued from the termination step to the horizon
    # (absorbing control's reward, or the stranded state's minimum reward)
    tail_reward: float = 0.0


@dataclass(frozen=True)
class ReturnEstimate:
    mean: float
    standard_error: float
    rollouts: int
    horizon: int
    seed: int


def _rng_for(seed: int, rollout: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence((seed, rollout))))


def _sample_row(row: tuple[np.ndarray, np.ndarray], rng: np.random.Generator) -> int:
    idx, p = row
    if idx.shape[0] == 1:
        return int(idx[0])
    cum = np.cumsum(p)
    j = int(np.searchsorted(cum, rng.random(), side="right"))
    return int(idx[min(j, idx.shape[0] - 1)])


def step(famdp: Famdp, state: int, operative: ActuatorSet | int, control: int,
         rng: np.random.Generator) -> tuple[int, ActuatorSet | int, float, bool]:
    """Execute one control: returns (next state, next operative, reward, failed).

    With probability ``rho(s, u)`` the nominal kernel fires and the actuator
    set is unchanged; otherwise the malfunction kernel fires and the acting
    control's actuator is removed. Executing a control that is inadmissible or
    whose actuator already failed is a contract violation.
    """
    wrap = isinstance(operative, ActuatorSet)
    mask = operative.mask if wrap else int(operative)
    k = int(famdp.actuator_of[control])
    if not (mask >> k) & 1:
        raise PolicyContractError(
            f"control {control} belongs to failed actuator {k} (mask {mask:#x})")
    if not famdp.admissible_mask[state, control]:
        raise PolicyContractError(f"control {control} is not admissible in state {state}")
    rho = float(famdp.reliability[state, control])
    reward = float(famdp.reward[state, control])
    if rng.random() < rho:
        nxt = _sample_row(famdp.nominal.row(state, control), rng)
        failed = False
    else:
        nxt = _sample_row(famdp.malfunction.row(state, control), rng)
        mask &= ~(1 << k)
        failed = True
    out_mask: ActuatorSet | int = ActuatorSet(mask, famdp.num_actuators) if wrap else mask
    return nxt, out_mask, reward, failed


def _is_absorbing(famdp: Famdp, state: int, control: int) -> bool:
    if famdp.reliability[state, control] < 1.0:
        return False
    idx, p = famdp.nominal.row(state, control)
    return idx.shape[0] == 1 and int(idx[0]) == state and float(p[0]) == 1.0


def _geometric(gamma: float, start: int, end: int) -> float:
    """sum of gamma^t for t in [start, end)."""
    if end <= start:
        return 0.0
    if gamma == 1.0:
        return float(end - start)
    return gamma ** start * (1.0 - gamma ** (end - start)) / (1.0 - gamma)


def simulate_trajectory(famdp: Famdp, policy, start_state: int, horizon: int,
                        rng: np.random.Generator,
                        start_mask: int | None = None) -> Trajectory:
    first_mask = (1 << famdp.num_actuators) - 1 if start_mask is None else int(start_mask)
    mask = first_mask
    s = start_state
    steps: list[TrajectoryStep] = []
    termination = TERM_HORIZON
    tail = 0.0
    for _ in range(horizon):
        u = policy.control(s, mask)
        if u is None:
            if admissible_controls(famdp, s, mask):
                raise PolicyContractError(
                    f"policy has no entry for reachable pair (state={s}, mask={mask:#x})")
            termination = TERM_STRANDED
            tail = float(famdp.min_reward_per_state()[s])
            break
        if _is_absorbing(famdp, s, u):
            termination = TERM_ABSORBED
            tail = float(famdp.reward[s, u])
            break
        pre_mask = mask
        s2, mask, reward, failed = step(famdp, s, mask, u, rng)
        steps.append(TrajectoryStep(s, pre_mask, u, reward, failed))
        s = s2
    return Trajectory(start_state, first_mask, horizon, steps, termination, s, mask, tail)


def trajectory_return(famdp: Famdp, trajectory: Trajectory) -> float:
    """Discounted return truncated at the horizon, with closed-form tails.

    Absorbed trajectories accrue the absorbing control's reward for the
    remaining steps; stranded ones accrue the final state's minimum reward.
    """
    gamma = famdp.discount
    total = 0.0
    for t, st in enumerate(trajectory.steps):
        total += gamma ** t * st.reward
    if trajectory.termination != TERM_HORIZON:
        t = len(trajectory.steps)
        total += trajectory.tail_reward * _geometric(gamma, t, trajectory.horizon)
    return total


def estimate_return(famdp: Famdp, policy, start_state: int, horizon: int,
                    rollouts: int, seed: int, threads: int = 1) -> ReturnEstimate:
    """Monte-Carlo mean of the horizon-truncated discounted return.

    Rollout ``i`` draws from a generator seeded by ``(seed, i)``, and results
    are summed in rollout order, so parallel execution matches sequential
    output exactly.
    """
    if rollouts < 1:
        raise ValueError("need at least one rollout")
    returns = np.empty(rollouts, dtype=np.float64)

    def run(i: int) -> None:
        returns[i] = _rollout_return(famdp, policy, start_state, horizon, _rng_for(seed, i))

    if threads > 1:
        chunk = max(1, rollouts // (threads * 8))
        with ThreadPoolExecutor(max_workers=threads) as pool:
            list(pool.map(run, range(rollouts), chunksize=chunk))
    else:
        for i in range(rollouts):
            run(i)
    mean = float(returns.mean())
    se = float(returns.std(ddof=1) / np.sqrt(rollouts)) if rollouts > 1 else 0.0
    return ReturnEstimate(mean, se, rollouts, horizon, seed)


def _rollout_return(famdp: Famdp, policy, start_state: int, horizon: int,
                    rng: np.random.Generator) -> float:
    gamma = famdp.discount
    mask = (1 << famdp.num_actuators) - 1
    s = start_state
    total = 0.0
    t = 0
    while t < horizon:
        u = policy.control(s, mask)
        if u is None:
            if admissible_controls(famdp, s, mask):
                raise PolicyContractError(
                    f"policy has no entry for reachable pair (state={s}, mask={mask:#x})")
            per_step = float(famdp.min_reward_per_state()[s])
            total += per_step * _geometric(gamma, t, horizon)
            return total
        if _is_absorbing(famdp, s, u):
            total += float(famdp.reward[s, u]) * _geometric(gamma, t, horizon)
            return total
        s, mask, reward, _ = step(famdp, s, mask, u, rng)
        total += gamma ** t * reward
        t += 1
    return total


def default_horizon(famdp: Famdp, truncation: float = 1e-6) -> int:
    """Steps after which the remaining discounted mass is below ``truncation``
    of the value scale."""
    gamma = famdp.discount
    if gamma >= 1.0:
        raise ConfigurationError("horizon must be given explicitly at discount 1")
    if gamma == 0.0:
        return 1
    return max(1, int(np.ceil(np.log(truncation) / np.log(gamma))))


class PanglossianPolicy:
    """Re-planning baseline: plan as if failures never happen, replan on loss.

    For an operative set, the policy is the optimal policy of the plain MDP
    over that set's admissible controls and the nominal kernel only (failure
    dynamics and reliabilities are ignored). Slices are solved lazily the
    first time an actuator set is encountered and cached.
    """

    def __init__(self, famdp: Famdp, epsilon: float = 1e-6):
        if famdp.discount >= 1.0:
            raise ConfigurationError("re-planning baseline needs discount < 1")
        self.famdp = famdp
        self.epsilon = epsilon
        self._slices: dict[int, np.ndarray] = {}
        self._tpl = build_backup_template(famdp)
        if famdp.grid is not None:
            self._order = manhattan_ordering(famdp)
        else:
            self._order = identity_ordering(famdp.num_states)

    def control(self, state: int, operative: ActuatorSet | int) -> int | None:
        mask = operative.mask if isinstance(operative, ActuatorSet) else int(operative)
        table = self._slices.get(mask)
        if table is None:
            table = self._solve_slice(mask)
            self._slices[mask] = table
        u = int(table[state])
        return None if u < 0 else u

    def _solve_slice(self, mask: int) -> np.ndarray:
        famdp = self.famdp
        gamma = famdp.discount
        n = famdp.num_states
        ctl_ptr = [0]
        ctl_id: list[int] = []
        ctl_rew: list[float] = []
        succ_ptr = [0]
        succ_idx: list[int] = []
        succ_w: list[float] = []
        min_rew = famdp.min_reward_per_state()
        for s in range(n):
            found = False
            for u in np.flatnonzero(famdp.admissible_mask[s]):
                u = int(u)
                if not (mask >> int(famdp.actuator_of[u])) & 1:
                    continue
                found = True
                idx, p = famdp.nominal.row(s, u)
                ctl_id.append(u)
                ctl_rew.append(float(famdp.reward[s, u]))
                succ_idx.extend(idx.tolist())
                succ_w.extend((gamma * p).tolist())
                succ_ptr.append(len(succ_idx))
            if not found:
                ctl_id.append(-1)
                ctl_rew.append(float(min_rew[s]))
                succ_idx.append(s)
                succ_w.append(gamma)
                succ_ptr.append(len(succ_idx))
            ctl_ptr.append(len(ctl_id))
        arrays = (np.asarray(ctl_ptr, dtype=np.int64), np.asarray(ctl_id, dtype=np.int64),
                  np.asarray(ctl_rew, dtype=np.float64), np.asarray(succ_ptr, dtype=np.int64),
                  np.asarray(succ_idx, dtype=np.int64), np.asarray(succ_w, dtype=np.float64))
        values = np.full(n, famdp.global_min_reward() / (1.0 - gamma) if gamma < 1 else 0.0)
        threshold = certified_threshold(self.epsilon, gamma)
        _, _, _, _, converged = _kernels.sweeps_flat(*arrays, values, self._order,
                                                     threshold, 1_000_000)
        if not converged:
            raise RuntimeError("re-planning slice failed to converge")
        return _kernels.greedy_flat(*arrays, values)


def panglossian_policy(famdp: Famdp, epsilon: float = 1e-6) -> PanglossianPolicy:
    return PanglossianPolicy(famdp, epsilon)
