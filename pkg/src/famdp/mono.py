"""Monolithic reduction and asynchronous (Gauss-Seidel) value iteration.

The reduction augments each world state with the bitmask of still-operative
actuators, giving ``|S| * 2^m`` meta-states indexed ``mask * |S| + s``.
Executing a control of actuator ``k`` either stays in the same mask block
(no failure, nominal kernel, weight ``rho``) or drops to ``mask & ~(1 << k)``
(failure, malfunction kernel, weight ``1 - rho``).

With discount 1 the effective discount becomes the global maximum reliability
(failure acts as the termination event); transition weights are scaled so the
backup ``R + sum(w * V)`` is identical in both regimes.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import _kernels
from .core import (CapacityError, Famdp, Policy, ValueFunction,
                   default_initial_values, reliability_profile)

DEFAULT_META_CAP = 4096
MAX_SWEEPS = 1_000_000


@dataclass(frozen=True)
class BackupTemplate:
    """Per-(state, control) backup data shared by all planners.

    One flat entry per admissible pair, in ascending (state, control) order.
    ``t_*`` hold no-failure successors (stored when ``rho * T > 0``) with
    weights ``discount * rho * T``; ``f_*`` hold failure successors (stored
    when ``(1 - rho) * F > 0``) with weights ``discount * (1 - rho) * F``.
    """

    num_states: int
    num_actuators: int
    discount: float
    adm_ptr: np.ndarray
    adm_ctl: np.ndarray
    adm_act: np.ndarray
    adm_rew: np.ndarray
    t_ptr: np.ndarray
    t_idx: np.ndarray
    t_w: np.ndarray
    f_ptr: np.ndarray
    f_idx: np.ndarray
    f_w: np.ndarray
    row_min_reward: np.ndarray


def build_backup_template(famdp: Famdp) -> BackupTemplate:
    gamma = famdp.discount
    adm_ptr = [0]
    adm_ctl: list[int] = []
    adm_act: list[int] = []
    adm_rew: list[float] = []
    t_ptr = [0]
    t_idx: list[int] = []
    t_w: list[float] = []
    f_ptr = [0]
    f_idx: list[int] = []
    f_w: list[float] = []
    for s in range(famdp.num_states):
        for u in np.flatnonzero(famdp.admissible_mask[s]):
            u = int(u)
            rho = float(famdp.reliability[s, u])
            adm_ctl.append(u)
            adm_act.append(int(famdp.actuator_of[u]))
            adm_rew.append(float(famdp.reward[s, u]))
            row = famdp.nominal.row(s, u)
            if row is None:
                raise ValueError(f"missing nominal row for admissible pair ({s}, {u})")
            if rho > 0.0:
                idx, p = row
                t_idx.extend(idx.tolist())
                t_w.extend((gamma * rho * p).tolist())
            t_ptr.append(len(t_idx))
            row = famdp.malfunction.row(s, u)
            if row is None:
                raise ValueError(f"missing malfunction row for admissible pair ({s}, {u})")
            if rho < 1.0:
                idx, p = row
                f_idx.extend(idx.tolist())
                f_w.extend((gamma * (1.0 - rho) * p).tolist())
            f_ptr.append(len(f_idx))
        adm_ptr.append(len(adm_ctl))
    as_i = lambda a: np.asarray(a, dtype=np.int64)
    as_f = lambda a: np.asarray(a, dtype=np.float64)
    return BackupTemplate(
        famdp.num_states, famdp.num_actuators, gamma,
        as_i(adm_ptr), as_i(adm_ctl), as_i(adm_act), as_f(adm_rew),
        as_i(t_ptr), as_i(t_idx), as_f(t_w),
        as_i(f_ptr), as_i(f_idx), as_f(f_w),
        famdp.min_reward_per_state().astype(np.float64),
    )


@dataclass
class MonoMdp:
    """Flat CSR form of the augmented-state MDP."""

    famdp: Famdp
    num_meta: int
    beta: float
    gamma_prime: float
    ctl_ptr: np.ndarray = field(repr=False)
    ctl_id: np.ndarray = field(repr=False)
    ctl_rew: np.ndarray = field(repr=False)
    succ_ptr: np.ndarray = field(repr=False)
    succ_idx: np.ndarray = field(repr=False)
    succ_w: np.ndarray = field(repr=False)

    @property
    def num_states(self) -> int:
        return self.famdp.num_states

    @property
    def num_actuators(self) -> int:
        return self.famdp.num_actuators

    def meta_index(self, state: int, mask: int) -> int:
        return mask * self.famdp.num_states + state

    def meta_state(self, index: int) -> tuple[int, int]:
        """(state, mask) for a meta index."""
        return index % self.famdp.num_states, index // self.famdp.num_states


@dataclass
class SolveResult:
    """Converged values plus the exact operation accounting of the solve."""

    values: ValueFunction
    policy: Policy | None
    reads: int
    writes: int
    sweeps: int
    residual: float
    nodes: list | None = None
    node_values: np.ndarray | None = None

    @property
    def total_ops(self) -> int:
        return self.reads + self.writes


def build_mono(famdp: Famdp, meta_cap: int = DEFAULT_META_CAP) -> MonoMdp:
    """Expand the instance into its augmented-state MDP.

    Meta-states with no operative admissible control get a single synthetic
    self-loop (control id ``-1``) paying the state's minimum reward, so every
    meta-state has a well-defined value matching the lattice bottom convention.
    """
    num_meta = famdp.num_states * (1 << famdp.num_actuators)
    if num_meta > meta_cap:
        raise CapacityError(
            f"monolithic expansion needs {num_meta} meta-states, cap is {meta_cap}")
    beta = 1.0
    if famdp.discount >= 1.0:
        beta = reliability_profile(famdp).rho_max
    gamma_prime = famdp.discount * beta
    tpl = build_backup_template(famdp)
    n_entries, n_succ = _kernels.count_mono(
        tpl.adm_ptr, tpl.adm_act, tpl.t_ptr, tpl.f_ptr,
        famdp.num_states, famdp.num_actuators)
    ctl_ptr = np.empty(num_meta + 1, dtype=np.int64)
    ctl_id = np.empty(n_entries, dtype=np.int64)
    ctl_rew = np.empty(n_entries, dtype=np.float64)
    succ_ptr = np.empty(n_entries + 1, dtype=np.int64)
    succ_idx = np.empty(n_succ, dtype=np.int64)
    succ_w = np.empty(n_succ, dtype=np.float64)
    _kernels.fill_mono(
        tpl.adm_ptr, tpl.adm_ctl, tpl.adm_act, tpl.adm_rew,
        tpl.t_ptr, tpl.t_idx, tpl.t_w, tpl.f_ptr, tpl.f_idx, tpl.f_w,
        tpl.row_min_reward, famdp.num_states, famdp.num_actuators, gamma_prime,
        ctl_ptr, ctl_id, ctl_rew, succ_ptr, succ_idx, succ_w)
    return MonoMdp(famdp, num_meta, beta, gamma_prime,
                   ctl_ptr, ctl_id, ctl_rew, succ_ptr, succ_idx, succ_w)


def error_gain(contraction: float) -> float:
    """Factor turning a sweep residual into a worst-case true-error bound."""
    if contraction >= 1.0:
        raise ValueError("contraction factor must be < 1")
    return contraction / (1.0 - contraction)


def certified_threshold(epsilon: float, contraction: float) -> float:
    """Sweep-residual threshold guaranteeing a true error of at most ``epsilon``."""
    if epsilon <= 0:
        raise ValueError("epsilon must be positive")
    gain = error_gain(contraction)
    return epsilon if gain == 0.0 else epsilon / gain


def _check_permutation(ordering: Sequence[int] | np.ndarray, n: int) -> np.ndarray:
    arr = np.asarray(ordering, dtype=np.int64)
    if arr.shape != (n,) or np.any(arr < 0) or np.any(arr >= n) \
            or np.bincount(arr, minlength=n).max(initial=0) != 1:
        raise ValueError(f"ordering must be a permutation of 0..{n - 1}")
    return np.ascontiguousarray(arr)


def default_mono_initial_values(mdp: MonoMdp) -> ValueFunction:
    """Pessimistic initialization replicated across every mask block."""
    base = default_initial_values(mdp.famdp, effective_discount=mdp.gamma_prime)
    return np.tile(base, 1 << mdp.num_actuators)


def async_value_iteration(mdp: MonoMdp, ordering: Sequence[int] | np.ndarray,
                          residual_threshold: float,
                          initial_values: ValueFunction | None = None,
                          max_sweeps: int = MAX_SWEEPS) -> SolveResult:
    """In-place Gauss-Seidel sweeps in the given meta-state order.

    Stops once a full sweep changes no value by more than
    ``residual_threshold``; the result is then within
    ``error_gain(gamma_prime) * residual_threshold`` of the fixed point in
    max-norm. Reads count one per successor lookup, writes one per backup.
    """
    if residual_threshold <= 0:
        raise ValueError("residual_threshold must be positive")
    order = _check_permutation(ordering, mdp.num_meta)
    if initial_values is None:
        values = default_mono_initial_values(mdp)
    else:
        values = np.array(initial_values, dtype=np.float64, copy=True)
        if values.shape != (mdp.num_meta,):
            raise ValueError(f"initial_values must have length {mdp.num_meta}")
    sweeps, reads, writes, residual, converged = _kernels.sweeps_flat(
        mdp.ctl_ptr, mdp.ctl_id, mdp.ctl_rew,
        mdp.succ_ptr, mdp.succ_idx, mdp.succ_w,
        values, order, float(residual_threshold), max_sweeps)
    if not converged:
        raise RuntimeError(f"no convergence within {max_sweeps} sweeps "
                           f"(residual {residual:.3e})")
    return SolveResult(values, None, int(reads), int(writes), int(sweeps), float(residual))


def extract_greedy_policy(mdp: MonoMdp, values: ValueFunction) -> Policy:
    """One-step-lookahead greedy policy; ties go to the lowest control index.

    Stranded meta-states (synthetic loop only) get no entry.
    """
    values = np.ascontiguousarray(values, dtype=np.float64)
    if values.shape != (mdp.num_meta,):
        raise ValueError(f"values must have length {mdp.num_meta}")
    best = _kernels.greedy_flat(mdp.ctl_ptr, mdp.ctl_id, mdp.ctl_rew,
                                mdp.succ_ptr, mdp.succ_idx, mdp.succ_w, values)
    policy = Policy(mdp.num_actuators)
    n = mdp.num_states
    for x in range(mdp.num_meta):
        if best[x] >= 0:
            policy.set(x % n, x // n, int(best[x]))
    return policy
