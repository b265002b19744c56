"""Value-function lattice solver with certified per-node stopping thresholds.

One value function per subset of operative actuators, arranged as a DAG whose
arcs remove a single actuator. A node's backup mixes its own values (the
no-failure branch, nominal kernel) with the child node reached by the failing
actuator (malfunction kernel):

    V_r(s) = max_u [ R(s,u) + gamma * ( rho(s,u) * sum_s' T(s'|s,u) V_r(s')
                   + (1 - rho(s,u)) * sum_s' F(s'|s,u) V_{r \\ k(u)}(s') ) ]

Only the no-failure branch is self-referential, so the per-node operator
contracts with factor ``gamma * rho_max`` regardless of how unreliable the
failure branch is. Solving proceeds bottom-up: the empty node is analytic,
and each node is swept until its residual falls below a threshold chosen so
the whole lattice lands within ``epsilon`` of the exact fixed points.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Mapping

import numpy as np

from . import _kernels
from .core import (CapacityError, ConfigurationError, Famdp, FamdpError,
                   Policy, ReliabilityProfile, ValueFunction,
                   default_initial_values, mask_members, reliability_profile)
from .mono import (MAX_SWEEPS, SolveResult, build_backup_template,
                   error_gain)

DEFAULT_NODE_CAP = 1 << 16

# Per-node state ordering: (node mask, local state count) -> permutation.
OrderingFactory = Callable[[int, int], np.ndarray]


class MissingChildError(FamdpError):
    """A backup needed a child value function that was not supplied."""


@dataclass
class NodeStats:
    mask: int
    sweeps: int
    reads: int
    writes: int
    residual: float
    converged: bool


@dataclass
class Lattice:
    """Structure of the actuator-subset DAG (values live in solve results)."""

    famdp: Famdp
    num_actuators: int

    @property
    def num_nodes(self) -> int:
        return 1 << self.num_actuators

    @property
    def top(self) -> int:
        return self.num_nodes - 1

    def children(self, mask: int) -> tuple[int, ...]:
        """Nodes reached by removing one operative actuator."""
        return tuple(mask ^ (1 << k) for k in mask_members(mask, self.num_actuators))

    def topo_order(self) -> list[int]:
        """All masks, ascending cardinality then mask value (bottom first)."""
        return sorted(range(self.num_nodes), key=lambda x: (x.bit_count(), x))

    def layers(self) -> list[list[int]]:
        out: list[list[int]] = [[] for _ in range(self.num_actuators + 1)]
        for mask in range(self.num_nodes):
            out[mask.bit_count()].append(mask)
        return out


def build_lattice(famdp: Famdp, node_cap: int = DEFAULT_NODE_CAP) -> Lattice:
    num_nodes = 1 << famdp.num_actuators
    if num_nodes > node_cap:
        raise CapacityError(f"lattice needs {num_nodes} nodes, cap is {node_cap}")
    return Lattice(famdp, famdp.num_actuators)


def bottom_value(famdp: Famdp) -> ValueFunction:
    """Value of having no actuators: the state's worst reward, forever."""
    if famdp.discount >= 1.0:
        raise ConfigurationError(
            "the no-actuator value diverges at discount 1; use the monolithic solver")
    return famdp.min_reward_per_state() / (1.0 - famdp.discount)


def contraction_factor(famdp: Famdp, profile: ReliabilityProfile | None = None) -> float:
    if profile is None:
        profile = reliability_profile(famdp)
    return famdp.discount * profile.rho_max


def _state_backup(famdp: Famdp, mask: int, child_values: Mapping[int, ValueFunction],
                  values: ValueFunction, state: int, bottom: ValueFunction) -> float:
    gamma = famdp.discount
    best = None
    for u in np.flatnonzero(famdp.admissible_mask[state]):
        u = int(u)
        k = int(famdp.actuator_of[u])
        if not (mask >> k) & 1:
            continue
        if k not in child_values:
            raise MissingChildError(f"no child values for actuator {k} of node {mask:#x}")
        rho = float(famdp.reliability[state, u])
        q = float(famdp.reward[state, u])
        if rho > 0.0:
            idx, p = famdp.nominal.row(state, u)
            q += gamma * rho * float(p @ values[idx])
        if rho < 1.0:
            idx, p = famdp.malfunction.row(state, u)
            q += gamma * (1.0 - rho) * float(p @ child_values[k][idx])
        if best is None or q > best:
            best = q
    return float(bottom[state]) if best is None else best


def local_backup(famdp: Famdp, mask: int, child_values: Mapping[int, ValueFunction],
                 state: int, values: ValueFunction,
                 bottom: ValueFunction | None = None) -> float:
    """One in-place backup of ``values[state]`` at the given node.

    ``child_values`` maps each operative actuator ``k`` to the value function
    of the node with ``k`` removed. States with no operative admissible
    control take the bottom value (stranded convention).
    """
    if bottom is None:
        bottom = bottom_value(famdp)
    new = _state_backup(famdp, mask, child_values, values, state, bottom)
    values[state] = new
    return new


def apply_node_operator(famdp: Famdp, mask: int,
                        child_values: Mapping[int, ValueFunction],
                        values: ValueFunction,
                        bottom: ValueFunction | None = None) -> ValueFunction:
    """Synchronous application of the node's backup operator (fresh array)."""
    if bottom is None:
        bottom = bottom_value(famdp)
    out = np.empty_like(values)
    for s in range(famdp.num_states):
        out[s] = _state_backup(famdp, mask, child_values, values, s, bottom)
    return out


def node_threshold(famdp: Famdp, mask: int, epsilon: float,
                   profile: ReliabilityProfile | None = None) -> float:
    """Max sweep residual at which the node still meets ``epsilon`` overall.

    With children already within ``epsilon`` of their fixed points, stopping
    this node's sweeps at the returned residual keeps its own error within
    ``epsilon`` as well. Actuators whose best reliability is zero contribute
    no self-coupling and are skipped; if the whole node is such, one sweep is
    exact and ``epsilon`` itself is returned.
    """
    if epsilon <= 0:
        raise ValueError("epsilon must be positive")
    if mask == 0:
        raise ValueError("the bottom node is set analytically, it has no threshold")
    if profile is None:
        profile = reliability_profile(famdp)
    gamma = famdp.discount
    if gamma * profile.rho_max >= 1.0:
        raise ConfigurationError("need discount * max reliability < 1")
    if gamma == 0.0 or profile.rho_max == 0.0:
        return epsilon
    gain = error_gain(gamma * profile.rho_max)
    best = None
    for k in mask_members(mask, famdp.num_actuators):
        rho_bar = profile.rho_max_k[k]
        if rho_bar == 0.0:
            continue
        cand = (epsilon / (gain * rho_bar)) * (1.0 / gamma + profile.rho_min_k[k] - 1.0)
        if best is None or cand < best:
            best = cand
    return epsilon if best is None else best


def _identity_factory(mask: int, n: int) -> np.ndarray:
    return np.arange(n, dtype=np.int64)


def _check_local_ordering(order: np.ndarray, n: int, mask: int) -> np.ndarray:
    arr = np.ascontiguousarray(np.asarray(order, dtype=np.int64))
    if arr.shape != (n,) or np.bincount(arr, minlength=n).max(initial=0) != 1:
        raise ValueError(f"ordering for node {mask:#x} is not a permutation of 0..{n - 1}")
    return arr


def solve_lattice(famdp: Famdp, epsilon: float,
                  ordering_factory: OrderingFactory | None = None,
                  hot_start: bool = False,
                  initial_values: ValueFunction | None = None,
                  node_cap: int = DEFAULT_NODE_CAP,
                  threads: int = 1,
                  max_sweeps: int = MAX_SWEEPS) -> SolveResult:
    """Bottom-up solve of every node to certified accuracy ``epsilon``.

    The bottom node is assigned analytically (counted as one write per state).
    Every other node starts either from the caller's pessimistic values
    (cold) or from the per-state maximum over its children (hot start, a
    lower bound; counted as one read per child state plus one write per
    state), then runs Gauss-Seidel sweeps in the factory-supplied order until
    the sweep residual reaches the node's threshold. Nodes of one cardinality
    layer may be solved in parallel; per-node counts do not depend on the
    schedule.

    Returns a result whose ``values`` are the top node's, with per-node stats
    in ``nodes`` and the full node-values matrix in ``node_values``.
    """
    if famdp.discount >= 1.0:
        raise ConfigurationError(
            "lattice solving requires discount < 1 (no-actuator values diverge)")
    lattice = build_lattice(famdp, node_cap)
    tpl = build_backup_template(famdp)
    profile = reliability_profile(famdp)
    n = famdp.num_states
    num_nodes = lattice.num_nodes
    factory = ordering_factory or _identity_factory
    if initial_values is None:
        initial_values = default_initial_values(famdp)
    init = np.asarray(initial_values, dtype=np.float64)
    if init.shape != (n,):
        raise ValueError(f"initial_values must have length {n}")

    values = np.zeros((num_nodes, n), dtype=np.float64)
    values[0] = bottom_value(famdp)
    stats: dict[int, NodeStats] = {0: NodeStats(0, 0, 0, n, 0.0, True)}

    def solve_node(mask: int) -> NodeStats:
        members = mask_members(mask, famdp.num_actuators)
        if hot_start:
            children = [mask ^ (1 << k) for k in members]
            np.max(values[children], axis=0, out=values[mask])
            init_reads = len(members) * n
        else:
            values[mask] = init
            init_reads = 0
        threshold = node_threshold(famdp, mask, epsilon, profile)
        order = _check_local_ordering(factory(mask, n), n, mask)
        sweeps, reads, writes, residual, converged = _kernels.sweeps_node(
            tpl.adm_ptr, tpl.adm_ctl, tpl.adm_act, tpl.adm_rew,
            tpl.t_ptr, tpl.t_idx, tpl.t_w, tpl.f_ptr, tpl.f_idx, tpl.f_w,
            values, mask, order, float(threshold), max_sweeps)
        if not converged:
            raise RuntimeError(f"node {mask:#x}: no convergence within {max_sweeps} sweeps")
        return NodeStats(mask, int(sweeps), int(reads) + init_reads,
                         int(writes) + n, float(residual), True)

    layers = lattice.layers()
    for layer in layers[1:]:
        if threads > 1 and len(layer) > 1:
            with ThreadPoolExecutor(max_workers=threads) as pool:
                for st in pool.map(solve_node, layer):
                    stats[st.mask] = st
        else:
            for mask in layer:
                stats[mask] = solve_node(mask)

    ordered = [stats[mask] for mask in range(num_nodes)]
    return SolveResult(
        values=values[lattice.top].copy(),
        policy=None,
        reads=sum(s.reads for s in ordered),
        writes=sum(s.writes for s in ordered),
        sweeps=sum(s.sweeps for s in ordered),
        residual=stats[lattice.top].residual,
        nodes=ordered,
        node_values=values,
    )


def lattice_policy(famdp: Famdp, result: SolveResult) -> Policy:
    """Greedy policy over every (state, node) pair of a solved lattice.

    Ties go to the lowest control index; stranded pairs get no entry.
    """
    if result.node_values is None or result.nodes is None:
        raise RuntimeError("result does not carry solved lattice nodes")
    if not all(st.converged for st in result.nodes):
        raise RuntimeError("lattice has unconverged nodes")
    tpl = build_backup_template(famdp)
    values = np.ascontiguousarray(result.node_values, dtype=np.float64)
    policy = Policy(famdp.num_actuators)
    for mask in range(values.shape[0]):
        best = _kernels.greedy_node(
            tpl.adm_ptr, tpl.adm_ctl, tpl.adm_act, tpl.adm_rew,
            tpl.t_ptr, tpl.t_idx, tpl.t_w, tpl.f_ptr, tpl.f_idx, tpl.f_w,
            values, mask)
        for s in range(famdp.num_states):
            if best[s] >= 0:
                policy.set(s, mask, int(best[s]))
    return policy
