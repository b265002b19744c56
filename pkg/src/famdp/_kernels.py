"""Compiled inner loops: Gauss-Seidel sweeps with exact read/write accounting.

Everything here operates on flat CSR-style arrays so the same sweep kernel
serves the monolithic solver, the per-node lattice solver and the re-planning
baseline. A "read" is one successor value lookup (one stored entry with
nonzero transition probability); a "write" is one value assignment. Counts are
plain integer arithmetic and therefore identical run-to-run.
"""

from __future__ import annotations

import numpy as np
from numba import njit

NEG_INF = -np.inf


@njit(cache=True, nogil=True)
def sweeps_flat(ctl_ptr, ctl_id, ctl_rew, succ_ptr, succ_idx, succ_w,
                values, ordering, threshold, max_sweeps):
    """In-place Gauss-Seidel sweeps over a flat MDP until the max-norm sweep
    change drops to ``threshold``. Returns (sweeps, reads, writes, residual,
    converged)."""
    reads = np.int64(0)
    writes = np.int64(0)
    sweeps = np.int64(0)
    residual = 0.0
    converged = False
    while sweeps < max_sweeps:
        sweeps += 1
        residual = 0.0
        for oi in range(ordering.shape[0]):
            x = ordering[oi]
            best = NEG_INF
            for e in range(ctl_ptr[x], ctl_ptr[x + 1]):
                q = ctl_rew[e]
                for i in range(succ_ptr[e], succ_ptr[e + 1]):
                    q += succ_w[i] * values[succ_idx[i]]
                reads += succ_ptr[e + 1] - succ_ptr[e]
                if q > best:
                    best = q
            delta = abs(best - values[x])
            if delta > residual:
                residual = delta
            values[x] = best
            writes += 1
        if residual <= threshold:
            converged = True
            break
    return sweeps, reads, writes, residual, converged


@njit(cache=True, nogil=True)
def greedy_flat(ctl_ptr, ctl_id, ctl_rew, succ_ptr, succ_idx, succ_w, values):
    """One-step-lookahead argmax per state; ties keep the lowest control id.

    Entries are stored in ascending control order, so strict improvement
    implements the tie rule. Synthetic entries (control id ``-1``) are skipped;
    states with only those report ``-1``.
    """
    n = ctl_ptr.shape[0] - 1
    out = np.full(n, -1, dtype=np.int64)
    for x in range(n):
        best = NEG_INF
        for e in range(ctl_ptr[x], ctl_ptr[x + 1]):
            if ctl_id[e] < 0:
                continue
            q = ctl_rew[e]
            for i in range(succ_ptr[e], succ_ptr[e + 1]):
                q += succ_w[i] * values[succ_idx[i]]
            if q > best:
                best = q
                out[x] = ctl_id[e]
    return out


@njit(cache=True, nogil=True)
def sweeps_node(adm_ptr, adm_ctl, adm_act, adm_rew,
                t_ptr, t_idx, t_w, f_ptr, f_idx, f_w,
                lattice_v, mask, ordering, threshold, max_sweeps):
    """Gauss-Seidel sweeps for one lattice node, updating ``lattice_v[mask]``.

    The no-failure branch reads the node's own row; the failure branch for a
    control of actuator ``k`` reads row ``mask ^ (1 << k)`` (the child). States
    with no operative admissible control copy the bottom row (one read)."""
    own = lattice_v[mask]
    reads = np.int64(0)
    writes = np.int64(0)
    sweeps = np.int64(0)
    residual = 0.0
    converged = False
    while sweeps < max_sweeps:
        sweeps += 1
        residual = 0.0
        for oi in range(ordering.shape[0]):
            s = ordering[oi]
            best = NEG_INF
            found = False
            for e in range(adm_ptr[s], adm_ptr[s + 1]):
                k = adm_act[e]
                if not (mask >> k) & 1:
                    continue
                found = True
                q = adm_rew[e]
                for i in range(t_ptr[e], t_ptr[e + 1]):
                    q += t_w[i] * own[t_idx[i]]
                reads += t_ptr[e + 1] - t_ptr[e]
                child = lattice_v[mask ^ (1 << k)]
                for i in range(f_ptr[e], f_ptr[e + 1]):
                    q += f_w[i] * child[f_idx[i]]
                reads += f_ptr[e + 1] - f_ptr[e]
                if q > best:
                    best = q
            if not found:
                best = lattice_v[0, s]
                reads += 1
            delta = abs(best - own[s])
            if delta > residual:
                residual = delta
            own[s] = best
            writes += 1
        if residual <= threshold:
            converged = True
            break
    return sweeps, reads, writes, residual, converged


@njit(cache=True, nogil=True)
def greedy_node(adm_ptr, adm_ctl, adm_act, adm_rew,
                t_ptr, t_idx, t_w, f_ptr, f_idx, f_w,
                lattice_v, mask):
    """Per-state greedy control for one lattice node; ``-1`` where stranded."""
    n = adm_ptr.shape[0] - 1
    own = lattice_v[mask]
    out = np.full(n, -1, dtype=np.int64)
    for s in range(n):
        best = NEG_INF
        for e in range(adm_ptr[s], adm_ptr[s + 1]):
            k = adm_act[e]
            if not (mask >> k) & 1:
                continue
            q = adm_rew[e]
            for i in range(t_ptr[e], t_ptr[e + 1]):
                q += t_w[i] * own[t_idx[i]]
            child = lattice_v[mask ^ (1 << k)]
            for i in range(f_ptr[e], f_ptr[e + 1]):
                q += f_w[i] * child[f_idx[i]]
            if q > best:
                best = q
                out[s] = adm_ctl[e]
    return out


@njit(cache=True, nogil=True)
def count_mono(adm_ptr, adm_act, t_ptr, f_ptr, num_states, num_actuators):
    """Entry/successor counts for the monolithic CSR (synthetic loops included)."""
    n_masks = 1 << num_actuators
    n_entries = np.int64(0)
    n_succ = np.int64(0)
    for mask in range(n_masks):
        for s in range(num_states):
            found = False
            for e in range(adm_ptr[s], adm_ptr[s + 1]):
                if (mask >> adm_act[e]) & 1:
                    found = True
                    n_entries += 1
                    n_succ += (t_ptr[e + 1] - t_ptr[e]) + (f_ptr[e + 1] - f_ptr[e])
            if not found:
                n_entries += 1
                n_succ += 1
    return n_entries, n_succ


@njit(cache=True, nogil=True)
def fill_mono(adm_ptr, adm_ctl, adm_act, adm_rew,
              t_ptr, t_idx, t_w, f_ptr, f_idx, f_w,
              row_min_reward, num_states, num_actuators, stranded_weight,
              ctl_ptr, ctl_id, ctl_rew, succ_ptr, succ_idx, succ_w):
    """Populate the monolithic CSR: meta-state ``mask * |S| + s``.

    No-failure successors stay in the same mask block; failure successors drop
    the acting control's actuator. Stranded meta-states get one synthetic
    self-loop entry (control id ``-1``) paying the state's minimum reward."""
    pe = np.int64(0)
    ps = np.int64(0)
    n_masks = 1 << num_actuators
    for mask in range(n_masks):
        base = mask * num_states
        for s in range(num_states):
            ctl_ptr[base + s] = pe
            found = False
            for e in range(adm_ptr[s], adm_ptr[s + 1]):
                k = adm_act[e]
                if not (mask >> k) & 1:
                    continue
                found = True
                ctl_id[pe] = adm_ctl[e]
                ctl_rew[pe] = adm_rew[e]
                succ_ptr[pe] = ps
                for i in range(t_ptr[e], t_ptr[e + 1]):
                    succ_idx[ps] = base + t_idx[i]
                    succ_w[ps] = t_w[i]
                    ps += 1
                child_base = (mask ^ (1 << k)) * num_states
                for i in range(f_ptr[e], f_ptr[e + 1]):
                    succ_idx[ps] = child_base + f_idx[i]
                    succ_w[ps] = f_w[i]
                    ps += 1
                pe += 1
            if not found:
                ctl_id[pe] = -1
                ctl_rew[pe] = row_min_reward[s]
                succ_ptr[pe] = ps
                succ_idx[ps] = base + s
                succ_w[ps] = stranded_weight
                ps += 1
                pe += 1
    ctl_ptr[n_masks * num_states] = pe
    succ_ptr[pe] = ps
