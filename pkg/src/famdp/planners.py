"""Estimator-style planner frontends.

``MonoPlanner`` and ``LatticePlanner`` wrap the solver modules behind the
familiar fit/predict surface: construct with hyperparameters, ``fit`` on a
problem instance, then read fitted attributes (``values_``, ``result_``,
``policy_``) or query controls with ``predict``. Parameters are stored
verbatim, so ``get_params``/``set_params``/cloning work as usual.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.exceptions import NotFittedError

from . import lattice as _lattice
from . import mono as _mono
from . import orderings as _orderings
from .core import ActuatorSet, Famdp, ensure_valid


def _as_pairs(states, operative):
    states = np.atleast_1d(np.asarray(states, dtype=np.int64))
    if isinstance(operative, ActuatorSet):
        masks = np.full(states.shape, operative.mask, dtype=np.int64)
    else:
        masks = np.atleast_1d(np.asarray(operative, dtype=np.int64))
        if masks.shape == (1,) and states.shape[0] > 1:
            masks = np.full(states.shape, masks[0])
    if masks.shape != states.shape:
        raise ValueError("states and operative masks must align")
    return states, masks


class _PlannerBase(BaseEstimator):
    def _check_fitted(self):
        if not hasattr(self, "result_"):
            raise NotFittedError(f"{type(self).__name__} is not fitted yet; call fit first")

    @property
    def policy_(self):
        self._check_fitted()
        if self._policy is None:
            self._policy = self._extract_policy()
        return self._policy

    def predict(self, states, operative):
        """Greedy control per (state, operative-mask) pair; -1 where stranded."""
        self._check_fitted()
        states, masks = _as_pairs(states, operative)
        policy = self.policy_
        out = np.empty(states.shape[0], dtype=np.int64)
        for i, (s, mask) in enumerate(zip(states.tolist(), masks.tolist())):
            u = policy.control(s, mask)
            out[i] = -1 if u is None else u
        return out if out.shape[0] > 1 else int(out[0])


class MonoPlanner(_PlannerBase):
    """Solve the monolithic augmented-state MDP by asynchronous value iteration.

    Parameters
    ----------
    epsilon : certified max-norm error of the fitted values.
    ordering : None (grid-aware default), "manhattan", "random", or an explicit
        permutation of the meta-states.
    seed : seed for the "random" ordering.
    meta_cap : refuse instances whose meta-state count exceeds this.
    """

    def __init__(self, epsilon: float = 1e-3, ordering=None, seed: int = 0,
                 meta_cap: int = _mono.DEFAULT_META_CAP, initial_values=None,
                 max_sweeps: int = _mono.MAX_SWEEPS):
        self.epsilon = epsilon
        self.ordering = ordering
        self.seed = seed
        self.meta_cap = meta_cap
        self.initial_values = initial_values
        self.max_sweeps = max_sweeps

    def _resolve_ordering(self, famdp: Famdp, num_meta: int) -> np.ndarray:
        spec = self.ordering
        if spec is None:
            if famdp.grid is not None:
                return _orderings.manhattan_mono_ordering(famdp)
            return _orderings.identity_ordering(num_meta)
        if isinstance(spec, str):
            if spec == "manhattan":
                return _orderings.manhattan_mono_ordering(famdp)
            if spec == "random":
                return _orderings.random_ordering(num_meta, self.seed)
            raise ValueError(f"unknown ordering {spec!r}")
        return np.asarray(spec, dtype=np.int64)

    def fit(self, famdp: Famdp) -> "MonoPlanner":
        ensure_valid(famdp)
        self.mono_ = _mono.build_mono(famdp, meta_cap=self.meta_cap)
        threshold = _mono.certified_threshold(self.epsilon, self.mono_.gamma_prime)
        order = self._resolve_ordering(famdp, self.mono_.num_meta)
        self.result_ = _mono.async_value_iteration(
            self.mono_, order, threshold,
            initial_values=self.initial_values, max_sweeps=self.max_sweeps)
        self.famdp_ = famdp
        self.values_ = self.result_.values
        self._policy = None
        return self

    def _extract_policy(self):
        return _mono.extract_greedy_policy(self.mono_, self.values_)

    def value(self, state: int, operative: ActuatorSet | int) -> float:
        self._check_fitted()
        mask = operative.mask if isinstance(operative, ActuatorSet) else int(operative)
        return float(self.values_[self.mono_.meta_index(state, mask)])


class LatticePlanner(_PlannerBase):
    """Solve the value-function lattice bottom-up with certified thresholds.

    Parameters
    ----------
    epsilon : certified max-norm error at every node.
    ordering : None (grid-aware default), "manhattan", "random", or a callable
        ``(node_mask, num_states) -> permutation``.
    hot_start : initialize each node from the max of its children.
    threads : solve nodes of one cardinality layer concurrently.
    """

    def __init__(self, epsilon: float = 1e-3, ordering=None, seed: int = 0,
                 hot_start: bool = False, node_cap: int = _lattice.DEFAULT_NODE_CAP,
                 initial_values=None, threads: int = 1,
                 max_sweeps: int = _mono.MAX_SWEEPS):
        self.epsilon = epsilon
        self.ordering = ordering
        self.seed = seed
        self.hot_start = hot_start
        self.node_cap = node_cap
        self.initial_values = initial_values
        self.threads = threads
        self.max_sweeps = max_sweeps

    def _resolve_factory(self, famdp: Famdp):
        spec = self.ordering
        if spec is None:
            if famdp.grid is not None:
                return _orderings.node_factory_manhattan(famdp)
            return _orderings.node_factory_identity()
        if isinstance(spec, str):
            if spec == "manhattan":
                return _orderings.node_factory_manhattan(famdp)
            if spec == "random":
                return _orderings.node_factory_random(self.seed)
            raise ValueError(f"unknown ordering {spec!r}")
        if callable(spec):
            return spec
        order = np.asarray(spec, dtype=np.int64)
        return lambda mask, n: order

    def fit(self, famdp: Famdp) -> "LatticePlanner":
        ensure_valid(famdp)
        self.result_ = _lattice.solve_lattice(
            famdp, self.epsilon,
            ordering_factory=self._resolve_factory(famdp),
            hot_start=self.hot_start,
            initial_values=self.initial_values,
            node_cap=self.node_cap,
            threads=self.threads,
            max_sweeps=self.max_sweeps)
        self.famdp_ = famdp
        self.values_ = self.result_.values
        self.node_values_ = self.result_.node_values
        self._policy = None
        return self

    def _extract_policy(self):
        return _lattice.lattice_policy(self.famdp_, self.result_)

    def value(self, state: int, operative: ActuatorSet | int) -> float:
        self._check_fitted()
        mask = operative.mask if isinstance(operative, ActuatorSet) else int(operative)
        return float(self.node_values_[mask, state])
