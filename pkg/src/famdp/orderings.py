"""Backup orderings for asynchronous value iteration.

All randomness flows through numpy's PCG64 seeded via SeedSequence, so a
given (seed, node) pair yields the same permutation on every platform. The
scheme is versioned for bench manifests.
"""

from __future__ import annotations

import numpy as np

from .core import ConfigurationError, Famdp, GridMeta

GENERATOR_NAME = "pcg64-seedseq"
GENERATOR_VERSION = 1


def _rng(*entropy: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(entropy)))


def random_ordering(n: int, seed: int) -> np.ndarray:
    """Uniform random permutation of ``0..n-1``; same seed, same permutation."""
    if n < 1:
        raise ValueError("n must be at least 1")
    return _rng(seed).permutation(n).astype(np.int64)


def _grid_of(source) -> GridMeta:
    grid = source.grid if isinstance(source, Famdp) else source
    if not isinstance(grid, GridMeta):
        raise ConfigurationError("Manhattan ordering needs a gridworld instance")
    return grid


def manhattan_ordering(source: Famdp | GridMeta) -> np.ndarray:
    """States by ascending Manhattan distance to the goal, ties row-major.

    The goal comes first so value propagates outward along the sweep.
    """
    grid = _grid_of(source)
    n = grid.width * grid.height
    states = np.arange(n)
    dist = np.abs(states % grid.width - grid.goal[0]) + np.abs(states // grid.width - grid.goal[1])
    return np.lexsort((states, dist)).astype(np.int64)


def manhattan_mono_ordering(source: Famdp | GridMeta, num_actuators: int | None = None) -> np.ndarray:
    """Meta-state ordering: mask blocks by ascending cardinality then mask
    value, each block swept goal-outward."""
    grid = _grid_of(source)
    if num_actuators is None:
        if not isinstance(source, Famdp):
            raise ValueError("num_actuators required when not passing an instance")
        num_actuators = source.num_actuators
    local = manhattan_ordering(grid)
    n = local.shape[0]
    masks = sorted(range(1 << num_actuators), key=lambda x: (x.bit_count(), x))
    out = np.empty(n * len(masks), dtype=np.int64)
    for i, mask in enumerate(masks):
        out[i * n:(i + 1) * n] = mask * n + local
    return out


def oracle_ordering(values: np.ndarray) -> np.ndarray:
    """Indices by descending value (highest first), ties index-ascending."""
    v = np.asarray(values, dtype=np.float64)
    return np.argsort(-v, kind="stable").astype(np.int64)


def identity_ordering(n: int) -> np.ndarray:
    return np.arange(n, dtype=np.int64)


# Per-node ordering factories for the lattice solver.

def node_factory_identity():
    def factory(mask: int, n: int) -> np.ndarray:
        return identity_ordering(n)
    return factory


def node_factory_manhattan(source: Famdp | GridMeta):
    order = manhattan_ordering(source)

    def factory(mask: int, n: int) -> np.ndarray:
        return order
    return factory


def node_factory_random(base_seed: int):
    """Independent permutation per node, reproducible from (seed, node mask)."""
    def factory(mask: int, n: int) -> np.ndarray:
        return _rng(base_seed, mask).permutation(n).astype(np.int64)
    return factory


def node_factory_oracle(node_values: np.ndarray):
    """Per-node oracle order from a previously solved lattice's node values."""
    def factory(mask: int, n: int) -> np.ndarray:
        return oracle_ordering(node_values[mask])
    return factory
