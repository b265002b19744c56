"""Planning toolkit for MDPs with failure-prone actuators.

Controls are partitioned among actuators that can permanently fail upon use.
The toolkit builds the monolithic augmented-state reduction, solves it with
asynchronous value iteration, solves the structured value-function-lattice
formulation with certified per-node stopping thresholds and hot-starting, and
ships instrumented ordering/scaling experiments plus a rollout simulator.
"""

from .core import (ActuatorSet, CapacityError, ConfigurationError, Famdp,
                   FamdpError, GridMeta, Policy, PolicyContractError,
                   ReliabilityProfile, TransitionKernel, ValueFunction,
                   Violation, admissible_controls, default_initial_values,
                   ensure_valid, reliability_profile, validate)
from .gridworld import (ActuatorTerrain, GridSpec, GridSpecError, Terrain,
                        build_gridworld, duplicate_actuators, initial_values,
                        load_scenario)
from .lattice import (Lattice, MissingChildError, NodeStats,
                      apply_node_operator, bottom_value, build_lattice,
                      contraction_factor, lattice_policy, local_backup,
                      node_threshold, solve_lattice)
from .mono import (MonoMdp, SolveResult, async_value_iteration, build_mono,
                   certified_threshold, error_gain, extract_greedy_policy)
from .orderings import (identity_ordering, manhattan_mono_ordering,
                        manhattan_ordering, oracle_ordering, random_ordering)
from .planners import LatticePlanner, MonoPlanner
from .sim import (PanglossianPolicy, ReturnEstimate, Trajectory,
                  TrajectoryStep, default_horizon, estimate_return,
                  panglossian_policy, simulate_trajectory, step,
                  trajectory_return)

__version__ = "0.1.0"

__all__ = [
    "ActuatorSet", "ActuatorTerrain", "CapacityError", "ConfigurationError",
    "Famdp", "FamdpError", "GridMeta", "GridSpec", "GridSpecError", "Lattice",
    "LatticePlanner", "MissingChildError", "MonoMdp", "MonoPlanner",
    "NodeStats", "PanglossianPolicy", "Policy", "PolicyContractError",
    "ReliabilityProfile", "ReturnEstimate", "SolveResult", "Terrain",
    "Trajectory", "TrajectoryStep", "TransitionKernel", "ValueFunction",
    "Violation", "admissible_controls", "apply_node_operator",
    "async_value_iteration", "bottom_value", "build_gridworld",
    "build_lattice", "build_mono", "certified_threshold",
    "contraction_factor", "default_horizon", "default_initial_values",
    "duplicate_actuators", "ensure_valid", "error_gain",
    "estimate_return", "extract_greedy_policy", "identity_ordering",
    "initial_values", "lattice_policy", "load_scenario", "local_backup",
    "manhattan_mono_ordering", "manhattan_ordering", "node_threshold",
    "oracle_ordering", "panglossian_policy", "random_ordering",
    "reliability_profile", "simulate_trajectory", "solve_lattice", "step",
    "trajectory_return", "validate",
]
