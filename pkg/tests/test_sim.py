import numpy as np
import pytest

import famdp
from famdp.core import ActuatorSet, Policy, PolicyContractError
from famdp.sim import (TERM_ABSORBED, default_horizon,
                       estimate_return, panglossian_policy,
                       simulate_trajectory, step, trajectory_return, _rng_for)

from conftest import make_famdp


def rng(seed=0):
    return np.random.Generator(np.random.PCG64(seed))


class TestStep:
    def test_fully_reliable_never_fails(self, t4):
        f = make_famdp(
            1, ((0,),),
            {(0, 0): {0: 1.0}}, {(0, 0): {0: 1.0}},
            [[1.0]], [[1.0]], 0.5)
        for _ in range(100):
            _, operative, _, failed = step(f, 0, ActuatorSet.full(1), 0, rng(1))
            assert not failed and operative.cardinality == 1

    def test_zero_reliability_always_fails(self, t1):
        f = make_famdp(
            1, ((0,),),
            {(0, 0): {0: 1.0}}, {(0, 0): {0: 1.0}},
            [[1.0]], [[0.0]], 0.5)
        _, operative, _, failed = step(f, 0, ActuatorSet.full(1), 0, rng(2))
        assert failed and operative.cardinality == 0

    def test_empirical_failure_frequency(self, t4):
        g = rng(42)
        failures = 0
        n = 100_000
        for _ in range(n):
            _, _, _, failed = step(t4, 0, 1, 0, g)
            failures += failed
        assert failures / n == pytest.approx(0.5, abs=0.005)

    def test_failed_actuator_rejected(self, t4):
        with pytest.raises(PolicyContractError):
            step(t4, 0, 0, 0, rng())

    def test_inadmissible_control_rejected(self, bridge):
        # wheels-up from a grass cell
        with pytest.raises(PolicyContractError):
            step(bridge, 0, 3, 0, rng())

    def test_reward_independent_of_failure(self, t1):
        g = rng(3)
        rewards = {step(t1, 0, 1, 0, g)[2] for _ in range(50)}
        assert rewards == {1.0}


class TestEstimateReturn:
    def test_t1_analytic(self, t1):
        policy = Policy(1, {(0, 1): 0})
        est = estimate_return(t1, policy, 0, horizon=40, rollouts=10_000, seed=5)
        assert abs(est.mean - 2.0) <= 3 * est.standard_error + 1e-9

    def test_t4_analytic(self, t4):
        policy = Policy(1, {(0, 1): 0, (1, 1): 0})
        est = estimate_return(t4, policy, 0, horizon=40, rollouts=10_000, seed=6)
        assert abs(est.mean - 0.5) <= 3 * est.standard_error + 1e-9

    def test_zero_reward_instance(self):
        f = make_famdp(
            1, ((0,),),
            {(0, 0): {0: 1.0}}, {(0, 0): {0: 1.0}},
            [[0.0]], [[0.5]], 0.5)
        policy = Policy(1, {(0, 1): 0})
        est = estimate_return(f, policy, 0, horizon=30, rollouts=100, seed=0)
        assert est.mean == 0.0 and est.standard_error == 0.0

    def test_undefined_reachable_entry_raises(self, t4):
        policy = Policy(1, {(0, 1): 0})  # no entry for the goal
        with pytest.raises(PolicyContractError):
            estimate_return(t4, policy, 0, horizon=40, rollouts=200, seed=1)

    def test_seeded_determinism(self, bridge):
        planner = famdp.LatticePlanner(epsilon=1e-3).fit(bridge)
        est1 = estimate_return(bridge, planner.policy_, 32, 300, 500, seed=9)
        est2 = estimate_return(bridge, planner.policy_, 32, 300, 500, seed=9)
        assert est1 == est2

    def test_parallel_equals_sequential(self, bridge):
        planner = famdp.LatticePlanner(epsilon=1e-3).fit(bridge)
        seq = estimate_return(bridge, planner.policy_, 32, 300, 400, seed=9)
        par = estimate_return(bridge, planner.policy_, 32, 300, 400, seed=9, threads=4)
        assert seq == par


class TestTrajectories:
    def test_masks_never_grow(self, bridge):
        planner = famdp.LatticePlanner(epsilon=1e-3).fit(bridge)
        for i in range(30):
            traj = simulate_trajectory(bridge, planner.policy_, 32, 300, _rng_for(4, i))
            masks = [st.mask for st in traj.steps] + [traj.final_mask]
            for a, b in zip(masks, masks[1:]):
                assert b & ~a == 0

    def test_failure_removes_exactly_the_acting_actuator(self, bridge):
        planner = famdp.LatticePlanner(epsilon=1e-3).fit(bridge)
        seen_failure = False
        for i in range(200):
            traj = simulate_trajectory(bridge, planner.policy_, 32, 300, _rng_for(11, i))
            mask = traj.start_mask
            for st in traj.steps:
                assert st.mask == mask
                if st.failed:
                    seen_failure = True
                    mask = mask & ~(1 << int(bridge.actuator_of[st.control]))
            assert traj.final_mask == mask
        assert seen_failure

    def test_goal_absorbs(self, t4):
        policy = Policy(1, {(0, 1): 0, (1, 1): 0})
        # with rho=0.5 some rollout reaches g; absorbed there
        traj = simulate_trajectory(t4, policy, 1, 50, rng(0))
        assert traj.termination == TERM_ABSORBED
        assert traj.tail_reward == 1.0
        assert trajectory_return(t4, traj) == pytest.approx(2.0 * (1 - 0.5 ** 50))

    def test_stranded_accrues_minimum_reward(self, t1):
        # force a failure (rho=0.5) then strand on the single state
        policy = Policy(1, {(0, 1): 0})
        returns = []
        for i in range(200):
            traj = simulate_trajectory(t1, policy, 0, 40, _rng_for(2, i))
            returns.append(trajectory_return(t1, traj))
        # every trajectory accrues reward 1 per step regardless of failure
        assert np.allclose(returns, 2.0 * (1 - 0.5 ** 40))

    def test_replay_is_deterministic(self, bridge):
        planner = famdp.LatticePlanner(epsilon=1e-3).fit(bridge)
        a = simulate_trajectory(bridge, planner.policy_, 32, 300, _rng_for(8, 3))
        b = simulate_trajectory(bridge, planner.policy_, 32, 300, _rng_for(8, 3))
        assert a == b


class TestPanglossian:
    def test_t4_matches_optimal(self, t4):
        pang = panglossian_policy(t4)
        assert pang.control(0, 1) == 0
        assert pang.control(1, 1) == 0
        assert pang.control(0, 0) is None  # stranded slice

    def test_fully_reliable_instance_equal_returns(self):
        terrains = {"r": famdp.Terrain("road", {
            "a": famdp.ActuatorTerrain(-1.0, 1.0, 0.9, 0.6),
            "b": famdp.ActuatorTerrain(-2.0, 1.0, 0.8, 0.55)})}
        from famdp.gridworld import GridSpec, build_gridworld
        spec = GridSpec(4, 4, tuple("r" * 16), terrains, ("a", "b"),
                        goal=(3, 3), goal_reward=5.0, discount=0.9)
        f = build_gridworld(spec)
        aware = famdp.LatticePlanner(epsilon=1e-6).fit(f).policy_
        pang = panglossian_policy(f)
        ea = estimate_return(f, aware, 0, 200, 3000, seed=1)
        ep = estimate_return(f, pang, 0, 200, 3000, seed=1)
        assert abs(ea.mean - ep.mean) <= 3 * (ea.standard_error + ep.standard_error) + 1e-9

    def test_slices_are_cached(self, bridge):
        pang = panglossian_policy(bridge)
        pang.control(32, 3)
        assert 3 in pang._slices
        pang.control(32, 1)
        assert set(pang._slices) == {3, 1}


def test_default_horizon(bridge):
    h = default_horizon(bridge)
    assert bridge.discount ** h <= 1e-6
    assert bridge.discount ** (h - 1) > 1e-6
