import json

import numpy as np
import pytest

import famdp
from famdp import gridworld as gw

from oracles import mono_fixed_point


def chain_spec(precision=1.0, reliability=1.0, step=-1.0, goal_reward=10.0,
               discount=0.5):
    terrains = {
        "r": gw.Terrain("road", {
            "a": gw.ActuatorTerrain(step, reliability, precision,
                                    max(precision - 0.25, 0.5))}),
    }
    return gw.GridSpec(2, 1, ("r", "r"), terrains, ("a",), goal=(1, 0),
                       goal_reward=goal_reward, discount=discount, name="chain")


class TestBuildGridworld:
    def test_bridge_dimensions(self, bridge):
        assert bridge.num_states == 36
        assert bridge.num_controls == 8
        assert bridge.num_actuators == 2

    def test_bridge_passes_validation(self, bridge):
        assert famdp.validate(bridge) == []

    def test_deterministic_chain_closed_form(self):
        spec = chain_spec()
        f = gw.build_gridworld(spec)
        assert famdp.validate(f) == []
        oracle = mono_fixed_point(f, tol=1e-12)
        # V(non-goal) = step + gamma * R_goal / (1 - gamma) = -1 + 0.5 * 20 = 9
        assert oracle[1][0] == pytest.approx(-1.0 + 0.5 * 20.0, abs=1e-9)
        assert oracle[1][1] == pytest.approx(20.0, abs=1e-9)

    def test_interior_cell_split(self, bridge):
        # (3, 4) is road with 4 legal neighbors; tracks precision 0.85
        s = 4 * 6 + 3
        idx, p = bridge.nominal.row(s, 4)  # tracks-up
        row = dict(zip(idx.tolist(), p.tolist()))
        assert row[3 * 6 + 3] == pytest.approx(0.85)
        for other in (5 * 6 + 3, 4 * 6 + 2, 4 * 6 + 4):
            assert row[other] == pytest.approx(0.05)

    def test_goal_state_absorbs_for_all_controls(self, bridge):
        goal = bridge.grid.goal_state
        for u in range(bridge.num_controls):
            idx, p = bridge.nominal.row(goal, u)
            assert idx.tolist() == [goal] and p.tolist() == [1.0]
            assert bridge.reliability[goal, u] == 1.0
            assert bridge.reward[goal, u] == 10.0

    def test_moves_into_water_not_admissible(self, bridge):
        # (4, 3) sits below the bridge; left neighbor (3, 3) is road but
        # (4, 2) above is the bridge: up is fine; (5, 2) right of bridge is
        # water so from (5, 3) moving up is not admissible
        s = 3 * 6 + 5
        adm = bridge.admissible_at(s)
        assert 0 not in adm  # wheels-up into water
        assert 4 not in adm  # tracks-up into water

    def test_entropy_extremes(self):
        # precision 1: deterministic row (zero entropy)
        f1 = gw.build_gridworld(chain_spec(precision=1.0))
        idx, p = f1.nominal.row(0, 3)  # right, the only legal move
        assert len(idx) == 1 and p[0] == 1.0
        # a 3x3 world, center has 4 neighbors; precision 1/4 gives uniform row
        terrains = {"r": gw.Terrain("road", {
            "a": gw.ActuatorTerrain(-1.0, 1.0, 0.25, 0.25)})}
        spec = gw.GridSpec(3, 3, tuple("r" * 9), terrains, ("a",), goal=(0, 0),
                           goal_reward=1.0, discount=0.5)
        f2 = gw.build_gridworld(spec)
        idx, p = f2.nominal.row(4, 0)
        assert sorted(idx.tolist()) == [1, 3, 5, 7]
        assert np.allclose(p, 0.25)
        entropy = -(p * np.log(p)).sum()
        assert entropy == pytest.approx(np.log(4))

    def test_inadmissible_rewards_filled_with_worst(self, bridge):
        # grass cell: wheels not allowed; fill equals the instance minimum
        s = 0  # (0,0) grass
        assert 0 not in bridge.admissible_at(s)
        assert bridge.reward[s, 0] == bridge.global_min_reward() == -2.0
        assert bridge.reliability[s, 0] == 0.0

    def test_goal_on_impassable_terrain_rejected(self):
        terrains = {
            "r": gw.Terrain("road", {"a": gw.ActuatorTerrain(-1, 1, 1, 0.5)}),
            "W": gw.Terrain("water", {}),
        }
        spec = gw.GridSpec(2, 1, ("r", "W"), terrains, ("a",), goal=(1, 0),
                           goal_reward=1.0, discount=0.5)
        with pytest.raises(gw.GridSpecError):
            gw.build_gridworld(spec)

    def test_isolated_passable_cell_rejected(self):
        terrains = {
            "r": gw.Terrain("road", {"a": gw.ActuatorTerrain(-1, 1, 1, 0.5)}),
            "W": gw.Terrain("water", {}),
        }
        spec = gw.GridSpec(3, 1, ("r", "W", "r"), terrains, ("a",), goal=(0, 0),
                           goal_reward=1.0, discount=0.5)
        with pytest.raises(gw.GridSpecError):
            gw.build_gridworld(spec)


class TestDuplicateActuators:
    def test_six_copies(self, bridge_spec):
        spec = gw.duplicate_actuators(bridge_spec, 12)
        assert len(spec.actuators) == 12
        assert spec.actuators[:2] == ("wheels", "tracks")
        assert spec.actuators[2] == "wheels@2"
        f = gw.build_gridworld(spec)
        assert f.num_actuators == 12 and f.num_controls == 48
        assert famdp.validate(f) == []

    def test_identity(self, bridge_spec):
        spec = gw.duplicate_actuators(bridge_spec, 2)
        assert spec.actuators == bridge_spec.actuators

    def test_non_multiple_rejected(self, bridge_spec):
        with pytest.raises(ValueError):
            gw.duplicate_actuators(bridge_spec, 3)

    def test_duplication_preserves_values_when_fully_reliable(self):
        # with reliability 1 everywhere, spares add nothing at the top node
        terrains = {"r": gw.Terrain("road", {
            "a": gw.ActuatorTerrain(-1.0, 1.0, 0.9, 0.6),
            "b": gw.ActuatorTerrain(-2.0, 1.0, 0.8, 0.6)})}
        spec = gw.GridSpec(3, 3, tuple("r" * 9), terrains, ("a", "b"),
                           goal=(2, 2), goal_reward=5.0, discount=0.9)
        eps = 1e-6
        base = famdp.solve_lattice(gw.build_gridworld(spec), eps)
        dup = famdp.solve_lattice(gw.build_gridworld(gw.duplicate_actuators(spec, 4)), eps)
        assert np.abs(base.values - dup.values).max() <= 2 * eps


class TestInitialValues:
    def test_step_cost_level(self):
        spec = chain_spec(step=-1.0, discount=0.99, goal_reward=10.0)
        f = gw.build_gridworld(spec)
        v = gw.initial_values(spec, f)
        assert v[0] == pytest.approx(-100.0)

    def test_goal_level(self):
        spec = chain_spec(step=-1.0, discount=0.99, goal_reward=10.0)
        f = gw.build_gridworld(spec)
        assert gw.initial_values(spec, f)[1] == pytest.approx(1000.0)

    def test_zero_min_reward(self):
        spec = chain_spec(step=0.0, discount=0.5)
        f = gw.build_gridworld(spec)
        assert gw.initial_values(spec, f)[0] == 0.0


class TestScenarioIO:
    def test_roundtrip(self, bridge_spec, tmp_path):
        data = gw.scenario_to_dict(bridge_spec)
        path = tmp_path / "copy.json"
        path.write_text(json.dumps(data))
        loaded = gw.load_scenario(path)
        assert loaded == bridge_spec

    def test_rejects_wrong_schema(self, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text(json.dumps({"schema": "nope"}))
        with pytest.raises(gw.GridSpecError):
            gw.load_scenario(path)

    def test_packaged_scenarios_load(self):
        for name in ("bridge6x6", "scaling_base"):
            spec = gw.load_scenario(name)
            assert famdp.validate(gw.build_gridworld(spec)) == []


def test_every_generated_instance_validates(random_instances):
    for spec, famdp_instance in random_instances:
        assert famdp.validate(famdp_instance) == []
