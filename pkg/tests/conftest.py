import numpy as np
import pytest

from famdp.core import Famdp, TransitionKernel
from famdp import gridworld as gw


def make_famdp(num_states, control_sets, nominal, malfunction, reward, reliability,
               discount, admissible=None, grid=None):
    num_controls = sum(len(c) for c in control_sets)
    return Famdp(
        num_states=num_states,
        num_actuators=len(control_sets),
        control_sets=tuple(tuple(c) for c in control_sets),
        nominal=TransitionKernel.from_dict(nominal, num_states, num_controls),
        malfunction=TransitionKernel.from_dict(malfunction, num_states, num_controls),
        reward=np.asarray(reward, dtype=float),
        reliability=np.asarray(reliability, dtype=float),
        discount=discount,
        admissible=admissible,
        grid=grid,
    )


@pytest.fixture(scope="session")
def t1():
    """One self-looping state, one actuator, R=1, rho=0.5, gamma=0.5.

    Analytic fixed points: V(s, {0}) = 2 and V(s, {}) = 2.
    """
    return make_famdp(
        1, ((0,),),
        {(0, 0): {0: 1.0}}, {(0, 0): {0: 1.0}},
        [[1.0]], [[0.5]], 0.5)


@pytest.fixture(scope="session")
def t4():
    """Two states: u moves s->g (rho 0.5, failures self-loop at s); g absorbs.

    Analytic fixed points: V(g, {0}) = 2, V(s, {0}) = 0.5, V(s, {}) = 0.
    """
    return make_famdp(
        2, ((0,),),
        {(0, 0): {1: 1.0}, (1, 0): {1: 1.0}},
        {(0, 0): {0: 1.0}, (1, 0): {1: 1.0}},
        [[0.0], [1.0]], [[0.5], [1.0]], 0.5)


@pytest.fixture(scope="session")
def bridge_spec():
    return gw.load_scenario("bridge6x6")


@pytest.fixture(scope="session")
def bridge(bridge_spec):
    return gw.build_gridworld(bridge_spec)


_TERRAIN_CHARS = "abc"


def random_gridworld(seed, width=None, height=None, m=None, gamma=0.99):
    """Seeded random scenario: mixed terrains, some water, reachable goal.

    Terrain parameters are drawn so generated instances keep values goal
    dominated (moderate reliabilities, costs in [-3, -1], large goal reward),
    the regime where losing actuators can only hurt.
    """
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence((seed, 71))))
    width = width or int(rng.integers(4, 7))
    height = height or int(rng.integers(4, 7))
    m = m or int(rng.integers(2, 5))
    names = [f"act{j}" for j in range(m)]
    # one shared step cost: every state's worst reward then equals the global
    # minimum, so the no-actuator value floors every node (losing actuators
    # can only hurt, the regime the model assumes)
    cost = float(rng.choice([-1.0, -2.0, -3.0]))
    terrains = {}
    for i, ch in enumerate(_TERRAIN_CHARS):
        table = {}
        allowed = rng.random(m) < 0.75
        if not allowed.any():
            allowed[int(rng.integers(0, m))] = True
        for j in range(m):
            if allowed[j]:
                p = float(rng.uniform(0.6, 0.95))
                table[names[j]] = gw.ActuatorTerrain(
                    reward=cost,
                    reliability=float(rng.uniform(0.6, 0.999)),
                    precision=p,
                    malfunction_precision=max(p - 0.25, 0.3))
        terrains[ch] = gw.Terrain(f"terrain-{ch}", table)
    terrains["W"] = gw.Terrain("water", {})

    while True:
        cells = rng.choice(list(_TERRAIN_CHARS), size=width * height)
        water = rng.random(width * height) < 0.08
        cells = np.where(water, "W", cells)
        goal = (int(rng.integers(0, width)), int(rng.integers(0, height)))
        cells[goal[1] * width + goal[0]] = _TERRAIN_CHARS[0]
        spec = gw.GridSpec(width, height, tuple(cells.tolist()), terrains,
                           tuple(names), goal, goal_reward=10.0, discount=gamma,
                           name=f"random-{seed}")
        try:
            famdp = gw.build_gridworld(spec)
        except gw.GridSpecError:
            continue
        return spec, famdp


@pytest.fixture(scope="session")
def random_instances():
    out = []
    for seed in range(6):
        out.append(random_gridworld(seed, m=2 + seed % 3))
    return out
