"""JSON interchange for instances and solve results.

Instances serialize with sparse kernels as flat
``[state, control, successor, probability]`` records; rewards, reliabilities
and per-state admissible sets are explicit. Instances built from scenarios
carry their grid metadata so grid-aware tooling keeps working after a round
trip. All writers sort keys, so identical data produces identical bytes.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .core import Famdp, GridMeta, Policy, TransitionKernel
from .mono import SolveResult

INSTANCE_SCHEMA = "famdp-instance/1"
RESULTS_SCHEMA = "famdp-results/1"


def famdp_to_dict(famdp: Famdp) -> dict:
    grid = None
    if famdp.grid is not None:
        grid = {
            "width": famdp.grid.width,
            "height": famdp.grid.height,
            "goal": list(famdp.grid.goal),
            "start": list(famdp.grid.start) if famdp.grid.start else None,
            "name": famdp.grid.name,
        }
    return {
        "schema": INSTANCE_SCHEMA,
        "num_states": famdp.num_states,
        "num_actuators": famdp.num_actuators,
        "control_sets": [list(c) for c in famdp.control_sets],
        "nominal": famdp.nominal.to_records(),
        "malfunction": famdp.malfunction.to_records(),
        "reward": famdp.reward.tolist(),
        "reliability": famdp.reliability.tolist(),
        "discount": famdp.discount,
        "admissible": [list(famdp.admissible_at(s)) for s in range(famdp.num_states)],
        "grid": grid,
    }


def famdp_from_dict(data: dict) -> Famdp:
    if data.get("schema") != INSTANCE_SCHEMA:
        raise ValueError(f"expected instance schema {INSTANCE_SCHEMA!r}, "
                         f"found {data.get('schema')!r}")
    num_states = int(data["num_states"])
    control_sets = tuple(tuple(int(u) for u in c) for c in data["control_sets"])
    num_controls = sum(len(c) for c in control_sets)
    grid = None
    if data.get("grid"):
        g = data["grid"]
        grid = GridMeta(int(g["width"]), int(g["height"]), tuple(g["goal"]),
                        tuple(g["start"]) if g.get("start") else None, g.get("name"))
    return Famdp(
        num_states=num_states,
        num_actuators=int(data["num_actuators"]),
        control_sets=control_sets,
        nominal=TransitionKernel.from_records(data["nominal"], num_states, num_controls),
        malfunction=TransitionKernel.from_records(data["malfunction"], num_states, num_controls),
        reward=np.asarray(data["reward"], dtype=np.float64),
        reliability=np.asarray(data["reliability"], dtype=np.float64),
        discount=float(data["discount"]),
        admissible=tuple(tuple(int(u) for u in row) for row in data["admissible"]),
        grid=grid,
    )


def write_json(path: str | Path, data: dict) -> None:
    Path(path).write_text(json.dumps(data, indent=2, sort_keys=True) + "\n")


def read_json(path: str | Path) -> dict:
    return json.loads(Path(path).read_text())


def result_to_dict(result: SolveResult, policy: Policy | None = None) -> dict:
    policy = policy if policy is not None else result.policy
    out = {
        "values": np.asarray(result.values).tolist(),
        "policy": policy.to_records() if policy is not None else None,
        "reads": result.reads,
        "writes": result.writes,
        "total_ops": result.total_ops,
        "sweeps": result.sweeps,
        "residual": result.residual,
    }
    if result.nodes is not None:
        out["nodes"] = [
            {"actuator_mask": st.mask, "sweeps": st.sweeps, "reads": st.reads,
             "writes": st.writes, "residual": st.residual}
            for st in result.nodes
        ]
    return out
