"""Instrumented experiment runners: backup-ordering and actuator-scaling studies.

Records carry exact read/write counts per solve; nothing is timed. Every
record is reproducible from (scenario, planner, ordering kind, seed, epsilon),
and studies re-run with the same base seed byte-identically.
"""

from __future__ import annotations

import csv
import hashlib
import io as _stdio
import json
from dataclasses import dataclass, replace
from pathlib import Path

from . import gridworld as gw
from . import lattice as _lattice
from . import mono as _mono
from . import orderings as _orderings
from .core import CapacityError, Famdp

SCHEMA_VERSION = "famdp-bench/1"
CSV_COLUMNS = ["schema", "study", "planner", "instance", "m", "num_states",
               "gamma", "epsilon", "ordering_kind", "ordering_seed",
               "reads", "writes", "total_ops", "sweeps", "status"]

PLANNERS = ("mono", "lattice", "lattice_hot")


@dataclass(frozen=True)
class BenchRecord:
    study: str
    planner: str
    instance: str
    m: int
    num_states: int
    gamma: float
    epsilon: float
    ordering_kind: str
    ordering_seed: int | None
    reads: int | None
    writes: int | None
    sweeps: int | None
    status: str = "ok"

    @property
    def total_ops(self) -> int | None:
        if self.reads is None or self.writes is None:
            return None
        return self.reads + self.writes

    def to_row(self) -> list:
        blank = lambda v: "" if v is None else v
        return [SCHEMA_VERSION, self.study, self.planner, self.instance, self.m,
                self.num_states, self.gamma, self.epsilon, self.ordering_kind,
                blank(self.ordering_seed), blank(self.reads), blank(self.writes),
                blank(self.total_ops), blank(self.sweeps), self.status]


@dataclass
class StudyOutput:
    records: list[BenchRecord]
    manifest: dict
    # the hypothetical-minimum run for the mono planner (ordering study only);
    # reported via the manifest, drawn as a reference line by the plot tool
    mono_oracle: BenchRecord | None = None


def scenario_hash(spec: gw.GridSpec) -> str:
    canonical = json.dumps(gw.scenario_to_dict(spec), sort_keys=True)
    return hashlib.sha256(canonical.encode()).hexdigest()


def _apply_gamma(spec: gw.GridSpec, gamma: float | None) -> gw.GridSpec:
    if gamma is None or gamma == spec.discount:
        return spec
    return replace(spec, discount=gamma)


def _record(study: str, planner: str, instance: str, famdp: Famdp, epsilon: float,
            kind: str, seed: int | None, result: _mono.SolveResult) -> BenchRecord:
    return BenchRecord(study, planner, instance, famdp.num_actuators,
                       famdp.num_states, famdp.discount, epsilon, kind, seed,
                       result.reads, result.writes, result.sweeps)


def _solve_mono(mdp: _mono.MonoMdp, epsilon: float, ordering, init) -> _mono.SolveResult:
    threshold = _mono.certified_threshold(epsilon, mdp.gamma_prime)
    return _mono.async_value_iteration(mdp, ordering, threshold, initial_values=init)


def _mono_init(mdp: _mono.MonoMdp, init):
    import numpy as np
    return np.tile(init, 1 << mdp.num_actuators)


def run_ordering_study(spec: gw.GridSpec, planners=PLANNERS, samples: int = 500,
                       base_seed: int = 0, epsilon: float = 1e-3,
                       gamma: float | None = 0.99,
                       meta_cap: int = _mono.DEFAULT_META_CAP) -> StudyOutput:
    """Per planner: ``samples`` seeded random orderings plus one Manhattan run.

    The mono planner additionally gets a hypothetical-minimum run: the
    Manhattan solve's values define a descending-value order under which the
    problem is re-solved; that run is reported separately (``mono_oracle``),
    not as a CSV record.
    """
    spec = _apply_gamma(spec, gamma)
    famdp = gw.build_gridworld(spec)
    init = gw.initial_values(spec, famdp)
    instance = spec.name or "scenario"
    records: list[BenchRecord] = []
    oracle_record = None

    for planner in planners:
        if planner == "mono":
            mdp = _mono.build_mono(famdp, meta_cap=meta_cap)
            minit = _mono_init(mdp, init)
            for i in range(samples):
                seed = base_seed + i
                res = _solve_mono(mdp, epsilon, _orderings.random_ordering(mdp.num_meta, seed), minit)
                records.append(_record("orderings", planner, instance, famdp, epsilon,
                                       "random", seed, res))
            man = _solve_mono(mdp, epsilon, _orderings.manhattan_mono_ordering(famdp), minit)
            records.append(_record("orderings", planner, instance, famdp, epsilon,
                                   "manhattan", None, man))
            oracle_order = _orderings.oracle_ordering(man.values)
            res = _solve_mono(mdp, epsilon, oracle_order, minit)
            oracle_record = _record("orderings", planner, instance, famdp, epsilon,
                                    "oracle", None, res)
        elif planner in ("lattice", "lattice_hot"):
            hot = planner == "lattice_hot"
            for i in range(samples):
                seed = base_seed + i
                res = _lattice.solve_lattice(famdp, epsilon,
                                             _orderings.node_factory_random(seed),
                                             hot_start=hot, initial_values=init)
                records.append(_record("orderings", planner, instance, famdp, epsilon,
                                       "random", seed, res))
            res = _lattice.solve_lattice(famdp, epsilon,
                                         _orderings.node_factory_manhattan(famdp),
                                         hot_start=hot, initial_values=init)
            records.append(_record("orderings", planner, instance, famdp, epsilon,
                                   "manhattan", None, res))
        else:
            raise ValueError(f"unknown planner {planner!r}")

    manifest = {
        "schema": "famdp-bench-manifest/1",
        "study": "orderings",
        "scenario": instance,
        "scenario_sha256": scenario_hash(spec),
        "gamma": spec.discount,
        "epsilon": epsilon,
        "base_seed": base_seed,
        "samples": samples,
        "planners": list(planners),
        "generator": {"name": _orderings.GENERATOR_NAME,
                      "version": _orderings.GENERATOR_VERSION},
        "mono_oracle": None if oracle_record is None else {
            "reads": oracle_record.reads, "writes": oracle_record.writes,
            "total_ops": oracle_record.total_ops, "sweeps": oracle_record.sweeps,
        },
    }
    return StudyOutput(records, manifest, oracle_record)


def run_scaling_study(spec: gw.GridSpec, m_values=(2, 4, 6, 8, 10, 12),
                      planners=PLANNERS, epsilon: float = 1e-3,
                      gamma: float | None = 0.99, ordering: str = "manhattan",
                      base_seed: int = 0,
                      meta_cap: int = _mono.DEFAULT_META_CAP,
                      node_cap: int = _lattice.DEFAULT_NODE_CAP,
                      threads: int = 1) -> StudyOutput:
    """Duplicate the base actuators up to each requested count and solve.

    Mono runs whose meta-state count exceeds ``meta_cap`` are emitted as
    explicit ``infeasible`` records with empty counts.
    """
    spec = _apply_gamma(spec, gamma)
    base_name = spec.name or "scenario"
    records: list[BenchRecord] = []
    for m in m_values:
        spec_m = gw.duplicate_actuators(spec, m)
        famdp = gw.build_gridworld(spec_m)
        init = gw.initial_values(spec_m, famdp)
        instance = f"{base_name}:m={m}"
        if ordering == "manhattan":
            factory = _orderings.node_factory_manhattan(famdp)
            mono_order = lambda mdp: _orderings.manhattan_mono_ordering(famdp)
            kind, seed = "manhattan", None
        elif ordering == "random":
            factory = _orderings.node_factory_random(base_seed)
            mono_order = lambda mdp: _orderings.random_ordering(mdp.num_meta, base_seed)
            kind, seed = "random", base_seed
        else:
            raise ValueError(f"unsupported scaling ordering {ordering!r}")
        for planner in planners:
            if planner == "mono":
                try:
                    mdp = _mono.build_mono(famdp, meta_cap=meta_cap)
                except CapacityError:
                    records.append(BenchRecord("scaling", planner, instance, m,
                                               famdp.num_states, famdp.discount, epsilon,
                                               kind, seed, None, None, None,
                                               status="infeasible"))
                    continue
                res = _solve_mono(mdp, epsilon, mono_order(mdp), _mono_init(mdp, init))
                records.append(_record("scaling", planner, instance, famdp, epsilon,
                                       kind, seed, res))
            elif planner in ("lattice", "lattice_hot"):
                res = _lattice.solve_lattice(famdp, epsilon, factory,
                                             hot_start=planner == "lattice_hot",
                                             initial_values=init, node_cap=node_cap,
                                             threads=threads)
                records.append(_record("scaling", planner, instance, famdp, epsilon,
                                       kind, seed, res))
            else:
                raise ValueError(f"unknown planner {planner!r}")

    manifest = {
        "schema": "famdp-bench-manifest/1",
        "study": "scaling",
        "scenario": base_name,
        "scenario_sha256": scenario_hash(spec),
        "gamma": spec.discount,
        "epsilon": epsilon,
        "base_seed": base_seed,
        "m_values": list(m_values),
        "planners": list(planners),
        "ordering": ordering,
        "meta_cap": meta_cap,
        "generator": {"name": _orderings.GENERATOR_NAME,
                      "version": _orderings.GENERATOR_VERSION},
        "mono_oracle": None,
    }
    return StudyOutput(records, manifest)


def records_to_csv(records: list[BenchRecord]) -> str:
    buf = _stdio.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for rec in records:
        writer.writerow(rec.to_row())
    return buf.getvalue()


def write_study(study: StudyOutput, csv_path: str | Path,
                manifest_path: str | Path | None = None,
                manifest_extra: dict | None = None) -> None:
    Path(csv_path).write_text(records_to_csv(study.records))
    if manifest_path is not None:
        manifest = dict(study.manifest)
        if manifest_extra:
            manifest.update(manifest_extra)
        Path(manifest_path).write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
