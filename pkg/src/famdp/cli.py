"""Command-line surface: validate, solve, simulate, bench and scenario tools.

Exit codes: 0 success, 1 validation failure, 2 capacity/configuration error,
64 usage error. Every output file embeds the invocation and seeds that
produced it; re-running that invocation reproduces the file except for the
``created_at`` timestamp.
"""

from __future__ import annotations

import argparse
import os
import sys
from dataclasses import asdict
from datetime import datetime, timezone
from pathlib import Path

from . import bench as _bench
from . import gridworld as gw
from . import io as _io
from . import orderings as _orderings
from .core import (CapacityError, ConfigurationError, Famdp, FamdpError,
                   Policy, validate)
from .gridworld import GridSpecError
from .planners import LatticePlanner, MonoPlanner
from .sim import (default_horizon, estimate_return, panglossian_policy,
                  simulate_trajectory, _rng_for)

SCENARIO_DIR_ENV = "FAMDP_SCENARIO_DIR"

EXIT_OK = 0
EXIT_INVALID = 1
EXIT_CONFIG = 2
EXIT_USAGE = 64


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _now() -> str:
    return datetime.now(timezone.utc).isoformat()


def _resolve_scenario(name: str) -> gw.GridSpec:
    path = Path(name)
    if path.exists():
        return gw.load_scenario(path)
    env_dir = os.environ.get(SCENARIO_DIR_ENV)
    if env_dir:
        candidate = Path(env_dir) / f"{name}.json"
        if candidate.exists():
            return gw.load_scenario(candidate)
    return gw.load_scenario(name)


def _load_input(path: str) -> tuple[Famdp, gw.GridSpec | None]:
    """Accept an instance file, a scenario file, or a packaged scenario name."""
    p = Path(path)
    if p.exists():
        data = _io.read_json(p)
        schema = data.get("schema")
        if schema == _io.INSTANCE_SCHEMA:
            return _io.famdp_from_dict(data), None
        if schema == gw.SCENARIO_SCHEMA:
            spec = gw.scenario_from_dict(data)
            return gw.build_gridworld(spec), spec
        raise ConfigurationError(f"unrecognized input schema {schema!r} in {path}")
    spec = _resolve_scenario(path)
    return gw.build_gridworld(spec), spec


def _check_valid(famdp: Famdp) -> list:
    return validate(famdp)


def _parse_ordering(text: str) -> tuple[str, int | None]:
    if text == "manhattan" or text == "oracle":
        return text, None
    if text.startswith("random:"):
        return "random", int(text.split(":", 1)[1])
    if text == "random":
        return "random", 0
    raise ConfigurationError(
        f"unknown ordering {text!r}; expected manhattan, oracle or random:SEED")


def _cmd_validate(args) -> int:
    famdp, _ = _load_input(args.instance)
    report = _check_valid(famdp)
    if report:
        for violation in report:
            print(str(violation))
        print(f"INVALID: {len(report)} violation(s)")
        return EXIT_INVALID
    print("OK")
    return EXIT_OK


def _make_planner(args, kind: str | None, seed: int | None):
    common = dict(epsilon=args.epsilon)
    if args.planner == "mono":
        return MonoPlanner(ordering=kind, seed=seed or 0,
                           meta_cap=args.meta_cap, **common)
    return LatticePlanner(ordering=kind, seed=seed or 0,
                          hot_start=args.planner == "lattice-hot",
                          node_cap=args.node_cap, threads=args.threads, **common)


def _cmd_solve(args) -> int:
    famdp, _ = _load_input(args.input)
    report = _check_valid(famdp)
    if report:
        for violation in report:
            print(str(violation), file=sys.stderr)
        return EXIT_INVALID
    kind, seed = _parse_ordering(args.ordering)

    if kind == "oracle":
        reference = _make_planner(args, None, None).fit(famdp)
        if args.planner == "mono":
            planner = _make_planner(args, None, None)
            planner.ordering = _orderings.oracle_ordering(reference.values_)
        else:
            planner = _make_planner(args, None, None)
            planner.ordering = _orderings.node_factory_oracle(reference.node_values_)
        planner.fit(famdp)
    else:
        planner = _make_planner(args, kind, seed).fit(famdp)

    result = planner.result_
    out = {
        "schema": _io.RESULTS_SCHEMA,
        "invocation": {"command": "solve", "argv": args.argv},
        "created_at": _now(),
        "planner": args.planner,
        "epsilon": args.epsilon,
        "ordering": {"kind": kind, "seed": seed},
        "num_actuators": famdp.num_actuators,
        "num_states": famdp.num_states,
        "gamma": famdp.discount,
    }
    if args.planner == "mono":
        out["gamma_prime"] = planner.mono_.gamma_prime
    out.update(_io.result_to_dict(result, planner.policy_))
    _io.write_json(args.output, out)
    print(f"solved: reads={result.reads} writes={result.writes} "
          f"sweeps={result.sweeps} residual={result.residual:.3e}")
    return EXIT_OK


def _cmd_simulate(args) -> int:
    famdp, spec = _load_input(args.input)
    report = _check_valid(famdp)
    if report:
        for violation in report:
            print(str(violation), file=sys.stderr)
        return EXIT_INVALID
    if args.panglossian:
        policy = panglossian_policy(famdp)
        policy_source = "panglossian"
    else:
        if not args.policy:
            raise ConfigurationError("--policy FILE or --panglossian is required")
        data = _io.read_json(args.policy)
        if data.get("policy") is None:
            raise ConfigurationError(f"{args.policy} carries no policy table")
        policy = Policy.from_records(famdp.num_actuators, data["policy"])
        policy_source = str(args.policy)
    start = args.start
    if start is None:
        start = famdp.grid.start_state if famdp.grid is not None else None
        if start is None:
            start = 0
    horizon = args.horizon or default_horizon(famdp)
    estimate = estimate_return(famdp, policy, start, horizon,
                               args.rollouts, args.seed, threads=args.threads)
    out = {
        "schema": _io.RESULTS_SCHEMA,
        "invocation": {"command": "simulate", "argv": args.argv},
        "created_at": _now(),
        "policy_source": policy_source,
        "start_state": start,
        "estimate": asdict(estimate),
        "truncation_tolerance": 1e-6,
    }
    if args.trajectories:
        dumps = []
        for i in range(args.trajectories):
            traj = simulate_trajectory(famdp, policy, start, horizon, _rng_for(args.seed, i))
            dumps.append({
                "rollout": i,
                "termination": traj.termination,
                "final_state": traj.final_state,
                "final_mask": traj.final_mask,
                "tail_reward": traj.tail_reward,
                "steps": [[st.state, st.mask, st.control, st.reward, st.failed]
                          for st in traj.steps],
            })
        out["trajectories"] = dumps
    _io.write_json(args.output, out)
    print(f"return: {estimate.mean:.4f} +/- {estimate.standard_error:.4f} "
          f"({estimate.rollouts} rollouts, horizon {estimate.horizon})")
    return EXIT_OK


def _cmd_bench_orderings(args) -> int:
    spec = _resolve_scenario(args.scenario)
    study = _bench.run_ordering_study(
        spec, samples=args.samples, base_seed=args.seed,
        epsilon=args.epsilon, gamma=args.gamma, meta_cap=args.meta_cap)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    _bench.write_study(
        study, out_dir / "ordering_study.csv", out_dir / "ordering_study_manifest.json",
        manifest_extra={"invocation": {"command": "bench-orderings", "argv": args.argv},
                        "created_at": _now()})
    print(f"wrote {len(study.records)} records to {out_dir / 'ordering_study.csv'}")
    return EXIT_OK


def _cmd_bench_scaling(args) -> int:
    spec = _resolve_scenario(args.scenario)
    m_values = tuple(int(x) for x in args.m.split(","))
    study = _bench.run_scaling_study(
        spec, m_values=m_values, epsilon=args.epsilon, gamma=args.gamma,
        meta_cap=args.meta_cap, threads=args.threads)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    _bench.write_study(
        study, out_dir / "scaling_study.csv", out_dir / "scaling_study_manifest.json",
        manifest_extra={"invocation": {"command": "bench-scaling", "argv": args.argv},
                        "created_at": _now()})
    print(f"wrote {len(study.records)} records to {out_dir / 'scaling_study.csv'}")
    return EXIT_OK


def _cmd_gen_grid(args) -> int:
    spec = _resolve_scenario(args.scenario)
    if args.duplicate:
        spec = gw.duplicate_actuators(spec, args.duplicate)
    famdp = gw.build_gridworld(spec)
    report = _check_valid(famdp)
    if report:
        for violation in report:
            print(str(violation), file=sys.stderr)
        return EXIT_INVALID
    data = _io.famdp_to_dict(famdp)
    data["invocation"] = {"command": "gen-grid", "argv": args.argv}
    data["created_at"] = _now()
    _io.write_json(args.output, data)
    print(f"wrote instance ({famdp.num_states} states, {famdp.num_actuators} actuators) "
          f"to {args.output}")
    return EXIT_OK


def build_parser() -> _Parser:
    parser = _Parser(prog="famdp", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="check a problem instance or scenario")
    p.add_argument("instance")
    p.set_defaults(func=_cmd_validate)

    p = sub.add_parser("solve", help="solve an instance with a chosen planner")
    p.add_argument("--planner", choices=["mono", "lattice", "lattice-hot"], required=True)
    p.add_argument("--epsilon", type=float, default=1e-3)
    p.add_argument("--ordering", default="manhattan",
                   help="manhattan | oracle | random:SEED")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--out", dest="output", required=True)
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--meta-cap", type=int, default=4096)
    p.add_argument("--node-cap", type=int, default=1 << 16)
    p.set_defaults(func=_cmd_solve)

    p = sub.add_parser("simulate", help="estimate a policy's return by Monte Carlo")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--policy", help="results file carrying the policy table")
    p.add_argument("--panglossian", action="store_true",
                   help="simulate the failure-ignoring re-planning baseline")
    p.add_argument("--rollouts", type=int, default=10000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--horizon", type=int)
    p.add_argument("--start", type=int)
    p.add_argument("--trajectories", type=int, default=0)
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--out", dest="output", required=True)
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser("bench-orderings", help="backup-ordering study")
    p.add_argument("--scenario", default="bridge6x6")
    p.add_argument("--samples", type=int, default=500)
    p.add_argument("--gamma", type=float, default=0.99)
    p.add_argument("--epsilon", type=float, default=1e-3)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--meta-cap", type=int, default=4096)
    p.add_argument("--out-dir", default="bench_out")
    p.set_defaults(func=_cmd_bench_orderings)

    p = sub.add_parser("bench-scaling", help="actuator-duplication scaling study")
    p.add_argument("--scenario", default="scaling_base")
    p.add_argument("--m", default="2,4,6,8,10,12")
    p.add_argument("--gamma", type=float, default=0.99)
    p.add_argument("--epsilon", type=float, default=1e-3)
    p.add_argument("--meta-cap", type=int, default=4096)
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--out-dir", default="bench_out")
    p.set_defaults(func=_cmd_bench_scaling)

    p = sub.add_parser("gen-grid", help="compile a scenario into an instance file")
    p.add_argument("--scenario", required=True)
    p.add_argument("--duplicate", type=int,
                   help="replicate the base actuators up to this count")
    p.add_argument("--out", dest="output", required=True)
    p.set_defaults(func=_cmd_gen_grid)

    return parser


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    args = parser.parse_args(argv)
    args.argv = argv
    try:
        return args.func(args)
    except (CapacityError, ConfigurationError, GridSpecError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except FamdpError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (ValueError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    raise SystemExit(main())
