"""Command line interface: ``python -m krnav <command> ...``.

Commands
    validate   world validity and navigation-function condition certificates
    simulate   gradient flow (optionally switched) from a world file
    batch      seeded Monte-Carlo scenarios; per-trial trajectories + summary
    adjust-k   adjustable-order descent
    dynamics   double integrator or differential-drive robot

Exit status is 0 on success, 1 when ``validate`` rejects a world, 2 on
malformed input and 3 when a random world, goal or start cannot be generated.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from krnav import io
from krnav.conditions import check_ellipsoid, check_general, max_condition_number
from krnav.dynamics import (
    DiffDriveGains,
    DiffDriveState,
    SimConfig,
    diffdrive_dynamic_sim,
    diffdrive_kinematic_sim,
    double_integrator_sim,
)
from krnav.errors import GenerationError, InputError, KRNavError
from krnav.experiments import (
    COUNTEREXAMPLE_STARTS,
    DIFFDRIVE_SCENE,
    DOUBLE_INTEGRATOR_SCENE,
    ExperimentSpec,
    Scenario,
    run_batch,
    run_counterexample,
    run_violated_batch,
)
from krnav.navigate import FlowConfig, StepSchedule, adjustable_k, gradient_flow, switched_flow
from krnav.potential import PotentialConfig
from krnav.world import validate_world

EXIT_INPUT = 2
EXIT_GENERATION = 3


def _scene(path, need_objective=True):
    world, obj, start = io.load_scene(path)
    if need_objective and obj is None:
        raise InputError(f"{path} has no objective")
    return world, obj, start


def _start(args, start):
    if args.x0 is not None:
        return np.asarray(args.x0, dtype=float)
    if start is None:
        raise InputError("no start point: pass --x0 or add 'start' to the world file")
    return start


def _flow(args) -> FlowConfig:
    kw = {"seed": args.seed}
    if args.eps is not None:
        kw["eps0"] = args.eps
    if args.max_iters is not None:
        kw["max_iters"] = args.max_iters
    if getattr(args, "schedule", None):
        kw["schedule"] = StepSchedule(args.schedule)
    return FlowConfig(**kw)


def _write_traj(out, traj):
    if out is None:
        return
    out = Path(out)
    out.parent.mkdir(parents=True, exist_ok=True)
    io.write_trajectory(out, traj)
    if traj.discoveries:
        io.write_discoveries(io.discoveries_path(out), traj)


def _report(traj, obj) -> dict:
    return {
        "verdict": traj.verdict.value,
        "k": traj.k,
        "steps": traj.steps,
        "final": traj.final.tolist(),
        "final_dist": float(np.linalg.norm(traj.final - obj.x_star)),
        "critical_kind": traj.critical_kind.value if traj.critical_kind else None,
        "discoveries": [[t, i] for t, i in traj.discoveries],
    }


def cmd_validate(args) -> int:
    world, obj, _ = io.load_scene(args.world, validate=False)
    report = validate_world(world)
    out = {
        "valid": report.ok,
        "violations": [
            {"obstacle": v.i, "against": v.j, "witness": v.witness.tolist(), "value": v.value}
            for v in report.violations
        ],
    }
    if report.ok and obj is not None:
        out["general"] = check_general(world, obj, args.samples).to_dict()
        if all(ob.kind == "ellipsoid" for ob in world.obstacles):
            out["ellipsoid"] = check_ellipsoid(world, obj).to_dict()
            out["max_condition_number"] = max_condition_number(world, obj.x_star)
    print(json.dumps(out, indent=2))
    return 0 if report.ok else 1


def cmd_simulate(args) -> int:
    world, obj, start = _scene(args.world)
    x0 = _start(args, start)
    cfg = PotentialConfig(args.k)
    flow = _flow(args)
    if args.switched:
        traj = switched_flow(world, obj, cfg, flow, args.c, x0)
    else:
        traj = gradient_flow(world, obj, cfg, flow, x0)
    _write_traj(args.out, traj)
    print(json.dumps(_report(traj, obj), indent=2))
    return 0


def cmd_adjust_k(args) -> int:
    world, obj, start = _scene(args.world)
    x0 = _start(args, start)
    res = adjustable_k(world, obj, args.k0, args.kmax, _flow(args), x0)
    if args.out is not None:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        for j, seg in enumerate(res.segments):
            io.write_trajectory(out / f"segment_{j:03d}_k{seg.k:g}.csv", seg)
    print(json.dumps({
        "verdict": res.verdict.value,
        "k": res.k,
        "k_history": res.k_history,
        "final": res.x.tolist(),
        "final_dist": float(np.linalg.norm(res.x - obj.x_star)),
        "condition_flagged": res.condition_flagged,
    }, indent=2))
    return 0


def cmd_batch(args) -> int:
    scenario = Scenario(args.scenario)
    out = Path(args.out_dir) if args.out_dir else None
    if out is not None:
        out.mkdir(parents=True, exist_ok=True)
    if scenario is Scenario.COUNTEREXAMPLE:
        summary = {}
        for which in COUNTEREXAMPLE_STARTS:
            traj = run_counterexample(which, args.k, lambda_max=args.lambda_max)
            summary[which] = {"verdict": traj.verdict.value, "final": traj.final.tolist(),
                              "critical_kind": traj.critical_kind.value if traj.critical_kind else None}
            if out is not None:
                io.write_trajectory(out / f"{which}.csv", traj)
        print(json.dumps(summary, indent=2))
        if out is not None:
            io.write_json(out / "summary.json", summary)
        return 0
    if scenario in (Scenario.DOUBLE_INTEGRATOR, Scenario.DIFFDRIVE):
        raise InputError(f"use the 'dynamics' command for the {scenario.value} scenario")
    spec = ExperimentSpec(
        scenario=scenario, n=args.n, d=args.d, delta=args.delta, r0=args.r0, k=args.k,
        trials=args.trials, seed=args.seed, c=args.c,
        flow=FlowConfig(max_iters=args.max_iters or FlowConfig().max_iters),
    )
    result = run_violated_batch(spec) if scenario is Scenario.VIOLATED else run_batch(spec)
    summary = result.summary.to_dict()
    print(json.dumps(summary, indent=2))
    if out is not None:
        rows = [r.row() for r in result.records]
        io.write_rows(out / "trials.csv", rows)
        io.write_json(out / "summary.json", summary)
        for r in result.records:
            io.write_trajectory(out / f"trial_{r.trial:04d}.csv", r.trajectory)
            if r.trajectory.discoveries:
                io.write_discoveries(out / f"trial_{r.trial:04d}.discoveries.csv", r.trajectory)
    return 0


def cmd_dynamics(args) -> int:
    if args.world is None:
        scene = DOUBLE_INTEGRATOR_SCENE if args.plant == "double-integrator" else DIFFDRIVE_SCENE
        world, obj, start = scene.world(), scene.objective(), scene.start()
        k = args.k if args.k is not None else scene.k
    else:
        world, obj, start = _scene(args.world)
        k = args.k if args.k is not None else 6.0
    x0 = _start(args, start)
    cfg = PotentialConfig(k)
    sim = SimConfig(dt=args.dt, max_steps=args.steps, goal_tolerance=args.goal_tolerance,
                    record_every=args.record_every)
    if args.plant == "double-integrator":
        traj = double_integrator_sim(world, obj, cfg, args.K, sim, x0)
    else:
        gains = DiffDriveGains(args.kv, args.kw, args.kvd, args.kwd)
        state = DiffDriveState(x0, args.theta0)
        fn = diffdrive_kinematic_sim if args.plant == "diffdrive-kinematic" else diffdrive_dynamic_sim
        traj = fn(world, obj, cfg, gains, sim, state)
    _write_traj(args.out, traj)
    print(json.dumps(_report(traj, obj), indent=2))
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="krnav", description=__doc__.split("\n")[0])
    sub = p.add_subparsers(dest="command", required=True)

    def flow_args(sp):
        sp.add_argument("--eps", type=float, default=None, help="initial step eps0")
        sp.add_argument("--max-iters", type=int, default=None)
        sp.add_argument("--schedule", choices=[s.value for s in StepSchedule], default=None)
        sp.add_argument("--seed", type=int, default=0)
        sp.add_argument("--x0", type=float, nargs="+", default=None, help="start point")

    sp = sub.add_parser("validate", help="check a world file and certify the conditions")
    sp.add_argument("world")
    sp.add_argument("--samples", type=int, default=None, help="boundary samples per obstacle")
    sp.set_defaults(func=cmd_validate)

    sp = sub.add_parser("simulate", help="run a gradient flow")
    sp.add_argument("world")
    sp.add_argument("--k", type=float, default=2.0)
    sp.add_argument("--switched", action="store_true")
    sp.add_argument("--c", type=float, default=1.0, help="sensing constant for --switched")
    sp.add_argument("--out", default=None, help="trajectory CSV")
    flow_args(sp)
    sp.set_defaults(func=cmd_simulate)

    sp = sub.add_parser("batch", help="run a seeded scenario")
    sp.add_argument("scenario", choices=[s.value for s in Scenario])
    sp.add_argument("--n", type=int, default=2)
    sp.add_argument("--d", type=float, default=10.0)
    sp.add_argument("--delta", type=float, default=1.0)
    sp.add_argument("--r0", type=float, default=20.0)
    sp.add_argument("--k", type=float, default=2.0)
    sp.add_argument("--trials", type=int, default=100)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--c", type=float, default=None, help="use the switched controller")
    sp.add_argument("--lambda-max", type=float, default=3.0, help="counterexample eigenvalue")
    sp.add_argument("--max-iters", type=int, default=None)
    sp.add_argument("--out-dir", default=None)
    sp.set_defaults(func=cmd_batch)

    sp = sub.add_parser("adjust-k", help="adjustable-order descent")
    sp.add_argument("world")
    sp.add_argument("--k0", type=float, default=2.0)
    sp.add_argument("--kmax", type=float, default=30.0)
    sp.add_argument("--out", default=None, help="directory for segment CSVs")
    flow_args(sp)
    sp.set_defaults(func=cmd_adjust_k)

    sp = sub.add_parser("dynamics", help="simulate a plant driven by the potential")
    sp.add_argument("plant", choices=["double-integrator", "diffdrive-kinematic", "diffdrive-dynamic"])
    sp.add_argument("world", nargs="?", default=None, help="world file (default: shipped scene)")
    sp.add_argument("--k", type=float, default=None)
    sp.add_argument("--K", type=float, default=5e3, help="double-integrator damping")
    sp.add_argument("--kv", type=float, default=1.0)
    sp.add_argument("--kw", type=float, default=1.0)
    sp.add_argument("--kvd", type=float, default=4.0)
    sp.add_argument("--kwd", type=float, default=10.0)
    sp.add_argument("--dt", type=float, default=1e-4)
    sp.add_argument("--steps", type=int, default=30000)
    sp.add_argument("--theta0", type=float, default=0.0)
    sp.add_argument("--goal-tolerance", type=float, default=1e-2)
    sp.add_argument("--record-every", type=int, default=10)
    sp.add_argument("--x0", type=float, nargs="+", default=None)
    sp.add_argument("--out", default=None)
    sp.set_defaults(func=cmd_dynamics)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except GenerationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_GENERATION
    except (InputError, KRNavError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
